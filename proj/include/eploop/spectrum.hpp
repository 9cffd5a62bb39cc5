// spectrum.hpp
// Eigenstructure of the two-photon step operator, quasienergy surfaces over
// (phi, theta1) and exceptional-point search.

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <vector>

#include "eploop/metrics.hpp"
#include "eploop/smallmat.hpp"
#include "eploop/walkops.hpp"

namespace eploop {

// Right eigenstates alpha[j] and left eigenstates beta[j] of u_step(p).
// Index order: 0 -> (upper, eta-), 1 -> (upper, eta+), 2 -> (lower, eta-),
// 3 -> (lower, eta+). beta is stored as a ket, so <beta_i|alpha_j> is
// inner(beta[i], alpha[j]) and equals delta_ij.
struct EigenSystem {
    Complex eta_minus, eta_plus;
    Complex lambda_minus, lambda_plus;
    std::array<CVec4, 4> alpha;
    std::array<CVec4, 4> beta;

    Complex eta(std::size_t j) const { return (j % 2 == 0) ? eta_minus : eta_plus; }
    // Expansion coefficient <beta_j|state>.
    Complex coefficient(std::size_t j, const CVec4& state) const { return inner(beta[j], state); }
};

// Throws TooCloseToEP when |eta -+ D0| <= 1e-8.
EigenSystem eigensystem(const WalkParams& p);

// Right eigenstates rescaled to unit Euclidean norm (display only).
std::array<CVec4, 4> unit_norm_states(const EigenSystem& es);

// Assignment of Bell labels to eigenstate indices maximizing the smallest
// pure fidelity. result[index_of(label)] is the eigenstate index.
std::array<std::size_t, 4> bell_partners(const EigenSystem& es);

struct Quasienergy {
    Complex lambda_plus;
    Complex lambda_minus;
};

// lambda = i Log(eta) with the principal logarithm; Re lambda in (-pi, pi].
Complex quasienergy_of(Complex eta);
Quasienergy quasienergy(const WalkParams& p);

struct SurfaceSample {
    double phi = 0.0;
    double theta1 = 0.0;
    Complex lambda_plus;
    Complex lambda_minus;
};

struct SurfaceGrid {
    double phi_min = -0.3, phi_max = 0.3;
    std::size_t phi_count = 61;
    double theta1_min = -0.7, theta1_max = 0.0;
    std::size_t theta1_count = 71;
    double theta2 = std::numbers::pi / 16.0;
    double gamma = 0.2;
    double k = 0.0;
};

// Samples in phi-major order, theta1 ascending within each phi.
// Throws DomainError if either count is below 2.
std::vector<SurfaceSample> riemann_surface(const SurfaceGrid& grid);

void write_surface_csv(std::ostream& os, const std::vector<SurfaceSample>& samples);

struct EpSearchBox {
    double phi_min = -0.05, phi_max = 0.05;
    double theta1_min = -0.5, theta1_max = -0.1;
    double theta2 = std::numbers::pi / 16.0;
    double gamma = 0.2;
    double k = 0.0;
};

struct EpLocation {
    double phi = 0.0;
    double theta1 = 0.0;
    double residual = 0.0;  // |D0^2 - 1|
};

// Every coalescence point D0^2 = 1 on the search line, ascending in theta1.
// The line is phi = 0 when the box contains it, otherwise the box centre.
// Each root is bracketed by a scan, bisected and then polished by a 2-D
// Newton iteration on D0^2 - 1. Throws NoBracket if the scan finds no sign
// change.
std::vector<EpLocation> find_eps(const EpSearchBox& box);

// First entry of find_eps.
EpLocation find_ep(const EpSearchBox& box);

}  // namespace eploop
