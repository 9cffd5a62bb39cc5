// tomo.hpp
// Two-photon polarization tomography: projective counts over the 16 product
// bases {H, V, D, R} x {H, V, D, R}, Poisson noise, linear-inversion
// reconstruction and a parametric bootstrap.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "eploop/metrics.hpp"
#include "eploop/smallmat.hpp"

namespace eploop {

// H = |0>, V = |1>, D = (H + V)/sqrt2, R = (H - iV)/sqrt2.
enum class PolBasis { H = 0, V = 1, D = 2, R = 3 };

char to_char(PolBasis b);
std::optional<PolBasis> parse_pol_basis(std::string_view s);
CVec2 pol_state(PolBasis b);

struct BasisPair {
    PolBasis a = PolBasis::H;
    PolBasis b = PolBasis::H;
    bool operator==(const BasisPair&) const = default;
};

// Row-major over (a, b): HH, HV, HD, HR, VH, ...
std::array<BasisPair, 16> basis_pairs();
std::array<CMat4, 16> basis_projectors();

// Linear map from Pauli coefficients r_ij (rho = 1/4 sum r_ij s_i x s_j,
// index 4i + j) to the 16 probabilities, and its inverse.
using Mat16 = std::array<std::array<double, 16>, 16>;
Mat16 measurement_matrix();
Mat16 measurement_matrix_inverse();
// Infinity-norm condition number of measurement_matrix().
double measurement_condition_number();

std::array<double, 16> probabilities(const DensityMatrix& rho);

// Nearest: the closest unit-trace PSD matrix in Frobenius norm (negative
// eigenvalues clipped to 0, their weight removed evenly from the rest).
// ClipRenormalize: clip at 0, then divide by the new trace.
enum class PsdMethod { Nearest, ClipRenormalize };

struct TomoConfig {
    std::uint64_t counts_per_basis = 10000;
    std::uint64_t seed = 1;
    bool psd_projection = true;
    PsdMethod psd_method = PsdMethod::Nearest;
};

struct CountRecord {
    BasisPair basis;
    std::uint64_t count = 0;
};

struct CountsTable {
    std::array<CountRecord, 16> records{};
};

// count ~ Poisson(counts_per_basis * p), deterministic for a given seed.
CountsTable simulate_counts(const DensityMatrix& rho, const TomoConfig& cfg);
// Noise-free counts: counts_per_basis * p rounded to the nearest integer.
CountsTable expected_counts(const DensityMatrix& rho, const TomoConfig& cfg);

// Linear inversion of per-basis frequencies, Hermitized and rescaled to unit
// trace, then projected onto PSD matrices unless projection is off (in
// which case positivity is not enforced). Throws IllConditioned if the
// inversion residual exceeds 1e-8.
DensityMatrix reconstruct_from_probabilities(const std::array<double, 16>& p, bool psd_projection,
                                             PsdMethod method = PsdMethod::Nearest);
DensityMatrix reconstruct(const CountsTable& counts, const TomoConfig& cfg);

struct BootstrapSummary {
    std::array<double, 4> bell_fidelity_mean{};
    std::array<double, 4> bell_fidelity_sd{};
    std::optional<double> reference_fidelity_mean;
    std::optional<double> reference_fidelity_sd;
};

// Parametric bootstrap: each resample i draws count' ~ Poisson(count) with
// seed cfg.seed + i, is reconstructed with PSD projection, and scored against
// the Bell states (and the optional reference). Throws DomainError if
// resamples < 2.
BootstrapSummary bootstrap_error(const CountsTable& counts, const TomoConfig& cfg, std::size_t resamples,
                                 const std::optional<DensityMatrix>& reference = std::nullopt);

// CSV with header basis_a,basis_b,count.
void write_counts_csv(std::ostream& os, const CountsTable& counts);
// Throws ConfigError on malformed input or missing bases.
CountsTable read_counts_csv(std::istream& is);

}  // namespace eploop
