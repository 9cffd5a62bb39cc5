#include "eploop/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "eploop/errors.hpp"
#include "eploop/parallel.hpp"

namespace eploop {

EigenSystem eigensystem(const WalkParams& p) {
    const DCoefficients d = d_coefficients(p);
    const Complex root = coalescence_root(d.D0);
    if (std::abs(root) <= 1e-8) throw TooCloseToEP("|eta - D0| <= 1e-8 in eigensystem");

    EigenSystem es;
    es.eta_minus = d.D0 - root;
    es.eta_plus = d.D0 + root;
    es.lambda_minus = quasienergy_of(es.eta_minus);
    es.lambda_plus = quasienergy_of(es.eta_plus);

    const double r2 = std::numbers::sqrt2;
    for (std::size_t j = 0; j < 4; ++j) {
        const Complex e = es.eta(j) - d.D0;
        const Complex pre = 1.0 / (r2 * e);
        if (j < 2) {
            es.alpha[j] = pre * CVec4{kI * d.DX + kI * d.DY, -d.DZ, 0.0, e};
            // Row vector b with b U = eta b; the ket is its conjugate.
            es.beta[j] = (pre * CVec4{-kI * d.DX + kI * d.DY, d.DZ, 0.0, e}).conj();
        } else {
            es.alpha[j] = pre * CVec4{d.DZ, kI * d.DX - kI * d.DY, e, 0.0};
            es.beta[j] = (pre * CVec4{-d.DZ, -kI * d.DX - kI * d.DY, e, 0.0}).conj();
        }
    }
    return es;
}

std::array<CVec4, 4> unit_norm_states(const EigenSystem& es) {
    std::array<CVec4, 4> out;
    for (std::size_t j = 0; j < 4; ++j) out[j] = es.alpha[j].normalized();
    return out;
}

std::array<std::size_t, 4> bell_partners(const EigenSystem& es) {
    const auto states = unit_norm_states(es);
    std::array<std::array<double, 4>, 4> f{};
    for (BellLabel l : kAllBellLabels)
        for (std::size_t j = 0; j < 4; ++j) f[index_of(l)][j] = pure_fidelity(bell_state(l), states[j]);

    std::array<std::size_t, 4> perm{0, 1, 2, 3}, best = perm;
    double best_score = -1.0;
    do {
        double score = 1.0;
        for (std::size_t i = 0; i < 4; ++i) score = std::min(score, f[i][perm[i]]);
        if (score > best_score) {
            best_score = score;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Complex quasienergy_of(Complex eta) {
    double re = -std::arg(eta);
    if (re <= -std::numbers::pi) re = std::numbers::pi;
    return {re, std::log(std::abs(eta))};
}

Quasienergy quasienergy(const WalkParams& p) {
    const EtaPair e = eta_pair(p);
    return {quasienergy_of(e.plus), quasienergy_of(e.minus)};
}

std::vector<SurfaceSample> riemann_surface(const SurfaceGrid& grid) {
    if (grid.phi_count < 2 || grid.theta1_count < 2) throw DomainError("surface grid needs at least 2 points per axis");
    const std::size_t n = grid.phi_count * grid.theta1_count;
    std::vector<SurfaceSample> out(n);
    const double dphi = (grid.phi_max - grid.phi_min) / static_cast<double>(grid.phi_count - 1);
    const double dth = (grid.theta1_max - grid.theta1_min) / static_cast<double>(grid.theta1_count - 1);
    parallel_for(n, [&](std::size_t idx) {
        const std::size_t i = idx / grid.theta1_count;
        const std::size_t j = idx % grid.theta1_count;
        WalkParams p;
        p.phi = grid.phi_min + dphi * static_cast<double>(i);
        p.theta1 = grid.theta1_min + dth * static_cast<double>(j);
        p.theta2 = grid.theta2;
        p.gamma = grid.gamma;
        p.k = grid.k;
        const Quasienergy q = quasienergy(p);
        out[idx] = SurfaceSample{p.phi, p.theta1, q.lambda_plus, q.lambda_minus};
    });
    return out;
}

void write_surface_csv(std::ostream& os, const std::vector<SurfaceSample>& samples) {
    os << "phi,theta1,re_lp,im_lp,re_lm,im_lm\n";
    char buf[256];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.phi, s.theta1, s.lambda_plus.real(),
                      s.lambda_plus.imag(), s.lambda_minus.real(), s.lambda_minus.imag());
        os << buf;
    }
}

namespace {

WalkParams at(const EpSearchBox& box, double phi, double theta1) {
    WalkParams p;
    p.phi = phi;
    p.theta1 = theta1;
    p.theta2 = box.theta2;
    p.gamma = box.gamma;
    p.k = box.k;
    return p;
}

Complex coalescence(const EpSearchBox& box, double phi, double theta1) {
    const Complex D0 = d_coefficients(at(box, phi, theta1)).D0;
    return D0 * D0 - 1.0;
}

// Signed distance to coalescence along the search line: |D0| - 1 (equal to
// |d0| - 1 on phi = 0 where D0 is real).
double line_residual(const EpSearchBox& box, double phi, double theta1) {
    return std::abs(d_coefficients(at(box, phi, theta1)).D0) - 1.0;
}

EpLocation newton_polish(const EpSearchBox& box, double phi, double theta1) {
    const double h = 1e-7;
    for (int it = 0; it < 20; ++it) {
        const Complex f = coalescence(box, phi, theta1);
        if (std::abs(f) < 1e-14) break;
        const Complex fp = (coalescence(box, phi + h, theta1) - coalescence(box, phi - h, theta1)) / (2.0 * h);
        const Complex ft = (coalescence(box, phi, theta1 + h) - coalescence(box, phi, theta1 - h)) / (2.0 * h);
        // [Re fp, Re ft; Im fp, Im ft] [dphi; dth] = -[Re f; Im f]
        const double a = fp.real(), b = ft.real(), c = fp.imag(), d = ft.imag();
        const double det = a * d - b * c;
        double dphi = 0.0, dth = 0.0;
        if (std::abs(det) > 1e-300) {
            dphi = (-f.real() * d + b * f.imag()) / det;
            dth = (-a * f.imag() + c * f.real()) / det;
        } else if (std::abs(b) > 0.0) {
            dth = -f.real() / b;
        } else {
            break;
        }
        phi += dphi;
        theta1 += dth;
        if (std::abs(dphi) + std::abs(dth) < 1e-16) break;
    }
    return {phi, theta1, std::abs(coalescence(box, phi, theta1))};
}

}  // namespace

std::vector<EpLocation> find_eps(const EpSearchBox& box) {
    if (!(box.theta1_max > box.theta1_min) || box.phi_max < box.phi_min)
        throw DomainError("EP search box is empty");
    const double phi = (box.phi_min <= 0.0 && box.phi_max >= 0.0) ? 0.0 : 0.5 * (box.phi_min + box.phi_max);

    const std::size_t samples = 400;
    const double step = (box.theta1_max - box.theta1_min) / static_cast<double>(samples);
    std::vector<EpLocation> found;
    double lo = box.theta1_min;
    double f_lo = line_residual(box, phi, lo);
    for (std::size_t i = 1; i <= samples; ++i) {
        const double hi = box.theta1_min + step * static_cast<double>(i);
        const double f_hi = line_residual(box, phi, hi);
        if (f_lo == 0.0 || (f_lo < 0.0) != (f_hi < 0.0)) {
            double a = lo, b = hi, fa = f_lo;
            for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = line_residual(box, phi, m);
                if (fm == 0.0) {
                    a = b = m;
                    break;
                }
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            EpLocation ep = newton_polish(box, phi, 0.5 * (a + b));
            if (ep.theta1 < box.theta1_min || ep.theta1 > box.theta1_max || ep.phi < box.phi_min ||
                ep.phi > box.phi_max) {
                ep = {phi, 0.5 * (a + b), std::abs(coalescence(box, phi, 0.5 * (a + b)))};
            }
            found.push_back(ep);
        }
        lo = hi;
        f_lo = f_hi;
    }
    if (found.empty()) throw NoBracket("no sign change of |D0| - 1 in the search box");
    std::sort(found.begin(), found.end(), [](const EpLocation& x, const EpLocation& y) { return x.theta1 < y.theta1; });
    return found;
}

EpLocation find_ep(const EpSearchBox& box) { return find_eps(box).front(); }

}  // namespace eploop
