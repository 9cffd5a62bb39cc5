#include "eploop/walkops.hpp"

#include <cmath>
#include <numbers>

#include "eploop/errors.hpp"

namespace eploop {

WalkParams loop_start_params() {
    WalkParams p;
    p.theta1 = -0.6;
    p.phi = 0.0;
    return p;
}

CMat2 rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return CMat2{c, -s, s, c};
}

CMat2 phase_shift(double k) { return CMat2{std::exp(kI * k), 0.0, 0.0, std::exp(-kI * k)}; }

CMat2 gain_loss(double gamma) { return CMat2{std::exp(gamma), 0.0, 0.0, std::exp(-gamma)}; }

CMat2 gain_loss_inverse(double gamma) { return CMat2{std::exp(-gamma), 0.0, 0.0, std::exp(gamma)}; }

CMat2 symmetry_break(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return CMat2{c, kI * s, kI * s, c};
}

DCoefficients d_coefficients(const WalkParams& p) {
    const double c1 = std::cos(p.theta1), s1 = std::sin(p.theta1);
    const double c2 = std::cos(p.theta2), s2 = std::sin(p.theta2);
    const double c2k = std::cos(2.0 * p.k), s2k = std::sin(2.0 * p.k);
    const double ch = std::cosh(2.0 * p.gamma), sh = std::sinh(2.0 * p.gamma);

    DCoefficients d;
    d.d0 = c2k * c1 * c2 - ch * s1 * s2;
    d.dx = -sh * s2;
    d.dy = -c2 * s1 * c2k - ch * c1 * s2;
    d.dz = c2 * s2k;

    const double cf = std::cos(p.phi), sf = std::sin(p.phi);
    d.D0 = cf * d.d0 + kI * (sf * d.dx);
    d.DX = cf * d.dx + kI * (sf * d.d0);
    d.DY = cf * d.dy + sf * d.dz;
    d.DZ = cf * d.dz - sf * d.dy;
    return d;
}

CMat2 walk_operator_product(const WalkParams& p) {
    const CMat2 half = rotation(p.theta1 / 2.0);
    const CMat2 s = phase_shift(p.k);
    return symmetry_break(p.phi) * half * gain_loss(p.gamma) * s * rotation(p.theta2) * gain_loss_inverse(p.gamma) * s *
           half;
}

CMat2 walk_operator_closed(const WalkParams& p) {
    const DCoefficients d = d_coefficients(p);
    return CMat2{d.D0 + kI * d.DZ, d.DX + d.DY, d.DX - d.DY, d.D0 - kI * d.DZ};
}

CMat4 walk_operator_pair(const WalkParams& p) { return kron(CMat2::identity(), walk_operator_closed(p)); }

CMat4 u_step(const WalkParams& p) {
    const DCoefficients d = d_coefficients(p);
    const Complex D0 = d.D0, DX = d.DX, DY = d.DY, DZ = d.DZ;
    return CMat4{
        D0,                 0.0,                DZ,                 kI * DX + kI * DY,
        0.0,                D0,                 kI * DX - kI * DY,  -DZ,
        -DZ,                -kI * DX - kI * DY, D0,                 0.0,
        kI * DY - kI * DX,  DZ,                 0.0,                D0,
    };
}

Complex coalescence_root(Complex D0) {
    const Complex disc = D0 * D0 - 1.0;
    return std::sqrt(Complex{disc.real() + 0.0, disc.imag() + 0.0});
}

EtaPair eta_pair(const WalkParams& p) {
    const Complex D0 = d_coefficients(p).D0;
    const Complex root = coalescence_root(D0);
    return {D0 - root, D0 + root};
}

namespace {

// Coin eigenvector of M for eigenvalue eta, scaled so its second entry is
// 1/sqrt2. The two algebraically equal ratios are chosen between by the
// larger denominator.
CVec2 coin_eigenvector(const DCoefficients& d, Complex eta) {
    const Complex den_a = eta - d.D0 - kI * d.DZ;
    const Complex den_b = d.DX - d.DY;
    Complex ratio;
    if (std::abs(den_a) >= std::abs(den_b)) {
        ratio = (d.DX + d.DY) / den_a;
    } else {
        ratio = (eta - d.D0 + kI * d.DZ) / den_b;
    }
    const double r = 1.0 / std::numbers::sqrt2;
    return CVec2{ratio * r, r};
}

}  // namespace

ControlOperator control_operator(const WalkParams& p) {
    const DCoefficients d = d_coefficients(p);
    const Complex root = coalescence_root(d.D0);
    const Complex eta_m = d.D0 - root, eta_p = d.D0 + root;
    if (std::abs(root) <= 1e-6) throw TooCloseToEP("|eta - D0| <= 1e-6 in control_operator");

    const double r2 = std::numbers::sqrt2;
    auto upper = [&](Complex eta) {
        const Complex pre = 1.0 / (r2 * (eta - d.D0));
        return pre * CVec4{kI * d.DX + kI * d.DY, -d.DZ, 0.0, eta - d.D0};
    };
    auto lower = [&](Complex eta) {
        const Complex pre = 1.0 / (r2 * (eta - d.D0));
        return pre * CVec4{d.DZ, kI * d.DX - kI * d.DY, eta - d.D0, 0.0};
    };
    const CMat4 a = CMat4::from_columns({upper(eta_m), lower(eta_m), upper(eta_p), lower(eta_p)});

    const CVec2 e0{1.0, 0.0}, e1{0.0, 1.0};
    const CVec2 m_minus = coin_eigenvector(d, eta_m);
    const CVec2 m_plus = coin_eigenvector(d, eta_p);
    const CMat4 b_unit = CMat4::from_columns({kron(e0, m_minus), kron(e1, m_minus), kron(e0, m_plus), kron(e1, m_plus)});

    const double det_a = std::abs(det4(a));
    const double det_b = std::abs(det4(b_unit));
    if (!(det_b > 0.0) || !(det_a > 0.0)) throw SingularMatrix("degenerate eigenbasis in control_operator");
    const Complex scale = std::sqrt(det_a / det_b);
    const CMat4 b = CMat4::from_columns({kron(e0, m_minus), scale * kron(e1, m_minus), kron(e0, m_plus), scale * kron(e1, m_plus)});

    const CMat4 c = a * inverse4(b);
    const CMat4 c_inv = b * inverse4(a);
    return {c, c_inv};
}

}  // namespace eploop
