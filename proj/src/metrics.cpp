#include "eploop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eploop/errors.hpp"

namespace eploop {

std::string to_string(BellLabel l) { return "zeta" + std::to_string(index_of(l) + 1); }

std::optional<BellLabel> parse_bell_label(std::string_view s) {
    for (BellLabel l : kAllBellLabels) {
        if (s == to_string(l)) return l;
    }
    return std::nullopt;
}

CVec4 bell_state(BellLabel l) {
    const double r = 1.0 / std::numbers::sqrt2;
    switch (l) {
        case BellLabel::Zeta1: return CVec4{r, 0.0, 0.0, r};
        case BellLabel::Zeta2: return CVec4{r, 0.0, 0.0, -r};
        case BellLabel::Zeta3: return CVec4{0.0, r, r, 0.0};
        case BellLabel::Zeta4: return CVec4{0.0, r, -r, 0.0};
    }
    return {};
}

DensityMatrix::DensityMatrix(const CMat4& m, Check check) : m_(m) {
    if (!m.all_finite()) throw DomainError("density matrix has non-finite entries");
    if (anti_hermitian_norm(m) > 1e-10) throw DomainError("density matrix is not Hermitian within 1e-10");
    if (std::abs(m.trace() - 1.0) > 1e-10) throw DomainError("density matrix trace differs from 1 by more than 1e-10");
    if (check == Check::Full) {
        const HermitianEigen eig = hermitian_eig4(m);
        if (eig.values[0] < -1e-9) throw DomainError("density matrix has eigenvalue below -1e-9");
    }
}

DensityMatrix DensityMatrix::from_state(const CVec4& state) {
    const CVec4 psi = state.normalized();
    // Exact Hermitian symmetry, so validation never trips on round-off.
    const CMat4 raw = CMat4::outer(psi, psi);
    return DensityMatrix(0.5 * (raw + raw.adjoint()));
}

DensityMatrix DensityMatrix::maximally_mixed() { return DensityMatrix(0.25 * CMat4::identity()); }

double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
    const CMat4 root = psd_sqrt(rho1.matrix());
    const CMat4 inner = root * rho2.matrix() * root;
    const HermitianEigen eig = hermitian_eig4(0.5 * (inner + inner.adjoint()));
    const double floor = eigen_noise_floor(eig);
    double f = 0.0;
    for (double v : eig.values) {
        if (v > floor) f += std::sqrt(v);
    }
    return f;
}

double similarity(const DensityMatrix& rho_theory, const DensityMatrix& rho_measured) {
    return fidelity(rho_theory, rho_measured);
}

double pure_fidelity(const CVec4& psi, const CVec4& phi) { return std::abs(inner(psi, phi)); }

namespace {

Classification pick(const std::array<double, 4>& f) {
    Classification c;
    c.fidelities = f;
    std::size_t best = 0;
    for (std::size_t i = 1; i < 4; ++i) {
        if (f[i] > f[best] + 1e-9) best = i;
    }
    c.label = static_cast<BellLabel>(best);
    for (std::size_t i = 0; i < 4; ++i) {
        if (i != best && std::abs(f[i] - f[best]) < 1e-9) c.tie = true;
    }
    return c;
}

}  // namespace

Classification classify(const CVec4& state) {
    const CVec4 psi = state.normalized();
    std::array<double, 4> f{};
    for (BellLabel l : kAllBellLabels) f[index_of(l)] = pure_fidelity(bell_state(l), psi);
    return pick(f);
}

Classification classify(const DensityMatrix& rho) {
    std::array<double, 4> f{};
    for (BellLabel l : kAllBellLabels) f[index_of(l)] = fidelity(DensityMatrix::from_state(bell_state(l)), rho);
    return pick(f);
}

}  // namespace eploop
