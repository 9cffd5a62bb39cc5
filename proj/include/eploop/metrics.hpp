// metrics.hpp
// Bell states, density matrices, root fidelity and Bell-state classification.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "eploop/smallmat.hpp"

namespace eploop {

enum class BellLabel { Zeta1 = 0, Zeta2 = 1, Zeta3 = 2, Zeta4 = 3 };

inline constexpr std::array<BellLabel, 4> kAllBellLabels{BellLabel::Zeta1, BellLabel::Zeta2, BellLabel::Zeta3,
                                                         BellLabel::Zeta4};

inline std::size_t index_of(BellLabel l) { return static_cast<std::size_t>(l); }

// "zeta1" .. "zeta4"
std::string to_string(BellLabel l);
std::optional<BellLabel> parse_bell_label(std::string_view s);

// zeta1 = (|00> + |11>)/sqrt2, zeta2 = (|00> - |11>)/sqrt2,
// zeta3 = (|01> + |10>)/sqrt2, zeta4 = (|01> - |10>)/sqrt2
CVec4 bell_state(BellLabel l);

// 4x4 Hermitian, unit-trace, positive semidefinite matrix. Construction
// validates: Hermitian within 1e-10, trace 1 within 1e-10, eigenvalues
// >= -1e-9 (the last check can be skipped for raw tomography output).
class DensityMatrix {
public:
    enum class Check { Full, SkipPositivity };

    explicit DensityMatrix(const CMat4& m, Check check = Check::Full);

    static DensityMatrix from_state(const CVec4& state);
    static DensityMatrix maximally_mixed();

    const CMat4& matrix() const { return m_; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

private:
    CMat4 m_;
};

// Root fidelity Tr sqrt( sqrt(rho1) rho2 sqrt(rho1) ).
double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

// Same functional as fidelity, named for theory-vs-measured comparisons.
double similarity(const DensityMatrix& rho_theory, const DensityMatrix& rho_measured);

// |<psi|phi>| for normalized states; equals fidelity of the two projectors.
double pure_fidelity(const CVec4& psi, const CVec4& phi);

struct Classification {
    BellLabel label = BellLabel::Zeta1;
    std::array<double, 4> fidelities{};
    bool tie = false;  // top two fidelities within 1e-9
};

// Fidelity of a normalized state against each Bell state; ties resolve to the
// lowest label index and set the tie flag.
Classification classify(const CVec4& state);
Classification classify(const DensityMatrix& rho);

}  // namespace eploop
