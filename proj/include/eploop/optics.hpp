// optics.hpp
// Waveplate / beam-splitter compilations of the walk operators and of the
// closing control operator, checked by Jones-matrix multiplication.
//
// Angles stored on elements are the Jones-matrix angle theta; the physical
// mount angle is theta / 2.

#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "eploop/metrics.hpp"
#include "eploop/smallmat.hpp"
#include "eploop/walkops.hpp"

namespace eploop {

// HWP(t) = [[cos t, sin t], [sin t, -cos t]]
struct Hwp {
    double theta = 0.0;
};
// QWP(t) = (sqrt2/2) [[1 - i cos t, -i sin t], [-i sin t, 1 + i cos t]]
struct Qwp {
    double theta = 0.0;
};
// Amplitude transmission diag(sqrt tH, sqrt tV).
struct Ppbs {
    double t_h = 1.0;
    double t_v = 1.0;
};
// On one photon: diag(1, e^{i phase}). On Rail::Both: e^{i phase} on the
// |H>_upper |V>_lower component only.
struct PhasePlate {
    double phase = 0.0;
};
struct MirrorSwap {};
// Control on the upper photon.
struct IdealCnot {};

using ElementKind = std::variant<Hwp, Qwp, Ppbs, PhasePlate, MirrorSwap, IdealCnot>;

// Upper is the first qubit, Lower the second (the walking photon).
enum class Rail { Upper, Lower, Both };

struct OpticalElement {
    ElementKind kind;
    Rail rail = Rail::Lower;
};

// Throws DomainError for transmittances outside [0, 1] or non-finite angles.
void validate(const OpticalElement& e);

CMat2 jones(const Hwp& e);
CMat2 jones(const Qwp& e);
CMat2 jones(const Ppbs& e);
CMat2 jones(const PhasePlate& e);
// Single-photon Jones matrix; throws DomainError for two-photon elements.
CMat2 jones(const OpticalElement& e);
// Two-photon matrix of any element; single-photon elements act on their rail
// (Both applies the same plate to both photons, except PhasePlate).
CMat4 jones4(const OpticalElement& e);

extern const CMat4 kSwap;
extern const CMat4 kCnot;

// Elements in the order light meets them, so the matrix is
// scale * global_phase * J_last ... J_first.
struct ElementSequence {
    std::vector<OpticalElement> elements;
    Complex global_phase{1.0, 0.0};
    double scale = 1.0;
};

CMat2 product2(const ElementSequence& s);
CMat4 product4(const ElementSequence& s);

// Max entry deviation after removing the best unit-modulus phase (taken from
// the largest-magnitude entry ratio).
double deviation_up_to_phase(const CMat2& a, const CMat2& b);
double deviation_up_to_phase(const CMat4& a, const CMat4& b);

struct Compiled2 {
    ElementSequence sequence;
    CMat2 target;
    double deviation = 0.0;  // |product - target|_max
};

struct Compiled4 {
    ElementSequence sequence;
    CMat4 target;
    double deviation = 0.0;
    double deviation_tabulated = 0.0;  // against the four-digit reference matrix
};

Compiled2 compile_rotation(double theta);
Compiled2 compile_phase_shift(double k);
Compiled2 compile_symmetry_break(double phi);
// Full step chain psi R(t1/2) G S R(t2) G^-1 S R(t1/2) with G and G^-1
// realised by PPBS losses (tH = 1, tV = e^{-4 gamma}) and an overall gain
// e^{2 gamma}.
Compiled2 compile_walk_operator(const WalkParams& p);

// gamma = (1/4) ln(tH / tV) = (1/2) ln(l1 / l2). Throws DomainError unless
// 0 < tV <= tH <= 1.
double gamma_from_transmittance(double t_h, double t_v);
// tV = tH e^{-4 gamma}; throws DomainError for gamma < 0 or tH outside (0, 1].
Ppbs ppbs_for_gamma(double gamma, double t_h = 1.0);
// diag(l1, l2) with l = sqrt(t).
CMat2 loss_operator(const Ppbs& p);

// Control operator at the loop start point, four significant digits, and its
// inverse.
extern const CMat4 kTabulatedCN;
extern const CMat4 kTabulatedC1Inverse;

// C_N = P * T * CNOT * SWAP with T = T1 (x) T2 = diag(i, x) (x) diag(1, 1/x)
// and P = diag(1, -1, 1, 1) realised as a PhasePlate(pi) on Rail::Both.
// Built from the computed control operator at the start point. Throws
// ConventionMismatch if that operator differs from kTabulatedCN by more than
// 1e-3.
Compiled4 compile_CN(const WalkParams& endpoint = loop_start_params());

// C_1^-1 |zeta> with the computed control operator at the start point (not
// normalized: C_1^-1 is not unitary).
CVec4 prepared_state(BellLabel label, const WalkParams& start = loop_start_params());

// Text format, one element per line, '#' starts a comment:
//   HWP <theta> <mount_deg> [rail]
//   QWP <theta> <mount_deg> [rail]
//   PPBS <tH> <tV> [rail]
//   PHASE <phase> [rail]
//   SWAP
//   CNOT
//   GAIN <scale>
//   GLOBAL_PHASE <re> <im>
// rail is one of upper, lower, both (default lower). A mount angle that does
// not match theta/2 is rejected.
void write_elements(std::ostream& os, const ElementSequence& s);
// Throws ConfigError on malformed lines.
ElementSequence read_elements(std::istream& is);

std::string describe(const OpticalElement& e);

}  // namespace eploop
