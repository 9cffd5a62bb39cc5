#include "eploop/optics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "eploop/errors.hpp"

namespace eploop {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

OpticalElement on(ElementKind k, Rail r = Rail::Lower) { return OpticalElement{k, r}; }

void append(std::vector<OpticalElement>& out, const std::vector<OpticalElement>& more) {
    out.insert(out.end(), more.begin(), more.end());
}

// Application order of the three factor families.
std::vector<OpticalElement> rotation_elements(double theta) { return {on(Hwp{0.0}), on(Hwp{theta})}; }
std::vector<OpticalElement> phase_shift_elements(double k) {
    return {on(Qwp{kPi / 2}), on(Hwp{kPi / 2 - k}), on(Qwp{kPi / 2})};
}
std::vector<OpticalElement> symmetry_break_elements(double phi) { return {on(Qwp{0.0}), on(Hwp{phi}), on(Qwp{0.0})}; }
std::vector<OpticalElement> inverse_loss_elements(const Ppbs& p) { return {on(Hwp{kPi / 2}), on(p), on(Hwp{kPi / 2})}; }

template <std::size_t N>
double deviation_impl(const Matrix<N>& a, const Matrix<N>& b) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < N * N; ++i)
        if (std::abs(b.data()[i]) > std::abs(b.data()[best])) best = i;
    Complex phase{1.0, 0.0};
    if (std::abs(a.data()[best]) > 0.0 && std::abs(b.data()[best]) > 0.0) {
        const Complex r = b.data()[best] / a.data()[best];
        phase = r / std::abs(r);
    }
    return max_abs_diff(phase * a, b);
}

}  // namespace

const CMat4 kSwap{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
const CMat4 kCnot{1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0};

const CMat4 kTabulatedCN{
    kI,  0.0, 0.0,          0.0,     //
    0.0, 0.0, -1.2389 * kI, 0.0,     //
    0.0, 0.0, 0.0,          0.8071,  //
    0.0, 1.0, 0.0,          0.0,
};
const CMat4 kTabulatedC1Inverse{
    -kI, 0.0,          0.0,    0.0,  //
    0.0, 0.0,          0.0,    1.0,  //
    0.0, 0.8071 * kI,  0.0,    0.0,  //
    0.0, 0.0,          1.2389, 0.0,
};

void validate(const OpticalElement& e) {
    std::visit(overloaded{
                   [](const Hwp& h) {
                       if (!std::isfinite(h.theta)) throw DomainError("HWP angle must be finite");
                   },
                   [](const Qwp& q) {
                       if (!std::isfinite(q.theta)) throw DomainError("QWP angle must be finite");
                   },
                   [](const Ppbs& p) {
                       if (!(p.t_h >= 0.0 && p.t_h <= 1.0 && p.t_v >= 0.0 && p.t_v <= 1.0))
                           throw DomainError("PPBS transmittances must lie in [0, 1]");
                   },
                   [](const PhasePlate& p) {
                       if (!std::isfinite(p.phase)) throw DomainError("phase must be finite");
                   },
                   [](const MirrorSwap&) {},
                   [](const IdealCnot&) {},
               },
               e.kind);
}

CMat2 jones(const Hwp& e) {
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    return CMat2{c, s, s, -c};
}

CMat2 jones(const Qwp& e) {
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    const double r = std::numbers::sqrt2 / 2.0;
    return CMat2{r * (1.0 - kI * c), r * (-kI * s), r * (-kI * s), r * (1.0 + kI * c)};
}

CMat2 jones(const Ppbs& e) { return CMat2{std::sqrt(e.t_h), 0.0, 0.0, std::sqrt(e.t_v)}; }

CMat2 jones(const PhasePlate& e) { return CMat2{1.0, 0.0, 0.0, std::exp(kI * e.phase)}; }

CMat2 jones(const OpticalElement& e) {
    validate(e);
    return std::visit(overloaded{
                          [](const Hwp& h) { return jones(h); },
                          [](const Qwp& q) { return jones(q); },
                          [](const Ppbs& p) { return jones(p); },
                          [](const PhasePlate& p) { return jones(p); },
                          [](const MirrorSwap&) -> CMat2 { throw DomainError("SWAP acts on two photons"); },
                          [](const IdealCnot&) -> CMat2 { throw DomainError("CNOT acts on two photons"); },
                      },
                      e.kind);
}

CMat4 jones4(const OpticalElement& e) {
    validate(e);
    if (std::holds_alternative<MirrorSwap>(e.kind)) return kSwap;
    if (std::holds_alternative<IdealCnot>(e.kind)) return kCnot;
    if (const auto* p = std::get_if<PhasePlate>(&e.kind); p && e.rail == Rail::Both) {
        return CMat4::diagonal({1.0, std::exp(kI * p->phase), 1.0, 1.0});
    }
    const CMat2 j = jones(e);
    switch (e.rail) {
        case Rail::Upper: return kron(j, CMat2::identity());
        case Rail::Lower: return kron(CMat2::identity(), j);
        case Rail::Both: return kron(j, j);
    }
    return CMat4::identity();
}

CMat2 product2(const ElementSequence& s) {
    CMat2 m = CMat2::identity();
    for (const auto& e : s.elements) m = jones(e) * m;
    return (s.scale * s.global_phase) * m;
}

CMat4 product4(const ElementSequence& s) {
    CMat4 m = CMat4::identity();
    for (const auto& e : s.elements) m = jones4(e) * m;
    return (s.scale * s.global_phase) * m;
}

double deviation_up_to_phase(const CMat2& a, const CMat2& b) { return deviation_impl(a, b); }
double deviation_up_to_phase(const CMat4& a, const CMat4& b) { return deviation_impl(a, b); }

namespace {

Compiled2 finish(ElementSequence seq, const CMat2& target) {
    Compiled2 c{std::move(seq), target, 0.0};
    c.deviation = max_abs_diff(product2(c.sequence), target);
    return c;
}

}  // namespace

Compiled2 compile_rotation(double theta) { return finish({rotation_elements(theta), {1.0, 0.0}, 1.0}, rotation(theta)); }

Compiled2 compile_phase_shift(double k) { return finish({phase_shift_elements(k), kI, 1.0}, phase_shift(k)); }

Compiled2 compile_symmetry_break(double phi) {
    return finish({symmetry_break_elements(phi), kI, 1.0}, symmetry_break(phi));
}

Compiled2 compile_walk_operator(const WalkParams& p) {
    const Ppbs loss = ppbs_for_gamma(std::abs(p.gamma));
    std::vector<OpticalElement> gain, gain_inv;
    // For negative gamma the roles of the plain and sandwiched PPBS swap.
    if (p.gamma >= 0.0) {
        gain = {on(loss)};
        gain_inv = inverse_loss_elements(loss);
    } else {
        gain = inverse_loss_elements(loss);
        gain_inv = {on(loss)};
    }

    std::vector<OpticalElement> els;
    append(els, rotation_elements(p.theta1 / 2));
    append(els, phase_shift_elements(p.k));
    append(els, gain_inv);
    append(els, rotation_elements(p.theta2));
    append(els, phase_shift_elements(p.k));
    append(els, gain);
    append(els, rotation_elements(p.theta1 / 2));
    append(els, symmetry_break_elements(p.phi));
    // Each L or L' equals e^{-gamma} G^{+-1} for tH = 1; the three
    // waveplate groups contribute i^3.
    const double scale = std::exp(2.0 * std::abs(p.gamma));
    return finish({els, -kI, scale}, walk_operator_product(p));
}

double gamma_from_transmittance(double t_h, double t_v) {
    if (!(t_v > 0.0) || !(t_h >= t_v) || t_h > 1.0) throw DomainError("need 0 < tV <= tH <= 1");
    return 0.25 * std::log(t_h / t_v);
}

Ppbs ppbs_for_gamma(double gamma, double t_h) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be finite and non-negative");
    if (!(t_h > 0.0) || t_h > 1.0) throw DomainError("tH must lie in (0, 1]");
    return Ppbs{t_h, t_h * std::exp(-4.0 * gamma)};
}

CMat2 loss_operator(const Ppbs& p) { return jones(p); }

Compiled4 compile_CN(const WalkParams& endpoint) {
    const CMat4 cn = control_operator(endpoint).c;
    const double tab = max_abs_diff(cn, kTabulatedCN);
    if (tab > 1e-3) throw ConventionMismatch("computed C_N differs from the tabulated matrix by " + std::to_string(tab));

    const double x = std::abs(cn(2, 3));
    // T1 = diag(i, x) = e^{i pi/4} QWP(pi) PPBS(1, x^2)
    // T2 = diag(1, 1/x) = (1/x) HWP(pi/2) PPBS(1, x^2) HWP(pi/2)
    const Ppbs filter{1.0, x * x};
    ElementSequence seq;
    seq.elements = {
        on(MirrorSwap{}, Rail::Both),
        on(IdealCnot{}, Rail::Both),
        on(filter, Rail::Upper),
        on(Qwp{kPi}, Rail::Upper),
        on(Hwp{kPi / 2}, Rail::Lower),
        on(filter, Rail::Lower),
        on(Hwp{kPi / 2}, Rail::Lower),
        on(PhasePlate{kPi}, Rail::Both),
    };
    seq.global_phase = std::exp(kI * (kPi / 4));
    seq.scale = 1.0 / x;

    Compiled4 c{seq, cn, 0.0, 0.0};
    const CMat4 prod = product4(seq);
    c.deviation = max_abs_diff(prod, cn);
    c.deviation_tabulated = max_abs_diff(prod, kTabulatedCN);
    return c;
}

CVec4 prepared_state(BellLabel label, const WalkParams& start) { return control_operator(start).c_inv * bell_state(label); }

namespace {

std::string rail_token(Rail r) {
    switch (r) {
        case Rail::Upper: return "upper";
        case Rail::Lower: return "lower";
        case Rail::Both: return "both";
    }
    return "lower";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double mount_deg(double theta) { return theta / 2.0 * 180.0 / kPi; }

}  // namespace

std::string describe(const OpticalElement& e) {
    const std::string rail = " " + rail_token(e.rail);
    return std::visit(overloaded{
                          [&](const Hwp& h) { return "HWP " + fmt_full(h.theta) + " " + fmt(mount_deg(h.theta)) + rail; },
                          [&](const Qwp& q) { return "QWP " + fmt_full(q.theta) + " " + fmt(mount_deg(q.theta)) + rail; },
                          [&](const Ppbs& p) { return "PPBS " + fmt_full(p.t_h) + " " + fmt_full(p.t_v) + rail; },
                          [&](const PhasePlate& p) { return "PHASE " + fmt_full(p.phase) + rail; },
                          [](const MirrorSwap&) { return std::string("SWAP"); },
                          [](const IdealCnot&) { return std::string("CNOT"); },
                      },
                      e.kind);
}

void write_elements(std::ostream& os, const ElementSequence& s) {
    os << "# element  value(s)  mount_deg  rail; listed in the order light meets them\n";
    os << "GAIN " << fmt_full(s.scale) << "\n";
    os << "GLOBAL_PHASE " << fmt_full(s.global_phase.real() + 0.0) << " " << fmt_full(s.global_phase.imag() + 0.0) << "\n";
    for (const auto& e : s.elements) os << describe(e) << "\n";
}

ElementSequence read_elements(std::istream& is) {
    ElementSequence seq;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) { throw ConfigError("element list line " + std::to_string(lineno) + ": " + why); };
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream in(line);
        std::vector<std::string> tok;
        for (std::string t; in >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        auto number = [&](std::size_t i) {
            if (i >= tok.size()) fail("missing value");
            try {
                std::size_t used = 0;
                const double v = std::stod(tok[i], &used);
                if (used != tok[i].size()) fail("bad number '" + tok[i] + "'");
                return v;
            } catch (const std::logic_error&) {
                fail("bad number '" + tok[i] + "'");
            }
            return 0.0;
        };
        auto rail_at = [&](std::size_t i) {
            if (i >= tok.size()) return Rail::Lower;
            if (i + 1 < tok.size()) fail("too many fields");
            if (tok[i] == "upper") return Rail::Upper;
            if (tok[i] == "lower") return Rail::Lower;
            if (tok[i] == "both") return Rail::Both;
            fail("unknown rail '" + tok[i] + "'");
            return Rail::Lower;
        };
        auto plate = [&](auto make) {
            const double theta = number(1);
            std::size_t next = 2;
            if (tok.size() > 2 && tok[2] != "upper" && tok[2] != "lower" && tok[2] != "both") {
                if (std::abs(number(2) - mount_deg(theta)) > 5e-6) fail("mount angle does not match theta/2");
                next = 3;
            }
            return OpticalElement{make(theta), rail_at(next)};
        };

        const std::string& kind = tok[0];
        OpticalElement e;
        if (kind == "HWP") {
            e = plate([](double t) { return ElementKind{Hwp{t}}; });
        } else if (kind == "QWP") {
            e = plate([](double t) { return ElementKind{Qwp{t}}; });
        } else if (kind == "PPBS") {
            e = OpticalElement{Ppbs{number(1), number(2)}, rail_at(3)};
        } else if (kind == "PHASE") {
            e = OpticalElement{PhasePlate{number(1)}, rail_at(2)};
        } else if (kind == "SWAP" || kind == "CNOT") {
            if (tok.size() > 1 && !(tok.size() == 2 && tok[1] == "both")) fail("unexpected fields");
            e = kind == "SWAP" ? OpticalElement{MirrorSwap{}, Rail::Both} : OpticalElement{IdealCnot{}, Rail::Both};
        } else if (kind == "GAIN") {
            seq.scale = number(1);
            continue;
        } else if (kind == "GLOBAL_PHASE") {
            seq.global_phase = Complex{number(1), number(2)};
            continue;
        } else {
            fail("unknown element '" + kind + "'");
        }
        try {
            validate(e);
        } catch (const DomainError& err) {
            fail(err.what());
        }
        seq.elements.push_back(e);
    }
    return seq;
}

}  // namespace eploop
