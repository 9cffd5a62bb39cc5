// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eploop/errors.hpp"
#include "eploop/harness.hpp"
#include "eploop/loops.hpp"
#include "eploop/metrics.hpp"
#include "eploop/optics.hpp"
#include "eploop/spectrum.hpp"
#include "eploop/tomo.hpp"
#include "eploop/walkops.hpp"
#include "test_support.hpp"

using namespace eploop;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const std::vector<BellLabel> kInputs{kAllBellLabels.begin(), kAllBellLabels.end()};

// 1
Outcome operator_algebra() {
    std::mt19937_64 rng(1001);
    double worst_form = 0.0, worst_d = 0.0, worst_D = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const WalkParams p = testsupport::random_params(rng);
        const CMat2 a = walk_operator_product(p);
        const CMat2 b = walk_operator_closed(p);
        worst_form = std::max(worst_form, max_abs_diff(a, b) / std::max(1.0, a.max_abs()));
        const DCoefficients d = d_coefficients(p);
        const double scale = std::max(1.0, std::pow(std::cosh(2.0 * p.gamma), 2));
        worst_d = std::max(worst_d, std::abs(d.d0 * d.d0 - d.dx * d.dx + d.dy * d.dy + d.dz * d.dz - 1.0) / scale);
        worst_D = std::max(worst_D, std::abs(d.D0 * d.D0 + d.DZ * d.DZ - d.DX * d.DX + d.DY * d.DY - 1.0) / scale);
    }
    return {worst_form < 1e-12 && worst_d < 1e-12 && worst_D < 1e-12,
            "product vs closed " + fmt("%.2e", worst_form) + ", det(d) " + fmt("%.2e", worst_d) + ", det(D) " +
                fmt("%.2e", worst_D)};
}

// 2
Outcome u_reconstruction() {
    std::mt19937_64 rng(1002);
    double worst = 0.0;
    int checked = 0;
    while (checked < 1000) {
        const WalkParams p = testsupport::random_params(rng);
        ControlOperator co;
        try {
            co = control_operator(p);
        } catch (const NumericalError&) {
            continue;
        }
        ++checked;
        const CMat4 u = u_step(p);
        worst = std::max(worst, max_abs_diff(co.c * walk_operator_pair(p) * co.c_inv, u) / std::max(1.0, u.max_abs()));
    }
    const double c1 = max_abs_diff(control_operator(loop_start_params()).c_inv, kTabulatedC1Inverse);
    return {worst < 1e-8 && c1 < 1e-3, "max |C(IxM)C^-1 - U| " + fmt("%.2e", worst) + ", C1^-1 vs table " + fmt("%.2e", c1)};
}

// 3
Outcome eigenstructure() {
    std::mt19937_64 rng(1003);
    double worst = 0.0;
    int checked = 0;
    while (checked < 1000) {
        const WalkParams p = testsupport::random_params(rng);
        const Complex D0 = d_coefficients(p).D0;
        if (std::abs(std::sqrt(D0 * D0 - 1.0)) < 1e-3) continue;
        ++checked;
        const EigenSystem es = eigensystem(p);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                const double scale = std::max(1.0, es.beta[i].norm() * es.alpha[j].norm());
                worst = std::max(worst, std::abs(inner(es.beta[i], es.alpha[j]) - (i == j ? 1.0 : 0.0)) / scale);
            }
    }
    const EigenSystem es = eigensystem(loop_start_params());
    const auto states = unit_norm_states(es);
    const auto partner = bell_partners(es);
    double lowest = 1.0;
    for (BellLabel l : kAllBellLabels)
        lowest = std::min(lowest, pure_fidelity(bell_state(l), states[partner[index_of(l)]]));
    return {worst < 1e-9 && lowest > 0.97,
            "biorthonormality " + fmt("%.2e", worst) + ", lowest Bell-eigenstate fidelity " + fmt("%.4f", lowest)};
}

// 4
Outcome ep_geometry() {
    const EpLocation ep = find_ep(EpSearchBox{});
    const WalkParams at{ep.theta1, WalkParams{}.theta2, ep.phi, WalkParams{}.gamma, 0.0};
    const Complex D0 = d_coefficients(at).D0;
    const double residual = std::abs(D0 * D0 - 1.0);
    const bool in1 = encloses(loop1_schedule(100, Direction::CCW), ep.phi, ep.theta1);
    const bool in2 = encloses(loop2_schedule(100, Direction::CCW), ep.phi, ep.theta1);
    return {residual < 1e-10 && in1 && !in2, "EP at (" + fmt("%.4f", ep.phi) + ", " + fmt("%.4f", ep.theta1) +
                                                 "), |D0^2-1| " + fmt("%.1e", residual) +
                                                 (in1 ? ", inside loop 1" : ", outside loop 1") +
                                                 (in2 ? ", inside loop 2" : ", outside loop 2")};
}

// 5
Outcome chirality_table() {
    struct Want {
        Direction dir;
        BellLabel in, out;
        double f;  // 0 = threshold check only
    };
    const Want wants[] = {
        {Direction::CW, BellLabel::Zeta1, BellLabel::Zeta2, 0.983},  {Direction::CW, BellLabel::Zeta2, BellLabel::Zeta2, 0.964},
        {Direction::CW, BellLabel::Zeta3, BellLabel::Zeta3, 0.964},  {Direction::CW, BellLabel::Zeta4, BellLabel::Zeta3, 0.983},
        {Direction::CCW, BellLabel::Zeta1, BellLabel::Zeta1, 0.0},   {Direction::CCW, BellLabel::Zeta2, BellLabel::Zeta1, 0.0},
        {Direction::CCW, BellLabel::Zeta3, BellLabel::Zeta4, 0.0},   {Direction::CCW, BellLabel::Zeta4, BellLabel::Zeta4, 0.0},
    };
    bool ok = true;
    double slowest = 0.0;
    std::string detail;
    for (const Want& w : wants) {
        const LoopSchedule s = loop1_schedule(100, w.dir);
        const auto t0 = std::chrono::steady_clock::now();
        const EvolutionReport r = evolve(s, w.in, Engine::Full);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        const double f = r.fidelities[index_of(w.out)];
        const bool label_ok = r.classified == w.out;
        const bool f_ok = w.f > 0.0 ? std::abs(f - w.f) <= 0.005 : f > 0.95;
        if (!(label_ok && f_ok)) {
            ok = false;
            detail += " " + to_string(w.dir) + " " + to_string(w.in) + "->" + to_string(r.classified) + " F " +
                      fmt("%.4f", f) + (w.f > 0.0 ? " (want " + fmt("%.3f", w.f) + ")" : "") + ";";
        }
    }
    ok = ok && slowest < 0.1;
    return {ok, (detail.empty() ? std::string("all 8 cases match") : "mismatch:" + detail) + " slowest case " +
                    fmt("%.1f", slowest * 1e3) + " ms"};
}

// 6
Outcome loop2_no_chirality() {
    const auto cw = evolve_bell_inputs(loop2_schedule(100, Direction::CW), Engine::Full);
    const auto ccw = evolve_bell_inputs(loop2_schedule(100, Direction::CCW), Engine::Full);
    std::size_t same = 0;
    for (std::size_t i = 0; i < 4; ++i) same += cw[i].classified == ccw[i].classified ? 1 : 0;
    return {same == 4, std::to_string(same) + "/4 inputs give the same output in both directions"};
}

// 7
Outcome simplification() {
    double drift = 0.0, gap = 0.0;
    std::size_t agree = 0;
    for (Direction d : {Direction::CW, Direction::CCW}) {
        const LoopSchedule s = loop1_schedule(100, d);
        drift = std::max(drift, control_drift(s).global_max);
        const auto full = evolve_bell_inputs(s, Engine::Full);
        const auto simp = evolve_bell_inputs(s, Engine::Simplified);
        for (std::size_t i = 0; i < 4; ++i) {
            agree += full[i].classified == simp[i].classified ? 1 : 0;
            const std::size_t k = index_of(full[i].classified);
            gap = std::max(gap, std::abs(full[i].fidelities[k] - simp[i].fidelities[k]));
        }
    }
    return {agree == 8 && gap < 0.01, "drift " + fmt("%.4f", drift) + ", classification agrees " +
                                          std::to_string(agree) + "/8, max fidelity gap " + fmt("%.4f", gap) +
                                          " (limit 0.01)"};
}

// Mean Im(lambda) = ln|eta| along the loop for the sheet that starts on the
// eta+ branch (A) or the eta- branch (B), continued by nearest eigenvalue.
double mean_gain(const LoopSchedule& s, bool sheet_a) {
    Complex prev;
    double sum = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        const EtaPair e = eta_pair(s.steps[n]);
        Complex cur;
        if (n == 0) {
            cur = sheet_a ? e.plus : e.minus;
        } else {
            cur = std::abs(e.plus - prev) <= std::abs(e.minus - prev) ? e.plus : e.minus;
        }
        sum += std::log(std::abs(cur));
        prev = cur;
    }
    return sum / static_cast<double>(s.size());
}

// 8
Outcome sheet_tracking() {
    bool ok = true;
    std::string detail;
    for (Direction d : {Direction::CW, Direction::CCW}) {
        const LoopSchedule s = loop1_schedule(100, d);
        const auto reports = evolve_bell_inputs(s, Engine::Full);
        const bool a_gains = mean_gain(s, true) > mean_gain(s, false);
        detail += to_string(d) + ":";
        for (BellLabel l : kAllBellLabels) {
            const SheetTrace tr = sheet_trace(reports[index_of(l)]);
            const bool gain = (tr.dominant.front() == Sheet::A) == a_gains;
            ok = ok && (gain ? tr.switches == 0 : tr.switches >= 1);
            detail += " " + to_string(l) + (gain ? "(gain)=" : "(loss)=") + std::to_string(tr.switches);
        }
        detail += "; ";
    }
    return {ok, detail + "switches per run"};
}

// 9
Outcome tomography() {
    std::mt19937_64 rng(1009);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const DensityMatrix rho(testsupport::random_density(rng));
        worst = std::max(worst, max_abs_diff(reconstruct_from_probabilities(probabilities(rho), false).matrix(), rho.matrix()));
    }
    double lowest_median = 1.0;
    for (Direction d : {Direction::CW, Direction::CCW}) {
        for (const auto& r : evolve_bell_inputs(loop1_schedule(100, d), Engine::Full, {false, true})) {
            std::vector<double> f;
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                TomoConfig cfg;
                cfg.seed = seed;
                f.push_back(fidelity(r.output_density, reconstruct(simulate_counts(r.output_density, cfg), cfg)));
            }
            std::nth_element(f.begin(), f.begin() + 50, f.end());
            lowest_median = std::min(lowest_median, f[50]);
        }
    }
    return {worst < 1e-10 && lowest_median > 0.99,
            "exact round trip " + fmt("%.2e", worst) + ", lowest median fidelity at 1e4 counts " + fmt("%.4f", lowest_median)};
}

// 10
Outcome optics() {
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const double a = u(rng);
        const Compiled2 cs[] = {compile_rotation(a), compile_phase_shift(a), compile_symmetry_break(a)};
        for (const auto& c : cs) worst = std::max(worst, deviation_up_to_phase(product2(c.sequence), c.target));
    }
    const Compiled4 cn = compile_CN();
    const double g = gamma_from_transmittance(1.0, 0.45);
    return {worst < 1e-12 && cn.deviation_tabulated < 1e-3 && std::abs(g - 0.1996) <= 1e-4,
            "single factors " + fmt("%.1e", worst) + ", C_N vs table " + fmt("%.1e", cn.deviation_tabulated) +
                ", gamma(1, 0.45) " + fmt("%.4f", g)};
}

// 11
Outcome disorder() {
    const DisorderSummary s = disorder_run({loop1_schedule(100, Direction::CW), loop1_schedule(100, Direction::CCW)},
                                           kInputs, DisorderConfig{});
    return {s.unchanged_fraction() >= 0.95 && s.max_drop() < 0.03,
            "unchanged " + std::to_string(s.unchanged()) + "/" + std::to_string(s.draws()) + ", max mean drop " +
                fmt("%.4f", s.max_drop())};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 12
Outcome determinism() {
    const auto root = std::filesystem::temp_directory_path() / "eploop_acceptance";
    std::filesystem::remove_all(root);
    RunConfig cfg;
    cfg.tomo.seed = 42;
    cfg.disorder_cfg.seed = 42;
    std::size_t files = 0, identical = 0;
    for (Figure f : {Figure::Fig2, Figure::Fig4, Figure::Fig5}) {
        cfg.output_dir = root / "a";
        const FigureOutput a = reproduce_figure(f, cfg);
        cfg.output_dir = root / "b";
        const FigureOutput b = reproduce_figure(f, cfg);
        for (std::size_t i = 0; i < a.files.size() && i < b.files.size(); ++i) {
            ++files;
            identical += slurp(a.files[i]) == slurp(b.files[i]) ? 1 : 0;
        }
        files += a.files.size() > b.files.size() ? a.files.size() - b.files.size() : b.files.size() - a.files.size();
    }
    std::filesystem::remove_all(root);
    return {files > 0 && identical == files, std::to_string(identical) + "/" + std::to_string(files) + " report files byte-identical"};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"operator algebra", operator_algebra},
        {"U_n reconstruction", u_reconstruction},
        {"eigenstructure", eigenstructure},
        {"EP geometry", ep_geometry},
        {"chirality table, loop 1", chirality_table},
        {"loop 2 direction independence", loop2_no_chirality},
        {"simplified engine validity", simplification},
        {"sheet tracking", sheet_tracking},
        {"tomography round trip", tomography},
        {"optics compilation", optics},
        {"disorder robustness", disorder},
        {"determinism", determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    }
    std::printf("%d of %d criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
