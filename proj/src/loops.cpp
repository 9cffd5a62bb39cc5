#include "eploop/loops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "eploop/errors.hpp"
#include "eploop/parallel.hpp"
#include "eploop/spectrum.hpp"

namespace eploop {

std::string to_string(Direction d) { return d == Direction::CW ? "CW" : "CCW"; }

std::optional<Direction> parse_direction(std::string_view s) {
    if (s == "CW" || s == "cw") return Direction::CW;
    if (s == "CCW" || s == "ccw") return Direction::CCW;
    return std::nullopt;
}

std::string to_string(Engine e) { return e == Engine::Full ? "full" : "simplified"; }

std::optional<Engine> parse_engine(std::string_view s) {
    if (s == "full") return Engine::Full;
    if (s == "simplified") return Engine::Simplified;
    return std::nullopt;
}

LoopSchedule schedule_from_phases(const std::vector<double>& phases, const LoopGeometry& geometry, Direction dir,
                                  std::string label, const WalkParams& base) {
    if (phases.empty()) throw DomainError("loop schedule needs at least one step");
    const double sign = dir == Direction::CCW ? 1.0 : -1.0;
    LoopSchedule s;
    s.direction = dir;
    s.label = std::move(label);
    s.steps.reserve(phases.size());
    for (double t : phases) {
        const double a = sign * t - std::numbers::pi / 2.0;
        WalkParams p = base;
        p.phi = geometry.radius * std::cos(a);
        p.theta1 = geometry.radius * std::sin(a) + geometry.centre_theta1;
        s.steps.push_back(p);
    }
    return s;
}

LoopSchedule circle_schedule(std::size_t n, const LoopGeometry& geometry, Direction dir, std::string label,
                             const WalkParams& base) {
    if (n == 0) throw DomainError("loop schedule needs N >= 1");
    std::vector<double> phases(n);
    for (std::size_t i = 0; i < n; ++i) phases[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    return schedule_from_phases(phases, geometry, dir, std::move(label), base);
}

LoopSchedule loop1_schedule(std::size_t n, Direction dir) { return circle_schedule(n, kLoop1, dir, "loop1"); }

LoopSchedule loop2_schedule(std::size_t n, Direction dir) { return circle_schedule(n, kLoop2, dir, "loop2"); }

LoopSchedule reversed(const LoopSchedule& s) {
    LoopSchedule r = s;
    if (r.steps.size() > 2) std::reverse(r.steps.begin() + 1, r.steps.end());
    r.direction = s.direction == Direction::CW ? Direction::CCW : Direction::CW;
    return r;
}

bool encloses(const LoopSchedule& s, double phi, double theta1) {
    bool inside = false;
    const std::size_t n = s.steps.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = s.steps[i].phi, yi = s.steps[i].theta1;
        const double xj = s.steps[j].phi, yj = s.steps[j].theta1;
        if ((yi > theta1) != (yj > theta1) && phi < (xj - xi) * (theta1 - yi) / (yj - yi) + xi) inside = !inside;
    }
    return inside;
}

namespace {

StepRecord make_record(std::size_t index, const WalkParams& p, const CVec4& frame_state, double log_magnitude) {
    StepRecord r;
    r.index = index;
    r.params = p;
    r.log_magnitude = log_magnitude;
    const EigenSystem es = eigensystem(p);
    double total = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        r.weights_raw[j] = std::norm(es.coefficient(j, frame_state));
        total += r.weights_raw[j];
    }
    for (std::size_t j = 0; j < 4; ++j) r.weights[j] = total > 0.0 ? r.weights_raw[j] / total : 0.0;
    return r;
}

double absorb_norm(CVec4& state) {
    const double nrm = state.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NonFinite("state norm left the representable range");
    state = Complex{1.0 / nrm} * state;
    return std::log(nrm);
}

}  // namespace

EvolutionReport evolve(const LoopSchedule& schedule, const CVec4& input, Engine engine, const EvolveOptions& opts) {
    if (schedule.steps.empty()) throw DomainError("empty loop schedule");
    if (!input.all_finite() || !(input.norm() > 0.0)) throw DomainError("input state must be finite and non-zero");

    EvolutionReport rep;
    rep.direction = schedule.direction;
    rep.n = schedule.steps.size();
    rep.loop = schedule.label;
    rep.engine = engine;

    CVec4 state = input.normalized();
    double logmag = 0.0;
    std::optional<ControlOperator> ends;
    if (engine == Engine::Simplified) {
        ends = control_operator(schedule.steps.front());
        if (!opts.prepared_input) state = ends->c_inv * state;
    }
    if (opts.record_steps) rep.steps.reserve(schedule.steps.size());

    for (std::size_t n = 0; n < schedule.steps.size(); ++n) {
        const WalkParams& p = schedule.steps[n];
        state = (engine == Engine::Full ? u_step(p) : walk_operator_pair(p)) * state;
        if (opts.renormalize) logmag += absorb_norm(state);
        if (opts.record_steps) {
            const CVec4 frame = engine == Engine::Full ? state : control_operator(p).c * state;
            rep.steps.push_back(make_record(n, p, frame, logmag));
        }
    }
    if (ends) state = ends->c * state;
    logmag += absorb_norm(state);

    rep.log_magnitude = logmag;
    rep.output_state = state;
    rep.output_density = DensityMatrix::from_state(state);
    const Classification c = classify(state);
    rep.fidelities = c.fidelities;
    rep.classified = c.label;
    rep.tie = c.tie;
    return rep;
}

EvolutionReport evolve_full(const LoopSchedule& schedule, const CVec4& input, const EvolveOptions& opts) {
    return evolve(schedule, input, Engine::Full, opts);
}

EvolutionReport evolve_simplified(const LoopSchedule& schedule, const CVec4& input, const EvolveOptions& opts) {
    return evolve(schedule, input, Engine::Simplified, opts);
}

EvolutionReport evolve(const LoopSchedule& schedule, BellLabel input, Engine engine, const EvolveOptions& opts) {
    EvolutionReport rep = evolve(schedule, bell_state(input), engine, opts);
    rep.input = input;
    return rep;
}

std::vector<EvolutionReport> evolve_bell_inputs(const LoopSchedule& schedule, Engine engine, const EvolveOptions& opts) {
    std::vector<EvolutionReport> out(4);
    parallel_for(4, [&](std::size_t i) { out[i] = evolve(schedule, kAllBellLabels[i], engine, opts); });
    return out;
}

BellLabel expected_output(BellLabel input, Direction dir) {
    const bool upper = input == BellLabel::Zeta1 || input == BellLabel::Zeta2;
    if (dir == Direction::CW) return upper ? BellLabel::Zeta2 : BellLabel::Zeta3;
    return upper ? BellLabel::Zeta1 : BellLabel::Zeta4;
}

ControlDriftReport control_drift(const LoopSchedule& schedule) {
    ControlDriftReport rep;
    if (schedule.steps.size() < 2) return rep;
    std::vector<ControlOperator> cs;
    cs.reserve(schedule.steps.size());
    for (const auto& p : schedule.steps) cs.push_back(control_operator(p));
    for (std::size_t n = 0; n + 1 < cs.size(); ++n) {
        const double dev = max_abs_diff(cs[n + 1].c_inv * cs[n].c, CMat4::identity());
        rep.per_step.push_back(dev);
        rep.global_max = std::max(rep.global_max, dev);
    }
    return rep;
}

SheetTrace sheet_trace(const EvolutionReport& report) {
    if (report.steps.empty()) throw DomainError("sheet_trace needs a report with recorded steps");
    SheetTrace tr;
    Complex prev_a;
    for (std::size_t n = 0; n < report.steps.size(); ++n) {
        const StepRecord& rec = report.steps[n];
        const EigenSystem es = eigensystem(rec.params);
        bool a_is_plus = true;
        if (n > 0) a_is_plus = std::abs(es.eta_plus - prev_a) <= std::abs(es.eta_minus - prev_a);
        prev_a = a_is_plus ? es.eta_plus : es.eta_minus;

        const double plus = rec.weights[1] + rec.weights[3];
        const double minus = rec.weights[0] + rec.weights[2];
        const std::array<double, 2> g = a_is_plus ? std::array<double, 2>{plus, minus} : std::array<double, 2>{minus, plus};
        const Sheet dom = g[0] >= g[1] ? Sheet::A : Sheet::B;
        const bool jump = n > 0 && dom != tr.dominant.back();
        if (jump) ++tr.switches;
        tr.group_weights.push_back(g);
        tr.dominant.push_back(dom);
        tr.jump.push_back(jump);
    }
    return tr;
}

double conversion_objective(const std::vector<double>& phases, const LoopGeometry& geometry, Engine engine,
                            const WalkParams& base) {
    const EvolveOptions quiet{false, true};
    double worst = std::numeric_limits<double>::infinity();
    for (Direction dir : {Direction::CW, Direction::CCW}) {
        const LoopSchedule s = schedule_from_phases(phases, geometry, dir, "", base);
        for (BellLabel in : kAllBellLabels) {
            const EvolutionReport r = evolve(s, in, engine, quiet);
            worst = std::min(worst, r.fidelities[index_of(expected_output(in, dir))]);
        }
    }
    return worst;
}

namespace {

struct NelderMead {
    std::function<double(const std::vector<double>&)> f;  // minimized
    std::size_t budget = 0;
    std::size_t used = 0;

    double eval(const std::vector<double>& x) {
        ++used;
        return f(x);
    }

    std::pair<std::vector<double>, double> run(const std::vector<double>& x0, double step) {
        const std::size_t d = x0.size();
        std::vector<std::vector<double>> pts(d + 1, x0);
        std::vector<double> vals(d + 1);
        for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
        for (std::size_t i = 0; i <= d; ++i) vals[i] = eval(pts[i]);

        std::vector<std::size_t> order(d + 1);
        while (used < budget) {
            for (std::size_t i = 0; i <= d; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
            const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
            if (std::abs(vals[worst] - vals[best]) < 1e-10) break;

            std::vector<double> centroid(d, 0.0);
            for (std::size_t i = 0; i <= d; ++i) {
                if (i == worst) continue;
                for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k] / static_cast<double>(d);
            }
            auto along = [&](double t) {
                std::vector<double> x(d);
                for (std::size_t k = 0; k < d; ++k) x[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
                return x;
            };
            const std::vector<double> xr = along(-1.0);
            const double fr = eval(xr);
            if (fr < vals[best]) {
                const std::vector<double> xe = along(-2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    pts[worst] = xe;
                    vals[worst] = fe;
                } else {
                    pts[worst] = xr;
                    vals[worst] = fr;
                }
            } else if (fr < vals[second]) {
                pts[worst] = xr;
                vals[worst] = fr;
            } else {
                const bool outside = fr < vals[worst];
                const std::vector<double> xc = along(outside ? -0.5 : 0.5);
                const double fc = eval(xc);
                if (fc < (outside ? fr : vals[worst])) {
                    pts[worst] = xc;
                    vals[worst] = fc;
                } else {
                    for (std::size_t i = 0; i <= d; ++i) {
                        if (i == best) continue;
                        for (std::size_t k = 0; k < d; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                        vals[i] = eval(pts[i]);
                    }
                }
            }
        }
        const auto it = std::min_element(vals.begin(), vals.end());
        return {pts[static_cast<std::size_t>(it - vals.begin())], *it};
    }
};

}  // namespace

OptimizeResult optimize_schedule(const OptimizeOptions& opts) {
    if (opts.n < 4) throw DomainError("optimize_schedule needs N >= 4");
    const std::size_t n = opts.n;

    auto phases_of = [&](const std::vector<double>& x) {
        std::vector<double> t(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) t[i] = x[i - 1];
        return t;
    };
    std::size_t evaluations = 0;
    auto objective = [&](const std::vector<double>& x) {
        ++evaluations;
        try {
            return conversion_objective(phases_of(x), opts.geometry, opts.engine, opts.base);
        } catch (const NumericalError&) {
            return -1.0;
        }
    };

    std::vector<double> x0(n - 1);
    for (std::size_t i = 1; i < n; ++i) x0[i - 1] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    const double initial = objective(x0);

    std::vector<double> best_x = x0;
    double best = initial;
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> jitter(0.0, 0.3 * std::numbers::pi / static_cast<double>(n));

    for (std::size_t r = 0; r < std::max<std::size_t>(1, opts.restarts); ++r) {
        std::vector<double> start = best_x;
        if (r > 0)
            for (double& v : start) v += jitter(rng);
        NelderMead nm{[&](const std::vector<double>& x) { return -objective(x); }, opts.max_evaluations};
        const double step = (r == 0 ? 0.5 : 0.25) * 2.0 * std::numbers::pi / static_cast<double>(n);
        auto [x, v] = nm.run(start, step);
        if (-v > best) {
            best = -v;
            best_x = x;
        }
    }

    OptimizeResult res;
    res.phases = phases_of(best_x);
    res.ccw = schedule_from_phases(res.phases, opts.geometry, Direction::CCW, "optimized", opts.base);
    res.cw = schedule_from_phases(res.phases, opts.geometry, Direction::CW, "optimized", opts.base);
    res.objective = best;
    res.initial_objective = initial;
    res.evaluations = evaluations;
    return res;
}

}  // namespace eploop
