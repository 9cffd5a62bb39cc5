#include "eploop/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "eploop/errors.hpp"
#include "eploop/parallel.hpp"
#include "eploop/spectrum.hpp"

namespace eploop {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Granularity g) { return g == Granularity::PerStep ? "per-step" : "per-loop"; }

std::optional<Granularity> parse_granularity(std::string_view s) {
    if (s == "per-step") return Granularity::PerStep;
    if (s == "per-loop") return Granularity::PerLoop;
    return std::nullopt;
}

void validate(const DisorderConfig& cfg) {
    if (!std::isfinite(cfg.strength) || cfg.strength < 0.0) throw ConfigError("disorder strength must be >= 0");
    if (cfg.groups < 1) throw ConfigError("disorder groups must be >= 1");
}

std::uint64_t substream_seed(std::uint64_t base, std::initializer_list<std::uint32_t> tags) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32)};
    words.insert(words.end(), tags.begin(), tags.end());
    std::seed_seq seq(words.begin(), words.end());
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

LoopSchedule perturb(const LoopSchedule& base, const DisorderConfig& cfg, std::size_t group) {
    validate(cfg);
    LoopSchedule out = base;
    if (cfg.strength == 0.0) return out;
    std::mt19937_64 rng(
        substream_seed(cfg.seed, {static_cast<std::uint32_t>(base.direction), static_cast<std::uint32_t>(group)}));
    std::uniform_real_distribution<double> u(-cfg.strength, cfg.strength);
    if (cfg.granularity == Granularity::PerLoop) {
        const double dt = u(rng), dp = u(rng);
        for (auto& p : out.steps) {
            p.theta1 += dt;
            p.phi += dp;
        }
    } else {
        for (auto& p : out.steps) {
            p.theta1 += u(rng);
            p.phi += u(rng);
        }
    }
    return out;
}

std::size_t DisorderSummary::draws() const {
    std::size_t d = 0;
    for (const auto& c : cases) d += c.group_fidelities.size();
    return d;
}

std::size_t DisorderSummary::unchanged() const {
    std::size_t u = 0;
    for (const auto& c : cases) u += c.unchanged;
    return u;
}

double DisorderSummary::unchanged_fraction() const {
    const std::size_t d = draws();
    return d == 0 ? 1.0 : static_cast<double>(unchanged()) / static_cast<double>(d);
}

double DisorderSummary::max_drop() const {
    double m = 0.0;
    for (const auto& c : cases) m = std::max(m, c.drop());
    return m;
}

DisorderSummary disorder_run(const std::vector<LoopSchedule>& schedules, const std::vector<BellLabel>& inputs,
                             const DisorderConfig& cfg, Engine engine) {
    validate(cfg);
    if (schedules.empty() || inputs.empty()) throw ConfigError("disorder run needs schedules and inputs");

    DisorderSummary s;
    s.config = cfg;
    s.engine = engine;
    s.n = schedules.front().size();
    s.loop = schedules.front().label;

    const std::size_t ns = schedules.size(), ni = inputs.size(), ng = cfg.groups;
    EvolveOptions opts;
    opts.record_steps = false;

    std::vector<EvolutionReport> clean(ns * ni);
    parallel_for(ns * ni, [&](std::size_t i) { clean[i] = evolve(schedules[i / ni], inputs[i % ni], engine, opts); });

    // Task index = (schedule, group); every input shares the perturbation.
    std::vector<EvolutionReport> noisy(ns * ng * ni);
    parallel_for(ns * ng, [&](std::size_t t) {
        const std::size_t si = t / ng, g = t % ng;
        const LoopSchedule p = perturb(schedules[si], cfg, g);
        for (std::size_t ii = 0; ii < ni; ++ii) noisy[t * ni + ii] = evolve(p, inputs[ii], engine, opts);
    });

    for (std::size_t si = 0; si < ns; ++si) {
        for (std::size_t ii = 0; ii < ni; ++ii) {
            const EvolutionReport& c = clean[si * ni + ii];
            DisorderCase dc;
            dc.input = inputs[ii];
            dc.direction = schedules[si].direction;
            dc.reference = c.classified;
            dc.unperturbed = c.fidelities[index_of(dc.reference)];
            for (std::size_t g = 0; g < ng; ++g) {
                const EvolutionReport& r = noisy[(si * ng + g) * ni + ii];
                dc.group_fidelities.push_back(r.fidelities[index_of(dc.reference)]);
                if (r.classified == dc.reference) ++dc.unchanged;
            }
            // Offsets from the first draw keep identical draws exact.
            const double first = dc.group_fidelities.front();
            double offset = 0.0;
            for (double f : dc.group_fidelities) offset += f - first;
            dc.mean = first + offset / static_cast<double>(ng);
            if (ng > 1) {
                double ss = 0.0;
                for (double f : dc.group_fidelities) ss += (f - dc.mean) * (f - dc.mean);
                dc.sd = std::sqrt(ss / static_cast<double>(ng - 1));
            }
            s.cases.push_back(std::move(dc));
        }
    }
    return s;
}

LoopGeometry RunConfig::loop_geometry() const {
    switch (loop) {
        case LoopSelector::Loop1: return kLoop1;
        case LoopSelector::Loop2: return kLoop2;
        case LoopSelector::Custom: return geometry;
    }
    return kLoop1;
}

std::string RunConfig::loop_label() const {
    switch (loop) {
        case LoopSelector::Loop1: return "loop1";
        case LoopSelector::Loop2: return "loop2";
        case LoopSelector::Custom: return "custom";
    }
    return "loop1";
}

namespace {

[[noreturn]] void config_fail(const std::string& what) { throw ConfigError("config: " + what); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) config_fail(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) config_fail("unknown key '" + key + "' in " + where);
    }
}

double get_number(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number()) config_fail(std::string(key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_fail(std::string(key) + " must be finite");
    return d;
}

std::uint64_t get_count(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number_unsigned()) config_fail(std::string(key) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

bool get_bool(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_boolean()) config_fail(std::string(key) + " must be true or false");
    return v.get<bool>();
}

std::string get_string(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_string()) config_fail(std::string(key) + " must be a string");
    return v.get<std::string>();
}

std::vector<std::string> get_strings(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_array()) config_fail(std::string(key) + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) config_fail(std::string(key) + " must be an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    check_keys(j, "run config",
               {"loop", "radius", "centre_theta1", "N", "directions", "engine", "inputs", "theta2", "gamma", "k",
                "optimized", "steps", "output_dir", "seed", "tomography", "disorder"});
    RunConfig cfg;

    if (j.contains("loop")) {
        const json& l = j.at("loop");
        if (l == 1) {
            cfg.loop = LoopSelector::Loop1;
        } else if (l == 2) {
            cfg.loop = LoopSelector::Loop2;
        } else if (l == "custom") {
            cfg.loop = LoopSelector::Custom;
        } else {
            config_fail("loop must be 1, 2 or \"custom\"");
        }
    }
    const bool has_geometry = j.contains("radius") || j.contains("centre_theta1");
    if (has_geometry && cfg.loop != LoopSelector::Custom) config_fail("radius/centre_theta1 need loop \"custom\"");
    if (cfg.loop == LoopSelector::Custom) {
        if (!j.contains("radius") || !j.contains("centre_theta1"))
            config_fail("custom loop needs radius and centre_theta1");
        cfg.geometry = LoopGeometry{get_number(j, "radius"), get_number(j, "centre_theta1")};
    }

    if (j.contains("N")) cfg.n = get_count(j, "N");
    if (j.contains("directions")) {
        cfg.directions.clear();
        for (const auto& s : get_strings(j, "directions")) {
            const auto d = parse_direction(s);
            if (!d) config_fail("unknown direction '" + s + "'");
            cfg.directions.push_back(*d);
        }
    }
    if (j.contains("engine")) {
        const std::string s = get_string(j, "engine");
        const auto e = parse_engine(s);
        if (!e) config_fail("unknown engine '" + s + "'");
        cfg.engine = *e;
    }
    if (j.contains("inputs")) {
        cfg.inputs.clear();
        for (const auto& s : get_strings(j, "inputs")) {
            const auto l = parse_bell_label(s);
            if (!l) config_fail("unknown input '" + s + "'");
            cfg.inputs.push_back(*l);
        }
    }
    if (j.contains("theta2")) cfg.base.theta2 = get_number(j, "theta2");
    if (j.contains("gamma")) cfg.base.gamma = get_number(j, "gamma");
    if (j.contains("k")) cfg.base.k = get_number(j, "k");
    if (j.contains("optimized")) cfg.optimized = get_bool(j, "optimized");
    if (j.contains("steps")) cfg.record_steps = get_bool(j, "steps");
    if (j.contains("output_dir")) cfg.output_dir = get_string(j, "output_dir");
    if (j.contains("seed")) {
        const std::uint64_t seed = get_count(j, "seed");
        cfg.tomo.seed = seed;
        cfg.disorder_cfg.seed = seed;
    }

    if (j.contains("tomography")) {
        const json& t = j.at("tomography");
        check_keys(t, "tomography", {"enabled", "counts_per_basis", "seed", "psd_projection", "psd_method"});
        if (t.contains("enabled")) cfg.tomography = get_bool(t, "enabled");
        if (t.contains("counts_per_basis")) cfg.tomo.counts_per_basis = get_count(t, "counts_per_basis");
        if (t.contains("seed")) cfg.tomo.seed = get_count(t, "seed");
        if (t.contains("psd_projection")) cfg.tomo.psd_projection = get_bool(t, "psd_projection");
        if (t.contains("psd_method")) {
            const std::string m = get_string(t, "psd_method");
            if (m == "nearest") {
                cfg.tomo.psd_method = PsdMethod::Nearest;
            } else if (m == "clip") {
                cfg.tomo.psd_method = PsdMethod::ClipRenormalize;
            } else {
                config_fail("psd_method must be \"nearest\" or \"clip\"");
            }
        }
    }
    if (j.contains("disorder")) {
        const json& d = j.at("disorder");
        check_keys(d, "disorder", {"enabled", "strength", "groups", "seed", "granularity"});
        if (d.contains("enabled")) cfg.disorder = get_bool(d, "enabled");
        if (d.contains("strength")) cfg.disorder_cfg.strength = get_number(d, "strength");
        if (d.contains("groups")) cfg.disorder_cfg.groups = get_count(d, "groups");
        if (d.contains("seed")) cfg.disorder_cfg.seed = get_count(d, "seed");
        if (d.contains("granularity")) {
            const std::string g = get_string(d, "granularity");
            const auto parsed = parse_granularity(g);
            if (!parsed) config_fail("granularity must be \"per-step\" or \"per-loop\"");
            cfg.disorder_cfg.granularity = *parsed;
        }
    }
    validate(cfg);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return parse_run_config(j);
}

void validate(const RunConfig& cfg) {
    if (cfg.n && *cfg.n < 3) config_fail("N must be at least 3");
    if (cfg.directions.empty()) config_fail("directions must not be empty");
    if (cfg.inputs.empty()) config_fail("inputs must not be empty (tomography and disorder need an evolution)");
    std::set<Direction> dirs(cfg.directions.begin(), cfg.directions.end());
    if (dirs.size() != cfg.directions.size()) config_fail("duplicate direction");
    std::set<BellLabel> ins(cfg.inputs.begin(), cfg.inputs.end());
    if (ins.size() != cfg.inputs.size()) config_fail("duplicate input");
    if (cfg.loop == LoopSelector::Custom && !(cfg.geometry.radius > 0.0)) config_fail("radius must be positive");
    if (cfg.tomo.counts_per_basis == 0) config_fail("counts_per_basis must be positive");
    if (cfg.optimized && cfg.n && *cfg.n < 4) config_fail("optimized schedules need N >= 4");
    try {
        validate(cfg.disorder_cfg);
    } catch (const ConfigError& e) {
        config_fail(e.what());
    }
}

std::vector<LoopSchedule> build_schedules(const RunConfig& cfg, std::size_t n) {
    std::vector<LoopSchedule> out;
    for (Direction d : cfg.directions) out.push_back(circle_schedule(n, cfg.loop_geometry(), d, cfg.loop_label(), cfg.base));
    return out;
}

ordered_json to_json(const DensityMatrix& rho) {
    ordered_json a = ordered_json::array();
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            a.push_back(rho(r, c).real());
            a.push_back(rho(r, c).imag());
        }
    return a;
}

namespace {

ordered_json fidelities_json(const std::array<double, 4>& f) {
    ordered_json o;
    for (BellLabel l : kAllBellLabels) o[to_string(l)] = f[index_of(l)];
    return o;
}

}  // namespace

ordered_json to_json(const EvolutionReport& r) {
    ordered_json o;
    o["input"] = r.input ? to_string(*r.input) : "custom";
    o["direction"] = to_string(r.direction);
    o["N"] = r.n;
    o["loop"] = r.loop;
    o["engine"] = to_string(r.engine);
    ordered_json state = ordered_json::array();
    for (std::size_t i = 0; i < 4; ++i) {
        state.push_back(r.output_state[i].real());
        state.push_back(r.output_state[i].imag());
    }
    o["output_state"] = state;
    o["density"] = to_json(r.output_density);
    o["fidelities"] = fidelities_json(r.fidelities);
    o["classified"] = to_string(r.classified);
    o["tie"] = r.tie;
    o["log_magnitude"] = r.log_magnitude;
    if (!r.steps.empty()) {
        ordered_json steps = ordered_json::array();
        for (const auto& s : r.steps) {
            ordered_json st;
            st["n"] = s.index;
            st["phi"] = s.params.phi;
            st["theta1"] = s.params.theta1;
            st["weights"] = s.weights;
            st["log_magnitude"] = s.log_magnitude;
            steps.push_back(st);
        }
        o["steps"] = steps;
    }
    return o;
}

ordered_json to_json(const DisorderSummary& s) {
    ordered_json o;
    o["loop"] = s.loop;
    o["N"] = s.n;
    o["engine"] = to_string(s.engine);
    o["strength"] = s.config.strength;
    o["groups"] = s.config.groups;
    o["seed"] = s.config.seed;
    o["granularity"] = to_string(s.config.granularity);
    ordered_json cases = ordered_json::array();
    for (const auto& c : s.cases) {
        ordered_json e;
        e["input"] = to_string(c.input);
        e["direction"] = to_string(c.direction);
        e["reference"] = to_string(c.reference);
        e["unperturbed"] = c.unperturbed;
        e["mean"] = c.mean;
        e["sd"] = c.sd;
        e["unchanged"] = c.unchanged;
        e["group_fidelities"] = c.group_fidelities;
        cases.push_back(e);
    }
    o["cases"] = cases;
    o["unchanged_fraction"] = s.unchanged_fraction();
    o["max_drop"] = s.max_drop();
    return o;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void write_disorder_csv(std::ostream& os, const DisorderSummary& s) {
    os << "direction,input,reference,mean_on,sd_on,mean_off,sd_off,unchanged,groups\n";
    for (const auto& c : s.cases) {
        os << to_string(c.direction) << ',' << to_string(c.input) << ',' << to_string(c.reference) << ','
           << num(c.mean) << ',' << num(c.sd) << ',' << num(c.unperturbed) << ",0," << c.unchanged << ','
           << c.group_fidelities.size() << '\n';
    }
}

std::string to_string(Figure f) {
    switch (f) {
        case Figure::Fig1b: return "fig1b";
        case Figure::Fig2: return "fig2";
        case Figure::Fig4: return "fig4";
        case Figure::Fig5: return "fig5";
    }
    return "fig2";
}

std::optional<Figure> parse_figure(std::string_view s) {
    for (Figure f : {Figure::Fig1b, Figure::Fig2, Figure::Fig4, Figure::Fig5})
        if (s == to_string(f)) return f;
    return std::nullopt;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw ConfigError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw ConfigError("write failed for " + path.string());
}

namespace {

struct Case {
    std::size_t schedule = 0;
    BellLabel input = BellLabel::Zeta1;
};

std::vector<Case> all_cases(std::size_t schedules, const std::vector<BellLabel>& inputs) {
    std::vector<Case> out;
    for (std::size_t s = 0; s < schedules; ++s)
        for (BellLabel l : inputs) out.push_back({s, l});
    return out;
}

std::string expected_cell(const RunConfig& cfg, BellLabel in, Direction d) {
    return cfg.loop == LoopSelector::Loop1 ? to_string(expected_output(in, d)) : std::string();
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

FigureOutput figure1b(const RunConfig& cfg) {
    FigureOutput out;
    SurfaceGrid grid;
    grid.theta2 = cfg.base.theta2;
    grid.gamma = cfg.base.gamma;
    grid.k = cfg.base.k;
    std::ostringstream surf;
    write_surface_csv(surf, riemann_surface(grid));
    out.files.push_back(cfg.output_dir / "fig1b_surface.csv");
    write_text_file(out.files.back(), surf.str());

    const std::size_t n = cfg.n.value_or(100);
    const LoopSchedule l1 = circle_schedule(n, kLoop1, Direction::CCW, "loop1", cfg.base);
    const LoopSchedule l2 = circle_schedule(n, kLoop2, Direction::CCW, "loop2", cfg.base);

    EpSearchBox box;
    box.theta2 = cfg.base.theta2;
    box.gamma = cfg.base.gamma;
    box.k = cfg.base.k;
    ordered_json eps = ordered_json::array();
    for (const auto& ep : find_eps(box)) {
        ordered_json e;
        e["phi"] = ep.phi;
        e["theta1"] = ep.theta1;
        e["residual"] = ep.residual;
        e["inside_loop1"] = encloses(l1, ep.phi, ep.theta1);
        e["inside_loop2"] = encloses(l2, ep.phi, ep.theta1);
        eps.push_back(e);
    }
    ordered_json ej;
    ej["theta2"] = grid.theta2;
    ej["gamma"] = grid.gamma;
    ej["k"] = grid.k;
    ej["eps"] = eps;
    out.files.push_back(cfg.output_dir / "fig1b_eps.json");
    write_text_file(out.files.back(), dump(ej));

    std::ostringstream loops;
    loops << "loop,step,phi,theta1\n";
    for (const LoopSchedule* s : {&l1, &l2})
        for (std::size_t i = 0; i < s->size(); ++i)
            loops << s->label << ',' << i << ',' << num(s->steps[i].phi) << ',' << num(s->steps[i].theta1) << '\n';
    out.files.push_back(cfg.output_dir / "fig1c_loops.csv");
    write_text_file(out.files.back(), loops.str());
    return out;
}

FigureOutput figure2(const RunConfig& cfg) {
    FigureOutput out;
    const std::size_t n = cfg.n.value_or(100);
    const Engine engine = cfg.engine.value_or(Engine::Full);
    const auto schedules = build_schedules(cfg, n);
    const auto cases = all_cases(schedules.size(), cfg.inputs);

    std::vector<EvolutionReport> reports(cases.size());
    std::vector<std::size_t> switches(cases.size());
    parallel_for(cases.size(), [&](std::size_t i) {
        EvolveOptions opts;
        opts.record_steps = true;
        reports[i] = evolve(schedules[cases[i].schedule], cases[i].input, engine, opts);
        switches[i] = sheet_trace(reports[i]).switches;
        if (!cfg.record_steps) reports[i].steps.clear();
    });

    ordered_json j;
    j["figure"] = "fig2";
    ordered_json inputs = ordered_json::array();
    for (BellLabel l : cfg.inputs) {
        ordered_json e;
        e["label"] = to_string(l);
        e["density"] = to_json(DensityMatrix::from_state(bell_state(l)));
        inputs.push_back(e);
    }
    j["inputs"] = inputs;
    ordered_json runs = ordered_json::array();
    for (const auto& r : reports) runs.push_back(to_json(r));
    j["runs"] = runs;
    out.files.push_back(cfg.output_dir / "fig2.json");
    write_text_file(out.files.back(), dump(j));

    std::ostringstream csv;
    csv << "direction,input,classified,expected,fidelity_classified,fidelity_zeta1,fidelity_zeta2,fidelity_zeta3,"
           "fidelity_zeta4,sheet_switches\n";
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const EvolutionReport& r = reports[i];
        csv << to_string(r.direction) << ',' << to_string(cases[i].input) << ',' << to_string(r.classified) << ','
            << expected_cell(cfg, cases[i].input, r.direction) << ',' << num(r.fidelities[index_of(r.classified)]);
        for (double f : r.fidelities) csv << ',' << num(f);
        csv << ',' << switches[i] << '\n';
    }
    out.files.push_back(cfg.output_dir / "fig2_summary.csv");
    write_text_file(out.files.back(), csv.str());
    return out;
}

std::vector<LoopSchedule> fig4_schedules(const RunConfig& cfg, std::size_t n, Engine engine, ordered_json& meta) {
    if (!cfg.optimized) return build_schedules(cfg, n);
    OptimizeOptions o;
    o.n = n;
    o.geometry = cfg.loop_geometry();
    o.engine = engine;
    o.seed = cfg.tomo.seed;
    o.base = cfg.base;
    const OptimizeResult r = optimize_schedule(o);
    meta["optimized_phases"] = r.phases;
    meta["objective"] = r.objective;
    meta["initial_objective"] = r.initial_objective;
    std::vector<LoopSchedule> out;
    for (Direction d : cfg.directions) {
        LoopSchedule s = d == Direction::CW ? r.cw : r.ccw;
        s.label = cfg.loop_label() + "-optimized";
        out.push_back(std::move(s));
    }
    return out;
}

FigureOutput figure4(const RunConfig& cfg) {
    FigureOutput out;
    const std::size_t n = cfg.n.value_or(8);
    const Engine engine = cfg.engine.value_or(Engine::Simplified);
    const bool tomo = cfg.tomography.value_or(true);

    ordered_json j;
    j["figure"] = "fig4";
    ordered_json meta;
    const auto schedules = fig4_schedules(cfg, n, engine, meta);
    if (!meta.empty()) j["schedule"] = meta;
    const auto cases = all_cases(schedules.size(), cfg.inputs);

    struct Result {
        EvolutionReport report;
        std::optional<CountsTable> counts;
        std::optional<DensityMatrix> measured;
        double similarity = 0.0;
        std::uint64_t seed = 0;
    };
    std::vector<Result> results(cases.size());
    parallel_for(cases.size(), [&](std::size_t i) {
        EvolveOptions opts;
        opts.record_steps = cfg.record_steps;
        Result& r = results[i];
        r.report = evolve(schedules[cases[i].schedule], cases[i].input, engine, opts);
        if (tomo) {
            TomoConfig tc = cfg.tomo;
            tc.seed = substream_seed(cfg.tomo.seed, {static_cast<std::uint32_t>(schedules[cases[i].schedule].direction),
                                                     static_cast<std::uint32_t>(index_of(cases[i].input))});
            r.seed = tc.seed;
            r.counts = simulate_counts(r.report.output_density, tc);
            r.measured = reconstruct(*r.counts, tc);
            r.similarity = similarity(r.report.output_density, *r.measured);
        }
    });

    ordered_json runs = ordered_json::array();
    std::ostringstream csv;
    csv << "direction,input,classified,expected,fidelity_classified,measured_classified,measured_fidelity,"
           "similarity\n";
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const Result& r = results[i];
        ordered_json e = to_json(r.report);
        csv << to_string(r.report.direction) << ',' << to_string(cases[i].input) << ','
            << to_string(r.report.classified) << ',' << expected_cell(cfg, cases[i].input, r.report.direction) << ','
            << num(r.report.fidelities[index_of(r.report.classified)]);
        if (r.measured) {
            const Classification mc = classify(*r.measured);
            ordered_json t;
            t["seed"] = r.seed;
            t["counts_per_basis"] = cfg.tomo.counts_per_basis;
            t["density"] = to_json(*r.measured);
            t["fidelities"] = fidelities_json(mc.fidelities);
            t["classified"] = to_string(mc.label);
            t["similarity"] = r.similarity;
            e["tomography"] = t;
            csv << ',' << to_string(mc.label) << ',' << num(mc.fidelities[index_of(mc.label)]) << ','
                << num(r.similarity) << '\n';

            std::ostringstream counts;
            write_counts_csv(counts, *r.counts);
            out.files.push_back(cfg.output_dir / "fig4_counts" /
                                (to_string(r.report.direction) + "_" + to_string(cases[i].input) + ".csv"));
            write_text_file(out.files.back(), counts.str());
        } else {
            csv << ",,,\n";
        }
        runs.push_back(e);
    }
    j["runs"] = runs;
    out.files.push_back(cfg.output_dir / "fig4.json");
    write_text_file(out.files.back(), dump(j));
    out.files.push_back(cfg.output_dir / "fig4_summary.csv");
    write_text_file(out.files.back(), csv.str());
    return out;
}

FigureOutput figure5(const RunConfig& cfg) {
    FigureOutput out;
    const std::size_t n = cfg.n.value_or(8);
    const Engine engine = cfg.engine.value_or(Engine::Simplified);

    ordered_json meta;
    const auto schedules = fig4_schedules(cfg, n, engine, meta);
    const DisorderSummary small = disorder_run(schedules, cfg.inputs, cfg.disorder_cfg, engine);
    const DisorderSummary large = disorder_run(build_schedules(cfg, 100), cfg.inputs, cfg.disorder_cfg, Engine::Full);

    std::ostringstream a, b;
    write_disorder_csv(a, small);
    write_disorder_csv(b, large);
    out.files.push_back(cfg.output_dir / "fig5.csv");
    write_text_file(out.files.back(), a.str());
    out.files.push_back(cfg.output_dir / "fig5_n100.csv");
    write_text_file(out.files.back(), b.str());

    ordered_json j;
    j["figure"] = "fig5";
    if (!meta.empty()) j["schedule"] = meta;
    j["runs"] = ordered_json::array({to_json(small), to_json(large)});
    out.files.push_back(cfg.output_dir / "fig5.json");
    write_text_file(out.files.back(), dump(j));
    return out;
}

}  // namespace

FigureOutput reproduce_figure(Figure which, const RunConfig& cfg) {
    validate(cfg);
    switch (which) {
        case Figure::Fig1b: return figure1b(cfg);
        case Figure::Fig2: return figure2(cfg);
        case Figure::Fig4: return figure4(cfg);
        case Figure::Fig5: return figure5(cfg);
    }
    return {};
}

}  // namespace eploop
