// Command-line front end for the eploop library.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "eploop/errors.hpp"
#include "eploop/harness.hpp"
#include "eploop/optics.hpp"
#include "eploop/spectrum.hpp"

using namespace eploop;
using nlohmann::ordered_json;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "json";
};

RunConfig base_config(const Globals& g) {
    RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
    if (g.seed) {
        cfg.tomo.seed = *g.seed;
        cfg.disorder_cfg.seed = *g.seed;
    }
    if (!g.out.empty()) cfg.output_dir = g.out;
    return cfg;
}

// Writes to --out/<name> when --out is given, otherwise to stdout.
void emit(const Globals& g, const std::string& name, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    const auto path = std::filesystem::path(g.out) / name;
    write_text_file(path, text);
    std::cerr << "wrote " << path.string() << "\n";
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

template <class T, class Parse>
T parse_or_fail(const std::string& s, Parse parse, const char* what) {
    const auto v = parse(s);
    if (!v) throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
    return *v;
}

LoopSelector parse_loop(const std::string& s) {
    if (s == "1" || s == "loop1") return LoopSelector::Loop1;
    if (s == "2" || s == "loop2") return LoopSelector::Loop2;
    throw ConfigError("loop must be 1 or 2");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exceptional-point loop simulator for two-photon quantum walks"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "JSON run configuration");
    app.add_option("--seed", g.seed, "Seed for tomography and disorder draws");
    app.add_option("--out", g.out, "Output directory (default: stdout)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    // surface
    auto* surface = app.add_subcommand("surface", "Quasienergy surfaces over (phi, theta1)");
    SurfaceGrid grid;
    surface->add_option("--phi-min", grid.phi_min);
    surface->add_option("--phi-max", grid.phi_max);
    surface->add_option("--phi-count", grid.phi_count);
    surface->add_option("--theta1-min", grid.theta1_min);
    surface->add_option("--theta1-max", grid.theta1_max);
    surface->add_option("--theta1-count", grid.theta1_count);
    surface->add_option("--theta2", grid.theta2);
    surface->add_option("--gamma", grid.gamma);
    surface->add_option("--k", grid.k);

    // find-ep
    auto* find = app.add_subcommand("find-ep", "Locate exceptional points");
    EpSearchBox box;
    find->add_option("--phi-min", box.phi_min);
    find->add_option("--phi-max", box.phi_max);
    find->add_option("--theta1-min", box.theta1_min);
    find->add_option("--theta1-max", box.theta1_max);
    find->add_option("--theta2", box.theta2);
    find->add_option("--gamma", box.gamma);
    find->add_option("--k", box.k);

    // evolve
    auto* ev = app.add_subcommand("evolve", "Evolve Bell inputs around a loop");
    std::string ev_loop, ev_engine;
    std::vector<std::string> ev_dirs, ev_inputs;
    std::optional<std::size_t> ev_n;
    bool ev_steps = false;
    ev->add_option("--loop", ev_loop, "1 or 2");
    ev->add_option("--direction", ev_dirs, "CW and/or CCW");
    ev->add_option("--input", ev_inputs, "zeta1..zeta4");
    ev->add_option("--n", ev_n, "Number of steps");
    ev->add_option("--engine", ev_engine, "full or simplified");
    ev->add_flag("--steps", ev_steps, "Include per-step records");

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "Write the data behind a figure");
    std::string figure;
    bool rep_opt = false;
    std::optional<std::size_t> rep_n;
    rep->add_option("figure", figure, "fig1b, fig2, fig4, fig5 or all")->required();
    rep->add_flag("--optimized", rep_opt, "Use an optimized schedule for fig4 and fig5");
    rep->add_option("--n", rep_n, "Number of steps");

    // disorder
    auto* dis = app.add_subcommand("disorder", "Monte-Carlo loop-parameter disorder");
    std::optional<double> dis_strength;
    std::optional<std::size_t> dis_groups, dis_n;
    std::string dis_gran, dis_engine, dis_loop;
    dis->add_option("--strength", dis_strength, "Half-width of the uniform draw (rad)");
    dis->add_option("--groups", dis_groups, "Number of perturbation groups");
    dis->add_option("--granularity", dis_gran, "per-step or per-loop");
    dis->add_option("--n", dis_n, "Number of steps (default 100)");
    dis->add_option("--engine", dis_engine, "full or simplified");
    dis->add_option("--loop", dis_loop, "1 or 2");

    // tomo
    auto* tomo = app.add_subcommand("tomo", "Simulate tomography or reconstruct from counts");
    std::string tomo_counts, tomo_input = "zeta1";
    std::optional<std::uint64_t> tomo_cpb;
    std::size_t tomo_boot = 0;
    bool tomo_raw = false;
    tomo->add_option("--counts", tomo_counts, "Counts CSV to reconstruct");
    tomo->add_option("--input", tomo_input, "Bell state to simulate (zeta1..zeta4)");
    tomo->add_option("--counts-per-basis", tomo_cpb);
    tomo->add_option("--bootstrap", tomo_boot, "Parametric bootstrap resamples");
    tomo->add_flag("--no-psd", tomo_raw, "Skip the positivity projection");

    // compile-optics
    auto* opt = app.add_subcommand("compile-optics", "Waveplate/PPBS element lists");
    std::string target = "walk";
    WalkParams wp = loop_start_params();
    opt->add_option("--target", target, "walk, rotation, phase, symmetry or cn")
        ->check(CLI::IsMember({"walk", "rotation", "phase", "symmetry", "cn"}));
    opt->add_option("--theta1", wp.theta1);
    opt->add_option("--theta2", wp.theta2);
    opt->add_option("--phi", wp.phi);
    opt->add_option("--gamma", wp.gamma);
    opt->add_option("--k", wp.k);

    // optimize-schedule
    auto* os = app.add_subcommand("optimize-schedule", "Nelder-Mead search over loop phases");
    OptimizeOptions oo;
    std::string os_engine;
    os->add_option("--n", oo.n);
    os->add_option("--restarts", oo.restarts);
    os->add_option("--max-evaluations", oo.max_evaluations);
    os->add_option("--engine", os_engine, "full or simplified");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const bool csv = g.format == "csv";
    try {
        RunConfig cfg = base_config(g);

        if (*surface) {
            const auto samples = riemann_surface(grid);
            if (csv) {
                std::ostringstream os_;
                write_surface_csv(os_, samples);
                emit(g, "surface.csv", os_.str());
            } else {
                ordered_json a = ordered_json::array();
                for (const auto& s : samples)
                    a.push_back({s.phi, s.theta1, s.lambda_plus.real(), s.lambda_plus.imag(), s.lambda_minus.real(),
                                 s.lambda_minus.imag()});
                ordered_json j;
                j["columns"] = {"phi", "theta1", "re_lp", "im_lp", "re_lm", "im_lm"};
                j["samples"] = a;
                emit(g, "surface.json", j.dump() + "\n");
            }
        } else if (*find) {
            const auto eps = find_eps(box);
            if (csv) {
                std::string s = "phi,theta1,residual\n";
                for (const auto& e : eps) s += num(e.phi) + "," + num(e.theta1) + "," + num(e.residual) + "\n";
                emit(g, "eps.csv", s);
            } else {
                ordered_json a = ordered_json::array();
                for (const auto& e : eps) a.push_back({{"phi", e.phi}, {"theta1", e.theta1}, {"residual", e.residual}});
                emit(g, "eps.json", a.dump(2) + "\n");
            }
        } else if (*ev) {
            if (!ev_loop.empty()) cfg.loop = parse_loop(ev_loop);
            if (!ev_dirs.empty()) {
                cfg.directions.clear();
                for (const auto& d : ev_dirs) cfg.directions.push_back(parse_or_fail<Direction>(d, parse_direction, "direction"));
            }
            if (!ev_inputs.empty()) {
                cfg.inputs.clear();
                for (const auto& s : ev_inputs) cfg.inputs.push_back(parse_or_fail<BellLabel>(s, parse_bell_label, "input"));
            }
            if (ev_n) cfg.n = ev_n;
            if (!ev_engine.empty()) cfg.engine = parse_or_fail<Engine>(ev_engine, parse_engine, "engine");
            cfg.record_steps = cfg.record_steps || ev_steps;
            validate(cfg);

            EvolveOptions eo;
            eo.record_steps = cfg.record_steps;
            const Engine engine = cfg.engine.value_or(Engine::Full);
            ordered_json runs = ordered_json::array();
            std::string table = "direction,input,classified,fidelity_zeta1,fidelity_zeta2,fidelity_zeta3,fidelity_zeta4\n";
            for (const auto& sched : build_schedules(cfg, cfg.n.value_or(100))) {
                for (BellLabel l : cfg.inputs) {
                    const EvolutionReport r = evolve(sched, l, engine, eo);
                    runs.push_back(to_json(r));
                    table += to_string(r.direction) + "," + to_string(l) + "," + to_string(r.classified);
                    for (double f : r.fidelities) table += "," + num(f);
                    table += "\n";
                }
            }
            if (csv) {
                emit(g, "evolve.csv", table);
            } else {
                emit(g, "evolve.json", runs.dump(2) + "\n");
            }
        } else if (*rep) {
            if (rep_n) cfg.n = rep_n;
            cfg.optimized = cfg.optimized || rep_opt;
            std::vector<Figure> figs;
            if (figure == "all") {
                figs = {Figure::Fig1b, Figure::Fig2, Figure::Fig4, Figure::Fig5};
            } else {
                figs = {parse_or_fail<Figure>(figure, parse_figure, "figure")};
            }
            for (Figure f : figs)
                for (const auto& p : reproduce_figure(f, cfg).files) std::cout << p.string() << "\n";
        } else if (*dis) {
            if (!dis_loop.empty()) cfg.loop = parse_loop(dis_loop);
            if (dis_strength) cfg.disorder_cfg.strength = *dis_strength;
            if (dis_groups) cfg.disorder_cfg.groups = *dis_groups;
            if (!dis_gran.empty())
                cfg.disorder_cfg.granularity = parse_or_fail<Granularity>(dis_gran, parse_granularity, "granularity");
            if (dis_n) cfg.n = dis_n;
            if (!dis_engine.empty()) cfg.engine = parse_or_fail<Engine>(dis_engine, parse_engine, "engine");
            validate(cfg);
            const DisorderSummary s = disorder_run(build_schedules(cfg, cfg.n.value_or(100)), cfg.inputs,
                                                   cfg.disorder_cfg, cfg.engine.value_or(Engine::Full));
            if (csv) {
                std::ostringstream os_;
                write_disorder_csv(os_, s);
                emit(g, "disorder.csv", os_.str());
            } else {
                emit(g, "disorder.json", to_json(s).dump(2) + "\n");
            }
        } else if (*tomo) {
            TomoConfig tc = cfg.tomo;
            if (tomo_cpb) tc.counts_per_basis = *tomo_cpb;
            if (tomo_raw) tc.psd_projection = false;
            CountsTable counts;
            std::optional<DensityMatrix> truth;
            if (!tomo_counts.empty()) {
                std::ifstream in(tomo_counts);
                if (!in) throw ConfigError("cannot open counts file " + tomo_counts);
                counts = read_counts_csv(in);
            } else {
                truth = DensityMatrix::from_state(bell_state(parse_or_fail<BellLabel>(tomo_input, parse_bell_label, "input")));
                counts = simulate_counts(*truth, tc);
            }
            const DensityMatrix rho = reconstruct(counts, tc);
            const Classification c = classify(rho);
            if (csv) {
                std::ostringstream os_;
                write_counts_csv(os_, counts);
                emit(g, "counts.csv", os_.str());
            } else {
                ordered_json j;
                j["counts_per_basis"] = tc.counts_per_basis;
                j["seed"] = tc.seed;
                j["density"] = to_json(rho);
                ordered_json f;
                for (BellLabel l : kAllBellLabels) f[to_string(l)] = c.fidelities[index_of(l)];
                j["fidelities"] = f;
                j["classified"] = to_string(c.label);
                if (truth) j["fidelity_to_truth"] = fidelity(*truth, rho);
                if (tomo_boot > 0) {
                    const BootstrapSummary b = bootstrap_error(counts, tc, tomo_boot, truth);
                    j["bootstrap"] = {{"resamples", tomo_boot},
                                      {"bell_fidelity_mean", b.bell_fidelity_mean},
                                      {"bell_fidelity_sd", b.bell_fidelity_sd}};
                    if (b.reference_fidelity_mean) {
                        j["bootstrap"]["truth_fidelity_mean"] = *b.reference_fidelity_mean;
                        j["bootstrap"]["truth_fidelity_sd"] = *b.reference_fidelity_sd;
                    }
                }
                emit(g, "tomo.json", j.dump(2) + "\n");
            }
        } else if (*opt) {
            std::ostringstream os_;
            double deviation = 0.0;
            if (target == "cn") {
                const Compiled4 c = compile_CN();
                write_elements(os_, c.sequence);
                deviation = c.deviation;
            } else {
                Compiled2 c;
                if (target == "walk") c = compile_walk_operator(wp);
                if (target == "rotation") c = compile_rotation(wp.theta1);
                if (target == "phase") c = compile_phase_shift(wp.k);
                if (target == "symmetry") c = compile_symmetry_break(wp.phi);
                write_elements(os_, c.sequence);
                deviation = c.deviation;
            }
            os_ << "# max deviation from target " << num(deviation) << "\n";
            emit(g, target + "_elements.txt", os_.str());
        } else if (*os) {
            oo.seed = cfg.tomo.seed;
            oo.geometry = cfg.loop_geometry();
            oo.base = cfg.base;
            if (!os_engine.empty()) oo.engine = parse_or_fail<Engine>(os_engine, parse_engine, "engine");
            const OptimizeResult r = optimize_schedule(oo);
            if (csv) {
                std::string s = "step,phase\n";
                for (std::size_t i = 0; i < r.phases.size(); ++i) s += std::to_string(i) + "," + num(r.phases[i]) + "\n";
                emit(g, "schedule.csv", s);
            } else {
                ordered_json j;
                j["N"] = oo.n;
                j["engine"] = to_string(oo.engine);
                j["phases"] = r.phases;
                j["objective"] = r.objective;
                j["initial_objective"] = r.initial_objective;
                j["evaluations"] = r.evaluations;
                emit(g, "schedule.json", j.dump(2) + "\n");
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
