// harness.hpp
// Disorder Monte-Carlo, run configuration, figure drivers and JSON reports.

#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eploop/loops.hpp"
#include "eploop/tomo.hpp"

namespace eploop {

// PerStep: independent (dtheta1, dphi) for every step. PerLoop: one pair
// added to the whole loop.
enum class Granularity { PerStep, PerLoop };

std::string to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view s);

struct DisorderConfig {
    double strength = 0.025;  // radians; draws are uniform in (-strength, strength)
    std::size_t groups = 10;
    std::uint64_t seed = 1;
    Granularity granularity = Granularity::PerStep;
};

// Throws ConfigError on negative or non-finite strength or zero groups.
void validate(const DisorderConfig& cfg);

// Deterministic 64-bit substream seed derived from a base seed and a list of
// tags (case index, group index, ...), via std::seed_seq.
std::uint64_t substream_seed(std::uint64_t base, std::initializer_list<std::uint32_t> tags);

// Adds the disorder of one group to every step of the schedule. Group g of a
// schedule with direction d always receives the same draws for a given seed.
LoopSchedule perturb(const LoopSchedule& base, const DisorderConfig& cfg, std::size_t group);

struct DisorderCase {
    BellLabel input = BellLabel::Zeta1;
    Direction direction = Direction::CW;
    // Output label of the unperturbed run; fidelities are measured against it.
    BellLabel reference = BellLabel::Zeta1;
    double unperturbed = 0.0;
    std::vector<double> group_fidelities;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation across groups (0 for one group)
    std::size_t unchanged = 0;  // groups whose classified output equals the reference

    double drop() const { return unperturbed - mean; }
};

struct DisorderSummary {
    DisorderConfig config;
    Engine engine = Engine::Full;
    std::size_t n = 0;
    std::string loop;
    std::vector<DisorderCase> cases;  // schedule order, inputs in the order given

    std::size_t draws() const;
    std::size_t unchanged() const;
    double unchanged_fraction() const;
    double max_drop() const;
};

// Every input is evolved on every perturbed copy of every schedule. All
// inputs of one (direction, group) share the same perturbation.
DisorderSummary disorder_run(const std::vector<LoopSchedule>& schedules, const std::vector<BellLabel>& inputs,
                             const DisorderConfig& cfg, Engine engine = Engine::Full);

enum class LoopSelector { Loop1, Loop2, Custom };

// Figure drivers fill unset optionals with their own defaults.
struct RunConfig {
    LoopSelector loop = LoopSelector::Loop1;
    LoopGeometry geometry = kLoop1;  // used when loop is Custom
    std::optional<std::size_t> n;
    std::vector<Direction> directions{Direction::CW, Direction::CCW};
    std::optional<Engine> engine;
    std::vector<BellLabel> inputs{kAllBellLabels.begin(), kAllBellLabels.end()};
    WalkParams base;  // theta2, gamma and k of the loop
    bool optimized = false;
    std::optional<bool> tomography;
    TomoConfig tomo;
    std::optional<bool> disorder;
    DisorderConfig disorder_cfg;
    bool record_steps = false;
    std::filesystem::path output_dir = "out";

    LoopGeometry loop_geometry() const;
    std::string loop_label() const;
};

// Keys (all optional): loop (1 | 2 | "custom"), radius, centre_theta1, N,
// directions, engine, inputs, theta2, gamma, k, optimized, steps,
// output_dir, seed, tomography {enabled, counts_per_basis, seed,
// psd_projection, psd_method}, disorder {enabled, strength, groups, seed,
// granularity}. A top-level seed sets both nested seeds unless they are
// given. Unknown keys, wrong types and inconsistent combinations throw
// ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& cfg);

// Schedules of the configured loop for each configured direction.
std::vector<LoopSchedule> build_schedules(const RunConfig& cfg, std::size_t n);

// Evolution report as ordered JSON: input, direction, N, loop, engine,
// output_state (re, im interleaved), density (row-major re, im), fidelities,
// classified, tie, log_magnitude and, when recorded, steps.
nlohmann::ordered_json to_json(const EvolutionReport& r);
nlohmann::ordered_json to_json(const DensityMatrix& rho);
nlohmann::ordered_json to_json(const DisorderSummary& s);

// Disorder summary as CSV: one row per case.
void write_disorder_csv(std::ostream& os, const DisorderSummary& s);

enum class Figure { Fig1b, Fig2, Fig4, Fig5 };

std::string to_string(Figure f);
std::optional<Figure> parse_figure(std::string_view s);

struct FigureOutput {
    std::vector<std::filesystem::path> files;
};

// fig1b: Riemann surface CSV, EP locations and loop polygons.
// fig2:  N = 100 evolutions for every input and direction (full engine).
// fig4:  N = 8 (simplified engine) with simulated tomography; cfg.optimized
//        swaps the equal-spacing schedule for optimize_schedule's.
// fig5:  disorder on/off table on the fig4 schedule plus a full N = 100 table.
// Files are written under cfg.output_dir, which is created if needed.
FigureOutput reproduce_figure(Figure which, const RunConfig& cfg);

// Writes text to a file, throwing ConfigError if it cannot be opened.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eploop
