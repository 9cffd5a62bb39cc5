// loops.hpp
// Loop schedules in (phi, theta1), multi-step evolution of two-photon states,
// sheet tracking, control-operator drift and a small-N schedule optimizer.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eploop/metrics.hpp"
#include "eploop/smallmat.hpp"
#include "eploop/walkops.hpp"

namespace eploop {

// CCW takes the + sign in the loop phase, CW the - sign.
enum class Direction { CW, CCW };
std::string to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

// Full: every step is C_n (I x M_n) C_n^-1. Simplified: C, then the bare
// I x M_n steps, then C^-1 with C taken at the loop start point.
enum class Engine { Full, Simplified };
std::string to_string(Engine e);
std::optional<Engine> parse_engine(std::string_view s);

struct LoopSchedule {
    std::vector<WalkParams> steps;
    Direction direction = Direction::CW;
    std::string label;

    std::size_t size() const { return steps.size(); }
};

struct LoopGeometry {
    double radius = 0.2;
    double centre_theta1 = -0.4;
};

inline constexpr LoopGeometry kLoop1{0.2, -0.4};
inline constexpr LoopGeometry kLoop2{0.1, -0.5};

// Step n sits at angle a_n = (+-)t_n - pi/2 on the circle:
//   phi = r cos(a_n), theta1 = r sin(a_n) + centre.
// theta2, gamma and k come from base. Throws DomainError on empty input.
LoopSchedule schedule_from_phases(const std::vector<double>& phases, const LoopGeometry& geometry, Direction dir,
                                  std::string label, const WalkParams& base = {});

// Equally spaced t_n = 2 pi n / N, n = 0..N-1.
LoopSchedule circle_schedule(std::size_t n, const LoopGeometry& geometry, Direction dir, std::string label,
                             const WalkParams& base = {});
LoopSchedule loop1_schedule(std::size_t n, Direction dir);
LoopSchedule loop2_schedule(std::size_t n, Direction dir);

// Same start point, remaining steps traversed in the opposite order; the
// direction tag is flipped.
LoopSchedule reversed(const LoopSchedule& s);

// Ray-casting point-in-polygon test on the (phi, theta1) vertices.
bool encloses(const LoopSchedule& s, double phi, double theta1);

struct StepRecord {
    std::size_t index = 0;
    WalkParams params;
    // |<beta_j|state>|^2 in eigensystem order, raw and normalized to sum 1.
    std::array<double, 4> weights_raw{};
    std::array<double, 4> weights{};
    // Sum of log norms removed by renormalization up to and including this step.
    double log_magnitude = 0.0;
};

struct EvolveOptions {
    bool record_steps = true;
    bool renormalize = true;
    // Simplified engine only: the input is already C_1^{-1}|zeta>.
    bool prepared_input = false;
};

struct EvolutionReport {
    std::optional<BellLabel> input;
    Direction direction = Direction::CW;
    std::size_t n = 0;
    std::string loop;
    Engine engine = Engine::Full;
    std::vector<StepRecord> steps;
    CVec4 output_state;
    DensityMatrix output_density = DensityMatrix::maximally_mixed();
    std::array<double, 4> fidelities{};
    BellLabel classified = BellLabel::Zeta1;
    bool tie = false;
    double log_magnitude = 0.0;
};

EvolutionReport evolve(const LoopSchedule& schedule, const CVec4& input, Engine engine, const EvolveOptions& opts = {});
EvolutionReport evolve_full(const LoopSchedule& schedule, const CVec4& input, const EvolveOptions& opts = {});
EvolutionReport evolve_simplified(const LoopSchedule& schedule, const CVec4& input, const EvolveOptions& opts = {});

// Convenience: input given as a Bell label (recorded in the report).
EvolutionReport evolve(const LoopSchedule& schedule, BellLabel input, Engine engine, const EvolveOptions& opts = {});

// All four Bell inputs, evaluated in parallel, ordered zeta1..zeta4.
std::vector<EvolutionReport> evolve_bell_inputs(const LoopSchedule& schedule, Engine engine,
                                                const EvolveOptions& opts = {});

// Output expected from the chiral conversion on Loop 1:
// CW {zeta1, zeta2} -> zeta2, {zeta3, zeta4} -> zeta3;
// CCW {zeta1, zeta2} -> zeta1, {zeta3, zeta4} -> zeta4.
BellLabel expected_output(BellLabel input, Direction dir);

struct ControlDriftReport {
    std::vector<double> per_step;  // max |C_{n+1}^-1 C_n - I|, n = 0..N-2
    double global_max = 0.0;
};

ControlDriftReport control_drift(const LoopSchedule& schedule);

enum class Sheet { A, B };

struct SheetTrace {
    // Per step: normalized group weights (sheet A, sheet B) and the dominant
    // sheet. Sheet A is the eta+ branch at step 0, continued step by step by
    // nearest eigenvalue.
    std::vector<std::array<double, 2>> group_weights;
    std::vector<Sheet> dominant;
    std::vector<bool> jump;  // dominance changed relative to the previous step
    std::size_t switches = 0;
};

// Needs a report with recorded steps. Throws TooCloseToEP via eigensystem.
SheetTrace sheet_trace(const EvolutionReport& report);

struct OptimizeOptions {
    std::size_t n = 8;
    LoopGeometry geometry = kLoop1;
    Engine engine = Engine::Full;
    std::uint64_t seed = 1;
    std::size_t restarts = 6;
    std::size_t max_evaluations = 4000;  // per restart
    WalkParams base;
};

struct OptimizeResult {
    std::vector<double> phases;  // CCW loop phases; CW uses the same with the sign flipped
    LoopSchedule ccw;
    LoopSchedule cw;
    double objective = 0.0;
    double initial_objective = 0.0;
    std::size_t evaluations = 0;
};

// Minimum over the 4 inputs x 2 directions of the fidelity to the expected
// output.
double conversion_objective(const std::vector<double>& phases, const LoopGeometry& geometry, Engine engine,
                            const WalkParams& base = {});

// Nelder-Mead over t_1..t_{N-1} (t_0 = 0 stays at the start point), starting
// from equal spacing, then from seeded perturbations of the best point.
// Never returns a result worse than the equal-spacing start. Throws
// DomainError if n < 4.
OptimizeResult optimize_schedule(const OptimizeOptions& opts);

}  // namespace eploop
