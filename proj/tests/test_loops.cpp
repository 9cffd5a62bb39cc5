#include <doctest.h>

#include <chrono>
#include <numbers>

#include "eploop/errors.hpp"
#include "eploop/loops.hpp"
#include "eploop/spectrum.hpp"

using namespace eploop;

TEST_CASE("loop schedules") {
    for (Direction d : {Direction::CW, Direction::CCW}) {
        const LoopSchedule l1 = loop1_schedule(100, d);
        const LoopSchedule l2 = loop2_schedule(100, d);
        REQUIRE(l1.size() == 100);
        CHECK(l1.steps[0].phi == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(l1.steps[0].theta1 == doctest::Approx(-0.6));
        CHECK(l2.steps[0].phi == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(l2.steps[0].theta1 == doctest::Approx(-0.6));
        CHECK(l1.steps[0].theta2 == doctest::Approx(std::numbers::pi / 16));
        CHECK(l1.steps[0].gamma == 0.2);
        CHECK(l1.direction == d);
        double top = -1.0;
        for (const auto& p : l2.steps) top = std::max(top, p.theta1);
        CHECK(top == doctest::Approx(-0.4));
    }
    const LoopSchedule ccw = loop1_schedule(100, Direction::CCW);
    CHECK(ccw.steps[25].phi == doctest::Approx(0.2));
    CHECK(ccw.steps[25].theta1 == doctest::Approx(-0.4));
    const LoopSchedule cw = loop1_schedule(100, Direction::CW);
    CHECK(cw.steps[25].phi == doctest::Approx(-0.2));
    CHECK(cw.steps[25].theta1 == doctest::Approx(-0.4));

    CHECK_THROWS_AS(loop1_schedule(0, Direction::CW), DomainError);
}

TEST_CASE("reversed schedule is the opposite traversal") {
    const LoopSchedule cw = loop1_schedule(20, Direction::CW);
    const LoopSchedule ccw = loop1_schedule(20, Direction::CCW);
    const LoopSchedule r = reversed(cw);
    CHECK(r.direction == Direction::CCW);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(r.steps[i].phi == doctest::Approx(ccw.steps[i].phi).epsilon(1e-12));
        CHECK(r.steps[i].theta1 == doctest::Approx(ccw.steps[i].theta1).epsilon(1e-12));
    }
}

TEST_CASE("EP lies inside loop 1 and outside loop 2") {
    const EpLocation ep = find_ep(EpSearchBox{});
    CHECK(encloses(loop1_schedule(100, Direction::CW), ep.phi, ep.theta1));
    CHECK_FALSE(encloses(loop2_schedule(100, Direction::CW), ep.phi, ep.theta1));
    CHECK_FALSE(encloses(loop1_schedule(100, Direction::CW), 0.0, -0.1316));
}

TEST_CASE("chirality on loop 1") {
    for (Engine e : {Engine::Full, Engine::Simplified}) {
        for (Direction d : {Direction::CW, Direction::CCW}) {
            const auto reports = evolve_bell_inputs(loop1_schedule(100, d), e);
            for (BellLabel in : kAllBellLabels) {
                const EvolutionReport& r = reports[index_of(in)];
                CAPTURE(to_string(in));
                CAPTURE(to_string(d));
                CHECK(r.classified == expected_output(in, d));
                CHECK(r.fidelities[index_of(r.classified)] > 0.95);
                CHECK(r.output_state.norm() == doctest::Approx(1.0).epsilon(1e-12));
                for (double f : r.fidelities) CHECK(f <= 1.0 + 1e-9);
            }
        }
    }
    const auto cw = evolve_bell_inputs(loop1_schedule(100, Direction::CW), Engine::Full);
    CHECK(cw[0].fidelities[1] == doctest::Approx(0.983).epsilon(0.005));
    CHECK(cw[3].fidelities[2] == doctest::Approx(0.983).epsilon(0.005));
}

TEST_CASE("loop 2 shows no chirality") {
    const auto cw = evolve_bell_inputs(loop2_schedule(100, Direction::CW), Engine::Full);
    const auto ccw = evolve_bell_inputs(loop2_schedule(100, Direction::CCW), Engine::Full);
    for (std::size_t i = 0; i < 4; ++i) CHECK(cw[i].classified == ccw[i].classified);
}

TEST_CASE("reversing the traversal swaps the chiral outcome") {
    const LoopSchedule r = reversed(loop1_schedule(100, Direction::CW));
    for (BellLabel in : kAllBellLabels) CHECK(evolve(r, in, Engine::Full).classified == expected_output(in, Direction::CCW));
}

TEST_CASE("single step applies u_step") {
    LoopSchedule one{{loop1_schedule(1, Direction::CW).steps[0]}, Direction::CW, "one"};
    const CVec4 in = bell_state(BellLabel::Zeta3);
    const EvolutionReport r = evolve_full(one, in);
    const CVec4 direct = (u_step(one.steps[0]) * in).normalized();
    CHECK(max_abs_diff(r.output_state, direct) < 1e-14);
}

TEST_CASE("renormalization does not change outputs") {
    for (Engine e : {Engine::Full, Engine::Simplified}) {
        const LoopSchedule s = loop1_schedule(20, Direction::CW);
        for (BellLabel in : kAllBellLabels) {
            const EvolutionReport a = evolve(s, in, e, {false, true});
            const EvolutionReport b = evolve(s, in, e, {false, false});
            CHECK(a.classified == b.classified);
            CHECK(max_abs_diff(a.output_state, b.output_state) < 1e-10);
            for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(a.fidelities[i] - b.fidelities[i]) < 1e-10);
            CHECK(a.log_magnitude == doctest::Approx(b.log_magnitude).epsilon(1e-9));
        }
    }
}

TEST_CASE("step records") {
    const EvolutionReport r = evolve(loop1_schedule(10, Direction::CCW), BellLabel::Zeta2, Engine::Full);
    REQUIRE(r.steps.size() == 10);
    REQUIRE(r.input.has_value());
    CHECK(*r.input == BellLabel::Zeta2);
    for (const auto& s : r.steps) {
        double sum = 0.0;
        for (double w : s.weights) sum += w;
        CHECK(sum == doctest::Approx(1.0));
    }
    CHECK(evolve(loop1_schedule(10, Direction::CCW), BellLabel::Zeta2, Engine::Full, {false, true}).steps.empty());
}

TEST_CASE("control drift") {
    const double d100 = control_drift(loop1_schedule(100, Direction::CW)).global_max;
    const double d8 = control_drift(loop1_schedule(8, Direction::CW)).global_max;
    CHECK(d100 < 0.1);
    CHECK(d8 > d100);
    CHECK(control_drift(loop1_schedule(100, Direction::CW)).per_step.size() == 99);

    LoopSchedule flat;
    flat.steps.assign(5, loop_start_params());
    const ControlDriftReport z = control_drift(flat);
    CHECK(z.global_max < 1e-12);
}

TEST_CASE("sheet tracking follows the adiabatic picture") {
    // CW: zeta1 and zeta4 start on the gain sheet, zeta2 and zeta3 on the loss sheet.
    const auto cw = evolve_bell_inputs(loop1_schedule(100, Direction::CW), Engine::Full);
    CHECK(sheet_trace(cw[0]).switches == 0);
    CHECK(sheet_trace(cw[1]).switches >= 1);
    CHECK(sheet_trace(cw[2]).switches >= 1);
    CHECK(sheet_trace(cw[3]).switches == 0);
    const auto ccw = evolve_bell_inputs(loop1_schedule(100, Direction::CCW), Engine::Full);
    CHECK(sheet_trace(ccw[0]).switches >= 1);
    CHECK(sheet_trace(ccw[1]).switches == 0);
    CHECK(sheet_trace(ccw[2]).switches == 0);
    CHECK(sheet_trace(ccw[3]).switches >= 1);

    EvolutionReport bare = cw[0];
    bare.steps.clear();
    CHECK_THROWS_AS(sheet_trace(bare), DomainError);
}

TEST_CASE("static Hermitian schedule keeps weights constant") {
    WalkParams p;
    p.gamma = 0.0;
    p.theta1 = -0.6;
    LoopSchedule flat{std::vector<WalkParams>(12, p), Direction::CW, "flat"};
    const EvolutionReport r = evolve_full(flat, bell_state(BellLabel::Zeta1));
    for (const auto& s : r.steps)
        for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(s.weights_raw[j] - r.steps[0].weights_raw[j]) < 1e-9);
}

TEST_CASE("evolution timing") {
    const auto t0 = std::chrono::steady_clock::now();
    (void)evolve(loop1_schedule(100, Direction::CW), BellLabel::Zeta1, Engine::Full);
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(dt < 0.1);
}

TEST_CASE("optimizer keeps the equal-spacing baseline and improves small N") {
    OptimizeOptions o;
    o.n = 8;
    o.restarts = 3;
    o.max_evaluations = 1500;
    const OptimizeResult r8 = optimize_schedule(o);
    CHECK(r8.objective >= r8.initial_objective);
    CHECK(r8.objective >= 0.85);
    CHECK(r8.phases.size() == 8);
    CHECK(r8.phases[0] == 0.0);
    CHECK(r8.cw.steps[0].theta1 == doctest::Approx(-0.6));
    CHECK(conversion_objective(r8.phases, kLoop1, Engine::Full) == doctest::Approx(r8.objective).epsilon(1e-12));

    o.n = 4;
    const OptimizeResult r4 = optimize_schedule(o);
    CHECK(r4.objective < r8.objective);

    o.n = 3;
    CHECK_THROWS_AS(optimize_schedule(o), DomainError);
}

TEST_CASE("optimizer does not degrade an already good schedule") {
    OptimizeOptions o;
    o.n = 100;
    o.restarts = 1;
    o.max_evaluations = 150;
    const OptimizeResult r = optimize_schedule(o);
    CHECK(r.initial_objective >= 0.95);
    CHECK(r.objective >= r.initial_objective);
}

TEST_CASE("optimizer is deterministic for a seed") {
    OptimizeOptions o;
    o.n = 5;
    o.restarts = 2;
    o.max_evaluations = 300;
    o.seed = 77;
    const OptimizeResult a = optimize_schedule(o);
    const OptimizeResult b = optimize_schedule(o);
    CHECK(a.phases == b.phases);
    CHECK(a.objective == b.objective);
}
