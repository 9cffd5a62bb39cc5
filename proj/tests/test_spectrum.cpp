#include <doctest.h>

#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "eploop/errors.hpp"
#include "eploop/metrics.hpp"
#include "eploop/spectrum.hpp"
#include "test_support.hpp"

using namespace eploop;

namespace {

bool away_from_ep(const WalkParams& p) {
    const Complex D0 = d_coefficients(p).D0;
    return std::abs(std::sqrt(D0 * D0 - 1.0)) > 1e-3;
}

}  // namespace

TEST_CASE("eigensystem residuals and biorthonormality") {
    std::mt19937_64 rng(101);
    int checked = 0;
    for (int t = 0; t < 1000; ++t) {
        const WalkParams p = testsupport::random_params(rng);
        if (!away_from_ep(p)) continue;
        ++checked;
        const EigenSystem es = eigensystem(p);
        const CMat4 u = u_step(p);
        const double scale = std::max(1.0, u.max_abs());
        for (std::size_t j = 0; j < 4; ++j) {
            const double an = std::max(1.0, es.alpha[j].norm());
            const double bn = std::max(1.0, es.beta[j].norm());
            CHECK(max_abs_diff(u * es.alpha[j], es.eta(j) * es.alpha[j]) < 1e-9 * scale * an);
            CHECK(max_abs_diff(u.adjoint() * es.beta[j], std::conj(es.eta(j)) * es.beta[j]) < 1e-9 * scale * bn);
            for (std::size_t i = 0; i < 4; ++i) {
                const double expected = (i == j) ? 1.0 : 0.0;
                CHECK(std::abs(inner(es.beta[i], es.alpha[j]) - expected) < 1e-10 * an * bn);
            }
        }
        const Complex D0 = d_coefficients(p).D0;
        const Complex root = coalescence_root(D0);
        CHECK(std::abs(es.eta_plus - (D0 + root)) < 1e-12 * std::max(1.0, std::abs(D0)));
        CHECK(std::abs(es.eta_minus - (D0 - root)) < 1e-12 * std::max(1.0, std::abs(D0)));
        CHECK(std::abs(std::exp(-kI * es.lambda_plus) - es.eta_plus) < 1e-12 * std::max(1.0, std::abs(es.eta_plus)));
        CHECK(std::abs(std::exp(-kI * es.lambda_minus) - es.eta_minus) < 1e-12 * std::max(1.0, std::abs(es.eta_minus)));
    }
    CHECK(checked > 900);
}

TEST_CASE("eigenstates at the start point are close to Bell states") {
    const EigenSystem es = eigensystem(loop_start_params());
    const auto states = unit_norm_states(es);
    const auto partner = bell_partners(es);
    std::set<std::size_t> used(partner.begin(), partner.end());
    CHECK(used.size() == 4);
    for (BellLabel l : kAllBellLabels) {
        const double f = pure_fidelity(bell_state(l), states[partner[index_of(l)]]);
        CHECK(f > 0.97);
    }
}

TEST_CASE("Hermitian limit: left and right eigenstates coincide") {
    WalkParams p;
    p.gamma = 0.0;
    p.phi = 0.0;
    p.theta1 = -0.6;
    const EigenSystem es = eigensystem(p);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(max_abs_diff(es.alpha[j], es.beta[j]) < 1e-12);
        for (std::size_t i = 0; i < 4; ++i) {
            const double expected = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(inner(es.alpha[i], es.alpha[j]) - expected) < 1e-12);
        }
    }
}

TEST_CASE("eigensystem refuses the exceptional point") {
    const EpLocation ep = find_ep(EpSearchBox{});
    WalkParams p;
    p.phi = ep.phi;
    p.theta1 = ep.theta1;
    CHECK_THROWS_AS(eigensystem(p), TooCloseToEP);
}

TEST_CASE("quasienergy branches") {
    const Quasienergy q = quasienergy(loop_start_params());
    CHECK(q.lambda_plus.imag() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::abs(q.lambda_plus.real()) == doctest::Approx(std::acos(d_coefficients(loop_start_params()).d0)));
    CHECK(q.lambda_plus.real() == doctest::Approx(-0.38027).epsilon(1e-4));
    CHECK(q.lambda_minus.real() == doctest::Approx(0.38027).epsilon(1e-4));

    // PT-broken on phi = 0: real eta with |d0| > 1.
    WalkParams b = loop_start_params();
    b.theta1 = -0.2;
    const double d0 = d_coefficients(b).d0;
    REQUIRE(d0 > 1.0);
    const Quasienergy qb = quasienergy(b);
    CHECK(qb.lambda_plus.real() == 0.0);
    CHECK(qb.lambda_minus.real() == 0.0);
    CHECK(qb.lambda_plus.imag() == doctest::Approx(std::log(d0 + std::sqrt(d0 * d0 - 1.0))));
    CHECK(qb.lambda_minus.imag() == doctest::Approx(-qb.lambda_plus.imag()));

    CHECK(quasienergy_of(Complex{-1.0, 0.0}).real() == doctest::Approx(std::numbers::pi));
    CHECK(quasienergy_of(Complex{-1.0, -0.0}).real() == doctest::Approx(std::numbers::pi));

    std::mt19937_64 rng(5);
    for (int t = 0; t < 300; ++t) {
        const WalkParams p = testsupport::random_params(rng);
        const Quasienergy r = quasienergy(p);
        const Complex sum = r.lambda_plus + r.lambda_minus;
        const double wrapped = std::remainder(sum.real(), 2.0 * std::numbers::pi);
        CHECK(std::abs(wrapped) < 1e-9);
        CHECK(std::abs(sum.imag()) < 1e-9);
        CHECK(r.lambda_plus.real() > -std::numbers::pi);
        CHECK(r.lambda_plus.real() <= std::numbers::pi);
    }
}

TEST_CASE("riemann surface grid") {
    SurfaceGrid g;
    g.phi_count = 2;
    g.theta1_count = 2;
    const auto s = riemann_surface(g);
    REQUIRE(s.size() == 4);
    CHECK(s[0].phi == g.phi_min);
    CHECK(s[0].theta1 == g.theta1_min);
    CHECK(s[1].phi == g.phi_min);
    CHECK(s[1].theta1 == g.theta1_max);
    CHECK(s[2].phi == g.phi_max);
    CHECK(s[3].theta1 == g.theta1_max);

    g.phi_count = 1;
    CHECK_THROWS_AS(riemann_surface(g), DomainError);
}

TEST_CASE("riemann surface matches the coin operator and gain/loss coloring") {
    SurfaceGrid g;
    g.phi_count = 21;
    g.theta1_count = 31;
    const auto samples = riemann_surface(g);
    bool saw_broken = false, saw_unbroken = false;
    for (const auto& s : samples) {
        WalkParams p;
        p.phi = s.phi;
        p.theta1 = s.theta1;
        const EtaPair e = eta_pair(p);
        CHECK(std::abs(std::abs(e.plus) - std::exp(s.lambda_plus.imag())) < 1e-12);
        CHECK(std::abs(std::abs(e.minus) - std::exp(s.lambda_minus.imag())) < 1e-12);
        if (std::abs(e.plus) > 1.0 + 1e-9) CHECK(s.lambda_plus.imag() > 0.0);
        if (std::abs(e.plus) < 1.0 - 1e-9) CHECK(s.lambda_plus.imag() < 0.0);

        // Eigenvalues of the walking photon's coin give the same quasienergies.
        const CMat2 m = walk_operator_closed(p);
        const Complex tr = m.trace();
        const Complex disc = std::sqrt(tr * tr - 4.0 * det2(m));
        const Complex m1 = (tr - disc) / 2.0, m2 = (tr + disc) / 2.0;
        const bool match = std::abs(m1 - e.minus) + std::abs(m2 - e.plus) < 1e-10 ||
                           std::abs(m1 - e.plus) + std::abs(m2 - e.minus) < 1e-10;
        CHECK(match);

        if (std::abs(s.phi) < 1e-15) {
            const double d0 = d_coefficients(p).d0;
            if (std::abs(d0) <= 1.0) {
                saw_unbroken = true;
                CHECK(s.lambda_plus.imag() == 0.0);
            } else {
                saw_broken = true;
                CHECK(s.lambda_plus.imag() != 0.0);
            }
        }
    }
    CHECK(saw_broken);
    CHECK(saw_unbroken);
}

TEST_CASE("surface CSV") {
    SurfaceGrid g;
    g.phi_count = 2;
    g.theta1_count = 3;
    std::ostringstream os;
    write_surface_csv(os, riemann_surface(g));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "phi,theta1,re_lp,im_lp,re_lm,im_lm");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
    }
    CHECK(rows == 6);
}

TEST_CASE("exceptional point search") {
    const EpSearchBox box;
    const EpLocation ep = find_ep(box);
    CHECK(ep.phi == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ep.theta1 == doctest::Approx(-0.2918).epsilon(1e-3));
    CHECK(ep.residual < 1e-10);

    WalkParams p;
    p.phi = ep.phi;
    p.theta1 = ep.theta1;
    const EtaPair e = eta_pair(p);
    CHECK(std::abs(e.plus - e.minus) < 1e-5);

    const auto all = find_eps(box);
    REQUIRE(all.size() == 2);
    CHECK(all[0].theta1 < all[1].theta1);
    CHECK(all[1].theta1 == doctest::Approx(-0.1316).epsilon(1e-3));

    EpSearchBox hermitian;
    hermitian.gamma = 0.0;
    CHECK_THROWS_AS(find_ep(hermitian), NoBracket);
}

TEST_CASE("exceptional point search with a phase offset") {
    EpSearchBox box;
    box.k = 0.02;
    const EpLocation ep = find_ep(box);
    CHECK(ep.residual < 1e-10);
}
