#include <doctest.h>

#include <random>

#include "eploop/errors.hpp"
#include "eploop/metrics.hpp"
#include "eploop/smallmat.hpp"
#include "test_support.hpp"

using namespace eploop;

namespace {
const CMat2 kSx{0.0, 1.0, 1.0, 0.0};
}

TEST_CASE("kron basics") {
    CHECK(max_abs_diff(kron(CMat2::identity(), CMat2::identity()), CMat4::identity()) == 0.0);

    const CMat2 m{1.0, Complex{2.0, 1.0}, -3.0, Complex{0.0, 4.0}};
    const CMat4 block = kron(CMat2::identity(), m);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(block(r, c) == m(r, c));
            CHECK(block(r + 2, c + 2) == m(r, c));
            CHECK(block(r, c + 2) == Complex{});
            CHECK(block(r + 2, c) == Complex{});
        }

    const CVec4 moved = kron(kSx, CMat2::identity()) * CVec4{1.0, 0.0, 0.0, 0.0};
    CHECK(max_abs_diff(moved, CVec4{0.0, 0.0, 1.0, 0.0}) == 0.0);
}

TEST_CASE("kron mixed product property") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        const CMat2 a = testsupport::random_mat2(rng), b = testsupport::random_mat2(rng);
        const CMat2 c = testsupport::random_mat2(rng), d = testsupport::random_mat2(rng);
        CHECK(max_abs_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)) < 1e-12);
        CHECK(max_abs_diff(kron(a + c, b), kron(a, b) + kron(c, b)) < 1e-12);
    }
}

TEST_CASE("inverse4") {
    CHECK(max_abs_diff(inverse4(CMat4::identity()), CMat4::identity()) == 0.0);
    const CMat4 d = CMat4::diagonal({2.0, 1.0, 1.0, 1.0});
    CHECK(max_abs_diff(inverse4(d), CMat4::diagonal({0.5, 1.0, 1.0, 1.0})) < 1e-15);

    const CMat4 c1_inv{-kI, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.8071 * kI, 0.0, 0.0, 0.0, 0.0, 1.2389, 0.0};
    CHECK(max_abs_diff(inverse4(c1_inv) * c1_inv, CMat4::identity()) < 1e-10);

    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const CMat4 m = testsupport::random_mat4(rng);
        const CMat4 inv = inverse4(m);
        CHECK(max_abs_diff(m * inv, CMat4::identity()) < 1e-10);
        CHECK(max_abs_diff(inv * m, CMat4::identity()) < 1e-10);
    }
}

TEST_CASE("inverse4 rejects singular and non-finite input") {
    const CMat4 s = CMat4::diagonal({1.0, 1.0, 1.0, 0.0});
    CHECK_THROWS_AS(inverse4(s), SingularMatrix);
    CHECK_THROWS_AS(inverse4(CMat4{}), SingularMatrix);
    const CMat4 nan = CMat4::diagonal({std::nan(""), 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(inverse4(nan), NonFinite);
}

TEST_CASE("det4 of a permutation and a diagonal") {
    CHECK(std::abs(det4(CMat4::diagonal({2.0, 3.0, kI, 1.0})) - 6.0 * kI) < 1e-14);
    const CMat4 swap{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
    CHECK(std::abs(det4(swap) + 1.0) < 1e-15);
}

TEST_CASE("hermitian_eig4 diagonal and projector") {
    const HermitianEigen e = hermitian_eig4(CMat4::diagonal({1.0, 2.0, 3.0, 4.0}));
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(e.values[k] == doctest::Approx(static_cast<double>(k + 1)));
        CHECK(std::abs(e.vectors[k][k]) == doctest::Approx(1.0));
    }

    const CVec4 z = bell_state(BellLabel::Zeta1);
    const HermitianEigen p = hermitian_eig4(CMat4::outer(z, z));
    CHECK(std::abs(p.values[0]) < 1e-14);
    CHECK(std::abs(p.values[1]) < 1e-14);
    CHECK(std::abs(p.values[2]) < 1e-14);
    CHECK(p.values[3] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hermitian_eig4 random reconstruction") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        const CMat4 h = testsupport::random_hermitian(rng);
        const HermitianEigen e = hermitian_eig4(h);
        CMat4 rebuilt;
        double sum = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            rebuilt = rebuilt + Complex{e.values[k]} * CMat4::outer(e.vectors[k], e.vectors[k]);
            sum += e.values[k];
            CHECK(max_abs_diff(h * e.vectors[k], e.values[k] * e.vectors[k]) < 1e-9);
            if (k > 0) CHECK(e.values[k - 1] <= e.values[k]);
            for (std::size_t j = 0; j < 4; ++j) {
                const double expected = (j == k) ? 1.0 : 0.0;
                CHECK(std::abs(inner(e.vectors[j], e.vectors[k]) - expected) < 1e-10);
            }
        }
        CHECK(max_abs_diff(rebuilt, h) < 1e-9);
        CHECK(std::abs(sum - h.trace().real()) < 1e-10);
    }
}

TEST_CASE("hermitian_eig4 rejects non-Hermitian input") {
    CMat4 m = CMat4::identity();
    m = m + CMat4::outer(CVec4{1.0, 0.0, 0.0, 0.0}, CVec4{0.0, 1.0, 0.0, 0.0});
    CHECK_THROWS_AS(hermitian_eig4(m), NotHermitian);
}

TEST_CASE("psd_sqrt") {
    CHECK(max_abs_diff(psd_sqrt(CMat4::identity()), CMat4::identity()) < 1e-14);
    CHECK(max_abs_diff(psd_sqrt(CMat4::diagonal({4.0, 1.0, 0.0, 0.0})), CMat4::diagonal({2.0, 1.0, 0.0, 0.0})) < 1e-14);

    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const CMat4 rho = testsupport::random_density(rng);
        const CMat4 r = psd_sqrt(rho);
        CHECK(max_abs_diff(r * r, rho) < 1e-8);
        CHECK(anti_hermitian_norm(r) < 1e-12);
        CHECK(hermitian_eig4(r).values[0] > -1e-12);
    }

    CHECK_THROWS_AS(psd_sqrt(CMat4::diagonal({1.0, 1.0, 1.0, -0.1})), NegativeEigenvalue);
    CHECK_NOTHROW(psd_sqrt(CMat4::diagonal({1.0, 1.0, 1.0, -1e-9})));
}
