#include "eploop/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "eploop/errors.hpp"

namespace eploop {

Complex det2(const CMat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

CMat4 kron(const CMat2& a, const CMat2& b) {
    std::array<Complex, 16> d{};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) d[(2 * i + k) * 4 + (2 * j + l)] = a(i, j) * b(k, l);
    return CMat4(d);
}

CVec4 kron(const CVec2& a, const CVec2& b) {
    return CVec4{a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
}

namespace {

struct LU {
    std::array<Complex, 16> a;
    std::array<std::size_t, 4> perm;
    int sign = 1;
    bool singular = false;
};

LU lu_decompose(const CMat4& m) {
    LU lu{m.data(), {0, 1, 2, 3}, 1, false};
    auto at = [&](std::size_t r, std::size_t c) -> Complex& { return lu.a[r * 4 + c]; };
    for (std::size_t k = 0; k < 4; ++k) {
        std::size_t piv = k;
        double best = std::abs(at(k, k));
        for (std::size_t r = k + 1; r < 4; ++r) {
            if (std::abs(at(r, k)) > best) {
                best = std::abs(at(r, k));
                piv = r;
            }
        }
        if (best == 0.0) {
            lu.singular = true;
            return lu;
        }
        if (piv != k) {
            for (std::size_t c = 0; c < 4; ++c) std::swap(at(k, c), at(piv, c));
            std::swap(lu.perm[k], lu.perm[piv]);
            lu.sign = -lu.sign;
        }
        for (std::size_t r = k + 1; r < 4; ++r) {
            at(r, k) /= at(k, k);
            for (std::size_t c = k + 1; c < 4; ++c) at(r, c) -= at(r, k) * at(k, c);
        }
    }
    return lu;
}

Complex lu_det(const LU& lu) {
    if (lu.singular) return Complex{};
    Complex d = static_cast<double>(lu.sign);
    for (std::size_t k = 0; k < 4; ++k) d *= lu.a[k * 4 + k];
    return d;
}

}  // namespace

Complex det4(const CMat4& m) { return lu_det(lu_decompose(m)); }

CMat4 inverse4(const CMat4& m) {
    if (!m.all_finite()) throw NonFinite("inverse4 input");
    const double scale = m.max_abs();
    if (scale == 0.0) throw SingularMatrix("zero matrix");
    const LU lu = lu_decompose(m);
    const double threshold = 1e-12 * scale * scale * scale * scale;
    if (lu.singular || std::abs(lu_det(lu)) <= threshold) throw SingularMatrix("|det| below 1e-12 * scale^4");

    std::array<Complex, 16> inv{};
    for (std::size_t col = 0; col < 4; ++col) {
        // Solve L U x = P e_col.
        std::array<Complex, 4> y{};
        for (std::size_t r = 0; r < 4; ++r) {
            Complex s = (lu.perm[r] == col) ? Complex{1.0} : Complex{};
            for (std::size_t c = 0; c < r; ++c) s -= lu.a[r * 4 + c] * y[c];
            y[r] = s;
        }
        for (std::size_t r = 4; r-- > 0;) {
            Complex s = y[r];
            for (std::size_t c = r + 1; c < 4; ++c) s -= lu.a[r * 4 + c] * y[c];
            y[r] = s / lu.a[r * 4 + r];
        }
        for (std::size_t r = 0; r < 4; ++r) inv[r * 4 + col] = y[r];
    }
    CMat4 out(inv);
    if (!out.all_finite()) throw NonFinite("inverse4 result");
    return out;
}

double anti_hermitian_norm(const CMat4& m) { return (m - m.adjoint()).max_abs(); }

HermitianEigen hermitian_eig4(const CMat4& m) {
    if (!m.all_finite()) throw NonFinite("hermitian_eig4 input");
    if (anti_hermitian_norm(m) > 1e-6) throw NotHermitian("anti-Hermitian part exceeds 1e-6");

    std::array<Complex, 16> a = (0.5 * (m + m.adjoint())).data();
    std::array<Complex, 16> v = CMat4::identity().data();
    auto A = [&](std::size_t r, std::size_t c) -> Complex& { return a[r * 4 + c]; };
    auto V = [&](std::size_t r, std::size_t c) -> Complex& { return v[r * 4 + c]; };

    double total = 0.0;
    for (const auto& x : a) total += std::norm(x);
    const double tol = 1e-30 * std::max(total, 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < 4; ++p)
            for (std::size_t q = p + 1; q < 4; ++q) off += std::norm(A(p, q));
        if (off <= tol) break;

        for (std::size_t p = 0; p < 4; ++p) {
            for (std::size_t q = p + 1; q < 4; ++q) {
                const double mag = std::abs(A(p, q));
                if (mag == 0.0) continue;
                // Phase rotation makes the (p,q) entry real, then a real
                // Jacobi rotation annihilates it.
                const Complex phase = A(p, q) / mag;
                const double app = A(p, p).real();
                const double aqq = A(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // Columns p and q of the unitary: J(p,p)=c, J(p,q)=s,
                // J(q,p)=-s*conj(phase), J(q,q)=c*conj(phase).
                const Complex jpp = c, jpq = s, jqp = -s * std::conj(phase), jqq = c * std::conj(phase);

                // A <- A J
                for (std::size_t r = 0; r < 4; ++r) {
                    const Complex arp = A(r, p), arq = A(r, q);
                    A(r, p) = arp * jpp + arq * jqp;
                    A(r, q) = arp * jpq + arq * jqq;
                }
                // A <- J^dagger A
                for (std::size_t col = 0; col < 4; ++col) {
                    const Complex apc = A(p, col), aqc = A(q, col);
                    A(p, col) = std::conj(jpp) * apc + std::conj(jqp) * aqc;
                    A(q, col) = std::conj(jpq) * apc + std::conj(jqq) * aqc;
                }
                A(p, q) = 0.0;
                A(q, p) = 0.0;
                A(p, p) = A(p, p).real();
                A(q, q) = A(q, q).real();
                // V <- V J
                for (std::size_t r = 0; r < 4; ++r) {
                    const Complex vrp = V(r, p), vrq = V(r, q);
                    V(r, p) = vrp * jpp + vrq * jqp;
                    V(r, q) = vrp * jpq + vrq * jqq;
                }
            }
        }
    }

    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return A(i, i).real() < A(j, j).real(); });

    HermitianEigen out;
    const CMat4 vecs(v);
    for (std::size_t k = 0; k < 4; ++k) {
        out.values[k] = A(order[k], order[k]).real();
        out.vectors[k] = vecs.column(order[k]);
    }
    return out;
}

double eigen_noise_floor(const HermitianEigen& eig) {
    double scale = 0.0;
    for (double v : eig.values) scale = std::max(scale, std::abs(v));
    return 32.0 * std::numeric_limits<double>::epsilon() * scale;
}

CMat4 psd_sqrt(const CMat4& m) {
    const HermitianEigen eig = hermitian_eig4(m);
    const double floor = eigen_noise_floor(eig);
    CMat4 out;
    for (std::size_t k = 0; k < 4; ++k) {
        double lambda = eig.values[k];
        if (lambda < -1e-6) throw NegativeEigenvalue("psd_sqrt eigenvalue " + std::to_string(lambda));
        if (lambda <= floor) continue;
        out = out + Complex{std::sqrt(lambda)} * CMat4::outer(eig.vectors[k], eig.vectors[k]);
    }
    return out;
}

}  // namespace eploop
