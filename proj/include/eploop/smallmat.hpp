// smallmat.hpp
// Fixed-size complex matrices (2x2, 4x4) and two-qubit state vectors.
//
// Values are immutable once built: every operation returns a new value.
// Storage is row-major; two-qubit basis order is |00>, |01>, |10>, |11>.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>

namespace eploop {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

template <std::size_t N>
class Vector {
public:
    Vector() { data_.fill(Complex{}); }
    explicit Vector(const std::array<Complex, N>& data) : data_(data) {}
    Vector(std::initializer_list<Complex> values) {
        data_.fill(Complex{});
        std::size_t i = 0;
        for (const auto& v : values) {
            if (i < N) data_[i++] = v;
        }
    }

    static constexpr std::size_t size() { return N; }
    const Complex& operator[](std::size_t i) const { return data_[i]; }
    const std::array<Complex, N>& data() const { return data_; }

    // Euclidean norm.
    double norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }
    Vector normalized() const;
    Vector conj() const {
        std::array<Complex, N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = std::conj(data_[i]);
        return Vector(out);
    }
    bool all_finite() const {
        for (const auto& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    friend Vector operator+(const Vector& a, const Vector& b) {
        std::array<Complex, N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = a.data_[i] + b.data_[i];
        return Vector(out);
    }
    friend Vector operator-(const Vector& a, const Vector& b) {
        std::array<Complex, N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = a.data_[i] - b.data_[i];
        return Vector(out);
    }
    friend Vector operator*(Complex s, const Vector& a) {
        std::array<Complex, N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = s * a.data_[i];
        return Vector(out);
    }
    friend Vector operator*(const Vector& a, Complex s) { return s * a; }

private:
    std::array<Complex, N> data_;
};

template <std::size_t N>
Vector<N> Vector<N>::normalized() const {
    const double n = norm();
    return Complex{1.0 / n, 0.0} * *this;
}

// <a|b> with the first argument conjugated.
template <std::size_t N>
Complex inner(const Vector<N>& a, const Vector<N>& b) {
    Complex s{};
    for (std::size_t i = 0; i < N; ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// Plain bilinear contraction (no conjugation): row-vector times column-vector.
template <std::size_t N>
Complex dot(const Vector<N>& row, const Vector<N>& col) {
    Complex s{};
    for (std::size_t i = 0; i < N; ++i) s += row[i] * col[i];
    return s;
}

template <std::size_t N>
class Matrix {
public:
    Matrix() { data_.fill(Complex{}); }
    explicit Matrix(const std::array<Complex, N * N>& data) : data_(data) {}
    // Row-major list of entries.
    Matrix(std::initializer_list<Complex> values) {
        data_.fill(Complex{});
        std::size_t i = 0;
        for (const auto& v : values) {
            if (i < N * N) data_[i++] = v;
        }
    }

    static Matrix identity() {
        std::array<Complex, N * N> d{};
        for (std::size_t i = 0; i < N; ++i) d[i * N + i] = 1.0;
        return Matrix(d);
    }
    static Matrix diagonal(const std::array<Complex, N>& diag) {
        std::array<Complex, N * N> d{};
        for (std::size_t i = 0; i < N; ++i) d[i * N + i] = diag[i];
        return Matrix(d);
    }
    // Matrix whose columns are the given vectors.
    static Matrix from_columns(const std::array<Vector<N>, N>& cols) {
        std::array<Complex, N * N> d{};
        for (std::size_t c = 0; c < N; ++c)
            for (std::size_t r = 0; r < N; ++r) d[r * N + c] = cols[c][r];
        return Matrix(d);
    }
    // Matrix whose rows are the given vectors (taken as-is, no conjugation).
    static Matrix from_rows(const std::array<Vector<N>, N>& rows) {
        std::array<Complex, N * N> d{};
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) d[r * N + c] = rows[r][c];
        return Matrix(d);
    }
    static Matrix outer(const Vector<N>& a, const Vector<N>& b) {
        std::array<Complex, N * N> d{};
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) d[r * N + c] = a[r] * std::conj(b[c]);
        return Matrix(d);
    }

    static constexpr std::size_t rows() { return N; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * N + c]; }
    const std::array<Complex, N * N>& data() const { return data_; }

    Vector<N> column(std::size_t c) const {
        std::array<Complex, N> out;
        for (std::size_t r = 0; r < N; ++r) out[r] = (*this)(r, c);
        return Vector<N>(out);
    }
    Vector<N> row(std::size_t r) const {
        std::array<Complex, N> out;
        for (std::size_t c = 0; c < N; ++c) out[c] = (*this)(r, c);
        return Vector<N>(out);
    }

    Matrix adjoint() const {
        std::array<Complex, N * N> d;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) d[c * N + r] = std::conj((*this)(r, c));
        return Matrix(d);
    }
    Matrix transpose() const {
        std::array<Complex, N * N> d;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) d[c * N + r] = (*this)(r, c);
        return Matrix(d);
    }
    Complex trace() const {
        Complex t{};
        for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
        return t;
    }
    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }
    bool all_finite() const {
        for (const auto& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        std::array<Complex, N * N> d;
        for (std::size_t i = 0; i < N * N; ++i) d[i] = a.data_[i] + b.data_[i];
        return Matrix(d);
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        std::array<Complex, N * N> d;
        for (std::size_t i = 0; i < N * N; ++i) d[i] = a.data_[i] - b.data_[i];
        return Matrix(d);
    }
    friend Matrix operator*(Complex s, const Matrix& a) {
        std::array<Complex, N * N> d;
        for (std::size_t i = 0; i < N * N; ++i) d[i] = s * a.data_[i];
        return Matrix(d);
    }
    friend Matrix operator*(const Matrix& a, Complex s) { return s * a; }
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        std::array<Complex, N * N> d{};
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t k = 0; k < N; ++k) {
                const Complex ark = a(r, k);
                for (std::size_t c = 0; c < N; ++c) d[r * N + c] += ark * b(k, c);
            }
        return Matrix(d);
    }
    friend Vector<N> operator*(const Matrix& a, const Vector<N>& v) {
        std::array<Complex, N> out{};
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) out[r] += a(r, c) * v[c];
        return Vector<N>(out);
    }

private:
    std::array<Complex, N * N> data_;
};

using CMat2 = Matrix<2>;
using CMat4 = Matrix<4>;
using CVec2 = Vector<2>;
using CVec4 = Vector<4>;

// Largest entrywise modulus of a - b.
template <std::size_t N>
double max_abs_diff(const Matrix<N>& a, const Matrix<N>& b) {
    return (a - b).max_abs();
}

template <std::size_t N>
double max_abs_diff(const Vector<N>& a, const Vector<N>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Complex det2(const CMat2& m);

// Kronecker product in the |00>,|01>,|10>,|11> order.
CMat4 kron(const CMat2& a, const CMat2& b);
CVec4 kron(const CVec2& a, const CVec2& b);

// Partial-pivot LU inverse. Throws SingularMatrix when |det| falls below
// 1e-12 * (max entry)^4, NonFinite on NaN/Inf input.
CMat4 inverse4(const CMat4& m);
Complex det4(const CMat4& m);

struct HermitianEigen {
    std::array<double, 4> values;   // ascending
    std::array<CVec4, 4> vectors;   // orthonormal, vectors[j] pairs with values[j]
};

// Cyclic complex Jacobi. The input is symmetrized as (m + m^dagger)/2; an
// anti-Hermitian part above 1e-6 raises NotHermitian.
HermitianEigen hermitian_eig4(const CMat4& m);

// Eigenvalues at or below this level are indistinguishable from round-off
// (32 eps times the spectral radius).
double eigen_noise_floor(const HermitianEigen& eig);

// Principal square root of a Hermitian PSD matrix. Eigenvalues in
// [-1e-6, noise floor] are clipped to zero; below -1e-6 raises
// NegativeEigenvalue.
CMat4 psd_sqrt(const CMat4& m);

// Largest |m - m^dagger| entry.
double anti_hermitian_norm(const CMat4& m);

}  // namespace eploop
