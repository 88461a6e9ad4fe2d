// Copyright 2026 The hybridsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hybridsim/errors.hpp"

namespace hybridsim {

using Complex = std::complex<double>;

/// Dense row-major complex matrix.
class ComplexMatrix {
   public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionError("ComplexMatrix: entry count does not match rows*cols");
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(std::span<const double> d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static ComplexMatrix diagonal(std::span<const Complex> d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    /// Builds a matrix from nested rows, e.g. {{0, 1}, {1, 0}}.
    static ComplexMatrix from_rows(const std::vector<std::vector<Complex>>& rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.front().size();
        ComplexMatrix m(r, c);
        for (std::size_t i = 0; i < r; ++i) {
            if (rows[i].size() != c) throw DimensionError("ComplexMatrix::from_rows: ragged rows");
            for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<Complex> entries() { return data_; }
    std::span<const Complex> entries() const { return data_; }
    Complex* data() { return data_.data(); }
    const Complex* data() const { return data_.data(); }

    std::vector<Complex> column(std::size_t j) const {
        std::vector<Complex> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
        return out;
    }

    Complex trace() const {
        Complex t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    ComplexMatrix& operator*=(Complex s) {
        for (auto& z : data_) z *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
    friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw DimensionError("matrix product: inner dimensions differ");
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            Complex* orow = &out.data_[i * out.cols_];
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex{}) continue;
                const Complex* brow = &b.data_[k * b.cols_];
                for (std::size_t j = 0; j < b.cols_; ++j) orow[j] += aik * brow[j];
            }
        }
        return out;
    }

    friend std::vector<Complex> operator*(const ComplexMatrix& a, std::span<const Complex> v) {
        if (a.cols_ != v.size()) throw DimensionError("matrix-vector product: dimensions differ");
        std::vector<Complex> out(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            Complex acc = 0.0;
            for (std::size_t k = 0; k < a.cols_; ++k) acc += a(i, k) * v[k];
            out[i] = acc;
        }
        return out;
    }

   private:
    void require_same_shape(const ComplexMatrix& o, const char* what) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw DimensionError(std::string("ComplexMatrix::") + what + ": shape mismatch");
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

/// max_{ij} |A_ij - B_ij|.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_diff: shape mismatch");
    double m = 0.0;
    auto ea = a.entries();
    auto eb = b.entries();
    for (std::size_t k = 0; k < ea.size(); ++k) m = std::max(m, std::abs(ea[k] - eb[k]));
    return m;
}

/// max_{ij} |A_ij - conj(A_ji)|.
inline double hermiticity_defect(const ComplexMatrix& a) {
    if (!a.is_square()) throw DimensionError("hermiticity_defect: matrix is not square");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
    return m;
}

inline bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12) {
    return a.is_square() && hermiticity_defect(a) <= rel_tol * a.max_abs();
}

/// max_{ij} |(U^dagger U - I)_ij|. Works for tall (column-subset) blocks too.
inline double unitarity_defect(const ComplexMatrix& u) {
    const ComplexMatrix g = u.adjoint() * u;
    return max_abs_diff(g, ComplexMatrix::identity(g.rows()));
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const Complex aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return out;
}

struct EigenDecomposition {
    std::vector<double> eigenvalues;  ///< ascending
    ComplexMatrix eigenvectors;       ///< columns are eigenvectors
};

namespace detail {

// Rotates the column so that its largest-magnitude entry is real and positive.
// Entries within a relative 1e-6 of the maximum count as ties; the one with the
// highest index wins, so antisymmetric charge-basis states always carry a
// positive amplitude at positive n.
inline void fix_column_phase(ComplexMatrix& v, std::size_t col) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.rows(); ++i) m = std::max(m, std::abs(v(i, col)));
    if (m == 0.0) return;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < v.rows(); ++i)
        if (std::abs(v(i, col)) >= (1.0 - 1e-6) * m) pick = i;
    const Complex z = v(pick, col);
    const Complex rot = std::conj(z) / std::abs(z);
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, col) *= rot;
    v(pick, col) = std::abs(z);
}

}  // namespace detail

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Throws DimensionError for non-square input and SymmetryError when
/// max|A_ij - conj(A_ji)| exceeds 1e-12 * max|A_ij|. The input is symmetrized
/// before rotating, eigenvalues come back ascending and every eigenvector
/// follows the phase convention of detail::fix_column_phase.
inline EigenDecomposition eig_hermitian(const ComplexMatrix& input) {
    if (!input.is_square()) throw DimensionError("eig_hermitian: matrix is not square");
    const std::size_t n = input.rows();
    const double scale = input.max_abs();
    if (hermiticity_defect(input) > 1e-12 * scale) throw SymmetryError("eig_hermitian: matrix is not Hermitian");

    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = input(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex s = 0.5 * (input(i, j) + std::conj(input(j, i)));
            a(i, j) = s;
            a(j, i) = std::conj(s);
        }
    }
    ComplexMatrix v = ComplexMatrix::identity(n);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
        return std::sqrt(2.0 * s);
    };
    double frob = 0.0;
    for (const auto& z : a.entries()) frob += std::norm(z);
    frob = std::sqrt(frob);

    constexpr int kMaxSweeps = 100;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < kMaxSweeps && frob > 0.0; ++sweep) {
        if (off_norm() <= eps * 1e-2 * frob) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                // Skip rotations that can no longer change either diagonal entry.
                if (sweep > 3 && mag < eps * 1e-3 * std::abs(app) && mag < eps * 1e-3 * std::abs(aqq)) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Complex e = apq / mag;
                const Complex se = s * e;
                const Complex sec = s * std::conj(e);

                // A <- A J, with J_pp = c, J_pq = s e, J_qp = -s conj(e), J_qq = c.
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = c * akp - sec * akq;
                    a(k, q) = se * akp + c * akq;
                }
                // A <- J^dagger A.
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = c * apk - se * aqk;
                    a(q, k) = sec * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = c * vkp - sec * vkq;
                    v(k, q) = se * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
        detail::fix_column_phase(out.eigenvectors, k);
    }
    return out;
}

/// V diag(f(lambda)) V^dagger for a decomposition and a per-eigenvalue phase.
inline ComplexMatrix reconstruct(const EigenDecomposition& eig, std::span<const Complex> diag_values) {
    const auto& v = eig.eigenvectors;
    const std::size_t n = v.rows();
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Complex acc = 0.0;
            for (std::size_t k = 0; k < diag_values.size(); ++k) acc += v(i, k) * diag_values[k] * std::conj(v(j, k));
            out(i, j) = acc;
        }
    return out;
}

/// exp(i * scale * A) for Hermitian A, always through the eigendecomposition.
inline ComplexMatrix expm_hermitian(const ComplexMatrix& a, double scale) {
    const EigenDecomposition eig = eig_hermitian(a);
    std::vector<Complex> phases(eig.eigenvalues.size());
    for (std::size_t k = 0; k < phases.size(); ++k) phases[k] = std::polar(1.0, scale * eig.eigenvalues[k]);
    return reconstruct(eig, phases);
}

}  // namespace hybridsim
