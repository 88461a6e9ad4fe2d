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


#include "gtest/gtest.h"

#include "hybridsim/linalg.hpp"
#include "test_util.hpp"

using namespace hybridsim;
using hybridsim::testing::random_hermitian;
using hybridsim::testing::taylor_expm;
using hybridsim::testing::to_eigen;

TEST(linalg, matrix_basics) {
    const auto a = ComplexMatrix::from_rows({{1.0, Complex(0, 2)}, {3.0, 4.0}});
    EXPECT_EQ(a.rows(), 2u);
    EXPECT_EQ(a(0, 1), Complex(0, 2));
    EXPECT_EQ(a.adjoint()(1, 0), Complex(0, -2));
    EXPECT_EQ(a.trace(), Complex(5.0, 0.0));
    EXPECT_THROW(ComplexMatrix::from_rows({{1.0}, {1.0, 2.0}}), DimensionError);
    EXPECT_THROW(a * ComplexMatrix(3, 3), DimensionError);
    EXPECT_DOUBLE_EQ(max_abs_diff(a * ComplexMatrix::identity(2), a), 0.0);
}

TEST(linalg, hermiticity) {
    const auto h = random_hermitian(6, 1);
    EXPECT_TRUE(is_hermitian(h));
    auto bad = h;
    bad(0, 1) += 1e-3;
    EXPECT_FALSE(is_hermitian(bad));
    EXPECT_THROW(eig_hermitian(bad), SymmetryError);
    EXPECT_THROW(eig_hermitian(ComplexMatrix(2, 3)), DimensionError);
}

TEST(linalg, eig_pauli_x) {
    const auto x = ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    const auto eig = eig_hermitian(x);
    EXPECT_NEAR(eig.eigenvalues[0], -1.0, 1e-15);
    EXPECT_NEAR(eig.eigenvalues[1], 1.0, 1e-15);
    // Ties in magnitude go to the highest index: (-1, 1)/sqrt2 and (1, 1)/sqrt2.
    EXPECT_NEAR(eig.eigenvectors(1, 0).real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(eig.eigenvectors(0, 0).real(), -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(eig.eigenvectors(1, 1).real(), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(linalg, eig_degenerate_identity) {
    const auto eig = eig_hermitian(ComplexMatrix::identity(5));
    for (double e : eig.eigenvalues) EXPECT_DOUBLE_EQ(e, 1.0);
    EXPECT_LE(unitarity_defect(eig.eigenvectors), 1e-15);
}

TEST(linalg, eig_matches_eigen_oracle_101) {
    const auto h = random_hermitian(101, 7);
    const auto eig = eig_hermitian(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> oracle(to_eigen(h));
    const double scale = h.max_abs();
    for (std::size_t k = 0; k < 101; ++k) {
        EXPECT_NEAR(eig.eigenvalues[k], oracle.eigenvalues()(k), 1e-12 * 101 * scale);
    }
    EXPECT_LE(unitarity_defect(eig.eigenvectors), 1e-12);
    std::vector<Complex> lambda(eig.eigenvalues.begin(), eig.eigenvalues.end());
    EXPECT_LE(max_abs_diff(reconstruct(eig, lambda), h), 1e-11 * scale);
    for (std::size_t k = 1; k < 101; ++k) EXPECT_LE(eig.eigenvalues[k - 1], eig.eigenvalues[k]);
}

TEST(linalg, eig_phase_convention) {
    const auto eig = eig_hermitian(random_hermitian(12, 3));
    for (std::size_t c = 0; c < 12; ++c) {
        std::size_t pick = 0;
        for (std::size_t i = 0; i < 12; ++i) {
            if (std::abs(eig.eigenvectors(i, c)) >= std::abs(eig.eigenvectors(pick, c))) pick = i;
        }
        EXPECT_DOUBLE_EQ(eig.eigenvectors(pick, c).imag(), 0.0);
        EXPECT_GT(eig.eigenvectors(pick, c).real(), 0.0);
    }
}

TEST(linalg, expm_matches_taylor_oracle) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto h = random_hermitian(16, seed, 0.7);
        for (double s : {-0.3, 0.01, 2.0}) {
            EXPECT_LE(max_abs_diff(expm_hermitian(h, s), taylor_expm(h, s)), 1e-12) << "seed " << seed << " s " << s;
        }
    }
}

TEST(linalg, expm_properties) {
    const auto h = random_hermitian(10, 21);
    EXPECT_LE(max_abs_diff(expm_hermitian(h, 0.0), ComplexMatrix::identity(10)), 1e-14);
    const auto u = expm_hermitian(h, 0.37);
    EXPECT_LE(unitarity_defect(u), 1e-13);
    EXPECT_LE(max_abs_diff(u * expm_hermitian(h, -0.37), ComplexMatrix::identity(10)), 1e-13);
    EXPECT_LE(max_abs_diff(expm_hermitian(h, 0.2) * expm_hermitian(h, 0.17), u), 1e-13);
}

TEST(linalg, kron_index_oracle) {
    const auto a = random_hermitian(3, 31);
    const auto b = random_hermitian(4, 32);
    const auto k = kron(a, b);
    ASSERT_EQ(k.rows(), 12u);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t p = 0; p < 4; ++p)
                for (std::size_t q = 0; q < 4; ++q) EXPECT_LE(std::abs(k(i * 4 + p, j * 4 + q) - a(i, j) * b(p, q)), 1e-15);
}

TEST(linalg, commutator_of_commuting_matrices) {
    const auto h = random_hermitian(5, 41);
    EXPECT_LE(commutator(h, h * h).max_abs(), 1e-12);
    const auto x = ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    const auto z = ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
    EXPECT_DOUBLE_EQ(commutator(x, z).max_abs(), 2.0);
}
