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

#include "hybridsim/device.hpp"
#include "test_util.hpp"

using namespace hybridsim;

namespace {

/// Independent charge-basis spectrum: real symmetric matrix, Eigen solver.
Eigen::VectorXd oracle_levels(int hop, double E_C, double E_J, int n_max) {
    const int dim = 2 * n_max + 1;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const double n = i - n_max;
        h(i, i) = 4.0 * E_C * n * n;
        if (i + hop < dim) h(i, i + hop) = h(i + hop, i) = -0.5 * E_J;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return es.eigenvalues().array() - es.eigenvalues()(0);
}

}  // namespace

TEST(device, unit_conversion_round_trip) {
    for (double f : {0.2, 2.883, 6.0, 0.01}) EXPECT_NEAR(rad_to_ghz(ghz_to_rad(f)), f, 1e-15 * f);
    EXPECT_DOUBLE_EQ(ghz_to_rad(1.0), 2.0 * std::numbers::pi);
}

TEST(device, squid_energy) {
    const double d = 0.01 / 2.01;
    EXPECT_DOUBLE_EQ(squid_josephson_energy(6.0, 1.01, 0.0), 6.0);
    EXPECT_NEAR(squid_josephson_energy(6.0, 1.01, std::numbers::pi / 2), 6.0 * d, 1e-15);
    EXPECT_NEAR(squid_josephson_energy(6.0, 1.0, 0.3), 6.0 * std::cos(0.3), 1e-15);
}

TEST(device, charge_hamiltonian_structure) {
    const auto h1 = build_charge_hamiltonian(QubitKind::single_pair, 1.0, 2.0, 0.0, 50);
    ASSERT_EQ(h1.rows(), 101u);
    EXPECT_TRUE(is_hermitian(h1));
    EXPECT_DOUBLE_EQ(h1(50, 50).real(), 0.0);
    EXPECT_DOUBLE_EQ(h1(51, 51).real(), 4.0);
    EXPECT_DOUBLE_EQ(h1(50, 51).real(), -1.0);
    EXPECT_DOUBLE_EQ(h1(50, 52).real(), 0.0);
    const auto h2 = build_charge_hamiltonian(QubitKind::pair_of_pairs, 1.0, 2.0, 0.25, 50);
    EXPECT_DOUBLE_EQ(h2(50, 51).real(), 0.0);
    EXPECT_DOUBLE_EQ(h2(50, 52).real(), -1.0);
    EXPECT_DOUBLE_EQ(h2(50, 50).real(), 0.25);
    EXPECT_THROW(build_charge_hamiltonian(QubitKind::single_pair, 1.0, 1.0, 0.0, 0), ParameterError);
}

TEST(device, spectra_match_eigen_oracle) {
    const DeviceSpec spec;
    const auto t = build_transmon(spec);
    const auto p = build_ppq(spec);
    const auto ot = oracle_levels(1, spec.E_C_T, spec.E_J_sigma_T, spec.n_max);
    const auto op = oracle_levels(2, spec.E_C_P, spec.E_J_P, spec.n_max);
    for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(t.energies[k], ot(k), 1e-9) << k;
        EXPECT_NEAR(p.energies[k], op(k), 1e-9) << k;
    }
}

TEST(device, zero_flux_frequencies) {
    const DeviceSpec spec;
    const auto ot = oracle_levels(1, spec.E_C_T, spec.E_J_sigma_T, spec.n_max);
    const auto op = oracle_levels(2, spec.E_C_P, spec.E_J_P, spec.n_max);
    EXPECT_NEAR(transmon_f01_ghz(spec, 0.0), rad_to_ghz(ot(1)), 1e-10);
    const auto dm = build_device_model(spec);
    EXPECT_NEAR(rad_to_ghz(dm.ppq.energies[2] - dm.ppq.energies[1]), rad_to_ghz(op(2) - op(1)), 1e-10);
    EXPECT_NEAR(rad_to_ghz(dm.ppq.energies[2] - dm.ppq.energies[1]), 2.847, 0.01 * 2.847);
}

TEST(device, ppq_parity_structure) {
    const auto p = build_ppq(DeviceSpec{});
    const int n_max = 50;
    for (std::size_t k = 0; k < 4; ++k) {
        double even = 0.0, odd = 0.0;
        for (std::size_t i = 0; i < p.V.rows(); ++i) {
            const int n = static_cast<int>(i) - n_max;
            (n % 2 == 0 ? even : odd) += std::norm(p.V(i, k));
        }
        EXPECT_LE(std::min(even, odd), 1e-10) << "level " << k;
    }
    EXPECT_EQ(p.parity[1], p.parity[2]);
    EXPECT_EQ(p.parity[1], Parity::odd);
    EXPECT_EQ(p.parity[0], Parity::even);
    EXPECT_EQ(p.parity[3], Parity::even);
    EXPECT_LE(std::abs(p.n_op(0, 1)), 1e-12);
    EXPECT_GT(std::abs(p.n_op(1, 2)), 0.1);
    EXPECT_LE(hermiticity_defect(p.n_op), 1e-14);
}

TEST(device, classify_parity_labels) {
    std::vector<Complex> v(5);
    v[2] = 1.0;
    EXPECT_EQ(classify_parity(v), Parity::even);
    v[2] = 0.0;
    v[1] = v[3] = std::sqrt(0.5);
    EXPECT_EQ(classify_parity(v), Parity::odd);
    v[2] = 0.1;
    EXPECT_EQ(classify_parity(v), Parity::mixed);
}

TEST(device, free_charge_ladder) {
    DeviceSpec spec;
    spec.E_J_P = 0.0;
    const auto p = build_ppq(spec);
    const double ec = spec.E_C_P;
    EXPECT_NEAR(p.energies[1], 4 * ec, 1e-9);
    EXPECT_NEAR(p.energies[2], 4 * ec, 1e-9);
    EXPECT_NEAR(p.energies[3], 16 * ec, 1e-9);
    EXPECT_FALSE(p.warnings.empty());
}

TEST(device, flux_calibration) {
    const DeviceSpec spec;
    const double f0 = transmon_f01_ghz(spec, 0.0);
    EXPECT_EQ(calibrate_flux(spec, f0), 0.0);
    const double phi = calibrate_flux(spec, 2.5);
    EXPECT_NEAR(transmon_f01_ghz(spec, phi), 2.5, 1e-6);
    EXPECT_GT(phi, 0.0);
    EXPECT_THROW(calibrate_flux(spec, 10.0), CalibrationRangeError);
    EXPECT_THROW(calibrate_flux(spec, 0.01), CalibrationRangeError);
    // The zero-flux maximum sits just below 2.883 GHz for this parameter set.
    EXPECT_LT(f0, 2.883);
    EXPECT_THROW(calibrate_flux(spec, 2.883), CalibrationRangeError);
}

TEST(device, flux_monotone) {
    const DeviceSpec spec;
    double prev = transmon_f01_ghz(spec, 0.0);
    for (double phi = 0.1; phi < 1.5; phi += 0.1) {
        const double f = transmon_f01_ghz(spec, phi);
        EXPECT_LT(f, prev);
        prev = f;
    }
}

TEST(device, composite_assembly) {
    const auto dm = build_device_model(DeviceSpec{});
    const auto& m = dm.composite;
    ASSERT_EQ(m.dim, 64u);
    EXPECT_EQ(m.index(1, 2, 3), 16u + 8u + 3u);
    EXPECT_EQ(m.comp_idx, (std::array<std::size_t, 4>{1, 2, 5, 6}));
    EXPECT_DOUBLE_EQ(m.H0_diag[m.index(2, 1, 3)], m.E_R[2] + m.E_T[1] + m.E_P[3]);
    EXPECT_NEAR(m.E_R[1], ghz_to_rad(2.4), 1e-12);
    EXPECT_LE(max_abs_diff(m.X_R_NT, kron(kron(m.x_R, m.n_T), ComplexMatrix::identity(4))), 0.0);
    EXPECT_TRUE(is_hermitian(m.X_R_NP));
    EXPECT_DOUBLE_EQ(m.drive_prefactor_T, -8.0 * ghz_to_rad(0.2));
}

TEST(device, assembly_errors) {
    DeviceSpec spec;
    const auto t = build_transmon(spec);
    const auto p = build_ppq(spec);
    EXPECT_THROW(assemble_composite(t, p, build_resonator(spec.omega_R, 3), spec.G, spec.E_C_T, spec.E_C_P),
                 AssemblyError);
    spec.d_trunc = 2;
    EXPECT_THROW(build_device_model(spec), AssemblyError);
    spec = DeviceSpec{};
    spec.E_C_T = -1.0;
    EXPECT_THROW(build_device_model(spec), ParameterError);
}

TEST(device, spectrum_rows_layout) {
    const auto rows = spectrum_rows(build_device_model(DeviceSpec{}));
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows[0].subsystem, "transmon");
    EXPECT_EQ(rows[5].parity, "odd");
    EXPECT_EQ(rows[11].subsystem, "resonator");
    EXPECT_NEAR(rows[9].energy_ghz, 2.4, 1e-12);
}
