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
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridsim/device.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/evolve.hpp"
#include "hybridsim/linalg.hpp"
#include "hybridsim/pulses.hpp"

namespace hybridsim {

/// Target unitary on (|00>, |01>, |10>, |11>), first label the transmon, second the PPQ.
struct IdealGate {
    std::string label;
    ComplexMatrix matrix;
};

inline ComplexMatrix rx_matrix(double theta) {
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    return ComplexMatrix::from_rows({{c, Complex(0.0, -s)}, {Complex(0.0, -s), c}});
}

inline IdealGate ideal_identity() { return {"identity", ComplexMatrix::identity(4)}; }

/// Transmon control, PPQ target.
inline IdealGate ideal_cnot_tp() {
    return {"CNOT_TP", ComplexMatrix::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}})};
}

inline IdealGate ideal_rx_transmon(double theta = std::numbers::pi / 2.0) {
    return {"RX_T", kron(rx_matrix(theta), ComplexMatrix::identity(2))};
}

inline IdealGate ideal_rx_ppq(double theta = std::numbers::pi / 2.0) {
    return {"RX_P", kron(ComplexMatrix::identity(2), rx_matrix(theta))};
}

/// Looks up a gate by label: CNOT_TP, RX_T, RX_P or identity.
inline IdealGate ideal_gate(const std::string& label) {
    if (label == "CNOT_TP") return ideal_cnot_tp();
    if (label == "RX_T") return ideal_rx_transmon();
    if (label == "RX_P") return ideal_rx_ppq();
    if (label == "identity") return ideal_identity();
    throw ParameterError("unknown gate label '" + label + "'");
}

/// B[a, b] = U[comp_idx[a], comp_idx[b]] for a square propagator.
inline ComplexMatrix computational_block(const ComplexMatrix& U, const std::array<std::size_t, 4>& comp_idx) {
    if (!U.is_square()) throw DimensionError("computational_block: propagator is not square");
    ComplexMatrix b(4, 4);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = 0; c < 4; ++c) b(a, c) = U(comp_idx[a], comp_idx[c]);
    return b;
}

/// Same extraction for a propagator that may only carry a subset of columns.
inline ComplexMatrix computational_block(const Propagator& p, const std::array<std::size_t, 4>& comp_idx) {
    ComplexMatrix b(4, 4);
    for (std::size_t c = 0; c < 4; ++c) {
        auto it = std::find(p.columns.begin(), p.columns.end(), comp_idx[c]);
        if (it == p.columns.end()) throw DimensionError("computational_block: propagator lacks a computational column");
        const auto col = static_cast<std::size_t>(it - p.columns.begin());
        for (std::size_t a = 0; a < 4; ++a) b(a, c) = p.U(comp_idx[a], col);
    }
    return b;
}

/// Moves a lab-frame block at time T into the interaction frame of the idle
/// Hamiltonian: B[a, b] <- exp(i E_a T) B[a, b].
inline ComplexMatrix to_idle_frame(const ComplexMatrix& block, const CompositeModel& m, double T) {
    ComplexMatrix out = block;
    for (std::size_t a = 0; a < 4; ++a) {
        const Complex ph = std::polar(1.0, m.H0_diag[m.comp_idx[a]] * T);
        for (std::size_t b = 0; b < 4; ++b) out(a, b) *= ph;
    }
    return out;
}

/// Virtual-Z frame rotations: diag over |ij> of exp(-i theta_T (i - 1/2)) exp(-i theta_P (j - 1/2)), applied on the left.
inline ComplexMatrix apply_vz(const ComplexMatrix& block, double theta_T, double theta_P) {
    if (block.rows() != 4) throw DimensionError("apply_vz: expected a 4-row block");
    ComplexMatrix out = block;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const Complex z = std::polar(1.0, -theta_T * (static_cast<double>(i) - 0.5)) *
                              std::polar(1.0, -theta_P * (static_cast<double>(j) - 0.5));
            for (std::size_t c = 0; c < out.cols(); ++c) out(2 * i + j, c) *= z;
        }
    return out;
}

/// Virtual-Z angles that best cancel the output-side phases of `block` relative
/// to `ideal`, read from diag(block * ideal^dagger). Exact when the residual is a
/// product of single-qubit Z phases.
inline VirtualZ align_virtual_z(const ComplexMatrix& block, const IdealGate& ideal) {
    if (block.rows() != 4 || block.cols() != 4) throw DimensionError("align_virtual_z: expected a 4x4 block");
    const ComplexMatrix w = block * ideal.matrix.adjoint();
    auto z = [&](std::size_t i, std::size_t j) { return w(2 * i + j, 2 * i + j); };
    VirtualZ vz;
    vz.theta_T = std::arg(z(1, 0) * std::conj(z(0, 0)) + z(1, 1) * std::conj(z(0, 1)));
    vz.theta_P = std::arg(z(0, 1) * std::conj(z(0, 0)) + z(1, 1) * std::conj(z(1, 0)));
    return vz;
}

/// Computational block of a pulse propagator, in the idle frame, with the schedule's virtual-Z applied.
inline ComplexMatrix pulse_gate_block(const CompositeModel& m, const PulseSchedule& s, const Propagator& p) {
    return apply_vz(to_idle_frame(computational_block(p, m.comp_idx), m, p.t_end - p.t_start), s.vz.theta_T,
                    s.vz.theta_P);
}

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in (0, 1], counter-addressed.
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t bits = splitmix64(seed + counter * 0x9e3779b97f4a7c15ULL);
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// n-th random pure state of dimension `dim` for `seed`: normalized i.i.d.
/// complex Gaussians (Box-Muller on a counter-based generator).
inline std::vector<Complex> haar_state(std::uint64_t seed, std::uint64_t n, std::size_t dim = 4) {
    std::vector<Complex> psi(dim);
    double norm = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const std::uint64_t base = 2 * (n * dim + k);
        const double u1 = detail::counter_uniform(seed, base);
        const double u2 = detail::counter_uniform(seed, base + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        psi[k] = Complex(r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2));
        norm += std::norm(psi[k]);
    }
    norm = std::sqrt(norm);
    for (auto& z : psi) z /= norm;
    return psi;
}

/// F = (1/N) sum_n |<psi_n| ideal^dagger B |psi_n>| over N seeded random states.
inline double estimate_fidelity(const ComplexMatrix& block, const IdealGate& ideal, std::size_t samples = 10000,
                                std::uint64_t seed = 20240607) {
    if (samples == 0) throw ParameterError("estimate_fidelity: sample count must be positive");
    if (block.rows() != 4 || block.cols() != 4) throw DimensionError("estimate_fidelity: expected a 4x4 block");
    const ComplexMatrix m = ideal.matrix.adjoint() * block;
    double sum = 0.0;
    for (std::size_t n = 0; n < samples; ++n) {
        const std::vector<Complex> psi = haar_state(seed, n);
        Complex acc = 0.0;
        for (std::size_t a = 0; a < 4; ++a) {
            Complex row = 0.0;
            for (std::size_t b = 0; b < 4; ++b) row += m(a, b) * psi[b];
            acc += std::conj(psi[a]) * row;
        }
        sum += std::abs(acc);
    }
    return sum / static_cast<double>(samples);
}

inline constexpr std::array<const char*, 4> kBasisLabels{"00", "01", "10", "11"};

struct TomographyEntry {
    std::string input;
    std::array<double, 4> populations{};
    double leakage = 0.0;
    std::size_t dominant = 0;
    /// Phase of each significant amplitude relative to the dominant amplitude of the |00> column.
    std::array<std::optional<double>, 4> phase_vs_reference;
    /// Phase of each significant amplitude relative to the first significant amplitude of this column.
    std::array<std::optional<double>, 4> phase_in_column;
};

inline double wrap_phase(double phi) {
    phi = std::remainder(phi, kTwoPi);
    return phi <= -std::numbers::pi ? phi + kTwoPi : phi;
}

/// Output populations, leakage and relative phases for each basis input.
/// Amplitudes below `significance` population carry no phase.
inline std::vector<TomographyEntry> state_tomography(const ComplexMatrix& block, double significance = 1e-2) {
    if (block.rows() != 4 || block.cols() != 4) throw DimensionError("state_tomography: expected a 4x4 block");
    auto dominant_of = [&](std::size_t col) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < 4; ++a)
            if (std::norm(block(a, col)) > std::norm(block(best, col)) * (1.0 + 1e-9)) best = a;
        return best;
    };
    const double reference = std::arg(block(dominant_of(0), 0));
    std::vector<TomographyEntry> out;
    for (std::size_t col = 0; col < 4; ++col) {
        TomographyEntry e;
        e.input = kBasisLabels[col];
        double total = 0.0;
        for (std::size_t a = 0; a < 4; ++a) {
            e.populations[a] = std::norm(block(a, col));
            total += e.populations[a];
        }
        e.leakage = 1.0 - total;
        e.dominant = dominant_of(col);
        std::optional<double> first;
        for (std::size_t a = 0; a < 4; ++a) {
            if (e.populations[a] < significance) continue;
            const double ph = std::arg(block(a, col));
            if (!first) first = ph;
            e.phase_vs_reference[a] = wrap_phase(ph - reference);
            e.phase_in_column[a] = wrap_phase(ph - *first);
        }
        out.push_back(std::move(e));
    }
    return out;
}

struct GateReport {
    std::string gate;
    ComplexMatrix comp_block;
    double fidelity = 0.0;
    std::size_t sample_count = 0;
    std::uint64_t rng_seed = 0;
    std::vector<TomographyEntry> tomography;
    std::array<double, 4> leakage{};
};

inline GateReport make_gate_report(const ComplexMatrix& block, const IdealGate& ideal, std::size_t samples,
                                   std::uint64_t seed) {
    GateReport r;
    r.gate = ideal.label;
    r.comp_block = block;
    r.fidelity = estimate_fidelity(block, ideal, samples, seed);
    r.sample_count = samples;
    r.rng_seed = seed;
    r.tomography = state_tomography(block);
    for (std::size_t c = 0; c < 4; ++c) r.leakage[c] = r.tomography[c].leakage;
    return r;
}

}  // namespace hybridsim
