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

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "hybridsim/errors.hpp"
#include "hybridsim/linalg.hpp"

namespace hybridsim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Linear frequency in GHz to angular frequency in rad/ns.
constexpr double ghz_to_rad(double f_ghz) { return kTwoPi * f_ghz; }
constexpr double rad_to_ghz(double omega) { return omega / kTwoPi; }

/// Circuit parameters of the transmon + resonator + PPQ chip. Energies in rad/ns.
struct DeviceSpec {
    double E_C_T = ghz_to_rad(0.2);
    double E_J_sigma_T = ghz_to_rad(6.0);
    double gamma_squid = 1.01;
    double phi_e = 0.0;
    double E_C_P = ghz_to_rad(0.2);
    double E_J_P = ghz_to_rad(3.0);
    double omega_R = ghz_to_rad(2.4);
    double G = ghz_to_rad(0.01);
    int n_max = 50;
    int d_trunc = 4;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string("DeviceSpec: ") + name + " must be > 0");
        };
        positive(E_C_T, "E_C_T");
        positive(E_J_sigma_T, "E_J_sigma_T");
        positive(gamma_squid, "gamma_squid");
        positive(E_C_P, "E_C_P");
        positive(omega_R, "omega_R");
        if (!(E_J_P >= 0.0)) throw ParameterError("DeviceSpec: E_J_P must be >= 0");
        if (!(G >= 0.0)) throw ParameterError("DeviceSpec: G must be >= 0");
        if (!std::isfinite(phi_e)) throw ParameterError("DeviceSpec: phi_e must be finite");
        if (n_max < 10) throw ParameterError("DeviceSpec: n_max must be >= 10");
        if (d_trunc < 2) throw ParameterError("DeviceSpec: d_trunc must be >= 2");
    }
};

enum class QubitKind { single_pair, pair_of_pairs };
enum class Parity { even, odd, mixed };

constexpr std::string_view to_string(Parity p) {
    switch (p) {
        case Parity::even: return "even";
        case Parity::odd: return "odd";
        case Parity::mixed: return "mixed";
    }
    return "mixed";
}

constexpr std::string_view to_string(QubitKind k) {
    return k == QubitKind::single_pair ? "single-pair" : "pair-of-pairs";
}

/// Truncated eigenbasis description of one Cooper-pair-box qubit.
struct QubitModel {
    QubitKind kind = QubitKind::single_pair;
    std::vector<double> energies;  ///< rad/ns, ground state at 0
    ComplexMatrix n_op;            ///< charge number operator in the retained eigenbasis
    std::vector<Parity> parity;
    ComplexMatrix V;  ///< charge-basis amplitudes of the retained levels (columns)
    std::vector<std::string> warnings;
};

struct ResonatorModel {
    ComplexMatrix a;               ///< annihilation operator
    std::vector<double> energies;  ///< k * omega_R
};

/// Idle Hamiltonian and drive/coupling operators on resonator (x) transmon (x) PPQ.
struct CompositeModel {
    std::size_t d = 4;
    std::size_t dim = 64;
    std::vector<double> H0_diag;
    ComplexMatrix N_T;
    ComplexMatrix N_P;
    ComplexMatrix X_R_NT;
    ComplexMatrix X_R_NP;
    double drive_prefactor_T = 0.0;
    double drive_prefactor_P = 0.0;
    double G = 0.0;
    std::array<std::size_t, 4> comp_idx{};

    // Subsystem factors, kept for tensor-structured propagation.
    std::vector<double> E_R, E_T, E_P;
    ComplexMatrix x_R;  ///< a + a^dagger
    ComplexMatrix n_T;
    ComplexMatrix n_P;

    std::size_t index(std::size_t k, std::size_t m_T, std::size_t m_P) const { return (k * d + m_T) * d + m_P; }
};

/// Effective Josephson energy of an asymmetric DC-SQUID,
/// E_JSigma * sqrt(cos^2(phi) + d^2 sin^2(phi)) with d = (gamma - 1) / (gamma + 1).
inline double squid_josephson_energy(double E_J_sigma, double gamma, double phi_e) {
    const double d = (gamma - 1.0) / (gamma + 1.0);
    const double c = std::cos(phi_e);
    const double s = std::sin(phi_e);
    return E_J_sigma * std::sqrt(c * c + d * d * s * s);
}

/// Charge-basis Hamiltonian 4E_C (n - n_g)^2 - E_J cos(phi) (single pair) or
/// - E_J cos(2 phi) (pair of pairs), on n in [-n_max, n_max].
inline ComplexMatrix build_charge_hamiltonian(QubitKind kind, double E_C, double E_J, double n_g, int n_max) {
    if (n_max < 1) throw ParameterError("build_charge_hamiltonian: n_max must be positive");
    const std::size_t dim = 2 * static_cast<std::size_t>(n_max) + 1;
    ComplexMatrix h(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double n = static_cast<double>(i) - n_max;
        h(i, i) = 4.0 * E_C * (n - n_g) * (n - n_g);
    }
    const std::size_t hop = kind == QubitKind::single_pair ? 1 : 2;
    for (std::size_t i = 0; i + hop < dim; ++i) {
        h(i, i + hop) = -0.5 * E_J;
        h(i + hop, i) = -0.5 * E_J;
    }
    return h;
}

/// Parity of a charge-basis state; amplitudes are indexed by n = -n_max ... n_max.
inline Parity classify_parity(std::span<const Complex> amplitudes, double tol = 1e-8) {
    const int n_max = static_cast<int>(amplitudes.size() / 2);
    double even = 0.0;
    double odd = 0.0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        const int n = static_cast<int>(i) - n_max;
        ((n % 2 == 0) ? even : odd) += std::norm(amplitudes[i]);
    }
    if (odd <= tol) return Parity::even;
    if (even <= tol) return Parity::odd;
    return Parity::mixed;
}

/// Diagonalizes a charge-basis Hamiltonian, keeps the lowest d_trunc levels and
/// expresses the charge operator in that eigenbasis.
///
/// Levels are ordered by energy. Exact ties (within 1e-9 relative) are ordered
/// even before odd so doublet labels are deterministic. A warning is recorded
/// whenever two retained levels are closer than 1e-6 rad/ns.
inline QubitModel diagonalize_and_truncate(const ComplexMatrix& h_large, QubitKind kind, int d_trunc) {
    if (!h_large.is_square() || h_large.rows() % 2 == 0) {
        throw DimensionError("diagonalize_and_truncate: expected a (2 n_max + 1)-dimensional square matrix");
    }
    const std::size_t dim = h_large.rows();
    if (d_trunc < 1 || static_cast<std::size_t>(d_trunc) > dim) {
        throw ParameterError("diagonalize_and_truncate: d_trunc out of range");
    }
    const int n_max = static_cast<int>(dim / 2);
    const EigenDecomposition eig = eig_hermitian(h_large);

    std::vector<Parity> parity_all(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        parity_all[k] = classify_parity(eig.eigenvectors.column(k));
    }

    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double scale = std::max(1.0, h_large.max_abs());
    auto parity_rank = [](Parity p) { return p == Parity::even ? 0 : (p == Parity::odd ? 1 : 2); };
    for (std::size_t start = 0; start < dim;) {
        std::size_t end = start + 1;
        while (end < dim && eig.eigenvalues[end] - eig.eigenvalues[end - 1] <= 1e-9 * scale) ++end;
        std::stable_sort(order.begin() + start, order.begin() + end,
                         [&](std::size_t i, std::size_t j) { return parity_rank(parity_all[i]) < parity_rank(parity_all[j]); });
        start = end;
    }

    const std::size_t d = static_cast<std::size_t>(d_trunc);
    QubitModel q;
    q.kind = kind;
    q.V = ComplexMatrix(dim, d);
    for (std::size_t k = 0; k < d; ++k) {
        q.energies.push_back(eig.eigenvalues[order[k]] - eig.eigenvalues[order[0]]);
        q.parity.push_back(parity_all[order[k]]);
        for (std::size_t i = 0; i < dim; ++i) q.V(i, k) = eig.eigenvectors(i, order[k]);
    }
    q.energies[0] = 0.0;

    q.n_op = ComplexMatrix(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            Complex acc = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                acc += std::conj(q.V(i, a)) * (static_cast<double>(i) - n_max) * q.V(i, b);
            }
            q.n_op(a, b) = acc;
        }
    for (std::size_t a = 0; a < d; ++a) {
        q.n_op(a, a) = q.n_op(a, a).real();
        for (std::size_t b = a + 1; b < d; ++b) q.n_op(b, a) = std::conj(q.n_op(a, b));
    }

    for (std::size_t k = 1; k < d; ++k) {
        if (q.energies[k] - q.energies[k - 1] < 1e-6) {
            q.warnings.push_back("retained levels " + std::to_string(k - 1) + " and " + std::to_string(k) +
                                 " are closer than 1e-6 rad/ns");
        }
    }
    return q;
}

inline QubitModel build_transmon(const DeviceSpec& spec) {
    const double E_J = squid_josephson_energy(spec.E_J_sigma_T, spec.gamma_squid, spec.phi_e);
    return diagonalize_and_truncate(
        build_charge_hamiltonian(QubitKind::single_pair, spec.E_C_T, E_J, 0.0, spec.n_max), QubitKind::single_pair,
        spec.d_trunc);
}

inline QubitModel build_ppq(const DeviceSpec& spec) {
    return diagonalize_and_truncate(
        build_charge_hamiltonian(QubitKind::pair_of_pairs, spec.E_C_P, spec.E_J_P, 0.0, spec.n_max),
        QubitKind::pair_of_pairs, spec.d_trunc);
}

/// Transmon 0-1 transition frequency in GHz at reduced flux phi_e.
inline double transmon_f01_ghz(const DeviceSpec& spec, double phi_e) {
    DeviceSpec s = spec;
    s.phi_e = phi_e;
    s.d_trunc = 2;
    return rad_to_ghz(build_transmon(s).energies[1]);
}

/// Reduced flux phi_e in [0, pi/2) that places the transmon f01 at target_f01_ghz.
///
/// Bisection relies on f01 decreasing monotonically with phi_e on that interval.
/// Throws CalibrationRangeError when the target lies above the zero-flux
/// frequency or below the frequency reachable just short of pi/2.
inline double calibrate_flux(const DeviceSpec& spec, double target_f01_ghz, double tol_ghz = 1e-6) {
    constexpr double kEdge = 1e-6;
    double lo = 0.0;
    double hi = std::numbers::pi / 2.0 - kEdge;
    const double f_lo = transmon_f01_ghz(spec, lo);
    if (std::abs(f_lo - target_f01_ghz) <= tol_ghz) return 0.0;
    if (target_f01_ghz > f_lo) {
        throw CalibrationRangeError("calibrate_flux: target " + std::to_string(target_f01_ghz) +
                                    " GHz is above the zero-flux frequency " + std::to_string(f_lo) + " GHz");
    }
    const double f_hi = transmon_f01_ghz(spec, hi);
    if (std::abs(f_hi - target_f01_ghz) <= tol_ghz) return hi;
    if (target_f01_ghz < f_hi) {
        throw CalibrationRangeError("calibrate_flux: target " + std::to_string(target_f01_ghz) +
                                    " GHz is below the reachable band (min " + std::to_string(f_hi) + " GHz)");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double f = transmon_f01_ghz(spec, mid);
        if (std::abs(f - target_f01_ghz) <= 0.1 * tol_ghz || hi - lo < 1e-15) return mid;
        (f > target_f01_ghz ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline ResonatorModel build_resonator(double omega_R, int d) {
    if (d < 1) throw ParameterError("build_resonator: d must be positive");
    const std::size_t n = static_cast<std::size_t>(d);
    ResonatorModel r;
    r.a = ComplexMatrix(n, n);
    for (std::size_t k = 0; k + 1 < n; ++k) r.a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
    for (std::size_t k = 0; k < n; ++k) r.energies.push_back(static_cast<double>(k) * omega_R);
    return r;
}

/// Composite model on resonator (x) transmon (x) PPQ, index 16k + 4m_T + m_P for d = 4.
inline CompositeModel assemble_composite(const QubitModel& transmon, const QubitModel& ppq,
                                         const ResonatorModel& resonator, double G, double E_C_T, double E_C_P) {
    const std::size_t d = transmon.energies.size();
    if (ppq.energies.size() != d || resonator.energies.size() != d || resonator.a.rows() != d ||
        transmon.n_op.rows() != d || ppq.n_op.rows() != d) {
        throw AssemblyError("assemble_composite: subsystems must share one truncation dimension");
    }
    if (d < 3) throw AssemblyError("assemble_composite: the PPQ computational pair needs d_trunc >= 3");

    CompositeModel m;
    m.d = d;
    m.dim = d * d * d;
    m.E_R = resonator.energies;
    m.E_T = transmon.energies;
    m.E_P = ppq.energies;
    m.n_T = transmon.n_op;
    m.n_P = ppq.n_op;
    m.x_R = resonator.a + resonator.a.adjoint();
    m.G = G;
    m.drive_prefactor_T = -8.0 * E_C_T;
    m.drive_prefactor_P = -8.0 * E_C_P;

    m.H0_diag.resize(m.dim);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t t = 0; t < d; ++t)
            for (std::size_t p = 0; p < d; ++p) m.H0_diag[m.index(k, t, p)] = m.E_R[k] + m.E_T[t] + m.E_P[p];

    const ComplexMatrix id = ComplexMatrix::identity(d);
    m.N_T = kron(kron(id, m.n_T), id);
    m.N_P = kron(kron(id, id), m.n_P);
    m.X_R_NT = kron(kron(m.x_R, m.n_T), id);
    m.X_R_NP = kron(kron(m.x_R, id), m.n_P);
    m.comp_idx = {m.index(0, 0, 1), m.index(0, 0, 2), m.index(0, 1, 1), m.index(0, 1, 2)};
    return m;
}

/// Every piece of the device, built from one spec.
struct DeviceModel {
    DeviceSpec spec;
    QubitModel transmon;
    QubitModel ppq;
    ResonatorModel resonator;
    CompositeModel composite;
};

inline DeviceModel build_device_model(const DeviceSpec& spec) {
    spec.validate();
    DeviceModel out;
    out.spec = spec;
    out.transmon = build_transmon(spec);
    out.ppq = build_ppq(spec);
    out.resonator = build_resonator(spec.omega_R, spec.d_trunc);
    out.composite = assemble_composite(out.transmon, out.ppq, out.resonator, spec.G, spec.E_C_T, spec.E_C_P);
    return out;
}

struct SpectrumRow {
    std::string subsystem;
    std::size_t level = 0;
    double energy_ghz = 0.0;
    std::string parity;
};

inline std::vector<SpectrumRow> spectrum_rows(const DeviceModel& model) {
    std::vector<SpectrumRow> rows;
    auto add = [&](const char* name, const QubitModel& q) {
        for (std::size_t k = 0; k < q.energies.size(); ++k) {
            rows.push_back({name, k, rad_to_ghz(q.energies[k]), std::string(to_string(q.parity[k]))});
        }
    };
    add("transmon", model.transmon);
    add("ppq", model.ppq);
    for (std::size_t k = 0; k < model.resonator.energies.size(); ++k) {
        rows.push_back({"resonator", k, rad_to_ghz(model.resonator.energies[k]), "n/a"});
    }
    return rows;
}

}  // namespace hybridsim
