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
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hybridsim/device.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/linalg.hpp"
#include "hybridsim/pulses.hpp"

namespace hybridsim {

/// Offset charges (n_g,T, n_g,P) as a function of absolute time.
using DriveFunction = std::function<std::pair<double, double>(double)>;

inline DriveFunction schedule_drive(const PulseSchedule& schedule) {
    return [schedule](double t) {
        return std::pair{offset_charge(schedule, Channel::transmon, t), offset_charge(schedule, Channel::ppq, t)};
    };
}

struct Propagator {
    ComplexMatrix U;                   ///< dim x columns.size()
    std::vector<std::size_t> columns;  ///< input basis states carried by the columns of U
    double t_start = 0.0;
    double t_end = 0.0;
    double tau = 0.0;
    std::size_t step_count = 0;
};

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

struct TrajectorySample {
    double t = 0.0;
    std::vector<Complex> state;
    BlochVector transmon;
    BlochVector ppq;
    double leakage = 0.0;
};

struct TrajectoryRecord {
    std::vector<TrajectorySample> samples;
};

struct PropagateOptions {
    double tau = 1e-3;
    std::vector<std::size_t> columns;  ///< empty: full propagator
};

/// H1(t) = -8E_C,T n_g,T(t) N_T - 8E_C,P n_g,P(t) N_P + G (X_R_NT + X_R_NP).
inline ComplexMatrix drive_hamiltonian(const CompositeModel& m, double ng_T, double ng_P) {
    ComplexMatrix h = m.N_T * Complex(m.drive_prefactor_T * ng_T);
    h += m.N_P * Complex(m.drive_prefactor_P * ng_P);
    h += (m.X_R_NT + m.X_R_NP) * Complex(m.G);
    return h;
}

inline ComplexMatrix drive_hamiltonian(const CompositeModel& m, const PulseSchedule& s, double t) {
    return drive_hamiltonian(m, offset_charge(s, Channel::transmon, t), offset_charge(s, Channel::ppq, t));
}

/// Full time-dependent Hamiltonian H0 + H1.
inline ComplexMatrix total_hamiltonian(const CompositeModel& m, double ng_T, double ng_P) {
    ComplexMatrix h = drive_hamiltonian(m, ng_T, ng_P);
    for (std::size_t i = 0; i < m.dim; ++i) h(i, i) += m.H0_diag[i];
    return h;
}

/// Step lengths covering [t0, t1]: round((t1 - t0) / tau) steps of tau, the last
/// one shortened (or one extra short step appended) so the sum is exactly t1 - t0.
inline std::vector<double> step_lengths(double t0, double t1, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("tau must be positive");
    if (!(t1 > t0)) throw ParameterError("propagation interval must satisfy t1 > t0");
    const double span = t1 - t0;
    auto n = static_cast<std::size_t>(std::llround(span / tau));
    if (n == 0) return {span};
    std::vector<double> steps(n, tau);
    const double rem = span - static_cast<double>(n) * tau;
    if (std::abs(rem) <= 1e-9 * tau) return steps;
    if (rem > 0.0) {
        steps.push_back(rem);
    } else {
        steps.back() = tau + rem;
    }
    return steps;
}

/// Tensor-structured second-order Suzuki-Trotter propagation.
///
/// Every term of H1 is diagonal in W = V_R (x) V_T (x) V_P, the product of the
/// eigenbases of (a + a^dagger), n_T and n_P, so exp(-i h H1) = W Phi W^dagger
/// with Phi diagonal. The half steps of neighbouring Trotter factors merge into
/// W^dagger exp(-i h H0) W, which factorizes over the three subsystems because
/// H0 is a sum of subsystem ladders. A step therefore costs three d x d tensor
/// factors and one diagonal phase.
class TrotterKernel {
   public:
    explicit TrotterKernel(const CompositeModel& model) : m_(model), d_(model.d), dim_(model.dim) {
        const EigenDecomposition ex = eig_hermitian(model.x_R);
        const EigenDecomposition et = eig_hermitian(model.n_T);
        const EigenDecomposition ep = eig_hermitian(model.n_P);
        lambda_R_ = ex.eigenvalues;
        mu_T_ = et.eigenvalues;
        mu_P_ = ep.eigenvalues;
        V_ = {ex.eigenvectors, et.eigenvectors, ep.eigenvectors};
        for (auto& v : V_) Vh_.push_back(v.adjoint());
        coupling_.resize(dim_);
        for (std::size_t r = 0; r < d_; ++r)
            for (std::size_t t = 0; t < d_; ++t)
                for (std::size_t p = 0; p < d_; ++p)
                    coupling_[model.index(r, t, p)] = model.G * lambda_R_[r] * (mu_T_[t] + mu_P_[p]);
    }

    /// exp(-i h H1) as a dense matrix, from the factorized form.
    ComplexMatrix h1_exponential(double ng_T, double ng_P, double h) const {
        const std::vector<Complex> phi = phases(ng_T, ng_P, h);
        ComplexMatrix w = kron(kron(V_[0], V_[1]), V_[2]);
        ComplexMatrix out(dim_, dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) {
                Complex acc = 0.0;
                for (std::size_t k = 0; k < dim_; ++k) acc += w(i, k) * phi[k] * std::conj(w(j, k));
                out(i, j) = acc;
            }
        return out;
    }

    /// Evolves the columns of `block` (dim x k, row-major) through `steps` starting
    /// at t0. `on_step(step_index, t_after, block_in_lab_basis)` is invoked for
    /// every step index accepted by `want_sample`.
    void run(ComplexMatrix& block, const DriveFunction& drive, double t0, std::span<const double> steps,
             const std::function<bool(std::size_t)>& want_sample = {},
             const std::function<void(std::size_t, double, const ComplexMatrix&)>& on_step = {}) const {
        if (block.rows() != dim_) throw DimensionError("TrotterKernel::run: block has wrong row count");
        if (steps.empty()) return;

        std::array<ComplexMatrix, 3> merged = merged_free_factors(steps[0]);
        double merged_h = steps[0];

        scale_rows(block, free_phases(0.5 * steps[0]));
        apply_tensor(block, Vh_);

        double t = t0;
        ComplexMatrix scratch;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const double h = steps[k];
            const auto [ng_T, ng_P] = drive(t + 0.5 * h);
            scale_rows(block, phases(ng_T, ng_P, h));
            t += h;
            if (want_sample && want_sample(k)) {
                scratch = block;
                apply_tensor(scratch, V_);
                scale_rows(scratch, free_phases(0.5 * h));
                on_step(k, t, scratch);
            }
            if (k + 1 < steps.size()) {
                const double hm = 0.5 * (h + steps[k + 1]);
                if (hm != merged_h) {
                    merged = merged_free_factors(hm);
                    merged_h = hm;
                }
                apply_tensor(block, merged);
            }
        }
        apply_tensor(block, V_);
        scale_rows(block, free_phases(0.5 * steps.back()));
    }

    std::vector<Complex> phases(double ng_T, double ng_P, double h) const {
        const double cT = m_.drive_prefactor_T * ng_T;
        const double cP = m_.drive_prefactor_P * ng_P;
        std::vector<Complex> out(dim_);
        for (std::size_t r = 0; r < d_; ++r)
            for (std::size_t t = 0; t < d_; ++t)
                for (std::size_t p = 0; p < d_; ++p) {
                    const std::size_t i = m_.index(r, t, p);
                    out[i] = std::polar(1.0, -h * (cT * mu_T_[t] + cP * mu_P_[p] + coupling_[i]));
                }
        return out;
    }

   private:
    std::vector<Complex> free_phases(double h) const {
        std::vector<Complex> out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) out[i] = std::polar(1.0, -h * m_.H0_diag[i]);
        return out;
    }

    // V_s^dagger exp(-i h E_s) V_s for each subsystem.
    std::array<ComplexMatrix, 3> merged_free_factors(double h) const {
        const std::array<const std::vector<double>*, 3> energies{&m_.E_R, &m_.E_T, &m_.E_P};
        std::array<ComplexMatrix, 3> out;
        for (std::size_t s = 0; s < 3; ++s) {
            std::vector<Complex> ph(d_);
            for (std::size_t i = 0; i < d_; ++i) ph[i] = std::polar(1.0, -h * (*energies[s])[i]);
            out[s] = polish_unitary(Vh_[s] * ComplexMatrix::diagonal(std::span<const Complex>(ph)) * V_[s]);
        }
        return out;
    }

    // One Newton-Schulz step, F (3 - F^dagger F) / 2: removes the O(eps) non-unitary
    // part left by forming V^dagger D V, which would otherwise drift over 10^6 steps.
    static ComplexMatrix polish_unitary(const ComplexMatrix& f) {
        ComplexMatrix g = f.adjoint() * f;
        ComplexMatrix corr = ComplexMatrix::identity(f.rows()) * Complex(3.0) - g;
        return f * corr * Complex(0.5);
    }

    static void scale_rows(ComplexMatrix& block, const std::vector<Complex>& ph) {
        const std::size_t cols = block.cols();
        double* data = reinterpret_cast<double*>(block.data());
        for (std::size_t i = 0; i < block.rows(); ++i) {
            const double pr = ph[i].real();
            const double pi = ph[i].imag();
            double* row = data + 2 * i * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                const double xr = row[2 * c];
                const double xi = row[2 * c + 1];
                row[2 * c] = pr * xr - pi * xi;
                row[2 * c + 1] = pr * xi + pi * xr;
            }
        }
    }

    // block <- (F_R (x) F_T (x) F_P) block.
    template <typename Factors>
    void apply_tensor(ComplexMatrix& block, const Factors& factors) const {
        const std::size_t cols = block.cols();
        buffer_.resize(2 * d_ * cols);
        double* data = reinterpret_cast<double*>(block.data());
        for (std::size_t s = 0; s < 3; ++s) {
            const ComplexMatrix& f = factors[s];
            const std::size_t stride = s == 0 ? d_ * d_ : (s == 1 ? d_ : 1);
            const std::size_t outer = s == 0 ? 1 : (s == 1 ? d_ : d_ * d_);
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t in = 0; in < stride; ++in) {
                    const std::size_t base = o * d_ * stride + in;
                    std::fill(buffer_.begin(), buffer_.end(), 0.0);
                    for (std::size_t a = 0; a < d_; ++a) {
                        double* out = buffer_.data() + 2 * a * cols;
                        for (std::size_t j = 0; j < d_; ++j) {
                            const double fr = f(a, j).real();
                            const double fi = f(a, j).imag();
                            const double* x = data + 2 * (base + j * stride) * cols;
                            for (std::size_t c = 0; c < 2 * cols; c += 2) {
                                out[c] += fr * x[c] - fi * x[c + 1];
                                out[c + 1] += fr * x[c + 1] + fi * x[c];
                            }
                        }
                    }
                    for (std::size_t a = 0; a < d_; ++a) {
                        std::copy_n(buffer_.data() + 2 * a * cols, 2 * cols, data + 2 * (base + a * stride) * cols);
                    }
                }
            }
        }
    }

    const CompositeModel& m_;
    std::size_t d_;
    std::size_t dim_;
    std::vector<double> lambda_R_, mu_T_, mu_P_;
    std::array<ComplexMatrix, 3> V_;
    std::vector<ComplexMatrix> Vh_;
    std::vector<double> coupling_;
    mutable std::vector<double> buffer_;
};

/// exp(-i h H1(t)) through the commuting-term factorization.
inline ComplexMatrix h1_exponential_factorized(const CompositeModel& m, const PulseSchedule& s, double t, double h) {
    return TrotterKernel(m).h1_exponential(offset_charge(s, Channel::transmon, t), offset_charge(s, Channel::ppq, t), h);
}

/// exp(-i h H1(t)) by direct Hermitian exponentiation of the assembled H1.
inline ComplexMatrix h1_exponential_generic(const CompositeModel& m, const PulseSchedule& s, double t, double h) {
    return expm_hermitian(drive_hamiltonian(m, s, t), -h);
}

/// One symmetric Trotter step on a dense accumulator:
/// U <- exp(-i tau H0 / 2) exp(-i tau H1(t_mid)) exp(-i tau H0 / 2) U.
inline ComplexMatrix trotter_step(const ComplexMatrix& U_acc, const CompositeModel& m, const PulseSchedule& s,
                                  double t_mid, double tau) {
    const ComplexMatrix e1 = h1_exponential_factorized(m, s, t_mid, tau);
    std::vector<Complex> half(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i) half[i] = std::polar(1.0, -0.5 * tau * m.H0_diag[i]);
    auto scale = [&](ComplexMatrix& u) {
        for (std::size_t i = 0; i < u.rows(); ++i)
            for (std::size_t j = 0; j < u.cols(); ++j) u(i, j) *= half[i];
    };
    ComplexMatrix u = U_acc;
    scale(u);
    u = e1 * u;
    scale(u);
    return u;
}

namespace detail {

inline ComplexMatrix basis_block(std::size_t dim, std::span<const std::size_t> columns) {
    ComplexMatrix b(dim, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] >= dim) throw DimensionError("propagate: column index out of range");
        b(columns[c], c) = 1.0;
    }
    return b;
}

inline std::vector<std::size_t> resolve_columns(std::size_t dim, const std::vector<std::size_t>& requested) {
    if (!requested.empty()) return requested;
    std::vector<std::size_t> all(dim);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
}

// block <- prod_k exp(-i h_k (H0 + H1(t_k + h_k / 2))) block. Consecutive identical
// steps (time-independent stretches) reuse the previous exponential.
inline void run_exact(ComplexMatrix& block, const CompositeModel& m, const DriveFunction& drive, double t0,
                      std::span<const double> steps) {
    std::optional<std::array<double, 3>> cached_key;
    ComplexMatrix step_u;
    double t = t0;
    for (double h : steps) {
        const auto [ng_T, ng_P] = drive(t + 0.5 * h);
        const std::array<double, 3> key{h, ng_T, ng_P};
        if (!cached_key || *cached_key != key) {
            step_u = expm_hermitian(total_hamiltonian(m, ng_T, ng_P), -h);
            cached_key = key;
        }
        block = step_u * block;
        t += h;
    }
}

}  // namespace detail

/// Trotterized propagator for an arbitrary drive.
inline Propagator propagate_with_drive(const CompositeModel& m, const DriveFunction& drive, double t0, double t1,
                                       const PropagateOptions& options = {}) {
    const std::vector<double> steps = step_lengths(t0, t1, options.tau);
    Propagator p;
    p.columns = detail::resolve_columns(m.dim, options.columns);
    p.U = detail::basis_block(m.dim, p.columns);
    TrotterKernel(m).run(p.U, drive, t0, steps);
    p.t_start = t0;
    p.t_end = t1;
    p.tau = options.tau;
    p.step_count = steps.size();
    return p;
}

inline Propagator propagate(const CompositeModel& m, const PulseSchedule& s, double t0, double t1,
                            const PropagateOptions& options = {}) {
    return propagate_with_drive(m, schedule_drive(s), t0, t1, options);
}

/// Reference propagator: each step exponentiates H0 + H1(t_mid) as a whole.
/// Step grid and midpoints are identical to propagate().
inline Propagator propagate_exact_with_drive(const CompositeModel& m, const DriveFunction& drive, double t0, double t1,
                                             const PropagateOptions& options = {}) {
    const std::vector<double> steps = step_lengths(t0, t1, options.tau);
    Propagator p;
    p.columns = detail::resolve_columns(m.dim, options.columns);
    p.U = detail::basis_block(m.dim, p.columns);
    detail::run_exact(p.U, m, drive, t0, steps);
    p.t_start = t0;
    p.t_end = t1;
    p.tau = options.tau;
    p.step_count = steps.size();
    return p;
}

inline Propagator propagate_exact(const CompositeModel& m, const PulseSchedule& s, double t0, double t1,
                                  const PropagateOptions& options = {}) {
    return propagate_exact_with_drive(m, schedule_drive(s), t0, t1, options);
}

/// Computational basis state |ij> = |0>_R |i>_T |j+1>_P.
inline std::vector<Complex> basis_state(const CompositeModel& m, std::size_t i, std::size_t j) {
    std::vector<Complex> psi(m.dim);
    psi[m.index(0, i, j + 1)] = 1.0;
    return psi;
}

/// |0>_R (|0> + |1>)/sqrt2 (x) (|1> + |2>)/sqrt2.
inline std::vector<Complex> plus_plus_state(const CompositeModel& m) {
    std::vector<Complex> psi(m.dim);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 1; j < 3; ++j) psi[m.index(0, i, j)] = 0.5;
    return psi;
}

enum class Subsystem { transmon, ppq };

/// Bloch vector of one qubit's computational pair from its reduced density
/// matrix; no renormalization, so a short vector signals leakage or entanglement.
inline BlochVector reduced_bloch(const CompositeModel& m, std::span<const Complex> state, Subsystem which) {
    if (state.size() != m.dim) throw DimensionError("reduced_bloch: state has wrong dimension");
    const std::size_t lo = which == Subsystem::transmon ? 0 : 1;
    Complex rho00 = 0.0, rho11 = 0.0, rho01 = 0.0;
    for (std::size_t r = 0; r < m.d; ++r)
        for (std::size_t o = 0; o < m.d; ++o) {
            const Complex a = which == Subsystem::transmon ? state[m.index(r, lo, o)] : state[m.index(r, o, lo)];
            const Complex b =
                which == Subsystem::transmon ? state[m.index(r, lo + 1, o)] : state[m.index(r, o, lo + 1)];
            rho00 += std::norm(a);
            rho11 += std::norm(b);
            rho01 += a * std::conj(b);
        }
    return {2.0 * rho01.real(), 2.0 * std::conj(rho01).imag(), (rho00 - rho11).real()};
}

/// Population outside the four computational states.
inline double leakage(const CompositeModel& m, std::span<const Complex> state) {
    double inside = 0.0;
    double total = 0.0;
    for (const auto& z : state) total += std::norm(z);
    for (std::size_t idx : m.comp_idx) inside += std::norm(state[idx]);
    return std::clamp(total - inside, 0.0, 1.0);
}

inline TrajectorySample make_sample(const CompositeModel& m, double t, std::vector<Complex> state) {
    TrajectorySample s;
    s.t = t;
    s.transmon = reduced_bloch(m, state, Subsystem::transmon);
    s.ppq = reduced_bloch(m, state, Subsystem::ppq);
    s.leakage = leakage(m, state);
    s.state = std::move(state);
    return s;
}

struct StateEvolution {
    std::vector<Complex> final_state;
    TrajectoryRecord trajectory;
};

/// Evolves one state, sampling it every `record_stride` steps (plus t0 and t1).
inline StateEvolution propagate_state(const CompositeModel& m, const DriveFunction& drive, double t0, double t1,
                                      std::span<const Complex> psi0, double tau, std::size_t record_stride = 1000) {
    if (psi0.size() != m.dim) throw DimensionError("propagate_state: initial state has wrong dimension");
    if (record_stride == 0) throw ParameterError("propagate_state: record_stride must be positive");
    const std::vector<double> steps = step_lengths(t0, t1, tau);
    ComplexMatrix block(m.dim, 1, std::vector<Complex>(psi0.begin(), psi0.end()));
    StateEvolution out;
    out.trajectory.samples.push_back(make_sample(m, t0, std::vector<Complex>(psi0.begin(), psi0.end())));
    const std::size_t last = steps.size() - 1;
    TrotterKernel(m).run(
        block, drive, t0, steps, [&](std::size_t k) { return (k + 1) % record_stride == 0 || k == last; },
        [&](std::size_t k, double t, const ComplexMatrix& lab) {
            if (k == last) t = t1;
            out.trajectory.samples.push_back(make_sample(m, t, lab.column(0)));
        });
    out.final_state = block.column(0);
    return out;
}

inline StateEvolution propagate_state(const CompositeModel& m, const PulseSchedule& s, std::span<const Complex> psi0,
                                      double tau, std::size_t record_stride = 1000) {
    return propagate_state(m, schedule_drive(s), 0.0, s.duration(), psi0, tau, record_stride);
}

struct ScanPoint {
    double tau = 0.0;
    double state_error = 0.0;
};

/// 1 - |<psi_ED| psi_ST>| for a given pair of evolved states.
inline double state_error(std::span<const Complex> exact, std::span<const Complex> trotter) {
    Complex overlap = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) overlap += std::conj(exact[i]) * trotter[i];
    return 1.0 - std::abs(overlap);
}

/// Free evolution (drives off, coupling on) from `initial` over `duration`,
/// Trotter versus exact diagonalization, for each tau.
inline std::vector<ScanPoint> trotter_error_scan(const CompositeModel& m, std::span<const double> taus,
                                                 double duration = 100.0,
                                                 std::optional<std::vector<Complex>> initial = std::nullopt) {
    if (taus.empty()) throw ParameterError("trotter_error_scan: empty tau list");
    const std::vector<Complex> psi0 = initial ? *initial : plus_plus_state(m);
    if (psi0.size() != m.dim) throw DimensionError("trotter_error_scan: initial state has wrong dimension");
    const DriveFunction idle = [](double) { return std::pair{0.0, 0.0}; };
    // H is constant, so the exact state is a single exponential over the whole interval.
    const std::vector<Complex> ed = expm_hermitian(total_hamiltonian(m, 0.0, 0.0), -duration) * std::span(psi0);
    std::vector<ScanPoint> out;
    for (double tau : taus) {
        const std::vector<double> steps = step_lengths(0.0, duration, tau);
        ComplexMatrix st(m.dim, 1, psi0);
        TrotterKernel(m).run(st, idle, 0.0, steps);
        out.push_back({tau, state_error(ed, st.column(0))});
    }
    return out;
}

}  // namespace hybridsim
