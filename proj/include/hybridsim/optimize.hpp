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
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridsim/device.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/evolve.hpp"
#include "hybridsim/metrics.hpp"
#include "hybridsim/pulses.hpp"

namespace hybridsim {

struct NelderMeadOptions {
    std::size_t max_evals = 2000;
    double tol_x = 1e-8;   ///< stop when every vertex is this close (inf-norm) to the best one
    double tol_f = 1e-14;  ///< stop when the objective spread over the simplex drops below this
    std::vector<double> initial_step;  ///< per-coordinate displacement; empty means 5% (floor 2.5e-4)
    double penalty = 1e30;             ///< substituted for non-finite objective values
};

struct NelderMeadIteration {
    std::size_t iteration = 0;
    double best = 0.0;
    double diameter = 0.0;
    std::size_t evals = 0;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t evals = 0;
    std::size_t penalized = 0;
    std::string stop_reason;
    std::vector<NelderMeadIteration> trace;
};

/// Derivative-free simplex minimization with reflection 1, expansion 2,
/// contraction 0.5 and shrink 0.5. Never evaluates the objective more than
/// options.max_evals times.
inline NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                                    std::vector<double> x0, const NelderMeadOptions& options = {}) {
    const std::size_t n = x0.size();
    if (n == 0) throw ParameterError("nelder_mead: empty parameter vector");
    if (options.max_evals < n + 1) throw ParameterError("nelder_mead: budget smaller than the initial simplex");
    if (!options.initial_step.empty() && options.initial_step.size() != n) {
        throw ParameterError("nelder_mead: initial_step has the wrong length");
    }

    NelderMeadResult res;
    struct BudgetExhausted {};
    auto eval = [&](const std::vector<double>& x) {
        if (res.evals >= options.max_evals) throw BudgetExhausted{};
        ++res.evals;
        double f = objective(x);
        if (!std::isfinite(f)) {
            ++res.penalized;
            f = options.penalty;
        }
        return f;
    };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = options.initial_step.empty() ? std::max(0.05 * std::abs(x0[i]), 2.5e-4)
                                                         : options.initial_step[i];
        simplex[i + 1][i] += step;
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);
    if (std::all_of(fv.begin(), fv.end(), [&](double f) { return f >= options.penalty; })) {
        throw ParameterError("nelder_mead: objective is non-finite on the whole initial simplex");
    }

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (std::size_t k : order) {
            s2.push_back(simplex[k]);
            f2.push_back(fv[k]);
        }
        simplex = std::move(s2);
        fv = std::move(f2);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(simplex[i][k] - simplex[0][k]));
        return d;
    };
    auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double coef) {
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + coef * (b[k] - a[k]);
        return out;
    };

    try {
        for (std::size_t iter = 0;; ++iter) {
            sort_simplex();
            const double diam = diameter();
            res.trace.push_back({iter, fv[0], diam, res.evals});
            if (diam < options.tol_x) {
                res.stop_reason = "simplex diameter below tol_x";
                break;
            }
            if (fv[n] - fv[0] < options.tol_f) {
                res.stop_reason = "objective spread below tol_f";
                break;
            }
            if (res.evals >= options.max_evals) {
                res.stop_reason = "evaluation budget exhausted";
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

            const std::vector<double> xr = affine(centroid, simplex[n], -1.0);
            const double fr = eval(xr);
            if (fr < fv[0]) {
                const std::vector<double> xe = affine(centroid, simplex[n], -2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    simplex[n] = xe;
                    fv[n] = fe;
                } else {
                    simplex[n] = xr;
                    fv[n] = fr;
                }
                continue;
            }
            if (fr < fv[n - 1]) {
                simplex[n] = xr;
                fv[n] = fr;
                continue;
            }
            bool accepted = false;
            if (fr < fv[n]) {
                const std::vector<double> xc = affine(centroid, xr, 0.5);
                const double fc = eval(xc);
                if (fc <= fr) {
                    simplex[n] = xc;
                    fv[n] = fc;
                    accepted = true;
                }
            } else {
                const std::vector<double> xc = affine(centroid, simplex[n], 0.5);
                const double fc = eval(xc);
                if (fc < fv[n]) {
                    simplex[n] = xc;
                    fv[n] = fc;
                    accepted = true;
                }
            }
            if (!accepted) {
                for (std::size_t i = 1; i <= n; ++i) {
                    std::vector<double> xs = affine(simplex[0], simplex[i], 0.5);
                    fv[i] = eval(xs);
                    simplex[i] = std::move(xs);
                }
            }
        }
    } catch (const BudgetExhausted&) {
        sort_simplex();
        res.trace.push_back({res.trace.size(), fv[0], diameter(), res.evals});
        res.stop_reason = "evaluation budget exhausted";
    }
    res.x = simplex[0];
    res.f = fv[0];
    return res;
}

/// Names accepted in optimization masks and schedule configs.
inline const std::vector<std::string>& schedule_parameter_names() {
    static const std::vector<std::string> names{"f1",      "f2",     "T1",     "T2",      "omega_S",
                                                "omega_G", "rho",    "gamma1", "gamma2",  "theta_T",
                                                "theta_P", "beta",   "sigma"};
    return names;
}

inline double get_parameter(const PulseSchedule& s, const std::string& name) {
    if (name == "f1") return s.cr.f1;
    if (name == "f2") return s.aux.f2;
    if (name == "T1") return s.cr.T_S;
    if (name == "T2") return s.aux.T_G;
    if (name == "omega_S") return s.cr.omega_S;
    if (name == "omega_G") return s.aux.omega_G;
    if (name == "rho") return s.cr.rho;
    if (name == "gamma1") return s.cr.gamma1;
    if (name == "gamma2") return s.aux.gamma2;
    if (name == "theta_T") return s.vz.theta_T;
    if (name == "theta_P") return s.vz.theta_P;
    if (name == "beta") return s.aux.drag.beta;
    if (name == "sigma") return s.aux.effective_sigma();
    throw ParameterError("unknown schedule parameter '" + name + "'");
}

inline void set_parameter(PulseSchedule& s, const std::string& name, double v) {
    if (name == "f1") s.cr.f1 = v;
    else if (name == "f2") s.aux.f2 = v;
    else if (name == "T1") s.cr.T_S = v;
    else if (name == "T2") s.aux.T_G = v;
    else if (name == "omega_S") s.cr.omega_S = v;
    else if (name == "omega_G") s.aux.omega_G = v;
    else if (name == "rho") s.cr.rho = v;
    else if (name == "gamma1") s.cr.gamma1 = v;
    else if (name == "gamma2") s.aux.gamma2 = v;
    else if (name == "theta_T") s.vz.theta_T = v;
    else if (name == "theta_P") s.vz.theta_P = v;
    else if (name == "beta") s.aux.drag.beta = v;
    else if (name == "sigma") s.aux.sigma = v;
    else throw ParameterError("unknown schedule parameter '" + name + "'");
}

/// Produces the 4x4 gate block (idle frame, virtual-Z applied) for a schedule.
using BlockEvaluator = std::function<ComplexMatrix(const PulseSchedule&)>;

/// Default block evaluator: propagates only the four computational columns and
/// caches the last pulse result, so changes to theta_T / theta_P alone are free.
class PropagationEvaluator {
   public:
    PropagationEvaluator(const CompositeModel& model, double tau) : model_(&model), tau_(tau) {}

    ComplexMatrix operator()(const PulseSchedule& s) {
        PulseSchedule pulse_only = s;
        pulse_only.vz = {};
        if (!cached_ || !same_pulse(*cached_, pulse_only)) {
            PropagateOptions opt;
            opt.tau = tau_;
            opt.columns.assign(model_->comp_idx.begin(), model_->comp_idx.end());
            const Propagator p = propagate(*model_, pulse_only, 0.0, pulse_only.duration(), opt);
            raw_ = pulse_gate_block(*model_, pulse_only, p);
            cached_ = pulse_only;
            ++propagations_;
        }
        return apply_vz(raw_, s.vz.theta_T, s.vz.theta_P);
    }

    std::size_t propagations() const { return propagations_; }

   private:
    static bool same_pulse(const PulseSchedule& a, const PulseSchedule& b) {
        for (const auto& name : schedule_parameter_names()) {
            if (get_parameter(a, name) != get_parameter(b, name)) return false;
        }
        return a.aux.channel == b.aux.channel;
    }

    const CompositeModel* model_;
    double tau_;
    std::optional<PulseSchedule> cached_;
    ComplexMatrix raw_;
    std::size_t propagations_ = 0;
};

struct InfidelityResult {
    double infidelity = 1.0;
    bool penalized = false;
    std::string reason;
};

/// 1 - F for one schedule, with a fixed sampling seed (common random numbers).
/// Invalid schedules return the penalty value 1.0 and are flagged.
inline InfidelityResult gate_infidelity(const BlockEvaluator& evaluate, const PulseSchedule& s, const IdealGate& target,
                                        std::size_t samples, std::uint64_t seed) {
    if (std::string why = s.invalid_reason(); !why.empty() || !(s.duration() > 0.0)) {
        return {1.0, true, why.empty() ? "zero duration" : why};
    }
    const ComplexMatrix block = evaluate(s);
    return {1.0 - estimate_fidelity(block, target, samples, seed), false, {}};
}

inline InfidelityResult gate_infidelity(const CompositeModel& m, const PulseSchedule& s, const IdealGate& target,
                                        double tau, std::size_t samples, std::uint64_t seed) {
    PropagationEvaluator eval(m, tau);
    return gate_infidelity(BlockEvaluator(std::ref(eval)), s, target, samples, seed);
}

struct GateOptimizeOptions {
    NelderMeadOptions nelder_mead{300, 1e-7, 1e-9, {}, 1e30};
    double coarse_tau = 1e-2;
    double final_tau = 1e-3;
    std::size_t samples = 10000;
    std::uint64_t seed = 20240607;
    double step_fraction = 0.02;
    double step_floor = 1e-4;
    std::map<std::string, double> step_override;  ///< absolute initial displacement per parameter
    bool vz_prealign = true;  ///< replace free seed theta_T / theta_P by align_virtual_z of the seed pulse
};

struct OptimizationTrace {
    std::vector<std::string> names;
    std::vector<NelderMeadIteration> iterations;
    std::vector<double> final_x;
    std::size_t evaluations = 0;
    std::size_t penalized = 0;
    std::string stop_reason;
    double coarse_tau = 0.0;
    double final_tau = 0.0;
    double coarse_infidelity = 0.0;  ///< best objective at coarse_tau
    double final_infidelity = 0.0;   ///< same point re-evaluated at final_tau
    double final_fidelity = 0.0;
    std::optional<VirtualZ> prealigned;  ///< seed angles after alignment, if it ran
};

struct OptimizeOutcome {
    PulseSchedule schedule;
    GateReport report;
    OptimizationTrace trace;
};

/// Nelder-Mead over the masked schedule parameters at coarse_tau, then a final
/// report at final_tau for the best point. `final_evaluator` / `coarse_evaluator`
/// default to propagation on `m`.
inline OptimizeOutcome optimize_gate(const CompositeModel& m, const IdealGate& target, const PulseSchedule& seed_schedule,
                                     const std::vector<std::string>& mask, const GateOptimizeOptions& options = {},
                                     BlockEvaluator coarse_evaluator = {}, BlockEvaluator final_evaluator = {}) {
    if (mask.empty()) throw ParameterError("optimize_gate: at least one free parameter is required");
    PropagationEvaluator coarse_prop(m, options.coarse_tau);
    PropagationEvaluator final_prop(m, options.final_tau);
    if (!coarse_evaluator) coarse_evaluator = std::ref(coarse_prop);
    if (!final_evaluator) final_evaluator = std::ref(final_prop);

    auto in_mask = [&](const char* name) { return std::find(mask.begin(), mask.end(), name) != mask.end(); };
    PulseSchedule seed = seed_schedule;
    std::optional<VirtualZ> prealigned;
    if (options.vz_prealign && (in_mask("theta_T") || in_mask("theta_P")) && seed.invalid_reason().empty()) {
        PulseSchedule raw = seed;
        raw.vz = {};
        const VirtualZ vz = align_virtual_z(coarse_evaluator(raw), target);
        if (in_mask("theta_T")) seed.vz.theta_T = vz.theta_T;
        if (in_mask("theta_P")) seed.vz.theta_P = vz.theta_P;
        prealigned = seed.vz;
    }

    std::vector<double> x0;
    std::vector<double> steps;
    for (const auto& name : mask) {
        const double v = get_parameter(seed, name);
        x0.push_back(v);
        auto it = options.step_override.find(name);
        steps.push_back(it != options.step_override.end() ? it->second
                                                           : std::max(options.step_fraction * std::abs(v), options.step_floor));
    }
    auto decode = [&](std::span<const double> x) {
        PulseSchedule s = seed;
        for (std::size_t k = 0; k < mask.size(); ++k) set_parameter(s, mask[k], x[k]);
        return s;
    };

    NelderMeadOptions nm = options.nelder_mead;
    nm.initial_step = steps;
    std::size_t flagged = 0;
    const NelderMeadResult res = nelder_mead(
        [&](std::span<const double> x) {
            const InfidelityResult r = gate_infidelity(coarse_evaluator, decode(x), target, options.samples, options.seed);
            flagged += r.penalized ? 1 : 0;
            return r.infidelity;
        },
        x0, nm);

    OptimizeOutcome out;
    out.schedule = decode(res.x);
    const ComplexMatrix block = final_evaluator(out.schedule);
    out.report = make_gate_report(block, target, options.samples, options.seed);

    auto& tr = out.trace;
    tr.names = mask;
    tr.iterations = res.trace;
    tr.final_x = res.x;
    tr.evaluations = res.evals;
    tr.penalized = flagged + res.penalized;
    tr.stop_reason = res.stop_reason;
    tr.coarse_tau = options.coarse_tau;
    tr.final_tau = options.final_tau;
    tr.coarse_infidelity = res.f;
    tr.final_fidelity = out.report.fidelity;
    tr.prealigned = prealigned;
    tr.final_infidelity = 1.0 - out.report.fidelity;
    return out;
}

}  // namespace hybridsim
