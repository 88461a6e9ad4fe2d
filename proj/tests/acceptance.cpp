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


// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.
//
// Usage: acceptance [path-to-hybridsim-cli]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "hybridsim/io.hpp"

using namespace hybridsim;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o, double seconds) {
    std::printf("criterion %2d %-26s %s  (%.1f s)  %s\n", id, name, o.pass ? "PASS" : "FAIL", seconds,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

template <typename F>
void run(int id, const char* name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    report(id, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ComplexMatrix comp_block(const CompositeModel& m, const PulseSchedule& s, double tau) {
    PropagateOptions opt;
    opt.tau = tau;
    opt.columns.assign(m.comp_idx.begin(), m.comp_idx.end());
    return pulse_gate_block(m, s, propagate(m, s, 0.0, s.duration(), opt));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const DeviceSpec spec;
    const DeviceModel dm = build_device_model(spec);
    const CompositeModel& m = dm.composite;

    run(1, "spectrum", [&] {
        const double f01_max = transmon_f01_ghz(spec, 0.0);
        const double f12 = rad_to_ghz(dm.ppq.energies[2] - dm.ppq.energies[1]);
        const bool f12_ok = std::abs(f12 - 2.847) <= 0.01 * 2.847;
        std::string flux;
        bool f01_ok = false;
        try {
            const double phi = calibrate_flux(spec, 2.883);
            const double f01 = transmon_f01_ghz(spec, phi);
            f01_ok = std::abs(f01 - 2.883) <= 1e-4;
            flux = fmt("phi_e=%.6f f01_T=%.7f GHz", phi, f01);
        } catch (const CalibrationRangeError&) {
            flux = fmt("2.883 GHz unreachable: max f01_T=%.7f GHz at phi_e=0 (|diff|=%.2e > 1e-4)", f01_max,
                       std::abs(f01_max - 2.883));
        }
        return Outcome{f01_ok && f12_ok, flux + fmt("; f12_P=%.7f GHz (%.3f%% from 2.847)", f12,
                                                   100.0 * std::abs(f12 - 2.847) / 2.847)};
    });

    run(2, "ppq parity", [&] {
        double worst = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            double even = 0.0, odd = 0.0;
            for (std::size_t i = 0; i < dm.ppq.V.rows(); ++i) {
                const int n = static_cast<int>(i) - spec.n_max;
                (n % 2 == 0 ? even : odd) += std::norm(dm.ppq.V(i, k));
            }
            worst = std::max(worst, std::min(even, odd));
        }
        const bool same = dm.ppq.parity[1] == dm.ppq.parity[2] && dm.ppq.parity[1] != Parity::mixed;
        return Outcome{worst <= 1e-10 && same,
                       fmt("max cross-parity weight %.2e; levels 1,2 %s/%s", worst,
                           std::string(to_string(dm.ppq.parity[1])).c_str(),
                           std::string(to_string(dm.ppq.parity[2])).c_str())};
    });

    run(3, "single-qubit gates", [&] {
        const double ft = estimate_fidelity(comp_block(m, PulseSchedule::rx_table(Channel::transmon), 1e-3),
                                            ideal_rx_transmon());
        const double fp =
            estimate_fidelity(comp_block(m, PulseSchedule::rx_table(Channel::ppq), 1e-3), ideal_rx_ppq());
        return Outcome{ft >= 0.999 && fp >= 0.999, fmt("F(RX_T)=%.6f F(RX_P)=%.6f at tau=1e-3", ft, fp)};
    });

    // Criteria 4, 5 and 7 share the optimization run and its final full propagation.
    std::optional<OptimizeOutcome> cnot;
    double unitarity = std::numeric_limits<double>::infinity();
    run(4, "cnot reproduction", [&] {
        const PulseSchedule table = PulseSchedule::cnot_table();
        const double f_verbatim = estimate_fidelity(comp_block(m, table, 1e-3), ideal_cnot_tp());

        GateOptimizeOptions opt;
        opt.step_override = {{"f1", 1e-4}};
        const BlockEvaluator full_final = [&](const PulseSchedule& s) {
            PropagateOptions po;
            po.tau = opt.final_tau;
            const Propagator p = propagate(m, s, 0.0, s.duration(), po);
            unitarity = unitarity_defect(p.U);
            return pulse_gate_block(m, s, p);
        };
        cnot = optimize_gate(m, ideal_cnot_tp(), table, {"f1", "omega_S", "gamma2", "theta_T", "theta_P"}, opt, {},
                             full_final);
        const auto& tr = cnot->trace;
        const bool verbatim_ok = 1.0 - f_verbatim <= 0.006;
        const bool optimized_ok = tr.evaluations <= 300 && tr.final_fidelity >= 0.998;
        return Outcome{verbatim_ok && optimized_ok,
                       fmt("verbatim I=%.4f (%s, limit 0.006); optimized F=%.6f at tau=1e-3 "
                           "(coarse I=%.3e, %zu evaluations) (%s)",
                           1.0 - f_verbatim, verbatim_ok ? "ok" : "over", tr.final_fidelity, tr.coarse_infidelity,
                           tr.evaluations, optimized_ok ? "ok" : "below 0.998")};
    });

    run(5, "tomography phases", [&] {
        if (!cnot) return Outcome{false, "no optimized CNOT"};
        double worst = 0.0;
        std::string parts;
        for (const auto& e : cnot->report.tomography) {
            const double dphi = e.phase_vs_reference[e.dominant].value_or(std::numbers::pi);
            worst = std::max(worst, std::abs(dphi));
            parts += fmt(" |%s>->|%s>:%+.4f", e.input.c_str(), kBasisLabels[e.dominant], dphi);
        }
        return Outcome{worst <= 0.01, fmt("max |dphi|=%.4f rad;", worst) + parts};
    });

    run(6, "trotter error ordering", [&] {
        const std::vector<double> taus{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
        const auto pts = trotter_error_scan(m, taus, 10.0);
        const double ratio = pts[0].state_error / pts[4].state_error;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = 1; k <= 3; ++k) {
            const double x = std::log10(pts[k].tau), y = std::log10(pts[k].state_error);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
        std::string errs;
        for (const auto& p : pts) errs += fmt(" %.0e:%.2e", p.tau, p.state_error);
        return Outcome{ratio >= 100.0 && std::abs(slope - 2.0) <= 0.2,
                       fmt("E(0.1)/E(0.001)=%.3g (need >=100); slope on [3e-3,3e-2]=%.2f (need 2.0+-0.2);", ratio,
                           slope) +
                           errs};
    });

    run(7, "propagator unitarity", [&] {
        return Outcome{unitarity <= 1e-8, fmt("max|U^dag U - I|=%.2e over the optimized 64x64 CNOT at tau=1e-3",
                                              unitarity)};
    });

    run(8, "fast-path equivalence", [&] {
        const PulseSchedule s = PulseSchedule::cnot_table();
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(0.0, s.duration());
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double t = u(rng);
            worst = std::max(worst, max_abs_diff(h1_exponential_factorized(m, s, t, 1e-3),
                                                 h1_exponential_generic(m, s, t, 1e-3)));
        }
        return Outcome{worst <= 1e-10, fmt("max deviation %.2e over 100 random times", worst)};
    });

    run(9, "optimizer sanity", [&] {
        NelderMeadOptions ro;
        ro.max_evals = 500;
        ro.tol_f = 1e-16;
        ro.tol_x = 1e-10;
        const auto r = nelder_mead(
            [](std::span<const double> x) {
                return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
            },
            {-1.2, 1.0}, ro);
        const auto q = nelder_mead(
            [](std::span<const double> x) {
                double s = 0.0;
                for (double v : x) s += (v - 1.0) * (v - 1.0);
                return s;
            },
            std::vector<double>(5, 0.0));
        double qerr = 0.0;
        for (double v : q.x) qerr = std::max(qerr, std::abs(v - 1.0));
        return Outcome{r.f <= 1e-8 && r.evals <= 500 && qerr <= 1e-6 && q.evals <= 2000,
                       fmt("rosenbrock f=%.2e in %zu evals; quadratic max error %.2e in %zu evals", r.f, r.evals,
                           qerr, q.evals)};
    });

    run(10, "determinism", [&] {
        if (cli.empty()) return Outcome{false, "CLI path not given"};
        const std::string base = "acceptance_determinism";
        std::string cmd_a = cli + " --out " + base + "_a fidelity";
        std::string cmd_b = cli + " --out " + base + "_b fidelity";
        if (std::system(cmd_a.c_str()) != 0 || std::system(cmd_b.c_str()) != 0) {
            return Outcome{false, "fidelity command failed"};
        }
        const std::string a = slurp(base + "_a/fidelity.json");
        const std::string b = slurp(base + "_b/fidelity.json");
        return Outcome{!a.empty() && a == b, fmt("fidelity.json %zu bytes, %s", a.size(),
                                                 a == b ? "identical" : "differs")};
    });

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
