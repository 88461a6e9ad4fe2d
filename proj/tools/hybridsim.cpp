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


#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hybridsim/io.hpp"

namespace fs = std::filesystem;
using namespace hybridsim;

namespace {

struct GlobalFlags {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<std::string> gate;
};

struct Context {
    RunConfig config;
    fs::path out;
    std::string hash;

    std::string path(const std::string& name) const { return (out / name).string(); }

    json provenance() const { return json{{"config", to_json(config)}, {"device_hash", hash}}; }

    void echo_config() const { write_json(path("resolved_config.json"), provenance()); }
};

Context make_context(const GlobalFlags& g) {
    Context ctx;
    if (!g.config.empty()) ctx.config = load_config(g.config);
    if (g.seed) ctx.config.run.rng_seed = *g.seed;
    if (g.tau) {
        if (!(*g.tau > 0.0)) throw ConfigError("--tau: must be positive");
        ctx.config.run.tau_ns = *g.tau;
    }
    if (g.gate) {
        ctx.config.gate = *g.gate;
        (void)ctx.config.schedule();
    }
    ctx.out = g.out;
    fs::create_directories(ctx.out);
    ctx.hash = device_hash(ctx.config.device);
    ctx.echo_config();
    return ctx;
}

DeviceModel build_model(const Context& ctx) { return build_device_model(ctx.config.device.to_spec()); }

IdealGate target_for(const std::string& gate) {
    if (gate == "CNOT_TP" || gate == "RX_T" || gate == "RX_P" || gate == "identity") return ideal_gate(gate);
    throw ConfigError("gate: no ideal target for '" + gate + "' (expected CNOT_TP, RX_T, RX_P or identity)");
}

ComplexMatrix gate_block(const CompositeModel& m, const PulseSchedule& s, double tau) {
    PropagateOptions opt;
    opt.tau = tau;
    opt.columns.assign(m.comp_idx.begin(), m.comp_idx.end());
    return pulse_gate_block(m, s, propagate(m, s, 0.0, s.duration(), opt));
}

void write_tomography_csv(const std::string& path, const std::vector<TomographyEntry>& tomo) {
    CsvWriter csv(path);
    csv.header({"input", "output", "population", "delta_phi", "delta_phi_in_column"});
    for (const auto& e : tomo) {
        for (std::size_t a = 0; a < 4; ++a) {
            csv.row(std::vector<std::string>{
                e.input, kBasisLabels[a], format_double(e.populations[a]),
                e.phase_vs_reference[a] ? format_double(*e.phase_vs_reference[a]) : "",
                e.phase_in_column[a] ? format_double(*e.phase_in_column[a]) : ""});
        }
    }
}

void cmd_spectrum(const Context& ctx) {
    const DeviceModel dm = build_model(ctx);
    CsvWriter csv(ctx.path("spectrum.csv"));
    csv.header({"subsystem", "level", "energy_GHz", "parity"});
    for (const auto& r : spectrum_rows(dm)) csv.row(r.subsystem, r.level, r.energy_ghz, r.parity);
    const double f01 = rad_to_ghz(dm.transmon.energies[1] - dm.transmon.energies[0]);
    const double f12 = rad_to_ghz(dm.ppq.energies[2] - dm.ppq.energies[1]);
    std::printf("f01_T = %.9f GHz\nf12_P = %.9f GHz\n", f01, f12);
    for (const auto& w : dm.transmon.warnings) std::fprintf(stderr, "warning (transmon): %s\n", w.c_str());
    for (const auto& w : dm.ppq.warnings) std::fprintf(stderr, "warning (ppq): %s\n", w.c_str());
}

void cmd_calibrate(Context& ctx, std::optional<double> target) {
    const double f = target.value_or(ctx.config.run.target_f01_GHz);
    const double phi = calibrate_flux(ctx.config.device.to_spec(), f);
    RunConfig updated = ctx.config;
    updated.device.phi_e = phi;
    updated.run.target_f01_GHz = f;
    write_json(ctx.path("calibrated_config.json"), to_json(updated));
    std::printf("phi_e = %.17g\nf01_T = %.9f GHz\n", phi, transmon_f01_ghz(updated.device.to_spec(), phi));
}

std::vector<Complex> initial_state(const CompositeModel& m, const std::string& label) {
    for (std::size_t k = 0; k < 4; ++k) {
        if (label == kBasisLabels[k]) return basis_state(m, k / 2, k % 2);
    }
    if (label == "++") return plus_plus_state(m);
    std::ifstream in(label);
    if (!in) throw ConfigError("--initial: expected 00, 01, 10, 11, ++ or a JSON amplitude file, got '" + label + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(label + ": " + e.what());
    }
    if (!j.is_array() || (j.size() != 4 && j.size() != m.dim)) {
        throw ConfigError(label + ": expected an array of 4 or " + std::to_string(m.dim) + " [re, im] pairs");
    }
    std::vector<Complex> psi(m.dim);
    double norm = 0.0;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& z = j[k];
        if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
            throw ConfigError(label + "[" + std::to_string(k) + "]: expected [re, im]");
        }
        const Complex a(z[0].get<double>(), z[1].get<double>());
        psi[j.size() == 4 ? m.comp_idx[k] : k] = a;
        norm += std::norm(a);
    }
    if (!(norm > 0.0)) throw ConfigError(label + ": zero state");
    for (auto& a : psi) a /= std::sqrt(norm);
    return psi;
}

void cmd_simulate(const Context& ctx, const std::string& label) {
    const DeviceModel dm = build_model(ctx);
    const auto& m = dm.composite;
    const PulseSchedule& s = ctx.config.schedule();
    const auto psi0 = initial_state(m, label);
    const StateEvolution ev = propagate_state(m, s, psi0, ctx.config.run.tau_ns, ctx.config.run.record_stride);

    CsvWriter csv(ctx.path("trajectory.csv"));
    std::vector<std::string> cols{"t_ns", "transmon_x", "transmon_y", "transmon_z", "ppq_x", "ppq_y", "ppq_z", "leakage"};
    if (ctx.config.run.trajectory_amplitudes) {
        for (std::size_t k = 0; k < m.dim; ++k) {
            cols.push_back("re_" + std::to_string(k));
            cols.push_back("im_" + std::to_string(k));
        }
    }
    csv.header(cols);
    for (const auto& smp : ev.trajectory.samples) {
        std::vector<std::string> row{format_double(smp.t),          format_double(smp.transmon.x),
                                     format_double(smp.transmon.y), format_double(smp.transmon.z),
                                     format_double(smp.ppq.x),      format_double(smp.ppq.y),
                                     format_double(smp.ppq.z),      format_double(smp.leakage)};
        if (ctx.config.run.trajectory_amplitudes) {
            for (const auto& a : smp.state) {
                row.push_back(format_double(a.real()));
                row.push_back(format_double(a.imag()));
            }
        }
        csv.row(row);
    }

    const auto& last = ev.trajectory.samples.back();
    json amps = json::array();
    for (const auto& a : ev.final_state) amps.push_back({a.real(), a.imag()});
    json result{{"initial", label},
                {"gate", ctx.config.gate},
                {"duration_ns", s.duration()},
                {"tau_ns", ctx.config.run.tau_ns},
                {"final_state", amps},
                {"transmon_bloch", {last.transmon.x, last.transmon.y, last.transmon.z}},
                {"ppq_bloch", {last.ppq.x, last.ppq.y, last.ppq.z}},
                {"leakage", last.leakage},
                {"provenance", ctx.provenance()}};
    write_json(ctx.path("final_state.json"), result);
    std::printf("final transmon z = %.6f, ppq z = %.6f, leakage = %.3e\n", last.transmon.z, last.ppq.z, last.leakage);
}

GateReport evaluate_report(const Context& ctx, const CompositeModel& m) {
    const PulseSchedule& s = ctx.config.schedule();
    const ComplexMatrix block = gate_block(m, s, ctx.config.run.tau_ns);
    return make_gate_report(block, target_for(ctx.config.gate), ctx.config.run.fidelity_samples,
                            ctx.config.run.rng_seed);
}

void cmd_fidelity(const Context& ctx) {
    const DeviceModel dm = build_model(ctx);
    const GateReport r = evaluate_report(ctx, dm.composite);
    write_json(ctx.path("fidelity.json"), json{{"report", to_json(r)},
                                               {"schedule", to_json(ctx.config.schedule())},
                                               {"tau_ns", ctx.config.run.tau_ns},
                                               {"provenance", ctx.provenance()}});
    std::printf("%s: F = %.6f (I = %.3e, N = %zu, seed = %llu)\n", r.gate.c_str(), r.fidelity, 1.0 - r.fidelity,
                r.sample_count, static_cast<unsigned long long>(r.rng_seed));
}

void cmd_tomography(const Context& ctx) {
    const DeviceModel dm = build_model(ctx);
    const GateReport r = evaluate_report(ctx, dm.composite);
    write_tomography_csv(ctx.path("tomography.csv"), r.tomography);
    write_json(ctx.path("tomography.json"), json{{"gate", r.gate},
                                                 {"tomography", to_json(r.tomography)},
                                                 {"comp_block", to_json(r.comp_block)},
                                                 {"tau_ns", ctx.config.run.tau_ns},
                                                 {"provenance", ctx.provenance()}});
    for (const auto& e : r.tomography) {
        std::printf("|%s> -> |%s>  p = %.6f  leakage = %.2e\n", e.input.c_str(), kBasisLabels[e.dominant],
                    e.populations[e.dominant], e.leakage);
    }
}

void cmd_optimize(const Context& ctx) {
    const DeviceModel dm = build_model(ctx);
    const auto& oc = ctx.config.run.optimize;
    GateOptimizeOptions opt;
    opt.nelder_mead.max_evals = oc.max_evals;
    opt.nelder_mead.tol_x = oc.tol_x;
    opt.nelder_mead.tol_f = oc.tol_f;
    opt.coarse_tau = oc.coarse_tau_ns;
    opt.final_tau = oc.final_tau_ns;
    opt.samples = ctx.config.run.fidelity_samples;
    opt.seed = ctx.config.run.rng_seed;
    opt.step_fraction = oc.step_fraction;
    opt.step_floor = oc.step_floor;
    opt.step_override = oc.step_override;
    opt.vz_prealign = oc.vz_prealign;
    const OptimizeOutcome res =
        optimize_gate(dm.composite, target_for(ctx.config.gate), ctx.config.schedule(), oc.mask, opt);

    CsvWriter csv(ctx.path("optimize_trace.csv"));
    csv.header({"iteration", "best_I", "simplex_diameter", "evals"});
    for (const auto& it : res.trace.iterations) csv.row(it.iteration, it.best, it.diameter, it.evals);

    RunConfig updated = ctx.config;
    updated.schedules[ctx.config.gate] = res.schedule;
    write_json(ctx.path("optimized_config.json"), to_json(updated));

    const auto& tr = res.trace;
    write_json(ctx.path("optimize.json"),
               json{{"report", to_json(res.report)},
                    {"schedule", to_json(res.schedule)},
                    {"trace",
                     {{"names", tr.names},
                      {"final_x", tr.final_x},
                      {"evaluations", tr.evaluations},
                      {"prealigned_theta", tr.prealigned ? json{tr.prealigned->theta_T, tr.prealigned->theta_P} : json()},
                      {"penalized", tr.penalized},
                      {"stop_reason", tr.stop_reason},
                      {"coarse_tau_ns", tr.coarse_tau},
                      {"final_tau_ns", tr.final_tau},
                      {"coarse_infidelity", tr.coarse_infidelity},
                      {"final_infidelity", tr.final_infidelity}}},
                    {"provenance", ctx.provenance()}});
    std::printf("%s: coarse I = %.3e (tau %.0e), final F = %.6f (tau %.0e), %zu evaluations, %s\n",
                res.report.gate.c_str(), tr.coarse_infidelity, tr.coarse_tau, tr.final_fidelity, tr.final_tau,
                tr.evaluations, tr.stop_reason.c_str());
}

void cmd_trotter_scan(const Context& ctx) {
    const DeviceModel dm = build_model(ctx);
    const auto& sc = ctx.config.run.scan;
    const auto points = trotter_error_scan(dm.composite, sc.taus_ns, sc.duration_ns);
    CsvWriter csv(ctx.path("trotter_scan.csv"));
    csv.header({"tau_ns", "state_error"});
    for (const auto& p : points) {
        csv.row(p.tau, p.state_error);
        std::printf("tau = %-8g  error = %.3e\n", p.tau, p.state_error);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulse-level simulator for a transmon / pair-of-pairs qubit device"};
    app.require_subcommand(1);
    GlobalFlags g;
    app.add_option("--config", g.config, "Run config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--seed", g.seed, "Fidelity sampling seed");
    app.add_option("--tau", g.tau, "Trotter step in ns");
    app.add_option("--gate", g.gate, "Schedule label (CNOT_TP, RX_T, RX_P)");

    auto* spectrum = app.add_subcommand("spectrum", "Idle energy levels and parities");
    auto* calibrate = app.add_subcommand("calibrate", "Solve for the flux giving a target transmon f01");
    std::optional<double> target;
    calibrate->add_option("--target", target, "Target f01 in GHz");
    auto* simulate = app.add_subcommand("simulate", "Propagate one state and record Bloch trajectories");
    std::string initial;
    simulate->add_option("--initial", initial, "00, 01, 10, 11, ++ or amplitude file");
    auto* fidelity = app.add_subcommand("fidelity", "Average gate fidelity of the configured schedule");
    auto* optimize = app.add_subcommand("optimize", "Nelder-Mead re-optimization of the configured schedule");
    auto* scan = app.add_subcommand("trotter-scan", "Trotter versus exact state error over step sizes");
    auto* tomography = app.add_subcommand("tomography", "Basis-state tomography of the configured schedule");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        Context ctx = make_context(g);
        if (initial.empty()) initial = ctx.config.run.initial;
        if (spectrum->parsed()) cmd_spectrum(ctx);
        if (calibrate->parsed()) cmd_calibrate(ctx, target);
        if (simulate->parsed()) cmd_simulate(ctx, initial);
        if (fidelity->parsed()) cmd_fidelity(ctx);
        if (optimize->parsed()) cmd_optimize(ctx);
        if (scan->parsed()) cmd_trotter_scan(ctx);
        if (tomography->parsed()) cmd_tomography(ctx);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
