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

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hybridsim/device.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/evolve.hpp"
#include "hybridsim/metrics.hpp"
#include "hybridsim/optimize.hpp"
#include "hybridsim/pulses.hpp"

namespace hybridsim {

using json = nlohmann::json;

/// Device parameters as written in config files: frequencies in GHz.
/// Converted to rad/ns exactly once, in to_spec().
struct DeviceConfig {
    double E_C_T = 0.2;
    double E_J_sigma_T = 6.0;
    double gamma_squid = 1.01;
    double phi_e = 0.0;
    double E_C_P = 0.2;
    double E_J_P = 3.0;
    double omega_R = 2.4;
    double G = 0.01;
    int n_max = 50;
    int d_trunc = 4;

    DeviceSpec to_spec() const {
        DeviceSpec s;
        s.E_C_T = ghz_to_rad(E_C_T);
        s.E_J_sigma_T = ghz_to_rad(E_J_sigma_T);
        s.gamma_squid = gamma_squid;
        s.phi_e = phi_e;
        s.E_C_P = ghz_to_rad(E_C_P);
        s.E_J_P = ghz_to_rad(E_J_P);
        s.omega_R = ghz_to_rad(omega_R);
        s.G = ghz_to_rad(G);
        s.n_max = n_max;
        s.d_trunc = d_trunc;
        return s;
    }
};

struct OptimizeConfig {
    std::vector<std::string> mask{"f1", "omega_S", "gamma2", "theta_T", "theta_P"};
    std::size_t max_evals = 300;
    double coarse_tau_ns = 1e-2;
    double final_tau_ns = 1e-3;
    double tol_x = 1e-7;
    double tol_f = 1e-9;
    double step_fraction = 0.02;
    double step_floor = 1e-4;
    std::map<std::string, double> step_override{{"f1", 1e-4}};
    bool vz_prealign = true;
};

struct ScanConfig {
    std::vector<double> taus_ns{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    double duration_ns = 10.0;
};

struct RunOptions {
    double tau_ns = 1e-3;
    std::size_t fidelity_samples = 10000;
    std::uint64_t rng_seed = 20240607;
    std::size_t record_stride = 1000;
    double target_f01_GHz = 2.883;
    std::string initial = "00";
    bool trajectory_amplitudes = false;
    OptimizeConfig optimize;
    ScanConfig scan;
};

struct RunConfig {
    DeviceConfig device;
    std::string gate = "CNOT_TP";
    std::map<std::string, PulseSchedule> schedules{{"CNOT_TP", PulseSchedule::cnot_table()},
                                                   {"RX_T", PulseSchedule::rx_table(Channel::transmon)},
                                                   {"RX_P", PulseSchedule::rx_table(Channel::ppq)}};
    RunOptions run;

    const PulseSchedule& schedule() const {
        auto it = schedules.find(gate);
        if (it == schedules.end()) throw ConfigError("gate: no schedule named '" + gate + "' in schedules");
        return it->second;
    }
};

namespace detail {

inline const json* find_field(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

template <typename T>
void read_field(const json& obj, const std::string& path, const std::string& key, T& out) {
    const json* v = find_field(obj, key);
    if (v == nullptr) return;
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v->is_number()) throw ConfigError("expected a number");
        } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!v->is_number_integer() && !v->is_number_unsigned()) throw ConfigError("expected an integer");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v->is_boolean()) throw ConfigError("expected true/false");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v->is_string()) throw ConfigError("expected a string");
        }
        out = v->get<T>();
    } catch (const std::exception& e) {
        throw ConfigError(path + "." + key + ": " + e.what());
    }
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(path + "." + it.key() + ": unknown field");
    }
}

}  // namespace detail

inline json to_json(const DeviceConfig& d) {
    return json{{"E_C_T", d.E_C_T}, {"E_J_sigma_T", d.E_J_sigma_T}, {"gamma_squid", d.gamma_squid},
                {"phi_e", d.phi_e}, {"E_C_P", d.E_C_P},             {"E_J_P", d.E_J_P},
                {"omega_R", d.omega_R}, {"G", d.G},                 {"n_max", d.n_max},
                {"d_trunc", d.d_trunc}};
}

inline DeviceConfig device_from_json(const json& j, const std::string& path = "device") {
    detail::reject_unknown(j, path,
                           {"E_C_T", "E_J_sigma_T", "gamma_squid", "phi_e", "E_C_P", "E_J_P", "omega_R", "G", "n_max",
                            "d_trunc"});
    DeviceConfig d;
    detail::read_field(j, path, "E_C_T", d.E_C_T);
    detail::read_field(j, path, "E_J_sigma_T", d.E_J_sigma_T);
    detail::read_field(j, path, "gamma_squid", d.gamma_squid);
    detail::read_field(j, path, "phi_e", d.phi_e);
    detail::read_field(j, path, "E_C_P", d.E_C_P);
    detail::read_field(j, path, "E_J_P", d.E_J_P);
    detail::read_field(j, path, "omega_R", d.omega_R);
    detail::read_field(j, path, "G", d.G);
    detail::read_field(j, path, "n_max", d.n_max);
    detail::read_field(j, path, "d_trunc", d.d_trunc);
    try {
        d.to_spec().validate();
    } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return d;
}

inline json to_json(const PulseSchedule& s) {
    json j{{"f1", s.cr.f1},           {"f2", s.aux.f2},         {"T1", s.cr.T_S},
           {"T2", s.aux.T_G},         {"omega_S", s.cr.omega_S}, {"omega_G", s.aux.omega_G},
           {"rho", s.cr.rho},         {"gamma1", s.cr.gamma1},   {"gamma2", s.aux.gamma2},
           {"theta_T", s.vz.theta_T}, {"theta_P", s.vz.theta_P}, {"beta", s.aux.drag.beta},
           {"aux_channel", std::string(to_string(s.aux.channel))}};
    if (s.aux.sigma) j["sigma"] = *s.aux.sigma;
    return j;
}

/// Fields missing from `j` keep their value in `base`.
inline PulseSchedule schedule_from_json(const json& j, const std::string& path, const PulseSchedule& base = {}) {
    detail::reject_unknown(j, path,
                           {"f1", "f2", "T1", "T2", "omega_S", "omega_G", "rho", "gamma1", "gamma2", "theta_T",
                            "theta_P", "beta", "sigma", "aux_channel"});
    PulseSchedule s = base;
    detail::read_field(j, path, "f1", s.cr.f1);
    detail::read_field(j, path, "f2", s.aux.f2);
    detail::read_field(j, path, "T1", s.cr.T_S);
    detail::read_field(j, path, "T2", s.aux.T_G);
    detail::read_field(j, path, "omega_S", s.cr.omega_S);
    detail::read_field(j, path, "omega_G", s.aux.omega_G);
    detail::read_field(j, path, "rho", s.cr.rho);
    detail::read_field(j, path, "gamma1", s.cr.gamma1);
    detail::read_field(j, path, "gamma2", s.aux.gamma2);
    detail::read_field(j, path, "theta_T", s.vz.theta_T);
    detail::read_field(j, path, "theta_P", s.vz.theta_P);
    detail::read_field(j, path, "beta", s.aux.drag.beta);
    if (j.contains("sigma")) {
        double sigma = 0.0;
        detail::read_field(j, path, "sigma", sigma);
        s.aux.sigma = sigma;
    }
    std::string channel(to_string(s.aux.channel));
    detail::read_field(j, path, "aux_channel", channel);
    if (channel == "ppq") {
        s.aux.channel = Channel::ppq;
    } else if (channel == "transmon") {
        s.aux.channel = Channel::transmon;
    } else {
        throw ConfigError(path + ".aux_channel: expected 'ppq' or 'transmon'");
    }
    if (std::string why = s.invalid_reason(); !why.empty()) throw ConfigError(path + ": " + why);
    return s;
}

inline json to_json(const RunOptions& r) {
    json steps = json::object();
    for (const auto& [k, v] : r.optimize.step_override) steps[k] = v;
    return json{{"tau_ns", r.tau_ns},
                {"fidelity_samples", r.fidelity_samples},
                {"rng_seed", r.rng_seed},
                {"record_stride", r.record_stride},
                {"target_f01_GHz", r.target_f01_GHz},
                {"initial", r.initial},
                {"trajectory_amplitudes", r.trajectory_amplitudes},
                {"optimize",
                 {{"mask", r.optimize.mask},
                  {"max_evals", r.optimize.max_evals},
                  {"coarse_tau_ns", r.optimize.coarse_tau_ns},
                  {"final_tau_ns", r.optimize.final_tau_ns},
                  {"tol_x", r.optimize.tol_x},
                  {"tol_f", r.optimize.tol_f},
                  {"step_fraction", r.optimize.step_fraction},
                  {"step_floor", r.optimize.step_floor},
                  {"step_override", steps},
                  {"vz_prealign", r.optimize.vz_prealign}}},
                {"scan", {{"taus_ns", r.scan.taus_ns}, {"duration_ns", r.scan.duration_ns}}}};
}

inline RunOptions run_from_json(const json& j, const std::string& path = "run") {
    detail::reject_unknown(j, path,
                           {"tau_ns", "fidelity_samples", "rng_seed", "record_stride", "target_f01_GHz", "initial",
                            "trajectory_amplitudes", "optimize", "scan"});
    RunOptions r;
    detail::read_field(j, path, "tau_ns", r.tau_ns);
    detail::read_field(j, path, "fidelity_samples", r.fidelity_samples);
    detail::read_field(j, path, "rng_seed", r.rng_seed);
    detail::read_field(j, path, "record_stride", r.record_stride);
    detail::read_field(j, path, "target_f01_GHz", r.target_f01_GHz);
    detail::read_field(j, path, "initial", r.initial);
    detail::read_field(j, path, "trajectory_amplitudes", r.trajectory_amplitudes);
    if (const json* o = detail::find_field(j, "optimize")) {
        const std::string op = path + ".optimize";
        detail::reject_unknown(*o, op,
                               {"mask", "max_evals", "coarse_tau_ns", "final_tau_ns", "tol_x", "tol_f",
                                "step_fraction", "step_floor", "step_override", "vz_prealign"});
        if (const json* mask = detail::find_field(*o, "mask")) {
            if (!mask->is_array()) throw ConfigError(op + ".mask: expected an array of parameter names");
            r.optimize.mask.clear();
            for (const auto& name : *mask) {
                if (!name.is_string()) throw ConfigError(op + ".mask: expected strings");
                const auto& known = schedule_parameter_names();
                if (std::find(known.begin(), known.end(), name.get<std::string>()) == known.end()) {
                    throw ConfigError(op + ".mask: unknown parameter '" + name.get<std::string>() + "'");
                }
                r.optimize.mask.push_back(name.get<std::string>());
            }
        }
        detail::read_field(*o, op, "max_evals", r.optimize.max_evals);
        detail::read_field(*o, op, "coarse_tau_ns", r.optimize.coarse_tau_ns);
        detail::read_field(*o, op, "final_tau_ns", r.optimize.final_tau_ns);
        detail::read_field(*o, op, "tol_x", r.optimize.tol_x);
        detail::read_field(*o, op, "tol_f", r.optimize.tol_f);
        detail::read_field(*o, op, "step_fraction", r.optimize.step_fraction);
        detail::read_field(*o, op, "step_floor", r.optimize.step_floor);
        detail::read_field(*o, op, "vz_prealign", r.optimize.vz_prealign);
        if (const json* steps = detail::find_field(*o, "step_override")) {
            if (!steps->is_object()) throw ConfigError(op + ".step_override: expected an object");
            r.optimize.step_override.clear();
            for (auto it = steps->begin(); it != steps->end(); ++it) {
                double v = 0.0;
                detail::read_field(*steps, op + ".step_override", it.key(), v);
                r.optimize.step_override[it.key()] = v;
            }
        }
    }
    if (const json* s = detail::find_field(j, "scan")) {
        const std::string sp = path + ".scan";
        detail::reject_unknown(*s, sp, {"taus_ns", "duration_ns"});
        if (const json* taus = detail::find_field(*s, "taus_ns")) {
            if (!taus->is_array()) throw ConfigError(sp + ".taus_ns: expected an array");
            r.scan.taus_ns.clear();
            for (const auto& t : *taus) {
                if (!t.is_number()) throw ConfigError(sp + ".taus_ns: expected numbers");
                r.scan.taus_ns.push_back(t.get<double>());
            }
        }
        detail::read_field(*s, sp, "duration_ns", r.scan.duration_ns);
    }
    if (!(r.tau_ns > 0.0)) throw ConfigError(path + ".tau_ns: must be positive");
    if (r.fidelity_samples == 0) throw ConfigError(path + ".fidelity_samples: must be positive");
    if (r.record_stride == 0) throw ConfigError(path + ".record_stride: must be positive");
    return r;
}

inline json to_json(const RunConfig& c) {
    json schedules = json::object();
    for (const auto& [name, s] : c.schedules) schedules[name] = to_json(s);
    return json{{"device", to_json(c.device)}, {"gate", c.gate}, {"schedules", schedules}, {"run", to_json(c.run)}};
}

/// Parses a run config; every section is optional and falls back to the shipped defaults.
inline RunConfig config_from_json(const json& j) {
    detail::reject_unknown(j, "config", {"device", "gate", "schedules", "run"});
    RunConfig c;
    if (const json* d = detail::find_field(j, "device")) c.device = device_from_json(*d);
    detail::read_field(j, "config", "gate", c.gate);
    if (const json* s = detail::find_field(j, "schedules")) {
        if (!s->is_object()) throw ConfigError("schedules: expected an object keyed by gate label");
        for (auto it = s->begin(); it != s->end(); ++it) {
            auto known = c.schedules.find(it.key());
            const PulseSchedule base = known == c.schedules.end() ? PulseSchedule{} : known->second;
            c.schedules[it.key()] = schedule_from_json(*it, "schedules." + it.key(), base);
        }
    }
    if (const json* r = detail::find_field(j, "run")) c.run = run_from_json(*r);
    (void)c.schedule();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

/// FNV-1a 64 of the canonical device JSON.
inline std::string device_hash(const DeviceConfig& d) {
    const std::string text = to_json(d).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Shortest decimal text that round-trips the double.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline json to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const std::vector<TomographyEntry>& tomo) {
    json out = json::array();
    for (const auto& e : tomo) {
        json pops = json::object();
        json dphi = json::object();
        json dphi_col = json::object();
        for (std::size_t a = 0; a < 4; ++a) {
            pops[kBasisLabels[a]] = e.populations[a];
            if (e.phase_vs_reference[a]) dphi[kBasisLabels[a]] = *e.phase_vs_reference[a];
            if (e.phase_in_column[a]) dphi_col[kBasisLabels[a]] = *e.phase_in_column[a];
        }
        out.push_back({{"input", e.input},
                       {"populations", pops},
                       {"leakage", e.leakage},
                       {"dominant_output", kBasisLabels[e.dominant]},
                       {"delta_phi", dphi},
                       {"delta_phi_in_column", dphi_col}});
    }
    return out;
}

inline json to_json(const GateReport& r) {
    return json{{"gate", r.gate},
                {"fidelity", r.fidelity},
                {"infidelity", 1.0 - r.fidelity},
                {"sample_count", r.sample_count},
                {"rng_seed", r.rng_seed},
                {"comp_block", to_json(r.comp_block)},
                {"leakage", r.leakage},
                {"tomography", to_json(r.tomography)}};
}

class CsvWriter {
   public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw ConfigError("cannot write '" + path + "'");
    }
    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << '\n';
    }
    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <typename I>
        requires std::is_integral_v<I>
    static std::string cell(I v) {
        return std::to_string(v);
    }

   private:
    std::ofstream out_;
};

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace hybridsim
