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

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "hybridsim/device.hpp"
#include "hybridsim/errors.hpp"

namespace hybridsim {

enum class Channel { transmon, ppq };

constexpr std::string_view to_string(Channel c) { return c == Channel::transmon ? "transmon" : "ppq"; }

/// Baseline-subtracted Gaussian on [t0, t0 + T_G); zero outside, peak amplitude at the center.
struct GaussianEnvelope {
    double amplitude = 0.0;  ///< Omega_G, dimensionless
    double duration = 0.0;   ///< T_G, ns
    double sigma = 0.0;      ///< ns
    double t0 = 0.0;         ///< ns
};

/// Sinusoidal-ramp flat-top of total length T_S; rise time rho * T_S.
struct FlatTopEnvelope {
    double amplitude = 0.0;  ///< Omega_S
    double duration = 0.0;   ///< T_S, ns
    double rise_fraction = 0.1;

    double rise_time() const { return rise_fraction * duration; }
    double plateau_time() const { return duration - 2.0 * rise_time(); }
};

struct DragSpec {
    double beta = 0.0;  ///< ns; zero disables the quadrature
    bool enabled() const { return beta != 0.0; }
};

inline double eval_gaussian(const GaussianEnvelope& env, double t) {
    const double s = t - env.t0;
    if (!(s >= 0.0 && s < env.duration) || env.sigma <= 0.0) return 0.0;
    const double two_var = 2.0 * env.sigma * env.sigma;
    const double base = std::exp(-env.duration * env.duration / (4.0 * two_var));
    const double c = s - 0.5 * env.duration;
    return env.amplitude * (std::exp(-c * c / two_var) - base) / (1.0 - base);
}

inline double eval_gaussian_derivative(const GaussianEnvelope& env, double t) {
    const double s = t - env.t0;
    if (!(s >= 0.0 && s < env.duration) || env.sigma <= 0.0) return 0.0;
    const double var = env.sigma * env.sigma;
    const double base = std::exp(-env.duration * env.duration / (8.0 * var));
    const double c = s - 0.5 * env.duration;
    return env.amplitude * (-c / var) * std::exp(-c * c / (2.0 * var)) / (1.0 - base);
}

inline double eval_flattop(const FlatTopEnvelope& env, double t) {
    const double rise = env.rise_time();
    const double plateau = env.plateau_time();
    if (!(t >= 0.0 && t < env.duration) || rise <= 0.0) return 0.0;
    if (t < rise) return env.amplitude * std::sin(std::numbers::pi * t / (2.0 * rise));
    if (t < rise + plateau) return env.amplitude;
    return env.amplitude * std::sin(std::numbers::pi * (t - plateau) / (2.0 * rise));
}

/// Cross-resonance stage on the transmon: flat-top times cos(2 pi f1 t - gamma1).
struct CrPulse {
    double f1 = 0.0;       ///< GHz
    double T_S = 0.0;      ///< ns (T1 in configs)
    double rho = 0.1;      ///< rise fraction
    double omega_S = 0.0;  ///< amplitude
    double gamma1 = 0.0;   ///< rad
};

/// Gaussian stage starting at T1, by default on the PPQ (the auxiliary pulse).
/// Single-qubit R_X pulses use the same stage with T_S = 0 and the channel of
/// the addressed qubit.
struct AuxPulse {
    double f2 = 0.0;       ///< GHz
    double T_G = 0.0;      ///< ns (T2 in configs)
    std::optional<double> sigma;  ///< ns, T_G / 4 when unset
    double omega_G = 0.0;
    double gamma2 = 0.0;  ///< rad
    DragSpec drag;
    Channel channel = Channel::ppq;

    double effective_sigma() const { return sigma.value_or(T_G / 4.0); }
};

struct VirtualZ {
    double theta_T = 0.0;
    double theta_P = 0.0;
};

/// Everything that defines one gate attempt: CR stage, Gaussian stage, frame rotations.
struct PulseSchedule {
    CrPulse cr;
    AuxPulse aux;
    VirtualZ vz;

    double duration() const { return cr.T_S + aux.T_G; }

    FlatTopEnvelope cr_envelope() const { return {cr.omega_S, cr.T_S, cr.rho}; }
    GaussianEnvelope aux_envelope() const { return {aux.omega_G, aux.T_G, aux.effective_sigma(), cr.T_S}; }

    /// Returns an empty string when the schedule is physically valid, else the reason.
    std::string invalid_reason() const {
        if (!std::isfinite(duration())) return "non-finite duration";
        if (cr.T_S < 0.0) return "negative T1";
        if (aux.T_G < 0.0) return "negative T2";
        if (cr.T_S > 0.0 && !(cr.rho > 0.0 && cr.rho < 0.5)) return "rho outside (0, 0.5)";
        if (aux.T_G > 0.0 && !(aux.effective_sigma() > 0.0)) return "non-positive sigma";
        for (double v : {cr.f1, cr.omega_S, cr.gamma1, aux.f2, aux.omega_G, aux.gamma2, aux.drag.beta, vz.theta_T,
                         vz.theta_P}) {
            if (!std::isfinite(v)) return "non-finite parameter";
        }
        return {};
    }

    /// Reference CNOT_TP schedule (transmon control, PPQ target).
    static PulseSchedule cnot_table() {
        PulseSchedule s;
        s.cr = {2.8470, 1460.0, 0.09986, 0.03000, -1.068e-6};
        s.aux.f2 = 2.8472;
        s.aux.T_G = 9.9966;
        s.aux.omega_G = 0.02078;
        s.aux.gamma2 = 2.4186;
        s.aux.channel = Channel::ppq;
        s.vz = {0.6007, -0.0333};
        return s;
    }

    /// Reference R_X(pi/2) on the transmon (DRAG) or the PPQ (no DRAG).
    static PulseSchedule rx_table(Channel qubit) {
        PulseSchedule s;
        s.cr = {0.0, 0.0, 0.1, 0.0, 0.0};
        s.aux.T_G = 20.0;
        s.aux.gamma2 = 0.0;
        s.aux.channel = qubit;
        if (qubit == Channel::transmon) {
            s.aux.f2 = 2.8830;
            s.aux.omega_G = -0.0154;
            s.aux.drag.beta = 0.3979;
        } else {
            s.aux.f2 = 2.8470;
            s.aux.omega_G = -0.0133;
        }
        return s;
    }
};

/// Offset charge n_g(t) seen by one qubit. Carrier phases use absolute time.
inline double offset_charge(const PulseSchedule& s, Channel channel, double t) {
    double out = 0.0;
    if (channel == Channel::transmon) {
        const double env = eval_flattop(s.cr_envelope(), t);
        if (env != 0.0) out += env * std::cos(kTwoPi * s.cr.f1 * t - s.cr.gamma1);
    }
    if (s.aux.channel == channel) {
        const GaussianEnvelope g = s.aux_envelope();
        const double env = eval_gaussian(g, t);
        if (env != 0.0) out += env * std::cos(kTwoPi * s.aux.f2 * t - s.aux.gamma2);
        if (s.aux.drag.enabled()) {
            const double deriv = eval_gaussian_derivative(g, t);
            if (deriv != 0.0) out += s.aux.drag.beta * deriv * std::sin(kTwoPi * s.aux.f2 * t - s.aux.gamma2);
        }
    }
    return out;
}

}  // namespace hybridsim
