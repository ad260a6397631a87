// Copyright 2026 The qds-sim Authors
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

#include "qds/coherent_core.hpp"
#include "qds/min_cost_measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qds {

/// A probability bound. Hoeffding's two-sided form can formally exceed 1, so
/// the raw value is kept next to the reported (clamped) one.
struct Bound {
    double raw = 0.0;
    bool vacuous = false;

    double value() const { return std::min(raw, 1.0); }

    static Bound of(double raw_value) { return {raw_value, raw_value >= 1.0}; }
};

struct Thresholds {
    double s_a;
    double s_v;
};

inline Thresholds thresholds(double p_original, double gap) {
    if (!(gap > 0.0)) {
        throw std::invalid_argument("thresholds: the gap must be > 0 (got " + std::to_string(gap) + ")");
    }
    if (!(p_original >= 0.0) || !(p_original + gap < 1.0)) {
        throw std::invalid_argument("thresholds: need p_original >= 0 and p_original + gap < 1");
    }
    return {p_original + gap / 3.0, p_original + 2.0 * gap / 3.0};
}

namespace detail {
inline void require_gap_and_length(double gap, double length, const char *what) {
    if (!(gap > 0.0)) throw std::invalid_argument(std::string(what) + ": the gap must be > 0");
    if (!(length >= 0.0)) throw std::invalid_argument(std::string(what) + ": L must be >= 0");
}
}  // namespace detail

/// 2 exp(-(2/9) g^2 L).
inline Bound forging_bound(double gap, double length) {
    detail::require_gap_and_length(gap, length, "forging_bound");
    return Bound::of(2.0 * std::exp(-(2.0 / 9.0) * gap * gap * length));
}

/// exp(-(2/9) g^2 L) + exp(-(4/9) g^2 L).
inline Bound robustness_bound(double gap, double length) {
    detail::require_gap_and_length(gap, length, "robustness_bound");
    const double x = gap * gap * length;
    return Bound::of(std::exp(-(2.0 / 9.0) * x) + std::exp(-(4.0 / 9.0) * x));
}

/// L at which the forging bound equals 1: 9 ln 2 / (2 g^2).
inline double nontrivial_length(double gap) {
    if (!(gap > 0.0)) throw std::invalid_argument("nontrivial_length: the gap must be > 0");
    return 9.0 * std::numbers::ln2 / (2.0 * gap * gap);
}

/// d^{(s_v - s_a) L}. A base d >= 1 gives no protection and is reported as a
/// vacuous bound of 1.
inline Bound repudiation_bound(double d, double gap_fraction, double length) {
    if (!(d >= 0.0)) throw std::invalid_argument("repudiation_bound: d must be >= 0");
    if (!(gap_fraction > 0.0)) throw std::invalid_argument("repudiation_bound: s_v - s_a must be > 0");
    if (!(length >= 0.0)) throw std::invalid_argument("repudiation_bound: L must be >= 0");
    if (d >= 1.0) return {1.0, true};
    return Bound::of(std::pow(d, gap_fraction * length));
}

/// Trace-distance budget of an active attack that passes the multiport check:
///   delta = (1 - f) sqrt(r + eps) + f,  f = min(1, 2 exp(-2 eps^2 L)).
inline double active_delta(double r, double eps, double length) {
    if (!(r >= 0.0)) throw std::invalid_argument("active_delta: r must be >= 0");
    if (!(eps > 0.0)) throw std::invalid_argument("active_delta: eps must be > 0");
    if (!(length >= 1.0)) throw std::invalid_argument("active_delta: L must be >= 1");
    if (r + eps > 1.0) throw std::invalid_argument("active_delta: r + eps must be <= 1");
    const double f = std::min(1.0, 2.0 * std::exp(-2.0 * eps * eps * length));
    return (1.0 - f) * std::sqrt(r + eps) + f;
}

struct ActiveBounds {
    Bound forging;
    Bound robustness;
    /// delta >= g_amplified: the degraded gap is gone.
    bool gap_exhausted;
};

/// Forging and robustness bounds with the gap degraded by delta.
inline ActiveBounds active_forging_bound(double g_amplified, double delta, double length) {
    if (!(delta >= 0.0)) throw std::invalid_argument("active_forging_bound: delta must be >= 0");
    if (!(length >= 0.0)) throw std::invalid_argument("active_forging_bound: L must be >= 0");
    const double g = g_amplified - delta;
    if (g <= 0.0) {
        return {{2.0, true}, {2.0, true}, true};
    }
    const double x = g * g * length;
    return {Bound::of(2.0 * std::exp(-(2.0 / 9.0) * x)),
            Bound::of(std::exp(-(2.0 / 9.0) * x) + std::exp(-(4.0 / 9.0) * x)), false};
}

/// exp(-2 r^2 L). `r` should already include the dark-count uplift.
inline Bound multiport_robustness_bound(double r, double length) {
    if (!(r > 0.0)) throw std::invalid_argument("multiport_robustness_bound: r must be > 0");
    if (!(length >= 0.0)) throw std::invalid_argument("multiport_robustness_bound: L must be >= 0");
    return Bound::of(std::exp(-2.0 * r * r * length));
}

inline double trace_distance_from_fidelity(double fidelity) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
        throw std::invalid_argument("trace_distance_from_fidelity: fidelity must lie in [0, 1]");
    }
    return std::sqrt(1.0 - fidelity);
}

struct InfoBalance {
    double key_bits;
    double accessible_bits;
    double ratio;
    /// Accessible information at least an order of magnitude below the key.
    bool holds;
};

inline constexpr double kInfoBalanceMargin = 0.1;

inline InfoBalance info_balance(const PhaseAlphabet &alphabet, int receivers, double length) {
    if (receivers < 1) throw std::invalid_argument("info_balance: need at least one receiver");
    if (!(length >= 0.0)) throw std::invalid_argument("info_balance: L must be >= 0");
    const double s = von_neumann_entropy(signature_element_density(alphabet));
    const double key = length * std::log2(static_cast<double>(alphabet.size()));
    const double accessible = length * receivers * s;
    const double ratio = receivers * s / std::log2(static_cast<double>(alphabet.size()));
    return {key, accessible, ratio, ratio < kInfoBalanceMargin};
}

/// Standard optimum for unambiguous discrimination of symmetric pure states:
/// N times the smallest eigenvalue of the uniform mixture. The Gram spectrum
/// sums to N, so this is its smallest entry.
inline double usd_probability(const PhaseAlphabet &alphabet) {
    const auto spec = gram_spectrum(alphabet);
    return std::clamp(spec.eigenvalues.minCoeff(), 0.0, 1.0);
}

struct SecurityParameters {
    double rejection_threshold = 1e-7;
    /// Hoeffding slack for delta; negative means r / 2.
    double hoeffding_slack = -1.0;
    double repudiation_base = 0.5;
    int receivers = 2;
    std::vector<double> sweep_lengths = {1e4, 1e5, 1e6, 4.84e6, 1e7, 3e7, 1e8, 1e9, 1e10, 1e11, 1e12, 1e13};

    double slack() const { return hoeffding_slack < 0.0 ? rejection_threshold / 2.0 : hoeffding_slack; }
};

struct SweepRow {
    double length;
    Bound forging;
    Bound repudiation;
    Bound robustness;
    Bound robustness_multiport;
    double delta;
    Bound active_forging;
};

struct SecurityReport {
    double p_original;
    double p_forgery;
    double gap;
    double s_a;
    double s_v;
    double p_forgery_amplified;
    double gap_amplified;
    double rejection_threshold;
    double hoeffding_slack;
    double repudiation_base;
    int receivers;
    double entropy_per_copy;
    double info_ratio;
    double usd_probability;
    double nontrivial_length;
    std::vector<SweepRow> sweep;
};

/// Assembles every bound from a passive and an amplified forgery analysis.
/// The gap of the passive analysis is taken from the lower bounding matrix.
inline SecurityReport build_security_report(const ForgingAnalysis &passive, const ForgingAnalysis &amplified,
                                            const PhaseAlphabet &alphabet, const SecurityParameters &params) {
    const double gap = passive.gap_lower();
    const auto th = thresholds(passive.p_original, gap);
    const auto info = info_balance(alphabet, params.receivers, 1.0);
    SecurityReport rep{passive.p_original,
                       passive.p_forgery_lower,
                       gap,
                       th.s_a,
                       th.s_v,
                       amplified.p_forgery_lower,
                       amplified.gap_lower(),
                       params.rejection_threshold,
                       params.slack(),
                       params.repudiation_base,
                       params.receivers,
                       von_neumann_entropy(signature_element_density(alphabet)),
                       info.ratio,
                       usd_probability(alphabet),
                       nontrivial_length(gap),
                       {}};
    for (double len : params.sweep_lengths) {
        const double delta = active_delta(params.rejection_threshold, params.slack(), std::max(len, 1.0));
        rep.sweep.push_back({len, forging_bound(gap, len), repudiation_bound(params.repudiation_base, th.s_v - th.s_a, len),
                             robustness_bound(gap, len), multiport_robustness_bound(params.rejection_threshold, len),
                             delta, active_forging_bound(rep.gap_amplified, delta, len).forging});
    }
    return rep;
}

}  // namespace qds
