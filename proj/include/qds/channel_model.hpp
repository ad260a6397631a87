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

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qds {

/// Per-pulse probability that a declared phase phi produces a click at the
/// signal null-port when the stored phase is theta. Rows are indexed by the
/// declared phase, columns by the encoded phase.
class CostMatrix {
  public:
    explicit CostMatrix(RMatrix entries) : m_(std::move(entries)) {
        if (m_.rows() != m_.cols()) {
            throw std::invalid_argument("CostMatrix: matrix is not square (" + std::to_string(m_.rows()) + "x" +
                                        std::to_string(m_.cols()) + ")");
        }
        if (m_.rows() < 2) {
            throw std::invalid_argument("CostMatrix: need N >= 2");
        }
        for (Eigen::Index i = 0; i < m_.size(); ++i) {
            const double v = m_.data()[i];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw std::invalid_argument("CostMatrix: entries must lie in [0, 1]");
            }
        }
    }

    /// Symmetric circulant matrix c_{i,j} = row[(j - i) mod N].
    static CostMatrix circulant(const std::vector<double> &first_row) {
        const auto n = static_cast<Eigen::Index>(first_row.size());
        RMatrix m(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                m(i, j) = first_row[static_cast<std::size_t>(((j - i) % n + n) % n)];
            }
        }
        return CostMatrix(m);
    }

    int size() const { return static_cast<int>(m_.rows()); }
    double operator()(int declared, int encoded) const { return m_(declared, encoded); }
    const RMatrix &matrix() const { return m_; }

    std::vector<double> first_row() const {
        std::vector<double> r(static_cast<std::size_t>(size()));
        for (int j = 0; j < size(); ++j) {
            r[static_cast<std::size_t>(j)] = m_(0, j);
        }
        return r;
    }

    double max_diagonal() const { return m_.diagonal().maxCoeff(); }
    double mean_diagonal() const { return m_.diagonal().mean(); }

    bool is_circulant_symmetric(double tol = 0.0) const {
        const int n = size();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (std::abs(m_(i, j) - m_(0, ((j - i) % n + n) % n)) > tol) return false;
                if (std::abs(m_(i, j) - m_(j, i)) > tol) return false;
            }
        }
        return true;
    }

    /// Element-wise a <= b.
    bool dominated_by(const CostMatrix &other) const {
        return size() == other.size() && (m_.array() <= other.m_.array()).all();
    }

  private:
    RMatrix m_;
};

enum class Receiver { kBob, kCharlie };

/// Losses, visibility, detectors and gating of the experimental set-up.
///
/// The first seven fields carry the published operating values. The last
/// three extend the model: `receiver_visibility` is the fringe visibility of a
/// receiver's verification interferometer, `mu_scale` is the global
/// calibration factor on the effective mean photon number, and
/// `differential_loss_db` is extra loss in front of Bob's detectors.
struct ChannelModel {
    double clock_hz = 1e8;
    double dark_cps = 320.0;
    double gate_s = 2e-9;
    double det_efficiency = 0.42;
    double visibility = 0.98;
    double multiport_loss_db = 7.5;
    double receiver_loss_db = 7.1;
    double receiver_visibility = 0.98;
    double mu_scale = 1.0;
    double differential_loss_db = 0.0;

    /// V = 1, no loss, unit efficiency, no dark counts.
    static ChannelModel ideal() {
        ChannelModel m;
        m.dark_cps = 0.0;
        m.det_efficiency = 1.0;
        m.visibility = 1.0;
        m.receiver_visibility = 1.0;
        m.multiport_loss_db = 0.0;
        m.receiver_loss_db = 0.0;
        return m;
    }

    void validate() const {
        auto fail = [](const std::string &what) { throw std::invalid_argument("ChannelModel: " + what); };
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(clock_hz) || clock_hz <= 0.0) fail("clock_hz must be > 0");
        if (!finite(gate_s) || gate_s <= 0.0) fail("gate_s must be > 0");
        if (!finite(dark_cps) || dark_cps < 0.0) fail("dark_cps must be >= 0");
        if (!(det_efficiency >= 0.0 && det_efficiency <= 1.0)) fail("det_efficiency must lie in [0, 1]");
        if (!(visibility >= 0.0 && visibility <= 1.0)) fail("visibility must lie in [0, 1]");
        if (!(receiver_visibility >= 0.0 && receiver_visibility <= 1.0)) {
            fail("receiver_visibility must lie in [0, 1]");
        }
        if (!finite(multiport_loss_db) || multiport_loss_db < 0.0) fail("multiport_loss_db must be >= 0");
        if (!finite(receiver_loss_db) || receiver_loss_db < 0.0) fail("receiver_loss_db must be >= 0");
        if (!finite(differential_loss_db) || differential_loss_db < 0.0) fail("differential_loss_db must be >= 0");
        if (!finite(mu_scale) || mu_scale <= 0.0) fail("mu_scale must be > 0");
        if (dark_probability_per_gate() > 1.0 || dark_probability_per_clock() > 1.0) {
            fail("dark count probability exceeds 1");
        }
    }

    static double db_to_transmission(double db) { return std::pow(10.0, -db / 10.0); }

    /// Transmission from the multiport inputs to a multiport output detector.
    double multiport_transmission(Receiver who = Receiver::kCharlie) const {
        double t = det_efficiency * db_to_transmission(multiport_loss_db);
        if (who == Receiver::kBob) t *= db_to_transmission(differential_loss_db);
        return t;
    }

    /// eta_total: transmission through multiport and receiver to a signal detector.
    double total_transmission(Receiver who = Receiver::kCharlie) const {
        double t = det_efficiency * db_to_transmission(multiport_loss_db + receiver_loss_db);
        if (who == Receiver::kBob) t *= db_to_transmission(differential_loss_db);
        return t;
    }

    /// R_Dark * gate: dark click probability inside one time gate.
    double dark_probability_per_gate() const { return dark_cps * gate_s; }
    /// R_Dark / clock: raw dark click probability per emitted pulse.
    double dark_probability_per_clock() const { return dark_cps / clock_hz; }
};

/// Threshold-detector click probability for Poissonian light of mean `mu`
/// combined with an independent dark click of probability `p_dark`.
inline double click_probability(double mean_photons, double p_dark) {
    if (!(mean_photons >= 0.0)) {
        throw std::invalid_argument("click_probability: negative mean photon number");
    }
    return 1.0 - std::exp(-mean_photons) * (1.0 - p_dark);
}

/// Mean intensities at the two outputs when fields x and y meet on a 50:50
/// beamsplitter with fringe visibility V:
///   null   = (|x|^2 + |y|^2 - 2 V Re(conj(x) y)) / 2
///   signal = (|x|^2 + |y|^2 + 2 V Re(conj(x) y)) / 2
inline double interference_null_intensity(Amplitude x, Amplitude y, double visibility) {
    const double v = (std::norm(x) + std::norm(y) - 2.0 * visibility * std::real(std::conj(x) * y)) / 2.0;
    return std::max(v, 0.0);
}

inline double interference_signal_intensity(Amplitude x, Amplitude y, double visibility) {
    const double v = (std::norm(x) + std::norm(y) + 2.0 * visibility * std::real(std::conj(x) * y)) / 2.0;
    return std::max(v, 0.0);
}

/// c^ideal_{phi,theta} = 1 - exp(-|alpha|^2 sin^2((phi - theta)/2)).
inline double ideal_click_probability(double phi, double theta, double mean_photons) {
    if (!(mean_photons >= 0.0)) {
        throw std::invalid_argument("ideal_click_probability: negative mean photon number");
    }
    const double s = std::sin((phi - theta) / 2.0);
    return -std::expm1(-mean_photons * s * s);
}

/// Verification click probability for a stored signal amplitude interfered
/// with a locally prepared reference amplitude. Both fields pass the multiport
/// and receiver losses, so
///   mu_eff = mu_scale * eta_total * (|s|^2 + |r|^2 - 2 V_r Re(conj(s) r)) / 4.
inline double comparison_click_probability(Amplitude stored, Amplitude reference, const ChannelModel &model,
                                           Receiver who = Receiver::kCharlie) {
    const double mu_eff = model.mu_scale * model.total_transmission(who) *
                          interference_null_intensity(stored, reference, model.receiver_visibility) / 2.0;
    return click_probability(mu_eff, model.dark_probability_per_gate());
}

/// Model cost-matrix entry:
///   p = 1 - (1 - p_click)(1 - p_dark),  p_click = 1 - exp(-mu_eff),
///   mu_eff = mu_scale * eta_total * |alpha|^2 (1 - V_r cos(phi - theta)) / 2.
inline double signal_null_click_probability(double phi, double theta, double mean_photons, const ChannelModel &model,
                                            Receiver who = Receiver::kCharlie) {
    model.validate();
    if (!(mean_photons >= 0.0)) {
        throw std::invalid_argument("signal_null_click_probability: negative mean photon number");
    }
    const double a = std::sqrt(mean_photons);
    return comparison_click_probability(std::polar(a, theta), std::polar(a, phi), model, who);
}

/// Click probability at a receiver's multiport null-port for Alice's inputs
/// a (to Bob) and b (to Charlie); the retained halves a/sqrt2 and b/sqrt2 meet
/// with the multiport visibility V.
inline double multiport_null_click_probability(Amplitude to_bob, Amplitude to_charlie, const ChannelModel &model,
                                               Receiver who) {
    const double s = std::numbers::sqrt2 / 2.0;
    const double mu =
        model.multiport_transmission(who) * interference_null_intensity(to_bob * s, to_charlie * s, model.visibility);
    return click_probability(mu, model.dark_probability_per_gate());
}

inline double multiport_signal_click_probability(Amplitude to_bob, Amplitude to_charlie, const ChannelModel &model,
                                                 Receiver who) {
    const double s = std::numbers::sqrt2 / 2.0;
    const double mu = model.multiport_transmission(who) *
                      interference_signal_intensity(to_bob * s, to_charlie * s, model.visibility);
    return click_probability(mu, model.dark_probability_per_gate());
}

inline CostMatrix predicted_cost_matrix(const PhaseAlphabet &alphabet, const ChannelModel &model) {
    model.validate();
    const int n = alphabet.size();
    RMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            // Evaluate on the reduced phase difference so the result is exactly circulant.
            const int d = ((j - i) % n + n) % n;
            m(i, j) = signal_null_click_probability(alphabet.phase(std::min(d, n - d)), 0.0,
                                                    alphabet.mean_photons(), model);
        }
    }
    return CostMatrix(m);
}

/// (1/2) nu R_dark dT / R_gated: dark-count share of the time-gated rate.
inline double dark_fraction(const ChannelModel &model, double gated_rate_cps) {
    if (!(gated_rate_cps > 0.0)) {
        throw std::invalid_argument("dark_fraction: gated rate must be > 0");
    }
    return 0.5 * model.clock_hz * model.dark_cps * model.gate_s / gated_rate_cps;
}

/// Visibility = (Imax - Imin)/(Imax + Imin) solved for Imin.
inline double null_rate_from_visibility(double signal_rate, double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw std::invalid_argument("null_rate_from_visibility: visibility must lie in [0, 1]");
    }
    if (!(signal_rate >= 0.0)) {
        throw std::invalid_argument("null_rate_from_visibility: signal rate must be >= 0");
    }
    return signal_rate * (1.0 - visibility) / (1.0 + visibility);
}

struct TamperRate {
    double rate_cps;
    double honest_rate_cps;
    /// rate / honest rate; empty when the honest floor is exactly zero.
    std::optional<double> factor;
    bool zero_floor;
};

/// Charlie's multiport null-port click rate when a fraction of Alice's pulses to
/// Bob carry an extra phase `delta_phi`.
inline TamperRate dishonest_alice_null_rate(const ChannelModel &model, double mean_photons, double delta_phi,
                                            double tamper_fraction) {
    model.validate();
    if (!(tamper_fraction >= 0.0 && tamper_fraction <= 1.0)) {
        throw std::invalid_argument("dishonest_alice_null_rate: tamper fraction must lie in [0, 1]");
    }
    if (!(mean_photons >= 0.0)) {
        throw std::invalid_argument("dishonest_alice_null_rate: negative mean photon number");
    }
    const double a = std::sqrt(mean_photons);
    const double p_honest = multiport_null_click_probability(a, a, model, Receiver::kCharlie);
    const double p_tampered = multiport_null_click_probability(std::polar(a, delta_phi), a, model, Receiver::kCharlie);
    const double p = (1.0 - tamper_fraction) * p_honest + tamper_fraction * p_tampered;

    TamperRate out{p * model.clock_hz, p_honest * model.clock_hz, std::nullopt, p_honest == 0.0};
    if (!out.zero_floor) out.factor = p / p_honest;
    return out;
}

struct Calibration {
    ChannelModel model;
    double target_diagonal;
    double target_antipodal;
    double fitted_diagonal;
    double fitted_antipodal;
};

namespace detail {
inline double mean_photons_from_click(double p, double p_dark) {
    const double no_click = (1.0 - p) / (1.0 - p_dark);
    if (!(no_click > 0.0 && no_click <= 1.0)) {
        throw std::invalid_argument("calibration: target click probability below the dark floor");
    }
    return -std::log(no_click);
}

/// Mean of the entries at the largest circular phase distance.
inline double antipodal_mean(const CostMatrix &c) {
    const int n = c.size();
    const int far = n / 2;
    double acc = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int d = ((j - i) % n + n) % n;
            if (std::min(d, n - d) == far) {
                acc += c(i, j);
                ++count;
            }
        }
    }
    return acc / count;
}
}  // namespace detail

/// Fits only mu_scale so the modeled diagonal at `alphabet` equals `target_diagonal`.
inline ChannelModel calibrate_mu_scale(const PhaseAlphabet &alphabet, ChannelModel model, double target_diagonal) {
    model.validate();
    const double mu_target = detail::mean_photons_from_click(target_diagonal, model.dark_probability_per_gate());
    const double per_unit = model.total_transmission() * alphabet.mean_photons() * (1.0 - model.receiver_visibility) / 2.0;
    if (!(per_unit > 0.0)) {
        throw std::invalid_argument("calibrate_mu_scale: diagonal is insensitive to mu_scale");
    }
    model.mu_scale = mu_target / per_unit;
    model.validate();
    return model;
}

/// Fits mu_scale and receiver_visibility in closed form so the model's
/// diagonal and antipodal entries equal the target's mean diagonal and mean
/// antipodal-orbit entry.
inline Calibration calibrate_to_cost_matrix(const PhaseAlphabet &alphabet, ChannelModel model,
                                            const CostMatrix &target) {
    model.validate();
    if (target.size() != alphabet.size()) {
        throw std::invalid_argument("calibrate_to_cost_matrix: dimension mismatch");
    }
    const double p_dark = model.dark_probability_per_gate();
    const double diag = target.mean_diagonal();
    const double anti = detail::antipodal_mean(target);
    const double mu_d = detail::mean_photons_from_click(diag, p_dark);
    const double mu_a = detail::mean_photons_from_click(anti, p_dark);
    const double c = std::cos(alphabet.phase(alphabet.size() / 2));
    // mu_d / mu_a = (1 - V) / (1 - V c)
    const double r = mu_d / mu_a;
    const double v = (1.0 - r) / (1.0 - r * c);
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("calibrate_to_cost_matrix: target contrast not reachable");
    }
    model.receiver_visibility = v;
    model.mu_scale = 2.0 * mu_d / (model.total_transmission() * alphabet.mean_photons() * (1.0 - v));
    model.validate();

    const auto fitted = predicted_cost_matrix(alphabet, model);
    return {model, diag, anti, fitted(0, 0), detail::antipodal_mean(fitted)};
}

}  // namespace qds
