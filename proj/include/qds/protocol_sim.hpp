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

#include "qds/channel_model.hpp"
#include "qds/coherent_core.hpp"
#include "qds/min_cost_measurement.hpp"
#include "qds/security_bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace qds {

// ---------------------------------------------------------------------------
// Counter-based random streams.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stateless stream: the value at each counter depends only on (key, counter),
/// so draws can be taken in any order or from any thread.
class CounterRng {
  public:
    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const { return splitmix64(key_ ^ splitmix64(counter)); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    bool bernoulli(std::uint64_t counter, double p) const { return uniform(counter) < p; }

    /// Uniform in [0, n) by the multiply-high reduction of the top 32 bits
    /// (bias below n / 2^32).
    int index(std::uint64_t counter, int n) const {
        return static_cast<int>(((bits(counter) >> 32) * static_cast<std::uint64_t>(n)) >> 32);
    }

    constexpr std::uint64_t key() const { return key_; }

  private:
    std::uint64_t key_;
};

/// Named streams of one trial. Counters inside a stream are pulse indices.
enum class StreamPort : std::uint64_t {
    kKey = 1,
    kTamper = 2,
    kNullBob = 3,
    kNullCharlie = 4,
    kSignalBob = 5,
    kSignalCharlie = 6,
    kForge = 7,
    kVerifyBob = 8,
    kVerifyCharlie = 9,
    kCostEstimate = 10,
};

inline CounterRng trial_stream(std::uint64_t master_seed, std::uint64_t trial, StreamPort port) {
    const std::uint64_t k = splitmix64(splitmix64(splitmix64(master_seed) ^ trial) ^ static_cast<std::uint64_t>(port));
    return CounterRng(k);
}

// ---------------------------------------------------------------------------
// Strategies.
// ---------------------------------------------------------------------------

struct HonestAlice {};

/// Adds `delta_phi` to the copy sent to Bob on a random `fraction` of pulses.
struct PhaseTamper {
    double delta_phi = std::numbers::pi;
    double fraction = 2.0 / 16.0;
};

/// Sends theta + offset_bob to Bob and theta + offset_charlie to Charlie.
struct TwoStateRepudiator {
    double offset_bob = 0.0;
    double offset_charlie = std::numbers::pi / 4.0;
};

/// One of Alice's outputs is blocked (vacuum).
struct BlockedInput {
    Receiver blocked = Receiver::kCharlie;
};

using AliceStrategy = std::variant<HonestAlice, PhaseTamper, TwoStateRepudiator, BlockedInput>;

struct HonestBob {};

/// Measures his own copy with the square-root measurement and declares the outcome.
struct PassiveForger {};

/// Waits for Charlie's forwarded half, measures both halves (amplitude
/// sqrt(3/2) alpha), forwards a coherent state of amplitude
/// `response_fraction * alpha / sqrt2` at the guessed phase and declares the guess.
struct ActiveForger {
    double response_fraction = 1.0;
};

using BobStrategy = std::variant<HonestBob, PassiveForger, ActiveForger>;

inline std::string strategy_name(const AliceStrategy &s) {
    static constexpr const char *names[] = {"honest", "phase-tamper", "two-state-repudiator", "blocked-input"};
    return names[s.index()];
}

inline std::string strategy_name(const BobStrategy &s) {
    static constexpr const char *names[] = {"honest", "passive-forger", "active-forger"};
    return names[s.index()];
}

// ---------------------------------------------------------------------------
// Configuration and transcripts.
// ---------------------------------------------------------------------------

struct ProtocolConfig {
    int n_phases = 8;
    double mean_photons = 0.16;
    std::int64_t signature_length = 100000;
    ChannelModel channel;
    double s_a = 0.0;
    double s_v = 0.0;
    /// Largest tolerated multiport null-click fraction at either receiver.
    double rejection_threshold = 1e-3;
    double repudiation_base = 0.5;
    AliceStrategy alice = HonestAlice{};
    BobStrategy bob = HonestBob{};
    std::int64_t trials = 1;
    std::uint64_t master_seed = 0;
    /// 0 picks the hardware concurrency.
    int workers = 0;

    PhaseAlphabet alphabet() const { return PhaseAlphabet::from_mean_photons(n_phases, mean_photons); }

    void validate() const {
        auto fail = [](const std::string &what) { throw std::invalid_argument("ProtocolConfig: " + what); };
        (void)alphabet();
        channel.validate();
        if (signature_length < 1) fail("signature_length must be >= 1");
        if (!(s_a > 0.0 && s_a < s_v && s_v < 1.0)) fail("thresholds must satisfy 0 < s_a < s_v < 1");
        if (!(rejection_threshold >= 0.0)) fail("rejection_threshold must be >= 0");
        if (!(repudiation_base >= 0.0)) fail("repudiation_base must be >= 0");
        if (trials < 1) fail("trials must be >= 1");
        if (workers < 0) fail("workers must be >= 0");
        if (const auto *t = std::get_if<PhaseTamper>(&alice); t && !(t->fraction >= 0.0 && t->fraction <= 1.0)) {
            fail("tamper fraction must lie in [0, 1]");
        }
        if (const auto *a = std::get_if<ActiveForger>(&bob); a && !(a->response_fraction >= 0.0)) {
            fail("active forger response fraction must be >= 0");
        }
    }
};

struct PulseRecord {
    int key = 0;
    int declared = 0;
    Amplitude to_bob;
    Amplitude to_charlie;
    Amplitude stored_bob;
    Amplitude stored_charlie;
    bool null_click_bob = false;
    bool null_click_charlie = false;
    bool signal_click_bob = false;
    bool signal_click_charlie = false;
    bool verify_click_bob = false;
    bool verify_click_charlie = false;
};

struct ClickCounts {
    std::int64_t pulses = 0;
    std::int64_t null_bob = 0;
    std::int64_t null_charlie = 0;
    std::int64_t null_only_bob = 0;
    std::int64_t null_only_charlie = 0;
    std::int64_t signal_bob = 0;
    std::int64_t signal_charlie = 0;
    std::int64_t verify_bob = 0;
    std::int64_t verify_charlie = 0;

    void add(const PulseRecord &p) {
        ++pulses;
        null_bob += p.null_click_bob;
        null_charlie += p.null_click_charlie;
        null_only_bob += p.null_click_bob && !p.null_click_charlie;
        null_only_charlie += p.null_click_charlie && !p.null_click_bob;
        signal_bob += p.signal_click_bob;
        signal_charlie += p.signal_click_charlie;
        verify_bob += p.verify_click_bob;
        verify_charlie += p.verify_click_charlie;
    }

    bool operator==(const ClickCounts &) const = default;
};

struct Transcript {
    std::vector<PulseRecord> pulses;
    ClickCounts counts;

    std::int64_t length() const { return static_cast<std::int64_t>(pulses.size()); }

    ClickCounts recount() const {
        ClickCounts c;
        for (const auto &p : pulses) c.add(p);
        return c;
    }
};

// ---------------------------------------------------------------------------
// Building blocks.
// ---------------------------------------------------------------------------

inline std::vector<int> generate_private_key(const CounterRng &rng, const PhaseAlphabet &alphabet,
                                             std::int64_t length) {
    if (length < 0) throw std::invalid_argument("generate_private_key: negative length");
    std::vector<int> key(static_cast<std::size_t>(length));
    for (std::int64_t k = 0; k < length; ++k) {
        key[static_cast<std::size_t>(k)] = rng.index(static_cast<std::uint64_t>(k), alphabet.size());
    }
    return key;
}

/// Cumulative outcome distributions of a POVM, one row per true phase.
class OutcomeSampler {
  public:
    OutcomeSampler(const Povm &povm, const SpectralDecomposition &spec) : n_(spec.size()) {
        cdf_.resize(static_cast<std::size_t>(n_ * n_));
        for (int theta = 0; theta < n_; ++theta) {
            const RVector p = outcome_distribution(povm, theta, spec);
            const double total = p.sum();
            double acc = 0.0;
            for (int phi = 0; phi < n_; ++phi) {
                acc += p(phi) / total;
                cdf_[static_cast<std::size_t>(theta * n_ + phi)] = acc;
            }
            cdf_[static_cast<std::size_t>(theta * n_ + n_ - 1)] = 1.0;
        }
    }

    int sample(int theta, double u) const {
        const auto begin = cdf_.begin() + theta * n_;
        const auto it = std::upper_bound(begin, begin + n_, u);
        return static_cast<int>(std::min<std::ptrdiff_t>(it - begin, n_ - 1));
    }

  private:
    int n_;
    std::vector<double> cdf_;
};

/// Bob's best guess of each phase from his copy, sampled from the POVM's
/// outcome distribution.
inline std::vector<int> passive_forge(const std::vector<int> &bob_states, const Povm &povm,
                                      const SpectralDecomposition &spec, const CounterRng &rng) {
    const OutcomeSampler sampler(povm, spec);
    std::vector<int> declared(bob_states.size());
    for (std::size_t k = 0; k < bob_states.size(); ++k) {
        spec.alphabet.check_index(bob_states[k]);
        declared[k] = sampler.sample(bob_states[k], rng.uniform(k));
    }
    return declared;
}

struct VerificationResult {
    bool accept;
    std::int64_t clicks;
};

/// One Bernoulli per pulse with the comparison click probability of the
/// stored amplitude against the declared phase; accept iff clicks < threshold * L.
inline VerificationResult run_verification(const std::vector<Amplitude> &stored, const std::vector<int> &declared,
                                           const PhaseAlphabet &alphabet, double threshold,
                                           const ChannelModel &channel, Receiver who, const CounterRng &rng) {
    if (stored.size() != declared.size()) {
        throw std::invalid_argument("run_verification: stored and declared sequences differ in length (" +
                                    std::to_string(stored.size()) + " vs " + std::to_string(declared.size()) + ")");
    }
    channel.validate();
    std::int64_t clicks = 0;
    for (std::size_t k = 0; k < stored.size(); ++k) {
        alphabet.check_index(declared[k]);
        const double p = comparison_click_probability(stored[k], alphabet.state(declared[k]), channel, who);
        clicks += rng.bernoulli(k, p);
    }
    const auto length = static_cast<double>(stored.size());
    return {threshold >= 1.0 || static_cast<double>(clicks) < threshold * length, clicks};
}

inline VerificationResult run_verification(const std::vector<int> &stored_phases, const std::vector<int> &declared,
                                           const PhaseAlphabet &alphabet, double threshold,
                                           const ChannelModel &channel, Receiver who, const CounterRng &rng) {
    std::vector<Amplitude> stored(stored_phases.size());
    for (std::size_t k = 0; k < stored.size(); ++k) stored[k] = alphabet.state(stored_phases[k]);
    return run_verification(stored, declared, alphabet, threshold, channel, who, rng);
}

// ---------------------------------------------------------------------------
// Trial engine.
// ---------------------------------------------------------------------------

namespace detail {

/// Channel constants hoisted out of the per-pulse loop.
struct PortModel {
    double eta_mp_bob, eta_mp_charlie;
    double eta_total_bob, eta_total_charlie;
    double p_dark;
    double visibility;
    double receiver_visibility;
    double mu_scale;

    explicit PortModel(const ChannelModel &m)
        : eta_mp_bob(m.multiport_transmission(Receiver::kBob)),
          eta_mp_charlie(m.multiport_transmission(Receiver::kCharlie)),
          eta_total_bob(m.total_transmission(Receiver::kBob)),
          eta_total_charlie(m.total_transmission(Receiver::kCharlie)),
          p_dark(m.dark_probability_per_gate()),
          visibility(m.visibility),
          receiver_visibility(m.receiver_visibility),
          mu_scale(m.mu_scale) {}

    double verify(Amplitude stored, Amplitude reference, Receiver who) const {
        const double eta = who == Receiver::kBob ? eta_total_bob : eta_total_charlie;
        return click_probability(mu_scale * eta * interference_null_intensity(stored, reference, receiver_visibility) / 2.0,
                                 p_dark);
    }
};

struct TrialContext {
    const ProtocolConfig &config;
    PhaseAlphabet alphabet;
    PortModel ports;
    OutcomeSampler passive;
    OutcomeSampler amplified;

    explicit TrialContext(const ProtocolConfig &c)
        : config(c),
          alphabet(c.alphabet()),
          ports(c.channel),
          passive(make_sampler(alphabet)),
          amplified(make_sampler(alphabet.scaled(std::sqrt(1.5)))) {}

    static OutcomeSampler make_sampler(const PhaseAlphabet &a) {
        const auto spec = gram_spectrum(a);
        return OutcomeSampler(square_root_povm(spec), spec);
    }
};

struct Streams {
    CounterRng key, tamper, null_bob, null_charlie, signal_bob, signal_charlie, forge, verify_bob, verify_charlie;

    Streams(std::uint64_t seed, std::uint64_t trial)
        : key(trial_stream(seed, trial, StreamPort::kKey)),
          tamper(trial_stream(seed, trial, StreamPort::kTamper)),
          null_bob(trial_stream(seed, trial, StreamPort::kNullBob)),
          null_charlie(trial_stream(seed, trial, StreamPort::kNullCharlie)),
          signal_bob(trial_stream(seed, trial, StreamPort::kSignalBob)),
          signal_charlie(trial_stream(seed, trial, StreamPort::kSignalCharlie)),
          forge(trial_stream(seed, trial, StreamPort::kForge)),
          verify_bob(trial_stream(seed, trial, StreamPort::kVerifyBob)),
          verify_charlie(trial_stream(seed, trial, StreamPort::kVerifyCharlie)) {}
};

/// Distribution, signing and verification of pulse k.
inline PulseRecord simulate_pulse(const TrialContext &ctx, const Streams &rng, std::uint64_t k) {
    const auto &a = ctx.alphabet;
    const auto &cfg = ctx.config;
    const double half = std::numbers::sqrt2 / 2.0;

    PulseRecord p;
    p.key = rng.key.index(k, a.size());
    const double theta = a.phase(p.key);
    const double amp = a.amplitude();
    p.to_bob = std::polar(amp, theta);
    p.to_charlie = p.to_bob;

    std::visit(
        [&](const auto &s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, PhaseTamper>) {
                if (rng.tamper.bernoulli(k, s.fraction)) p.to_bob = std::polar(amp, theta + s.delta_phi);
            } else if constexpr (std::is_same_v<S, TwoStateRepudiator>) {
                p.to_bob = std::polar(amp, theta + s.offset_bob);
                p.to_charlie = std::polar(amp, theta + s.offset_charlie);
            } else if constexpr (std::is_same_v<S, BlockedInput>) {
                (s.blocked == Receiver::kBob ? p.to_bob : p.to_charlie) = 0.0;
            }
        },
        cfg.alice);

    const Amplitude own_bob = p.to_bob * half;
    const Amplitude own_charlie = p.to_charlie * half;
    const Amplitude from_charlie = own_charlie;
    Amplitude from_bob = own_bob;

    p.declared = p.key;
    if (std::holds_alternative<PassiveForger>(cfg.bob)) {
        p.declared = ctx.passive.sample(p.key, rng.forge.uniform(k));
    } else if (const auto *af = std::get_if<ActiveForger>(&cfg.bob)) {
        p.declared = ctx.amplified.sample(p.key, rng.forge.uniform(k));
        from_bob = std::polar(af->response_fraction * amp * half, a.phase(p.declared));
    }

    const auto &pm = ctx.ports;
    p.null_click_bob = rng.null_bob.bernoulli(
        k, click_probability(pm.eta_mp_bob * interference_null_intensity(own_bob, from_charlie, pm.visibility), pm.p_dark));
    p.null_click_charlie = rng.null_charlie.bernoulli(
        k, click_probability(pm.eta_mp_charlie * interference_null_intensity(own_charlie, from_bob, pm.visibility),
                             pm.p_dark));
    p.signal_click_bob = rng.signal_bob.bernoulli(
        k,
        click_probability(pm.eta_mp_bob * interference_signal_intensity(own_bob, from_charlie, pm.visibility), pm.p_dark));
    p.signal_click_charlie = rng.signal_charlie.bernoulli(
        k, click_probability(pm.eta_mp_charlie * interference_signal_intensity(own_charlie, from_bob, pm.visibility),
                             pm.p_dark));

    p.stored_bob = (own_bob + from_charlie) * half;
    p.stored_charlie = (own_charlie + from_bob) * half;

    const Amplitude reference = a.state(p.declared);
    p.verify_click_bob = rng.verify_bob.bernoulli(k, pm.verify(p.stored_bob, reference, Receiver::kBob));
    p.verify_click_charlie = rng.verify_charlie.bernoulli(k, pm.verify(p.stored_charlie, reference, Receiver::kCharlie));
    return p;
}

}  // namespace detail

/// Full per-pulse transcript of one trial. The same counter streams drive
/// `run_experiment`, so its counts for this trial are identical.
inline Transcript run_distribution(const ProtocolConfig &config, std::uint64_t trial = 0) {
    config.validate();
    const detail::TrialContext ctx(config);
    const detail::Streams rng(config.master_seed, trial);
    Transcript t;
    t.pulses.reserve(static_cast<std::size_t>(config.signature_length));
    for (std::int64_t k = 0; k < config.signature_length; ++k) {
        t.pulses.push_back(detail::simulate_pulse(ctx, rng, static_cast<std::uint64_t>(k)));
        t.counts.add(t.pulses.back());
    }
    return t;
}

struct TrialOutcome {
    std::int64_t trial = 0;
    ClickCounts counts;
    bool bob_abort = false;
    bool charlie_abort = false;
    /// Bob authenticates Alice's message directly (threshold s_a).
    bool bob_accept = false;
    /// Charlie verifies the forwarded message (threshold s_v).
    bool charlie_accept = false;
    /// Charlie at the authentication threshold, for the symmetric comparison.
    bool charlie_accept_at_s_a = false;
    /// Bob accepts, Charlie rejects; honest Bob only.
    bool repudiation = false;
    /// Charlie accepts forged declarations and the multiport did not abort.
    bool forge_success = false;

    bool aborted() const { return bob_abort || charlie_abort; }
    bool operator==(const TrialOutcome &) const = default;
};

inline TrialOutcome evaluate_trial(const ProtocolConfig &config, std::int64_t trial, const ClickCounts &c) {
    const auto len = static_cast<double>(config.signature_length);
    TrialOutcome o;
    o.trial = trial;
    o.counts = c;
    o.bob_abort = static_cast<double>(c.null_bob) > config.rejection_threshold * len;
    o.charlie_abort = static_cast<double>(c.null_charlie) > config.rejection_threshold * len;
    o.bob_accept = static_cast<double>(c.verify_bob) < config.s_a * len;
    o.charlie_accept = static_cast<double>(c.verify_charlie) < config.s_v * len;
    o.charlie_accept_at_s_a = static_cast<double>(c.verify_charlie) < config.s_a * len;
    const bool forger = !std::holds_alternative<HonestBob>(config.bob);
    o.repudiation = !forger && o.bob_accept && !o.charlie_accept;
    o.forge_success = forger && o.charlie_accept && !o.aborted();
    return o;
}

inline TrialOutcome run_trial(const ProtocolConfig &config, std::int64_t trial) {
    config.validate();
    const detail::TrialContext ctx(config);
    const detail::Streams rng(config.master_seed, static_cast<std::uint64_t>(trial));
    ClickCounts c;
    for (std::int64_t k = 0; k < config.signature_length; ++k) {
        c.add(detail::simulate_pulse(ctx, rng, static_cast<std::uint64_t>(k)));
    }
    return evaluate_trial(config, trial, c);
}

/// Binomial proportion with a Wilson score interval.
struct Proportion {
    std::int64_t successes = 0;
    std::int64_t total = 0;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 1.0;

    static Proportion wilson(std::int64_t k, std::int64_t n, double z = 1.96) {
        Proportion p{k, n, 0.0, 0.0, 1.0};
        if (n <= 0) return p;
        const double nn = static_cast<double>(n);
        const double ph = static_cast<double>(k) / nn;
        const double z2 = z * z;
        const double denom = 1.0 + z2 / nn;
        const double centre = (ph + z2 / (2.0 * nn)) / denom;
        const double half = z / denom * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn));
        p.estimate = ph;
        p.lower = std::max(0.0, centre - half);
        p.upper = std::min(1.0, centre + half);
        return p;
    }

    /// Binomial standard error of the estimate.
    double sigma() const {
        return total > 0 ? std::sqrt(estimate * (1.0 - estimate) / static_cast<double>(total)) : 0.0;
    }
};

struct ExperimentSummary {
    std::vector<TrialOutcome> trials;
    ClickCounts totals;

    Proportion bob_accept, charlie_accept, repudiation, forge_success, aborts;
    /// Bob accepts and Charlie rejects at s_a, and the reverse.
    Proportion mismatch_bob_only, mismatch_charlie_only;

    /// Pulse-level rates over all trials.
    Proportion null_rate_bob, null_rate_charlie, null_only_bob, null_only_charlie;
    Proportion signal_rate_bob, signal_rate_charlie, verify_rate_bob, verify_rate_charlie;

    /// Analytic bounds at the configured thresholds, with g = 3 (s_v - s_a).
    double gap = 0.0;
    Bound forging_bound_value;
    Bound robustness_bound_value;
    Bound repudiation_bound_value;
};

inline ExperimentSummary summarize(const ProtocolConfig &config, std::vector<TrialOutcome> outcomes) {
    ExperimentSummary s;
    std::int64_t bob_accept = 0, charlie_accept = 0, rep = 0, forge = 0, aborts = 0, mm_b = 0, mm_c = 0;
    for (const auto &o : outcomes) {
        bob_accept += o.bob_accept;
        charlie_accept += o.charlie_accept;
        rep += o.repudiation;
        forge += o.forge_success;
        aborts += o.aborted();
        mm_b += o.bob_accept && !o.charlie_accept_at_s_a;
        mm_c += o.charlie_accept_at_s_a && !o.bob_accept;
        auto &t = s.totals;
        t.pulses += o.counts.pulses;
        t.null_bob += o.counts.null_bob;
        t.null_charlie += o.counts.null_charlie;
        t.null_only_bob += o.counts.null_only_bob;
        t.null_only_charlie += o.counts.null_only_charlie;
        t.signal_bob += o.counts.signal_bob;
        t.signal_charlie += o.counts.signal_charlie;
        t.verify_bob += o.counts.verify_bob;
        t.verify_charlie += o.counts.verify_charlie;
    }
    const auto m = static_cast<std::int64_t>(outcomes.size());
    s.bob_accept = Proportion::wilson(bob_accept, m);
    s.charlie_accept = Proportion::wilson(charlie_accept, m);
    s.repudiation = Proportion::wilson(rep, m);
    s.forge_success = Proportion::wilson(forge, m);
    s.aborts = Proportion::wilson(aborts, m);
    s.mismatch_bob_only = Proportion::wilson(mm_b, m);
    s.mismatch_charlie_only = Proportion::wilson(mm_c, m);

    const auto &t = s.totals;
    s.null_rate_bob = Proportion::wilson(t.null_bob, t.pulses);
    s.null_rate_charlie = Proportion::wilson(t.null_charlie, t.pulses);
    s.null_only_bob = Proportion::wilson(t.null_only_bob, t.pulses);
    s.null_only_charlie = Proportion::wilson(t.null_only_charlie, t.pulses);
    s.signal_rate_bob = Proportion::wilson(t.signal_bob, t.pulses);
    s.signal_rate_charlie = Proportion::wilson(t.signal_charlie, t.pulses);
    s.verify_rate_bob = Proportion::wilson(t.verify_bob, t.pulses);
    s.verify_rate_charlie = Proportion::wilson(t.verify_charlie, t.pulses);

    const auto len = static_cast<double>(config.signature_length);
    s.gap = 3.0 * (config.s_v - config.s_a);
    s.forging_bound_value = forging_bound(s.gap, len);
    s.robustness_bound_value = robustness_bound(s.gap, len);
    s.repudiation_bound_value = repudiation_bound(config.repudiation_base, config.s_v - config.s_a, len);
    s.trials = std::move(outcomes);
    return s;
}

/// Runs `config.trials` independent trials on a worker pool. Each trial owns
/// its streams, so the result does not depend on the worker count.
inline ExperimentSummary run_experiment(const ProtocolConfig &config) {
    config.validate();
    const detail::TrialContext ctx(config);
    const auto m = config.trials;
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(m));

    int workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, m));

    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        try {
            for (std::int64_t t = next++; t < m; t = next++) {
                const detail::Streams rng(config.master_seed, static_cast<std::uint64_t>(t));
                ClickCounts c;
                for (std::int64_t k = 0; k < config.signature_length; ++k) {
                    c.add(detail::simulate_pulse(ctx, rng, static_cast<std::uint64_t>(k)));
                }
                outcomes[static_cast<std::size_t>(t)] = evaluate_trial(config, t, c);
            }
        } catch (...) {
            const std::scoped_lock lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers - 1));
        for (int w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);
    return summarize(config, std::move(outcomes));
}

/// Monte Carlo cost matrix: for each (declared, stored) pair, signal-null
/// clicks divided by emitted pulses.
inline CostMatrix estimate_cost_matrix(const PhaseAlphabet &alphabet, const ChannelModel &channel,
                                       std::int64_t pulses_per_entry, std::uint64_t seed) {
    if (pulses_per_entry < 1) throw std::invalid_argument("estimate_cost_matrix: pulses_per_entry must be >= 1");
    channel.validate();
    const int n = alphabet.size();
    RMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double p = signal_null_click_probability(alphabet.phase(i), alphabet.phase(j),
                                                           alphabet.mean_photons(), channel);
            const auto rng = trial_stream(seed, static_cast<std::uint64_t>(i * n + j), StreamPort::kCostEstimate);
            std::int64_t clicks = 0;
            for (std::int64_t k = 0; k < pulses_per_entry; ++k) clicks += rng.bernoulli(static_cast<std::uint64_t>(k), p);
            m(i, j) = static_cast<double>(clicks) / static_cast<double>(pulses_per_entry);
        }
    }
    return CostMatrix(m);
}

}  // namespace qds
