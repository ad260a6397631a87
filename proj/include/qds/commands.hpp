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

#include "qds/io.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

/// The four command-line operations as library calls. Each writes only
/// deterministic payload files into `out_dir`.
namespace qds {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitCertification = 2,
    kExitIo = 3,
};

struct CommandResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
    std::string message;
};

/// Extra loss in front of Bob's detectors used by the blocked-input preset when
/// the configuration leaves it at zero.
inline constexpr double kBlockedInputDifferentialLossDb = 3.0;

inline void apply_preset(RunConfig &c, const std::string &preset) {
    auto &s = c.simulation;
    if (preset == "honest") {
        s.alice = HonestAlice{};
        s.bob = HonestBob{};
    } else if (preset == "passive-forger") {
        s.alice = HonestAlice{};
        s.bob = PassiveForger{};
    } else if (preset == "tamper-pi4" || preset == "tamper-pi2" || preset == "tamper-pi") {
        const double d = preset == "tamper-pi4" ? std::numbers::pi / 4 : preset == "tamper-pi2" ? std::numbers::pi / 2
                                                                                              : std::numbers::pi;
        s.alice = PhaseTamper{d, 2.0 / 16.0};
        s.bob = HonestBob{};
    } else if (preset == "blocked-input") {
        s.alice = BlockedInput{Receiver::kCharlie};
        s.bob = HonestBob{};
        if (c.channel.differential_loss_db == 0.0) c.channel.differential_loss_db = kBlockedInputDifferentialLossDb;
    } else {
        throw ConfigError("unknown preset \"" + preset + "\"");
    }
}

/// Channel after the configured calibration against `target`.
inline ChannelModel resolve_channel(const RunConfig &c, const CostMatrix &target) {
    const auto alphabet = c.alphabet();
    try {
        switch (c.calibration.mode) {
            case CalibrationMode::kCostMatrix:
                if (target.size() != alphabet.size()) {
                    throw ConfigError("calibration: cost matrix is " + std::to_string(target.size()) +
                                      "x" + std::to_string(target.size()) + " but n_phases is " +
                                      std::to_string(alphabet.size()));
                }
                return calibrate_to_cost_matrix(alphabet, c.channel, target).model;
            case CalibrationMode::kDiagonal:
                return calibrate_mu_scale(alphabet, c.channel, c.calibration.target_diagonal);
            case CalibrationMode::kNone:
                return c.channel;
        }
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return c.channel;
}

inline json channel_to_json(const ChannelModel &m) {
    RunConfig tmp;
    tmp.channel = m;
    return config_to_json(tmp)["channel"];
}

inline CommandResult cmd_entropy(const RunConfig &c, const std::filesystem::path &out_dir) {
    validate_config(c);
    std::string csv = std::string(kEntropyHeader) + "\n";
    for (int n : c.entropy.n_phases) {
        for (double mu : c.entropy.mean_photons) {
            const auto a = PhaseAlphabet::from_mean_photons(n, mu);
            const double s = von_neumann_entropy(signature_element_density(a));
            csv += std::to_string(n) + "," + format_double(mu, 12) + "," + format_double(s, 12) + "," +
                   format_double(c.security.receivers * s, 12) + "," + format_double(std::log2(double(n)), 12) + "\n";
        }
    }
    CommandResult r;
    r.files.push_back(out_dir / "entropy.csv");
    write_text_file(r.files.back(), csv);
    return r;
}

struct AnalyzeOutput {
    ForgingAnalysis passive;
    ForgingAnalysis amplified;
    ForgingAnalysis passive_full;
    ForgingAnalysis amplified_full;
    SecurityReport security;
};

inline AnalyzeOutput analyze(const RunConfig &c) {
    validate_config(c);
    const auto cost = load_cost_matrix(c.cost_matrix);
    const auto alphabet = c.alphabet();
    if (cost.size() != alphabet.size()) {
        throw ConfigError("cost matrix is " + std::to_string(cost.size()) + "x" + std::to_string(cost.size()) +
                          " but n_phases is " + std::to_string(alphabet.size()));
    }
    const auto scope = c.cost_matrix.scope;
    const auto other = scope == OrbitScope::kUpperTriangle ? OrbitScope::kFullMatrix : OrbitScope::kUpperTriangle;
    auto passive = passive_forgery_analysis(cost, alphabet, false, scope);
    auto amplified = passive_forgery_analysis(cost, alphabet, true, scope);
    if (!(passive.gap_lower() > 0.0)) {
        throw ConfigError("cost matrix gives no forging gap (g = " + format_double(passive.gap_lower(), 6) + ")");
    }
    auto security = build_security_report(passive, amplified, alphabet, c.security);
    return {std::move(passive), std::move(amplified), passive_forgery_analysis(cost, alphabet, false, other),
            passive_forgery_analysis(cost, alphabet, true, other), std::move(security)};
}

inline CommandResult cmd_analyze(const RunConfig &c, const std::filesystem::path &out_dir) {
    const auto a = analyze(c);
    json report;
    report["cost_matrix"] = c.cost_matrix.path.empty() ? "bundled:measured_v1" : c.cost_matrix.path;
    report["n_phases"] = c.n_phases;
    report["mean_photons"] = c.mean_photons;
    report["passive"] = analysis_to_json(a.passive);
    report["amplified"] = analysis_to_json(a.amplified);
    report["alternative_scope"] = {{"passive", analysis_to_json(a.passive_full)},
                                   {"amplified", analysis_to_json(a.amplified_full)}};
    report["security"] = security_to_json(a.security);

    CommandResult r;
    r.files = {out_dir / "report.json", out_dir / "sweep.csv", out_dir / "security_report.csv"};
    write_text_file(r.files[0], dump_json(report));
    write_text_file(r.files[1], sweep_to_csv(a.security));
    write_text_file(r.files[2], security_row_csv(a.security));
    if (!(a.passive.certified() && a.amplified.certified())) {
        r.exit_code = kExitCertification;
        r.message = "optimality conditions not met within tolerance for a bounding matrix";
    }
    return r;
}

/// Simulator configuration with thresholds from the analysis of the modeled
/// (calibrated) cost matrix unless given explicitly.
struct SimulationSetup {
    ProtocolConfig protocol;
    ForgingAnalysis model_analysis;
    CostMatrix model_matrix;
};

inline SimulationSetup prepare_simulation(const RunConfig &c) {
    validate_config(c);
    const auto alphabet = c.alphabet();
    const auto channel = resolve_channel(c, load_cost_matrix(c.cost_matrix));
    const auto model = predicted_cost_matrix(alphabet, channel);
    auto analysis = passive_forgery_analysis(model, alphabet, false, c.cost_matrix.scope);

    const auto &s = c.simulation;
    ProtocolConfig p;
    p.n_phases = c.n_phases;
    p.mean_photons = c.mean_photons;
    p.signature_length = s.signature_length;
    p.channel = channel;
    if (s.s_a) {
        p.s_a = *s.s_a;
        p.s_v = *s.s_v;
    } else {
        if (!(analysis.gap_lower() > 0.0)) {
            throw ConfigError("simulation: modeled cost matrix gives no forging gap, thresholds infeasible");
        }
        const auto th = thresholds(analysis.p_original, analysis.gap_lower());
        p.s_a = th.s_a;
        p.s_v = th.s_v;
    }
    if (!(p.s_a < p.s_v)) throw ConfigError("simulation: infeasible thresholds (s_a >= s_v)");
    p.rejection_threshold = s.rejection_threshold;
    p.repudiation_base = c.security.repudiation_base;
    p.alice = s.alice;
    p.bob = s.bob;
    p.trials = s.trials;
    p.master_seed = c.seed;
    p.workers = s.workers;
    try {
        p.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return {p, std::move(analysis), model};
}

inline CommandResult cmd_simulate(const RunConfig &c, const std::filesystem::path &out_dir) {
    const auto setup = prepare_simulation(c);
    const auto &p = setup.protocol;
    const auto summary = run_experiment(p);
    const auto alphabet = p.alphabet();
    const double a = alphabet.amplitude();

    json j;
    j["alice"] = detail::alice_to_json(p.alice);
    j["bob"] = detail::bob_to_json(p.bob);
    j["seed"] = p.master_seed;
    j["signature_length"] = p.signature_length;
    j["s_a"] = p.s_a;
    j["s_v"] = p.s_v;
    j["rejection_threshold"] = p.rejection_threshold;
    j["channel"] = channel_to_json(p.channel);

    const double honest_null = multiport_null_click_probability(a, a, p.channel, Receiver::kCharlie);
    json expected = {{"verify_rate_honest", setup.model_matrix(0, 0)},
                     {"verify_rate_passive_forger", setup.model_analysis.p_square_root_raw},
                     {"null_rate_honest_bob", multiport_null_click_probability(a, a, p.channel, Receiver::kBob)},
                     {"null_rate_honest_charlie", honest_null}};
    if (const auto *t = std::get_if<PhaseTamper>(&p.alice)) {
        const auto model = dishonest_alice_null_rate(p.channel, alphabet.mean_photons(), t->delta_phi, t->fraction);
        expected["null_factor_model"] = model.factor ? json(*model.factor) : json(nullptr);
        j["null_factor_empirical"] =
            honest_null > 0.0 ? json(summary.null_rate_charlie.estimate / honest_null) : json(nullptr);
    }
    j["expected"] = expected;
    j["summary"] = summary_to_json(summary);

    CommandResult r;
    r.files = {out_dir / "summary.json", out_dir / "trials.csv"};
    write_text_file(r.files[0], dump_json(j));
    write_text_file(r.files[1], trials_to_csv(summary));
    if (c.simulation.transcript_pulses > 0) {
        auto first = p;
        first.signature_length = std::min(p.signature_length, c.simulation.transcript_pulses);
        r.files.push_back(out_dir / "transcript.csv");
        write_text_file(r.files.back(), transcript_to_csv(run_distribution(first, 0), first.signature_length));
    }
    return r;
}

inline CommandResult cmd_cost_matrix(const RunConfig &c, const std::filesystem::path &out_dir) {
    validate_config(c);
    const auto alphabet = c.alphabet();
    const auto &o = c.cost_matrix_output;
    const ChannelModel channel = o.ideal ? ChannelModel::ideal() : resolve_channel(c, load_cost_matrix(c.cost_matrix));
    const auto predicted = predicted_cost_matrix(alphabet, channel);

    CommandResult r;
    r.files.push_back(out_dir / "cost_matrix_predicted.csv");
    write_text_file(r.files.back(), cost_matrix_to_csv(predicted));

    json j;
    j["ideal"] = o.ideal;
    j["n_phases"] = c.n_phases;
    j["mean_photons"] = c.mean_photons;
    j["channel"] = channel_to_json(channel);
    j["predicted_first_row"] = predicted.first_row();
    if (o.estimate) {
        const auto est = estimate_cost_matrix(alphabet, channel, o.pulses_per_entry, c.seed);
        double max_z = 0.0;
        for (int i = 0; i < est.size(); ++i) {
            for (int k = 0; k < est.size(); ++k) {
                const double pr = predicted(i, k);
                const double sigma = std::sqrt(pr * (1.0 - pr) / static_cast<double>(o.pulses_per_entry));
                if (sigma > 0.0) max_z = std::max(max_z, std::abs(est(i, k) - pr) / sigma);
            }
        }
        j["pulses_per_entry"] = o.pulses_per_entry;
        j["max_abs_z"] = max_z;
        r.files.push_back(out_dir / "cost_matrix_estimated.csv");
        write_text_file(r.files.back(), cost_matrix_to_csv(est));
    }
    r.files.push_back(out_dir / "cost_matrix_report.json");
    write_text_file(r.files.back(), dump_json(j));
    return r;
}

}  // namespace qds
