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
#include "qds/min_cost_measurement.hpp"
#include "qds/protocol_sim.hpp"
#include "qds/security_bounds.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

/// Run configuration, cost-matrix CSV and report serialization.
namespace qds {

using json = nlohmann::ordered_json;

/// Invalid or unknown configuration content.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CalibrationMode { kCostMatrix, kDiagonal, kNone };

struct CalibrationBlock {
    CalibrationMode mode = CalibrationMode::kCostMatrix;
    double target_diagonal = 3.9e-3;
};

struct CostMatrixSource {
    /// Empty selects the bundled measured matrix.
    std::string path;
    OrbitScope scope = OrbitScope::kUpperTriangle;
};

struct EntropyBlock {
    std::vector<int> n_phases = {2, 4, 8, 16, 32};
    std::vector<double> mean_photons = {0.0, 0.01, 0.02, 0.05, 0.1, 0.16, 0.2, 0.24, 0.3, 0.5,
                                        0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0, 20.0, 50.0};
};

struct SimulationBlock {
    std::int64_t signature_length = 100000;
    std::int64_t trials = 100;
    int workers = 0;
    /// Thresholds default to the passive-forgery analysis of the modeled matrix.
    std::optional<double> s_a;
    std::optional<double> s_v;
    double rejection_threshold = 1e-3;
    AliceStrategy alice = HonestAlice{};
    BobStrategy bob = HonestBob{};
    /// Pulses of trial 0 written to the transcript file.
    std::int64_t transcript_pulses = 1000;
};

struct CostMatrixOutputBlock {
    bool ideal = false;
    bool estimate = false;
    std::int64_t pulses_per_entry = 1000000;
};

struct RunConfig {
    std::uint64_t seed = 0;
    int n_phases = 8;
    double mean_photons = 0.16;
    ChannelModel channel;
    CalibrationBlock calibration;
    CostMatrixSource cost_matrix;
    SecurityParameters security;
    EntropyBlock entropy;
    SimulationBlock simulation;
    CostMatrixOutputBlock cost_matrix_output;

    PhaseAlphabet alphabet() const { return PhaseAlphabet::from_mean_photons(n_phases, mean_photons); }
};

// ---------------------------------------------------------------------------
// Strict JSON reading.
// ---------------------------------------------------------------------------

namespace detail {

inline void require_object(const json &j, const std::string &path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

inline void reject_unknown(const json &j, std::initializer_list<const char *> allowed, const std::string &path) {
    for (const auto &item : j.items()) {
        bool known = false;
        for (const char *a : allowed) known = known || item.key() == a;
        if (!known) throw ConfigError(path + ": unknown key \"" + item.key() + "\"");
    }
}

inline std::string join(const std::string &path, const char *key) { return path.empty() ? key : path + "." + key; }

inline void read(const json &j, const char *key, const std::string &path, double &out) {
    if (!j.contains(key)) return;
    const auto &v = j.at(key);
    if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
    out = v.get<double>();
}

inline void read(const json &j, const char *key, const std::string &path, std::optional<double> &out) {
    if (!j.contains(key)) return;
    const auto &v = j.at(key);
    if (v.is_null()) {
        out.reset();
        return;
    }
    if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number or null");
    out = v.get<double>();
}

inline void read(const json &j, const char *key, const std::string &path, bool &out) {
    if (!j.contains(key)) return;
    const auto &v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path, key) + ": expected true or false");
    out = v.get<bool>();
}

inline void read(const json &j, const char *key, const std::string &path, std::string &out) {
    if (!j.contains(key)) return;
    const auto &v = j.at(key);
    if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
    out = v.get<std::string>();
}

template <typename Int>
    requires std::is_integral_v<Int>
inline void read(const json &j, const char *key, const std::string &path, Int &out) {
    if (!j.contains(key)) return;
    const auto &v = j.at(key);
    if (v.is_number_unsigned()) {
        const auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
            throw ConfigError(join(path, key) + ": integer out of range");
        }
        out = static_cast<Int>(u);
    } else if (v.is_number_integer()) {
        const auto s = v.get<std::int64_t>();
        if (std::is_unsigned_v<Int> && s < 0) throw ConfigError(join(path, key) + ": must be >= 0");
        if (s < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
            (s > 0 && static_cast<std::uint64_t>(s) > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))) {
            throw ConfigError(join(path, key) + ": integer out of range");
        }
        out = static_cast<Int>(s);
    } else {
        throw ConfigError(join(path, key) + ": expected an integer");
    }
}

template <typename T>
inline void read_list(const json &j, const char *key, const std::string &path, std::vector<T> &out) {
    if (!j.contains(key)) return;
    const auto &v = j.at(key);
    if (!v.is_array()) throw ConfigError(join(path, key) + ": expected an array");
    std::vector<T> tmp;
    for (std::size_t i = 0; i < v.size(); ++i) {
        json holder = json::object();
        holder["x"] = v[i];
        T x{};
        read(holder, "x", join(path, key) + "[" + std::to_string(i) + "]", x);
        tmp.push_back(x);
    }
    out = std::move(tmp);
}

inline Receiver parse_receiver(const std::string &s, const std::string &path) {
    if (s == "bob") return Receiver::kBob;
    if (s == "charlie") return Receiver::kCharlie;
    throw ConfigError(path + ": expected \"bob\" or \"charlie\", got \"" + s + "\"");
}

inline const char *receiver_name(Receiver r) { return r == Receiver::kBob ? "bob" : "charlie"; }

inline AliceStrategy parse_alice(const json &j, const std::string &path) {
    require_object(j, path);
    std::string name = "honest";
    read(j, "strategy", path, name);
    if (name == "honest") {
        reject_unknown(j, {"strategy"}, path);
        return HonestAlice{};
    }
    if (name == "phase-tamper") {
        reject_unknown(j, {"strategy", "delta_phi", "fraction"}, path);
        PhaseTamper s;
        read(j, "delta_phi", path, s.delta_phi);
        read(j, "fraction", path, s.fraction);
        return s;
    }
    if (name == "two-state-repudiator") {
        reject_unknown(j, {"strategy", "offset_bob", "offset_charlie"}, path);
        TwoStateRepudiator s;
        read(j, "offset_bob", path, s.offset_bob);
        read(j, "offset_charlie", path, s.offset_charlie);
        return s;
    }
    if (name == "blocked-input") {
        reject_unknown(j, {"strategy", "blocked"}, path);
        BlockedInput s;
        std::string who = receiver_name(s.blocked);
        read(j, "blocked", path, who);
        s.blocked = parse_receiver(who, join(path, "blocked"));
        return s;
    }
    throw ConfigError(join(path, "strategy") + ": unknown Alice strategy \"" + name + "\"");
}

inline BobStrategy parse_bob(const json &j, const std::string &path) {
    require_object(j, path);
    std::string name = "honest";
    read(j, "strategy", path, name);
    if (name == "honest") {
        reject_unknown(j, {"strategy"}, path);
        return HonestBob{};
    }
    if (name == "passive-forger") {
        reject_unknown(j, {"strategy"}, path);
        return PassiveForger{};
    }
    if (name == "active-forger") {
        reject_unknown(j, {"strategy", "response_fraction"}, path);
        ActiveForger s;
        read(j, "response_fraction", path, s.response_fraction);
        return s;
    }
    throw ConfigError(join(path, "strategy") + ": unknown Bob strategy \"" + name + "\"");
}

inline json alice_to_json(const AliceStrategy &s) {
    json j;
    j["strategy"] = strategy_name(s);
    if (const auto *t = std::get_if<PhaseTamper>(&s)) {
        j["delta_phi"] = t->delta_phi;
        j["fraction"] = t->fraction;
    } else if (const auto *r = std::get_if<TwoStateRepudiator>(&s)) {
        j["offset_bob"] = r->offset_bob;
        j["offset_charlie"] = r->offset_charlie;
    } else if (const auto *b = std::get_if<BlockedInput>(&s)) {
        j["blocked"] = receiver_name(b->blocked);
    }
    return j;
}

inline json bob_to_json(const BobStrategy &s) {
    json j;
    j["strategy"] = strategy_name(s);
    if (const auto *a = std::get_if<ActiveForger>(&s)) j["response_fraction"] = a->response_fraction;
    return j;
}

inline const char *calibration_name(CalibrationMode m) {
    switch (m) {
        case CalibrationMode::kCostMatrix:
            return "cost-matrix";
        case CalibrationMode::kDiagonal:
            return "diagonal";
        case CalibrationMode::kNone:
            return "none";
    }
    return "none";
}

inline json optional_number(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

}  // namespace detail

/// Parses and validates a configuration document. Absent keys keep their
/// defaults; unknown keys are errors.
inline RunConfig parse_config(const json &j) {
    using namespace detail;
    require_object(j, "config");
    reject_unknown(j,
                   {"seed", "n_phases", "mean_photons", "channel", "calibration", "cost_matrix", "security", "entropy",
                    "simulation", "cost_matrix_output"},
                   "config");
    RunConfig c;
    read(j, "seed", "", c.seed);
    read(j, "n_phases", "", c.n_phases);
    read(j, "mean_photons", "", c.mean_photons);

    if (j.contains("channel")) {
        const auto &ch = j.at("channel");
        require_object(ch, "channel");
        reject_unknown(ch,
                       {"clock_hz", "dark_cps", "gate_s", "det_efficiency", "visibility", "multiport_loss_db",
                        "receiver_loss_db", "receiver_visibility", "mu_scale", "differential_loss_db"},
                       "channel");
        auto &m = c.channel;
        read(ch, "clock_hz", "channel", m.clock_hz);
        read(ch, "dark_cps", "channel", m.dark_cps);
        read(ch, "gate_s", "channel", m.gate_s);
        read(ch, "det_efficiency", "channel", m.det_efficiency);
        read(ch, "visibility", "channel", m.visibility);
        read(ch, "multiport_loss_db", "channel", m.multiport_loss_db);
        read(ch, "receiver_loss_db", "channel", m.receiver_loss_db);
        read(ch, "receiver_visibility", "channel", m.receiver_visibility);
        read(ch, "mu_scale", "channel", m.mu_scale);
        read(ch, "differential_loss_db", "channel", m.differential_loss_db);
    }
    if (j.contains("calibration")) {
        const auto &cal = j.at("calibration");
        require_object(cal, "calibration");
        reject_unknown(cal, {"mode", "target_diagonal"}, "calibration");
        std::string mode = calibration_name(c.calibration.mode);
        read(cal, "mode", "calibration", mode);
        if (mode == "cost-matrix") {
            c.calibration.mode = CalibrationMode::kCostMatrix;
        } else if (mode == "diagonal") {
            c.calibration.mode = CalibrationMode::kDiagonal;
        } else if (mode == "none") {
            c.calibration.mode = CalibrationMode::kNone;
        } else {
            throw ConfigError("calibration.mode: expected cost-matrix, diagonal or none");
        }
        read(cal, "target_diagonal", "calibration", c.calibration.target_diagonal);
    }
    if (j.contains("cost_matrix")) {
        const auto &cm = j.at("cost_matrix");
        require_object(cm, "cost_matrix");
        reject_unknown(cm, {"path", "orbit_scope"}, "cost_matrix");
        read(cm, "path", "cost_matrix", c.cost_matrix.path);
        std::string scope = to_string(c.cost_matrix.scope);
        read(cm, "orbit_scope", "cost_matrix", scope);
        if (scope == "upper-triangle") {
            c.cost_matrix.scope = OrbitScope::kUpperTriangle;
        } else if (scope == "full-matrix") {
            c.cost_matrix.scope = OrbitScope::kFullMatrix;
        } else {
            throw ConfigError("cost_matrix.orbit_scope: expected upper-triangle or full-matrix");
        }
    }
    if (j.contains("security")) {
        const auto &s = j.at("security");
        require_object(s, "security");
        reject_unknown(s, {"rejection_threshold", "hoeffding_slack", "repudiation_base", "receivers", "sweep_lengths"},
                       "security");
        auto &p = c.security;
        read(s, "rejection_threshold", "security", p.rejection_threshold);
        std::optional<double> slack;
        if (p.hoeffding_slack >= 0.0) slack = p.hoeffding_slack;
        read(s, "hoeffding_slack", "security", slack);
        if (slack && !(*slack > 0.0)) throw ConfigError("security.hoeffding_slack: must be > 0 or null");
        p.hoeffding_slack = slack ? *slack : -1.0;
        read(s, "repudiation_base", "security", p.repudiation_base);
        read(s, "receivers", "security", p.receivers);
        read_list(s, "sweep_lengths", "security", p.sweep_lengths);
    }
    if (j.contains("entropy")) {
        const auto &e = j.at("entropy");
        require_object(e, "entropy");
        reject_unknown(e, {"n_phases", "mean_photons"}, "entropy");
        read_list(e, "n_phases", "entropy", c.entropy.n_phases);
        read_list(e, "mean_photons", "entropy", c.entropy.mean_photons);
    }
    if (j.contains("simulation")) {
        const auto &s = j.at("simulation");
        require_object(s, "simulation");
        reject_unknown(s,
                       {"signature_length", "trials", "workers", "s_a", "s_v", "rejection_threshold", "alice", "bob",
                        "transcript_pulses"},
                       "simulation");
        auto &b = c.simulation;
        read(s, "signature_length", "simulation", b.signature_length);
        read(s, "trials", "simulation", b.trials);
        read(s, "workers", "simulation", b.workers);
        read(s, "s_a", "simulation", b.s_a);
        read(s, "s_v", "simulation", b.s_v);
        read(s, "rejection_threshold", "simulation", b.rejection_threshold);
        if (s.contains("alice")) b.alice = parse_alice(s.at("alice"), "simulation.alice");
        if (s.contains("bob")) b.bob = parse_bob(s.at("bob"), "simulation.bob");
        read(s, "transcript_pulses", "simulation", b.transcript_pulses);
    }
    if (j.contains("cost_matrix_output")) {
        const auto &o = j.at("cost_matrix_output");
        require_object(o, "cost_matrix_output");
        reject_unknown(o, {"ideal", "estimate", "pulses_per_entry"}, "cost_matrix_output");
        read(o, "ideal", "cost_matrix_output", c.cost_matrix_output.ideal);
        read(o, "estimate", "cost_matrix_output", c.cost_matrix_output.estimate);
        read(o, "pulses_per_entry", "cost_matrix_output", c.cost_matrix_output.pulses_per_entry);
    }
    return c;
}

/// Semantic checks that do not depend on which command runs.
inline void validate_config(const RunConfig &c) {
    auto check = [](bool ok, const std::string &what) {
        if (!ok) throw ConfigError(what);
    };
    try {
        (void)c.alphabet();
        c.channel.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    check(c.calibration.target_diagonal > 0.0 && c.calibration.target_diagonal < 1.0,
          "calibration.target_diagonal must lie in (0, 1)");
    check(c.security.rejection_threshold > 0.0 && c.security.rejection_threshold < 1.0,
          "security.rejection_threshold must lie in (0, 1)");
    check(c.security.slack() > 0.0 && c.security.rejection_threshold + c.security.slack() <= 1.0,
          "security: rejection_threshold + hoeffding_slack must be <= 1");
    check(c.security.repudiation_base >= 0.0, "security.repudiation_base must be >= 0");
    check(c.security.receivers >= 1, "security.receivers must be >= 1");
    for (double l : c.security.sweep_lengths) check(l >= 1.0, "security.sweep_lengths entries must be >= 1");
    check(!c.entropy.n_phases.empty() && !c.entropy.mean_photons.empty(), "entropy: sweep grid must not be empty");
    for (int n : c.entropy.n_phases) check(n >= 2, "entropy.n_phases entries must be >= 2");
    for (double m : c.entropy.mean_photons) check(m >= 0.0 && std::isfinite(m), "entropy.mean_photons entries must be >= 0");
    const auto &s = c.simulation;
    check(s.signature_length >= 1, "simulation.signature_length must be >= 1");
    check(s.trials >= 1, "simulation.trials must be >= 1");
    check(s.workers >= 0, "simulation.workers must be >= 0");
    check(s.rejection_threshold >= 0.0, "simulation.rejection_threshold must be >= 0");
    check(s.transcript_pulses >= 0, "simulation.transcript_pulses must be >= 0");
    check(s.s_a.has_value() == s.s_v.has_value(), "simulation: give both s_a and s_v, or neither");
    if (s.s_a) {
        check(*s.s_a > 0.0 && *s.s_a < *s.s_v && *s.s_v < 1.0,
              "simulation: thresholds must satisfy 0 < s_a < s_v < 1");
    }
    if (const auto *t = std::get_if<PhaseTamper>(&s.alice)) {
        check(t->fraction >= 0.0 && t->fraction <= 1.0, "simulation.alice.fraction must lie in [0, 1]");
    }
    if (const auto *a = std::get_if<ActiveForger>(&s.bob)) {
        check(a->response_fraction >= 0.0, "simulation.bob.response_fraction must be >= 0");
    }
    check(c.cost_matrix_output.pulses_per_entry >= 1, "cost_matrix_output.pulses_per_entry must be >= 1");
}

/// Full document with every default made explicit.
inline json config_to_json(const RunConfig &c) {
    json j;
    j["seed"] = c.seed;
    j["n_phases"] = c.n_phases;
    j["mean_photons"] = c.mean_photons;
    const auto &m = c.channel;
    j["channel"] = {{"clock_hz", m.clock_hz},
                    {"dark_cps", m.dark_cps},
                    {"gate_s", m.gate_s},
                    {"det_efficiency", m.det_efficiency},
                    {"visibility", m.visibility},
                    {"multiport_loss_db", m.multiport_loss_db},
                    {"receiver_loss_db", m.receiver_loss_db},
                    {"receiver_visibility", m.receiver_visibility},
                    {"mu_scale", m.mu_scale},
                    {"differential_loss_db", m.differential_loss_db}};
    j["calibration"] = {{"mode", detail::calibration_name(c.calibration.mode)},
                        {"target_diagonal", c.calibration.target_diagonal}};
    j["cost_matrix"] = {{"path", c.cost_matrix.path}, {"orbit_scope", to_string(c.cost_matrix.scope)}};
    const auto &p = c.security;
    j["security"] = {{"rejection_threshold", p.rejection_threshold},
                     {"hoeffding_slack",
                      detail::optional_number(p.hoeffding_slack < 0.0 ? std::nullopt
                                                                      : std::optional<double>(p.hoeffding_slack))},
                     {"repudiation_base", p.repudiation_base},
                     {"receivers", p.receivers},
                     {"sweep_lengths", p.sweep_lengths}};
    j["entropy"] = {{"n_phases", c.entropy.n_phases}, {"mean_photons", c.entropy.mean_photons}};
    const auto &s = c.simulation;
    j["simulation"] = {{"signature_length", s.signature_length},
                       {"trials", s.trials},
                       {"workers", s.workers},
                       {"s_a", detail::optional_number(s.s_a)},
                       {"s_v", detail::optional_number(s.s_v)},
                       {"rejection_threshold", s.rejection_threshold},
                       {"alice", detail::alice_to_json(s.alice)},
                       {"bob", detail::bob_to_json(s.bob)},
                       {"transcript_pulses", s.transcript_pulses}};
    j["cost_matrix_output"] = {{"ideal", c.cost_matrix_output.ideal},
                               {"estimate", c.cost_matrix_output.estimate},
                               {"pulses_per_entry", c.cost_matrix_output.pulses_per_entry}};
    return j;
}

inline std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path.string());
    return ss.str();
}

inline void write_text_file(const std::filesystem::path &path, const std::string &content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("error writing " + path.string());
}

inline RunConfig parse_config_text(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline RunConfig load_config(const std::filesystem::path &path) { return parse_config_text(read_text_file(path)); }

inline std::string dump_json(const json &j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// CSV.
// ---------------------------------------------------------------------------

/// Locale-independent shortest-ish decimal form; identical bytes for identical doubles.
inline std::string format_double(double x, int precision = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    return buf;
}

/// Headerless N x N CSV of decimals.
inline std::string cost_matrix_to_csv(const CostMatrix &c) {
    std::string out;
    for (int i = 0; i < c.size(); ++i) {
        for (int j = 0; j < c.size(); ++j) {
            if (j > 0) out += ',';
            out += format_double(c(i, j));
        }
        out += '\n';
    }
    return out;
}

inline CostMatrix cost_matrix_from_csv(const std::string &text, const std::string &source = "cost matrix") {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            if (b == std::string::npos) {
                throw ConfigError(source + ":" + std::to_string(line_no) + ": empty cell");
            }
            cell = cell.substr(b, e - b + 1);
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception &) {
                used = 0;
            }
            if (used != cell.size()) {
                throw ConfigError(source + ":" + std::to_string(line_no) + ": not a number: \"" + cell + "\"");
            }
            row.push_back(v);
        }
        if (!line.empty() && line.back() == ',') {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": trailing comma");
        }
        rows.push_back(std::move(row));
    }
    const auto n = rows.size();
    if (n < 2) throw ConfigError(source + ": need at least 2 rows");
    RMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw ConfigError(source + ": matrix is not square (row " + std::to_string(i + 1) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " + std::to_string(n) + ")");
        }
        for (std::size_t j = 0; j < n; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    try {
        return CostMatrix(m);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(source + ": " + e.what());
    }
}

inline CostMatrix load_cost_matrix(const CostMatrixSource &src) {
    if (src.path.empty()) return measured_cost_matrix();
    return cost_matrix_from_csv(read_text_file(src.path), src.path);
}

inline constexpr const char *kSweepHeader =
    "L,eps_forging,eps_repudiation,eps_robustness,eps_robustness_multiport,delta,eps_active";

inline std::string sweep_to_csv(const SecurityReport &r) {
    std::string out = std::string(kSweepHeader) + "\n";
    for (const auto &row : r.sweep) {
        out += format_double(row.length, 12) + "," + format_double(row.forging.value(), 12) + "," +
               format_double(row.repudiation.value(), 12) + "," + format_double(row.robustness.value(), 12) + "," +
               format_double(row.robustness_multiport.value(), 12) + "," + format_double(row.delta, 12) + "," +
               format_double(row.active_forging.value(), 12) + "\n";
    }
    return out;
}

inline constexpr const char *kSecurityRowHeader =
    "p_original,p_forgery,g,s_a,s_v,p_forgery_amplified,g_amplified,rejection_threshold,hoeffding_slack,"
    "repudiation_base,receivers,entropy_per_copy,info_ratio,usd_probability,nontrivial_length";

inline std::string security_row_csv(const SecurityReport &r) {
    const double v[] = {r.p_original,          r.p_forgery,       r.gap,
                        r.s_a,                 r.s_v,             r.p_forgery_amplified,
                        r.gap_amplified,       r.rejection_threshold, r.hoeffding_slack,
                        r.repudiation_base,    static_cast<double>(r.receivers), r.entropy_per_copy,
                        r.info_ratio,          r.usd_probability, r.nontrivial_length};
    std::string out = std::string(kSecurityRowHeader) + "\n";
    for (std::size_t i = 0; i < std::size(v); ++i) {
        if (i > 0) out += ',';
        out += format_double(v[i], 12);
    }
    return out + "\n";
}

inline constexpr const char *kTranscriptHeader =
    "pulse,key,declared,to_bob_re,to_bob_im,to_charlie_re,to_charlie_im,null_bob,null_charlie,signal_bob,"
    "signal_charlie,verify_bob,verify_charlie";

inline std::string transcript_to_csv(const Transcript &t, std::int64_t max_pulses) {
    std::string out = std::string(kTranscriptHeader) + "\n";
    const auto n = std::min<std::int64_t>(max_pulses, t.length());
    for (std::int64_t k = 0; k < n; ++k) {
        const auto &p = t.pulses[static_cast<std::size_t>(k)];
        out += std::to_string(k) + "," + std::to_string(p.key) + "," + std::to_string(p.declared) + "," +
               format_double(p.to_bob.real(), 12) + "," + format_double(p.to_bob.imag(), 12) + "," +
               format_double(p.to_charlie.real(), 12) + "," + format_double(p.to_charlie.imag(), 12) + "," +
               std::to_string(int(p.null_click_bob)) + "," + std::to_string(int(p.null_click_charlie)) + "," +
               std::to_string(int(p.signal_click_bob)) + "," + std::to_string(int(p.signal_click_charlie)) + "," +
               std::to_string(int(p.verify_click_bob)) + "," + std::to_string(int(p.verify_click_charlie)) + "\n";
    }
    return out;
}

inline constexpr const char *kTrialHeader =
    "trial,pulses,null_bob,null_charlie,signal_bob,signal_charlie,verify_bob,verify_charlie,bob_abort,"
    "charlie_abort,bob_accept,charlie_accept,repudiation,forge_success";

inline std::string trials_to_csv(const ExperimentSummary &s) {
    std::string out = std::string(kTrialHeader) + "\n";
    for (const auto &o : s.trials) {
        const auto &c = o.counts;
        out += std::to_string(o.trial) + "," + std::to_string(c.pulses) + "," + std::to_string(c.null_bob) + "," +
               std::to_string(c.null_charlie) + "," + std::to_string(c.signal_bob) + "," +
               std::to_string(c.signal_charlie) + "," + std::to_string(c.verify_bob) + "," +
               std::to_string(c.verify_charlie) + "," + std::to_string(int(o.bob_abort)) + "," +
               std::to_string(int(o.charlie_abort)) + "," + std::to_string(int(o.bob_accept)) + "," +
               std::to_string(int(o.charlie_accept)) + "," + std::to_string(int(o.repudiation)) + "," +
               std::to_string(int(o.forge_success)) + "\n";
    }
    return out;
}

inline constexpr const char *kEntropyHeader = "N,mean_photons,entropy_bits,receivers_entropy_bits,log2_N";

// ---------------------------------------------------------------------------
// JSON reports.
// ---------------------------------------------------------------------------

inline json bound_to_json(const Bound &b) { return {{"value", b.value()}, {"raw", b.raw}, {"vacuous", b.vacuous}}; }

inline json helstrom_to_json(const HelstromReport &h) {
    return {{"criterion1_residual", h.criterion1_residual},
            {"criterion2_residual", h.criterion2_residual},
            {"criterion3_residual", h.criterion3_residual},
            {"criterion4_min_eigenvalue", h.criterion4_min_eigenvalue},
            {"tolerance", h.tolerance},
            {"satisfied", h.satisfied}};
}

inline json row_to_json(const std::vector<double> &row) { return json(row); }

inline json analysis_to_json(const ForgingAnalysis &a) {
    return {{"orbit_scope", to_string(a.scope)},
            {"amplified", a.amplified},
            {"measured_mean_photons", a.measured_alphabet.mean_photons()},
            {"p_original", a.p_original},
            {"p_original_mean", a.p_original_mean},
            {"lower_first_row", row_to_json(a.cost_matrix_lower.first_row())},
            {"upper_first_row", row_to_json(a.cost_matrix_upper.first_row())},
            {"cost_lower", a.p_forgery_lower},
            {"cost_upper", a.p_forgery_upper},
            {"gap_lower", a.gap_lower()},
            {"gap_upper", a.gap_upper()},
            {"square_root_cost_raw", a.p_square_root_raw},
            {"optimum_dual_lower_bound", a.p_optimum_dual_lower},
            {"helstrom_lower", helstrom_to_json(a.helstrom_lower)},
            {"helstrom_upper", helstrom_to_json(a.helstrom_upper)},
            {"certified", a.certified()}};
}

inline json security_to_json(const SecurityReport &r) {
    json sweep = json::array();
    for (const auto &row : r.sweep) {
        sweep.push_back({{"L", row.length},
                         {"eps_forging", bound_to_json(row.forging)},
                         {"eps_repudiation", bound_to_json(row.repudiation)},
                         {"eps_robustness", bound_to_json(row.robustness)},
                         {"eps_robustness_multiport", bound_to_json(row.robustness_multiport)},
                         {"delta", row.delta},
                         {"eps_active", bound_to_json(row.active_forging)}});
    }
    return {{"p_original", r.p_original},
            {"p_forgery", r.p_forgery},
            {"g", r.gap},
            {"s_a", r.s_a},
            {"s_v", r.s_v},
            {"p_forgery_amplified", r.p_forgery_amplified},
            {"g_amplified", r.gap_amplified},
            {"rejection_threshold", r.rejection_threshold},
            {"hoeffding_slack", r.hoeffding_slack},
            {"repudiation_base", r.repudiation_base},
            {"receivers", r.receivers},
            {"entropy_per_copy", r.entropy_per_copy},
            {"info_ratio", r.info_ratio},
            {"usd_probability", r.usd_probability},
            {"usd_note", "standard-formula estimate: N times the smallest eigenvalue of the uniform mixture"},
            {"nontrivial_length", r.nontrivial_length},
            {"sweep", sweep}};
}

inline json proportion_to_json(const Proportion &p) {
    return {{"count", p.successes}, {"total", p.total}, {"estimate", p.estimate},
            {"wilson_lower", p.lower}, {"wilson_upper", p.upper}};
}

inline json summary_to_json(const ExperimentSummary &s) {
    return {{"trials", static_cast<std::int64_t>(s.trials.size())},
            {"pulses", s.totals.pulses},
            {"bob_accept", proportion_to_json(s.bob_accept)},
            {"charlie_accept", proportion_to_json(s.charlie_accept)},
            {"repudiation", proportion_to_json(s.repudiation)},
            {"forge_success", proportion_to_json(s.forge_success)},
            {"aborts", proportion_to_json(s.aborts)},
            {"mismatch_bob_only", proportion_to_json(s.mismatch_bob_only)},
            {"mismatch_charlie_only", proportion_to_json(s.mismatch_charlie_only)},
            {"null_rate_bob", proportion_to_json(s.null_rate_bob)},
            {"null_rate_charlie", proportion_to_json(s.null_rate_charlie)},
            {"null_only_bob", proportion_to_json(s.null_only_bob)},
            {"null_only_charlie", proportion_to_json(s.null_only_charlie)},
            {"signal_rate_bob", proportion_to_json(s.signal_rate_bob)},
            {"signal_rate_charlie", proportion_to_json(s.signal_rate_charlie)},
            {"verify_rate_bob", proportion_to_json(s.verify_rate_bob)},
            {"verify_rate_charlie", proportion_to_json(s.verify_rate_charlie)},
            {"bounds",
             {{"g", s.gap},
              {"eps_forging", bound_to_json(s.forging_bound_value)},
              {"eps_robustness", bound_to_json(s.robustness_bound_value)},
              {"eps_repudiation", bound_to_json(s.repudiation_bound_value)}}}};
}

}  // namespace qds
