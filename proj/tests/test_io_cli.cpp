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

#include "qds/commands.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

using namespace qds;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory per test.
class Scratch {
  public:
    Scratch() {
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("qds_test_" + std::string(info->test_suite_name()) + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Scratch() { fs::remove_all(dir_); }
    fs::path operator/(const std::string &name) const { return dir_ / name; }
    const fs::path &path() const { return dir_; }

  private:
    fs::path dir_;
};

int run_cli(const std::string &args) {
    const std::string cmd = std::string(QDS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path &p, const std::string &text) { write_text_file(p, text); }

const char *kSmallSimulation = R"({
  "simulation": {"signature_length": 20000, "trials": 6, "workers": 2, "transcript_pulses": 50}
})";

}  // namespace

// ---------------------------------------------------------------------------
// Configuration.
// ---------------------------------------------------------------------------

TEST(Config, RoundTripIsIdempotent) {
    const RunConfig defaults;
    const std::string once = dump_json(config_to_json(defaults));
    const std::string twice = dump_json(config_to_json(parse_config_text(once)));
    EXPECT_EQ(once, twice);

    RunConfig c;
    c.seed = 18446744073709551615ULL;
    c.simulation.s_a = 4.1e-3;
    c.simulation.s_v = 4.4e-3;
    c.simulation.alice = PhaseTamper{0.25, 0.5};
    c.simulation.bob = ActiveForger{0.75};
    c.security.hoeffding_slack = 1e-4;
    c.calibration.mode = CalibrationMode::kDiagonal;
    c.cost_matrix.scope = OrbitScope::kFullMatrix;
    c.channel.mu_scale = 1.0 / 3.0;
    const std::string a = dump_json(config_to_json(c));
    const auto back = parse_config_text(a);
    EXPECT_EQ(a, dump_json(config_to_json(back)));
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_EQ(back.channel.mu_scale, 1.0 / 3.0);
    EXPECT_EQ(*back.simulation.s_a, 4.1e-3);
    EXPECT_EQ(std::get<PhaseTamper>(back.simulation.alice).fraction, 0.5);
    EXPECT_EQ(std::get<ActiveForger>(back.simulation.bob).response_fraction, 0.75);
}

TEST(Config, EveryStrategyRoundTrips) {
    for (const AliceStrategy &s : {AliceStrategy{HonestAlice{}}, AliceStrategy{PhaseTamper{}},
                                   AliceStrategy{TwoStateRepudiator{0.1, 0.2}}, AliceStrategy{BlockedInput{Receiver::kBob}}}) {
        RunConfig c;
        c.simulation.alice = s;
        const auto text = dump_json(config_to_json(c));
        EXPECT_EQ(text, dump_json(config_to_json(parse_config_text(text))));
        EXPECT_EQ(parse_config_text(text).simulation.alice.index(), s.index());
    }
}

TEST(Config, AbsentKeysKeepDefaults) {
    const auto c = parse_config_text("{}");
    EXPECT_EQ(dump_json(config_to_json(c)), dump_json(config_to_json(RunConfig{})));
    const auto d = parse_config_text(R"({"channel": {"dark_cps": 10}})");
    EXPECT_EQ(d.channel.dark_cps, 10.0);
    EXPECT_EQ(d.channel.visibility, 0.98);
}

TEST(Config, UnknownKeysAreRejectedAtEveryLevel) {
    for (const char *text :
         {R"({"extra": 1})", R"({"channel": {"dark": 1}})", R"({"calibration": {"target": 1}})",
          R"({"cost_matrix": {"file": "x"}})", R"({"security": {"r": 1}})", R"({"entropy": {"n": [2]}})",
          R"({"simulation": {"length": 5}})", R"({"simulation": {"alice": {"strategy": "honest", "x": 1}}})",
          R"({"simulation": {"bob": {"strategy": "passive-forger", "response_fraction": 1}}})",
          R"({"cost_matrix_output": {"ideal": true, "n": 3}})"}) {
        EXPECT_THROW((void)parse_config_text(text), ConfigError) << text;
    }
}

TEST(Config, TypeAndValueErrors) {
    for (const char *text :
         {"not json", "[]", R"({"seed": -1})", R"({"seed": 1.5})", R"({"n_phases": "8"})",
          R"({"channel": {"visibility": "high"}})", R"({"calibration": {"mode": "auto"}})",
          R"({"cost_matrix": {"orbit_scope": "diagonal"}})", R"({"simulation": {"alice": {"strategy": "evil"}}})",
          R"({"simulation": {"alice": {"strategy": "blocked-input", "blocked": "dave"}}})",
          R"({"security": {"hoeffding_slack": 0}})", R"({"entropy": {"n_phases": [2, "x"]}})",
          R"({"cost_matrix_output": {"estimate": 1}})"}) {
        EXPECT_THROW((void)parse_config_text(text), ConfigError) << text;
    }
}

TEST(Config, SemanticValidation) {
    for (const char *text :
         {R"({"n_phases": 1})", R"({"mean_photons": -1})", R"({"channel": {"visibility": 1.5}})",
          R"({"simulation": {"s_a": 0.004}})", R"({"simulation": {"s_a": 0.005, "s_v": 0.004}})",
          R"({"simulation": {"trials": 0}})", R"({"security": {"rejection_threshold": 0}})",
          R"({"entropy": {"n_phases": []}})", R"({"cost_matrix_output": {"pulses_per_entry": 0}})"}) {
        EXPECT_THROW(validate_config(parse_config_text(text)), ConfigError) << text;
    }
    EXPECT_NO_THROW(validate_config(RunConfig{}));
}

TEST(Presets, ConfigureStrategies) {
    RunConfig c;
    apply_preset(c, "tamper-pi2");
    ASSERT_TRUE(std::holds_alternative<PhaseTamper>(c.simulation.alice));
    EXPECT_NEAR(std::get<PhaseTamper>(c.simulation.alice).delta_phi, std::numbers::pi / 2, 1e-15);
    EXPECT_EQ(std::get<PhaseTamper>(c.simulation.alice).fraction, 2.0 / 16.0);

    c = RunConfig{};
    apply_preset(c, "blocked-input");
    EXPECT_TRUE(std::holds_alternative<BlockedInput>(c.simulation.alice));
    EXPECT_EQ(c.channel.differential_loss_db, kBlockedInputDifferentialLossDb);

    c = RunConfig{};
    c.channel.differential_loss_db = 1.0;
    apply_preset(c, "blocked-input");
    EXPECT_EQ(c.channel.differential_loss_db, 1.0);

    c = RunConfig{};
    apply_preset(c, "passive-forger");
    EXPECT_TRUE(std::holds_alternative<PassiveForger>(c.simulation.bob));
    EXPECT_THROW(apply_preset(c, "nope"), ConfigError);
}

// ---------------------------------------------------------------------------
// Cost-matrix CSV.
// ---------------------------------------------------------------------------

TEST(CostMatrixCsv, RoundTripIsExact) {
    const auto c = predicted_cost_matrix(PhaseAlphabet::from_mean_photons(8, 0.16), ChannelModel{});
    const auto text = cost_matrix_to_csv(c);
    const auto back = cost_matrix_from_csv(text);
    EXPECT_EQ(back.matrix(), c.matrix());
    EXPECT_EQ(cost_matrix_to_csv(back), text);
    EXPECT_EQ(text.find("e+"), std::string::npos);
}

TEST(CostMatrixCsv, AcceptsWhitespaceAndCrLf) {
    const auto c = cost_matrix_from_csv(" 0.1 , 0.2\r\n0.2,0.1\r\n\r\n");
    EXPECT_EQ(c(0, 1), 0.2);
    EXPECT_EQ(c.size(), 2);
}

TEST(CostMatrixCsv, RejectsMalformedInput) {
    for (const char *text : {"", "0.1,0.2\n", "0.1,0.2\n0.3\n", "0.1,0.2,\n0.3,0.4\n", "0.1,x\n0.3,0.4\n",
                             "0.1,,0.2\n0.3,0.4\n", "0.1,0.2\n0.3,1.5\n", "0.1,0.2\n0.3,-0.4\n", "0.1,0.2\n0.3,nan\n",
                             "0.1 0.2\n0.3 0.4\n", "0.1,0.2\n0.3,0.4\n0.5,0.6\n"}) {
        EXPECT_THROW((void)cost_matrix_from_csv(text), ConfigError) << text;
    }
}

TEST(CostMatrixCsv, LoadsFromFileOrBundled) {
    Scratch s;
    EXPECT_EQ(load_cost_matrix(CostMatrixSource{}).matrix(), measured_cost_matrix().matrix());
    write(s / "m.csv", "0.1,0.2\n0.2,0.1\n");
    EXPECT_EQ(load_cost_matrix(CostMatrixSource{(s / "m.csv").string()}).size(), 2);
    EXPECT_THROW((void)load_cost_matrix(CostMatrixSource{(s / "missing.csv").string()}), IoError);
}

TEST(Csv, FixedHeaders) {
    EXPECT_STREQ(kSweepHeader, "L,eps_forging,eps_repudiation,eps_robustness,eps_robustness_multiport,delta,eps_active");
    EXPECT_STREQ(kEntropyHeader, "N,mean_photons,entropy_bits,receivers_entropy_bits,log2_N");
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(3.0), "3");
}

// ---------------------------------------------------------------------------
// Commands, in process.
// ---------------------------------------------------------------------------

TEST(Commands, AnalyzeReportsAndCertifies) {
    Scratch s;
    const auto r = cmd_analyze(RunConfig{}, s.path());
    EXPECT_EQ(r.exit_code, kExitOk);
    ASSERT_EQ(r.files.size(), 3u);
    const auto report = json::parse(read_text_file(s / "report.json"));
    const auto &passive = report.at("passive");
    EXPECT_NEAR(passive.at("cost_lower").get<double>(), 4.70e-3, 0.01e-3);
    EXPECT_NEAR(passive.at("cost_upper").get<double>(), 4.76e-3, 0.01e-3);
    EXPECT_TRUE(passive.at("certified").get<bool>());
    const auto sweep = read_text_file(s / "sweep.csv");
    EXPECT_EQ(sweep.substr(0, sweep.find('\n')), kSweepHeader);
}

TEST(Commands, AnalyzeFlagsUncertifiedScope) {
    Scratch s;
    RunConfig c;
    c.cost_matrix.scope = OrbitScope::kFullMatrix;
    const auto r = cmd_analyze(c, s.path());
    EXPECT_EQ(r.exit_code, kExitCertification);
    EXPECT_TRUE(fs::exists(s / "report.json"));
}

TEST(Commands, EntropyTableShape) {
    Scratch s;
    RunConfig c;
    c.entropy.n_phases = {2, 8};
    c.entropy.mean_photons = {0.0, 0.16, 50.0};
    ASSERT_EQ(cmd_entropy(c, s.path()).exit_code, kExitOk);
    const auto text = read_text_file(s / "entropy.csv");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 3);
    EXPECT_EQ(text.substr(0, text.find('\n')), kEntropyHeader);
}

TEST(Commands, SimulateSummaryMatchesExperiment) {
    Scratch s;
    auto c = parse_config_text(kSmallSimulation);
    ASSERT_EQ(cmd_simulate(c, s.path()).exit_code, kExitOk);
    const auto summary = json::parse(read_text_file(s / "summary.json"));
    EXPECT_EQ(summary.at("summary").at("trials").get<int>(), 6);
    const auto setup = prepare_simulation(c);
    const auto exp = run_experiment(setup.protocol);
    EXPECT_EQ(summary.at("summary").at("pulses").get<std::int64_t>(), exp.totals.pulses);
    const auto transcript = read_text_file(s / "transcript.csv");
    EXPECT_EQ(std::count(transcript.begin(), transcript.end(), '\n'), 51);
}

// ---------------------------------------------------------------------------
// Executable.
// ---------------------------------------------------------------------------

TEST(Cli, ExitCodes) {
    Scratch s;
    const std::string out = " --out " + (s / "out").string();
    EXPECT_EQ(run_cli("analyze" + out), 0);
    EXPECT_EQ(run_cli("entropy" + out), 0);
    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli("analyze --seed notanumber" + out), 1);
    EXPECT_EQ(run_cli("simulate --preset tamper-2pi" + out), 1);

    write(s / "unknown.json", R"({"bogus": 1})");
    EXPECT_EQ(run_cli("analyze --config " + (s / "unknown.json").string() + out), 1);
    write(s / "badcsv.json", R"({"cost_matrix": {"path": ")" + (s / "bad.csv").string() + R"("}})");
    write(s / "bad.csv", "0.1,0.2\n0.3\n");
    EXPECT_EQ(run_cli("analyze --config " + (s / "badcsv.json").string() + out), 1);

    write(s / "full.json", R"({"cost_matrix": {"orbit_scope": "full-matrix"}})");
    EXPECT_EQ(run_cli("analyze --config " + (s / "full.json").string() + out), 2);

    EXPECT_EQ(run_cli("analyze --config " + (s / "missing.json").string() + out), 3);
    write(s / "nocsv.json", R"({"cost_matrix": {"path": ")" + (s / "missing.csv").string() + R"("}})");
    EXPECT_EQ(run_cli("analyze --config " + (s / "nocsv.json").string() + out), 3);
    write(s / "afile", "");
    EXPECT_EQ(run_cli("analyze --out " + (s / "afile" / "sub").string()), 3);
}

TEST(Cli, DumpConfigRoundTrips) {
    Scratch s;
    const auto cmd = std::string(QDS_CLI_PATH) + " analyze --dump-config --seed 77 --preset tamper-pi > " +
                     (s / "dumped.json").string();
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    const auto text = read_text_file(s / "dumped.json");
    const auto c = parse_config_text(text);
    EXPECT_EQ(c.seed, 77u);
    EXPECT_TRUE(std::holds_alternative<PhaseTamper>(c.simulation.alice));
    EXPECT_EQ(dump_json(config_to_json(c)), text);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
    Scratch s;
    write(s / "sim.json", kSmallSimulation);
    write(s / "cm.json", R"({"cost_matrix_output": {"estimate": true, "pulses_per_entry": 20000}})");
    const std::string sim = " --config " + (s / "sim.json").string() + " --seed 5";
    const std::string cm = " --config " + (s / "cm.json").string() + " --seed 5";
    for (const char *run : {"a", "b"}) {
        const std::string out = " --out " + (s / run).string();
        ASSERT_EQ(run_cli("entropy" + out), 0);
        ASSERT_EQ(run_cli("analyze" + out), 0);
        ASSERT_EQ(run_cli("simulate" + sim + out), 0);
        ASSERT_EQ(run_cli("cost-matrix" + cm + out), 0);
    }
    int compared = 0;
    for (const auto &entry : fs::directory_iterator(s / "a")) {
        const auto name = entry.path().filename();
        EXPECT_EQ(read_text_file(entry.path()), read_text_file(s / "b" / name)) << name;
        ++compared;
    }
    EXPECT_EQ(compared, 10);

    ASSERT_EQ(run_cli("simulate --config " + (s / "sim.json").string() + " --seed 6 --out " + (s / "c").string()), 0);
    EXPECT_NE(read_text_file(s / "a" / "trials.csv"), read_text_file(s / "c" / "trials.csv"));
}

TEST(Cli, CostMatrixEstimateAgreesWithModel) {
    Scratch s;
    write(s / "cm.json", R"({"cost_matrix_output": {"estimate": true, "pulses_per_entry": 200000}})");
    ASSERT_EQ(run_cli("cost-matrix --config " + (s / "cm.json").string() + " --out " + s.path().string()), 0);
    const auto report = json::parse(read_text_file(s / "cost_matrix_report.json"));
    EXPECT_LT(report.at("max_abs_z").get<double>(), 4.5);
    const auto predicted = cost_matrix_from_csv(read_text_file(s / "cost_matrix_predicted.csv"));
    EXPECT_NEAR(predicted(0, 0), 3.8875e-3, 1e-12);
    EXPECT_TRUE(predicted.is_circulant_symmetric());
    EXPECT_EQ(cost_matrix_from_csv(read_text_file(s / "cost_matrix_estimated.csv")).size(), 8);
}

TEST(Cli, PresetsRun) {
    Scratch s;
    write(s / "sim.json", kSmallSimulation);
    for (const char *preset : {"honest", "passive-forger", "tamper-pi4", "tamper-pi2", "tamper-pi", "blocked-input"}) {
        const auto out = s / preset;
        EXPECT_EQ(run_cli(std::string("simulate --preset ") + preset + " --config " + (s / "sim.json").string() +
                          " --out " + out.string()),
                  0)
            << preset;
        const auto summary = json::parse(read_text_file(out / "summary.json"));
        EXPECT_EQ(summary.at("summary").at("trials").get<int>(), 6);
    }
}
