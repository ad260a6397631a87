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

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::string preset;
    bool dump_config = false;
};

qds::RunConfig resolve(const Options &opt) {
    qds::RunConfig c = opt.config_path.empty() ? qds::RunConfig{} : qds::load_config(opt.config_path);
    if (opt.seed) c.seed = *opt.seed;
    if (!opt.preset.empty()) qds::apply_preset(c, opt.preset);
    qds::validate_config(c);
    return c;
}

template <typename Fn>
int run(const Options &opt, Fn fn) {
    try {
        const auto config = resolve(opt);
        if (opt.dump_config) {
            std::cout << qds::dump_json(qds::config_to_json(config));
            return qds::kExitOk;
        }
        const auto result = fn(config, std::filesystem::path(opt.out_dir));
        for (const auto &f : result.files) std::cout << "wrote " << f.string() << "\n";
        if (!result.message.empty()) std::cerr << "qds: " << result.message << "\n";
        return result.exit_code;
    } catch (const qds::ConfigError &e) {
        std::cerr << "qds: config error: " << e.what() << "\n";
        return qds::kExitConfig;
    } catch (const qds::IoError &e) {
        std::cerr << "qds: I/O error: " << e.what() << "\n";
        return qds::kExitIo;
    } catch (const std::invalid_argument &e) {
        std::cerr << "qds: invalid input: " << e.what() << "\n";
        return qds::kExitConfig;
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum digital signature analysis and simulation"};
    app.require_subcommand(1);
    Options opt;

    app.add_option("--config", opt.config_path, "JSON configuration file");
    app.add_option("--seed", opt.seed, "Master seed (overrides the config)");
    app.add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    app.add_option("--preset", opt.preset, "Simulation preset")
        ->check(CLI::IsMember({"honest", "passive-forger", "tamper-pi4", "tamper-pi2", "tamper-pi", "blocked-input"}));
    app.add_flag("--dump-config", opt.dump_config, "Print the resolved configuration and exit");

    auto *entropy = app.add_subcommand("entropy", "Entropy of one signature element versus mean photon number");
    auto *analyze = app.add_subcommand("analyze", "Optimal forgery, thresholds and security bounds");
    auto *simulate = app.add_subcommand("simulate", "Monte Carlo simulation of the three-party protocol");
    auto *cost = app.add_subcommand("cost-matrix", "Modeled (and optionally sampled) cost matrix");
    for (auto *sub : {entropy, analyze, simulate, cost}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return qds::kExitConfig;
    }

    try {
        if (*entropy) return run(opt, qds::cmd_entropy);
        if (*analyze) return run(opt, qds::cmd_analyze);
        if (*simulate) return run(opt, qds::cmd_simulate);
        return run(opt, qds::cmd_cost_matrix);
    } catch (const std::exception &e) {
        std::cerr << "qds: " << e.what() << "\n";
        return qds::kExitConfig;
    }
}
