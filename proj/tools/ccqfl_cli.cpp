// Copyright 2026 The ccqfl developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment harness: `train` runs a configured federated experiment and
// writes history/manifest/partition files, `verify` runs the brute-force
// self-checks, `inspect-shadow` dumps the header and basis/outcome
// histograms of an encoded shadow-set file.

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccqfl/config.hpp"
#include "ccqfl/errors.hpp"
#include "ccqfl/federation.hpp"
#include "ccqfl/shadows.hpp"
#include "ccqfl/verify.hpp"

namespace {

// Exit-code families, one range per error class for scriptability.
constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 10;
constexpr int kExitIngestion = 20;
constexpr int kExitProtocol = 30;
constexpr int kExitUsage = 40;
constexpr int kExitInternal = 70;

void apply_env_overrides(ccqfl::ExperimentConfig &config) {
    // Environment overrides exist for the data paths only.
    const std::array<std::pair<const char *, std::string *>, 4> keys = {
        std::pair{"CCQFL_TRAIN_IMAGES", &config.train_images},
        std::pair{"CCQFL_TRAIN_LABELS", &config.train_labels},
        std::pair{"CCQFL_TEST_IMAGES", &config.test_images},
        std::pair{"CCQFL_TEST_LABELS", &config.test_labels},
    };
    for (const auto &[name, target] : keys) {
        if (const char *value = std::getenv(name); value != nullptr && *value != '\0') {
            *target = value;
        }
    }
}

void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ccqfl::UsageError("cannot write " + path.string());
    }
    out << content;
}

int cmd_train(const std::string &config_path, std::optional<std::uint64_t> seed,
              std::optional<std::string> out_dir) {
    ccqfl::ExperimentConfig config = ccqfl::parse_config(config_path);
    apply_env_overrides(config);
    if (seed) {
        config.seed = *seed;
    }
    if (out_dir) {
        config.out_dir = *out_dir;
    }
    config.validate();

    const ccqfl::TrainResult result = ccqfl::train(config);

    const std::filesystem::path out(config.out_dir);
    std::filesystem::create_directories(out);
    write_file(out / "history.csv", result.history.to_csv());

    std::string manifest = ccqfl::render_config(config);
    manifest += "# p = " + std::to_string(result.param_count) + "\n";
    manifest += "# code_version = " + std::string(ccqfl::kVersionString) + "\n";
    write_file(out / "manifest.txt", manifest);
    write_file(out / "partition.csv", result.partition.to_csv());

    if (!result.history.epochs.empty()) {
        const ccqfl::EpochRecord &last = result.history.epochs.back();
        std::cout << "epochs: " << result.history.epochs.size()
                  << "  train_loss: " << last.train_loss << "  train_acc: " << last.train_acc
                  << "  test_acc: " << last.test_acc << '\n';
    } else {
        std::cout << "epochs: 0 (nothing trained)\n";
    }
    std::cout << "history: " << (out / "history.csv").string() << '\n';
    return kExitOk;
}

int cmd_verify(const std::string &suite) {
    const ccqfl::verify::SuiteResult result = ccqfl::verify::run_suite(suite);
    std::cout << (result.passed ? "[PASS] " : "[FAIL] ") << result.report << '\n';
    return result.passed ? kExitOk : kExitCheckFailed;
}

int cmd_inspect_shadow(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ccqfl::UsageError("cannot open " + path);
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    const ccqfl::ShadowSetMsg msg = ccqfl::decode_shadow_set(bytes);

    std::cout << "iteration: " << msg.set.iteration << '\n'
              << "n_qubits:  " << msg.set.n_qubits() << '\n'
              << "p:         " << msg.set.param_count << '\n'
              << "entries:   " << msg.set.entries.size() << '\n'
              << "M:         " << msg.set.snapshots_per_entry() << '\n'
              << "M2:        " << msg.mom_chunks << '\n';

    std::array<std::size_t, 3> basis_counts = {0, 0, 0};
    std::array<std::size_t, 2> outcome_counts = {0, 0};
    for (const ccqfl::ClassicalShadow &entry : msg.set.entries) {
        for (std::uint8_t cell : entry.bytes()) {
            basis_counts[cell >> 1] += 1;
            outcome_counts[cell & 1] += 1;
        }
    }
    const double total = static_cast<double>(basis_counts[0] + basis_counts[1] +
                                             basis_counts[2]);
    std::cout << "bases:     X " << basis_counts[0] << " (" << basis_counts[0] / total
              << ")  Y " << basis_counts[1] << " (" << basis_counts[1] / total << ")  Z "
              << basis_counts[2] << " (" << basis_counts[2] / total << ")\n";
    std::cout << "outcomes:  0 " << outcome_counts[0] << "  1 " << outcome_counts[1] << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Federated training of a server-side quantum model by classical clients"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    CLI::App *train = app.add_subcommand("train", "run a configured experiment");
    train->add_option("--config", config_path, "config file")->required();
    train->add_option("--seed", seed, "override the config seed");
    train->add_option("--out", out_dir, "override the output directory");

    std::string suite;
    CLI::App *verify = app.add_subcommand("verify", "run a brute-force check suite");
    verify->add_option("--suite", suite, "channel|gradient|aggregation|concentration")
        ->required();

    std::string shadow_file;
    CLI::App *inspect = app.add_subcommand("inspect-shadow", "dump a shadow-set file");
    inspect->add_option("--file", shadow_file, "encoded shadow-set file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            return cmd_train(config_path, seed, out_dir);
        }
        if (verify->parsed()) {
            return cmd_verify(suite);
        }
        if (inspect->parsed()) {
            return cmd_inspect_shadow(shadow_file);
        }
    } catch (const ccqfl::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ccqfl::IngestionError &e) {
        std::cerr << "ingestion error: " << e.what() << '\n';
        return kExitIngestion;
    } catch (const ccqfl::ProtocolError &e) {
        std::cerr << "protocol error: " << e.what() << '\n';
        return kExitProtocol;
    } catch (const ccqfl::UsageError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}
