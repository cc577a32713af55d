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

/**
 * @file
 * Experiment configuration: a strict key = value text format (unknown keys
 * rejected), validation of cross-field constraints, and the per-epoch
 * training history records written by the train command.
 */

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ccqfl/data.hpp"
#include "ccqfl/errors.hpp"

namespace ccqfl {

inline constexpr const char *kVersionString = "0.1.0";

enum class TrainMode { Exact, Shadow };
enum class OptimizerKind { Sgd, Adam };
enum class TransportKind { InProcess, Framed };

struct ExperimentConfig {
    TrainMode mode = TrainMode::Exact;
    TrainMode metrics_mode = TrainMode::Exact;
    int n_qubits = 8;
    int layers = 5;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double eta = 0.003;
    std::uint32_t epochs = 50;          // T
    std::uint32_t snapshots = 1000;     // M per shadow
    std::uint16_t mom_chunks = 10;      // M2
    int n_clients = 1;
    PartitionMode partition = PartitionMode::Proportions;
    std::vector<std::array<double, 2>> proportions; // empty => uniform 0.5/0.5
    double alpha = 0.5;
    int class_a = 3;
    int class_b = 6;
    std::size_t train_per_client = 2000;
    std::size_t test_per_client = 640;
    std::size_t batch_size = 0; // 0 = full batch
    std::uint64_t seed = 7;
    TransportKind transport = TransportKind::InProcess;
    std::string train_images = "data/train-images-idx3-ubyte";
    std::string train_labels = "data/train-labels-idx1-ubyte";
    std::string test_images = "data/t10k-images-idx3-ubyte";
    std::string test_labels = "data/t10k-labels-idx1-ubyte";
    std::string out_dir = ".";

    void validate() const {
        if (n_qubits < 2 || n_qubits > 24) {
            throw ConfigError("n_qubits must be in [2, 24]");
        }
        if (layers < 1) {
            throw ConfigError("layers must be >= 1");
        }
        if (eta <= 0.0) {
            throw ConfigError("learning_rate must be positive");
        }
        if (snapshots < 1 || mom_chunks < 1 || snapshots % mom_chunks != 0) {
            throw ConfigError("mom_chunks (M2) must divide snapshots (M); got M = " +
                              std::to_string(snapshots) + ", M2 = " +
                              std::to_string(mom_chunks));
        }
        if (n_clients < 1) {
            throw ConfigError("n_clients must be >= 1");
        }
        if (class_a == class_b || class_a < 0 || class_a > 9 || class_b < 0 || class_b > 9) {
            throw ConfigError("class_a and class_b must be distinct digits in [0, 9]");
        }
        if (train_per_client < 1 || test_per_client < 1) {
            throw ConfigError("train/test sizes must be >= 1");
        }
        if (!proportions.empty() &&
            proportions.size() != static_cast<std::size_t>(n_clients)) {
            throw ConfigError("proportions must list one class mix per client");
        }
    }

    PartitionSpec partition_spec() const {
        PartitionSpec spec;
        spec.n_clients = n_clients;
        spec.mode = partition;
        spec.alpha = alpha;
        spec.sizes.assign(n_clients, train_per_client);
        if (partition == PartitionMode::Proportions) {
            if (proportions.empty()) {
                spec.proportions.assign(n_clients, {0.5, 0.5});
            } else {
                spec.proportions = proportions;
            }
        }
        return spec;
    }
};

struct EpochRecord {
    std::uint32_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double grad_norm = 0.0;
    double wall_ms = 0.0;
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;

    std::string to_csv() const {
        std::ostringstream out;
        out << "epoch,train_loss,train_acc,test_acc,grad_norm,wall_ms\n";
        out << std::setprecision(17);
        for (const EpochRecord &r : epochs) {
            out << r.epoch << ',' << r.train_loss << ',' << r.train_acc << ',' << r.test_acc
                << ',' << r.grad_norm << ',' << r.wall_ms << '\n';
        }
        return out.str();
    }
};

namespace detail {

inline std::string trim(const std::string &s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !(in >> std::ws).eof()) {
        throw ConfigError("key '" + key + "': cannot parse '" + value + "'");
    }
    return out;
}

inline std::vector<std::array<double, 2>> parse_proportions(const std::string &key,
                                                            const std::string &value) {
    // Format: "0.8/0.2,0.5/0.5,0.2/0.8" -- one class0/class1 pair per client.
    std::vector<std::array<double, 2>> out;
    std::istringstream clients(value);
    std::string pair;
    while (std::getline(clients, pair, ',')) {
        const auto slash = pair.find('/');
        if (slash == std::string::npos) {
            throw ConfigError("key '" + key + "': expected class0/class1 pairs, got '" +
                              pair + "'");
        }
        out.push_back({parse_number<double>(key, trim(pair.substr(0, slash))),
                       parse_number<double>(key, trim(pair.substr(slash + 1)))});
    }
    if (out.empty()) {
        throw ConfigError("key '" + key + "': no proportions given");
    }
    return out;
}

} // namespace detail

/**
 * @brief Parse a key = value config file. '#' starts a comment; unknown keys
 * and malformed values raise ConfigError naming the key. The returned config
 * is fully validated.
 */
inline ExperimentConfig parse_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    ExperimentConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) {
            line = line.substr(0, comment);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty()) {
            throw ConfigError("key '" + key + "': empty value");
        }

        if (key == "mode" || key == "metrics_mode") {
            TrainMode mode;
            if (value == "exact") {
                mode = TrainMode::Exact;
            } else if (value == "shadow") {
                mode = TrainMode::Shadow;
            } else {
                throw ConfigError("key '" + key + "': expected exact|shadow, got '" + value +
                                  "'");
            }
            (key == "mode" ? config.mode : config.metrics_mode) = mode;
        } else if (key == "n_qubits") {
            config.n_qubits = detail::parse_number<int>(key, value);
        } else if (key == "layers") {
            config.layers = detail::parse_number<int>(key, value);
        } else if (key == "optimizer") {
            if (value == "sgd") {
                config.optimizer = OptimizerKind::Sgd;
            } else if (value == "adam") {
                config.optimizer = OptimizerKind::Adam;
            } else {
                throw ConfigError("key 'optimizer': expected sgd|adam, got '" + value + "'");
            }
        } else if (key == "learning_rate") {
            config.eta = detail::parse_number<double>(key, value);
        } else if (key == "epochs") {
            config.epochs = detail::parse_number<std::uint32_t>(key, value);
        } else if (key == "snapshots") {
            config.snapshots = detail::parse_number<std::uint32_t>(key, value);
        } else if (key == "mom_chunks") {
            config.mom_chunks = detail::parse_number<std::uint16_t>(key, value);
        } else if (key == "n_clients") {
            config.n_clients = detail::parse_number<int>(key, value);
        } else if (key == "partition") {
            if (value == "proportions") {
                config.partition = PartitionMode::Proportions;
            } else if (value == "dirichlet") {
                config.partition = PartitionMode::Dirichlet;
            } else {
                throw ConfigError("key 'partition': expected proportions|dirichlet, got '" +
                                  value + "'");
            }
        } else if (key == "proportions") {
            config.proportions = detail::parse_proportions(key, value);
        } else if (key == "alpha") {
            config.alpha = detail::parse_number<double>(key, value);
        } else if (key == "class_a") {
            config.class_a = detail::parse_number<int>(key, value);
        } else if (key == "class_b") {
            config.class_b = detail::parse_number<int>(key, value);
        } else if (key == "train_per_client") {
            config.train_per_client = detail::parse_number<std::size_t>(key, value);
        } else if (key == "test_per_client") {
            config.test_per_client = detail::parse_number<std::size_t>(key, value);
        } else if (key == "batch_size") {
            config.batch_size = detail::parse_number<std::size_t>(key, value);
        } else if (key == "seed") {
            config.seed = detail::parse_number<std::uint64_t>(key, value);
        } else if (key == "transport") {
            if (value == "inprocess") {
                config.transport = TransportKind::InProcess;
            } else if (value == "framed") {
                config.transport = TransportKind::Framed;
            } else {
                throw ConfigError("key 'transport': expected inprocess|framed, got '" +
                                  value + "'");
            }
        } else if (key == "train_images") {
            config.train_images = value;
        } else if (key == "train_labels") {
            config.train_labels = value;
        } else if (key == "test_images") {
            config.test_images = value;
        } else if (key == "test_labels") {
            config.test_labels = value;
        } else if (key == "out_dir") {
            config.out_dir = value;
        } else {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        }
    }
    config.validate();
    return config;
}

/**
 * @brief Render a config back to the key = value format. The output parses
 * to an identical config, so a run manifest is itself a valid config file.
 */
inline std::string render_config(const ExperimentConfig &config) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "mode = " << (config.mode == TrainMode::Exact ? "exact" : "shadow") << '\n';
    out << "metrics_mode = " << (config.metrics_mode == TrainMode::Exact ? "exact" : "shadow")
        << '\n';
    out << "n_qubits = " << config.n_qubits << '\n';
    out << "layers = " << config.layers << '\n';
    out << "optimizer = " << (config.optimizer == OptimizerKind::Adam ? "adam" : "sgd")
        << '\n';
    out << "learning_rate = " << config.eta << '\n';
    out << "epochs = " << config.epochs << '\n';
    out << "snapshots = " << config.snapshots << '\n';
    out << "mom_chunks = " << config.mom_chunks << '\n';
    out << "n_clients = " << config.n_clients << '\n';
    out << "partition = "
        << (config.partition == PartitionMode::Proportions ? "proportions" : "dirichlet")
        << '\n';
    if (!config.proportions.empty()) {
        out << "proportions = ";
        for (std::size_t i = 0; i < config.proportions.size(); ++i) {
            out << (i ? "," : "") << config.proportions[i][0] << '/'
                << config.proportions[i][1];
        }
        out << '\n';
    }
    out << "alpha = " << config.alpha << '\n';
    out << "class_a = " << config.class_a << '\n';
    out << "class_b = " << config.class_b << '\n';
    out << "train_per_client = " << config.train_per_client << '\n';
    out << "test_per_client = " << config.test_per_client << '\n';
    out << "batch_size = " << config.batch_size << '\n';
    out << "seed = " << config.seed << '\n';
    out << "transport = "
        << (config.transport == TransportKind::InProcess ? "inprocess" : "framed") << '\n';
    out << "train_images = " << config.train_images << '\n';
    out << "train_labels = " << config.train_labels << '\n';
    out << "test_images = " << config.test_images << '\n';
    out << "test_labels = " << config.test_labels << '\n';
    out << "out_dir = " << config.out_dir << '\n';
    return out.str();
}

} // namespace ccqfl
