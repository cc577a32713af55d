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
 * The federated training loop for classical clients: per iteration the
 * server publishes the shadow set of the current parameters and all +-pi/2
 * shifts, clients turn it into local loss gradients against their encoded
 * data, and the server aggregates (weights m_i / m) and applies the
 * optimizer update. Parameters only ever live on the server.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccqfl/config.hpp"
#include "ccqfl/data.hpp"
#include "ccqfl/errors.hpp"
#include "ccqfl/qnn.hpp"
#include "ccqfl/rng.hpp"
#include "ccqfl/shadows.hpp"
#include "ccqfl/sim.hpp"
#include "ccqfl/wire.hpp"

namespace ccqfl {

using GradientVector = std::vector<double>;

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// The server's whole mutable world: circuit, parameters, optimizer state.
struct ServerState {
    Ansatz ansatz;
    std::vector<double> theta;
    OptimizerKind optimizer = OptimizerKind::Adam;
    AdamState adam;
    double eta = 0.003;
    std::uint32_t iteration = 1; // t, starting at 1
};

/// A client's private world: its encoded samples and estimator settings.
struct ClientState {
    int client_id = 0;
    std::vector<EncodedSample> samples;
    MomConfig mom;
};

struct LocalGradientMsg {
    std::uint16_t client_id = 0;
    std::uint32_t iteration = 0;
    std::uint32_t sample_count = 0; // m_i
    GradientVector gradient;
    double local_loss = 0.0;

    bool operator==(const LocalGradientMsg &other) const = default;
};

// --- Local gradient computation ---------------------------------------------

/**
 * @brief Compute a client's local gradient against any expectation source.
 * With a ShadowExpectationSource this is the fully classical client of the
 * protocol; with an ExactExpectationSource it is the exact-mode rig.
 */
inline LocalGradientMsg client_local_gradient(const ClientState &client,
                                              ExpectationSource &source,
                                              std::uint32_t iteration) {
    if (client.samples.empty()) {
        throw UsageError("client " + std::to_string(client.client_id) + " has no samples");
    }
    std::vector<ExpectationBundle> bundles;
    bundles.reserve(client.samples.size());
    std::vector<std::uint8_t> labels;
    labels.reserve(client.samples.size());
    for (const EncodedSample &sample : client.samples) {
        if (sample.observable.n_qubits != source.n_qubits()) {
            throw ProtocolError("client observable qubit count " +
                                std::to_string(sample.observable.n_qubits) +
                                " does not match the published model (" +
                                std::to_string(source.n_qubits()) + ")");
        }
        bundles.push_back(source.bundle(sample.observable));
        labels.push_back(sample.label);
    }
    const auto [loss, probs] = predict_and_loss(bundles, labels);
    (void)probs;

    LocalGradientMsg msg;
    msg.client_id = static_cast<std::uint16_t>(client.client_id);
    msg.iteration = iteration;
    msg.sample_count = static_cast<std::uint32_t>(client.samples.size());
    msg.gradient = loss_gradient(bundles, labels);
    msg.local_loss = loss;
    return msg;
}

/// Protocol entry point: gradients from a received shadow set, estimated by
/// median of means with the client's own chunking. No quantum operation runs
/// on the client.
inline LocalGradientMsg client_local_gradient(const ClientState &client,
                                              const ShadowSet &shadow_set) {
    ShadowExpectationSource source(shadow_set, client.mom);
    return client_local_gradient(client, source, shadow_set.iteration);
}

// --- Aggregation and update --------------------------------------------------

/**
 * @brief Weighted aggregate g_Global = sum_i (m_i / m) g_Local_i. Messages
 * must agree on iteration and parameter count; summation runs in client_id
 * order so the result is independent of arrival order, bit for bit.
 */
inline GradientVector aggregate(std::vector<LocalGradientMsg> msgs) {
    if (msgs.empty()) {
        throw UsageError("aggregate needs at least one local gradient");
    }
    std::sort(msgs.begin(), msgs.end(),
              [](const LocalGradientMsg &a, const LocalGradientMsg &b) {
                  return a.client_id < b.client_id;
              });
    const std::uint32_t iteration = msgs.front().iteration;
    const std::size_t p = msgs.front().gradient.size();
    std::uint64_t total = 0;
    for (const LocalGradientMsg &msg : msgs) {
        if (msg.iteration != iteration) {
            throw ProtocolError("local gradients disagree on iteration (" +
                                std::to_string(msg.iteration) + " vs " +
                                std::to_string(iteration) + ")");
        }
        if (msg.gradient.size() != p) {
            throw ProtocolError("local gradients disagree on parameter count");
        }
        total += msg.sample_count;
    }
    if (total == 0) {
        throw ProtocolError("total sample count across clients is zero");
    }
    GradientVector global(p, 0.0);
    for (const LocalGradientMsg &msg : msgs) {
        const double weight =
            static_cast<double>(msg.sample_count) / static_cast<double>(total);
        for (std::size_t k = 0; k < p; ++k) {
            global[k] += weight * msg.gradient[k];
        }
    }
    return global;
}

/**
 * @brief One optimizer update. SGD: theta -= eta * g. Adam: the standard
 * bias-corrected update with beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
 * A non-finite gradient raises ProtocolError and leaves the state unchanged.
 */
inline void optimizer_step(ServerState &server, const GradientVector &gradient) {
    const std::size_t p = server.theta.size();
    if (gradient.size() != p) {
        throw ProtocolError("gradient length " + std::to_string(gradient.size()) +
                            " does not match parameter count " + std::to_string(p));
    }
    for (double g : gradient) {
        if (!std::isfinite(g)) {
            throw ProtocolError("non-finite component in the global gradient");
        }
    }

    if (server.optimizer == OptimizerKind::Sgd) {
        for (std::size_t k = 0; k < p; ++k) {
            server.theta[k] -= server.eta * gradient[k];
        }
        return;
    }

    AdamState &adam = server.adam;
    if (adam.first_moment.size() != p) {
        adam.first_moment.assign(p, 0.0);
        adam.second_moment.assign(p, 0.0);
        adam.step = 0;
    }
    adam.step += 1;
    const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
    const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));
    for (std::size_t k = 0; k < p; ++k) {
        adam.first_moment[k] =
            kAdamBeta1 * adam.first_moment[k] + (1.0 - kAdamBeta1) * gradient[k];
        adam.second_moment[k] =
            kAdamBeta2 * adam.second_moment[k] + (1.0 - kAdamBeta2) * gradient[k] * gradient[k];
        const double corrected_m = adam.first_moment[k] / bias1;
        const double corrected_v = adam.second_moment[k] / bias2;
        server.theta[k] -= server.eta * corrected_m / (std::sqrt(corrected_v) + kAdamEpsilon);
    }
}

// --- Transport ----------------------------------------------------------------

/**
 * @brief Message path between the server and its clients. publish_shadows
 * broadcasts one shadow set per round; upload_gradient carries one client's
 * reply. Implementations must deliver reliably and in order.
 */
class Transport {
  public:
    virtual ~Transport() = default;

    /// Returns the shadow set as the clients observe it.
    virtual const ShadowSet &publish_shadows(const ShadowSet &set, std::uint16_t mom_chunks) = 0;

    /// Returns the local gradient as the server observes it.
    virtual LocalGradientMsg upload_gradient(const LocalGradientMsg &msg) = 0;
};

/// Zero-copy in-process channel: messages pass through untouched.
class InProcessTransport final : public Transport {
  public:
    const ShadowSet &publish_shadows(const ShadowSet &set, std::uint16_t) override {
        return set;
    }
    LocalGradientMsg upload_gradient(const LocalGradientMsg &msg) override { return msg; }
};

// LocalGradient wire format:
// magic "CCQF" | version u8 = 1 | msg_type u8 = 2 | iteration u32 |
// client_id u16 | m_i u32 | p u32 | p * f64 gradient | f64 local_loss.

inline std::vector<std::uint8_t> encode_local_gradient(const LocalGradientMsg &msg) {
    wire::ByteWriter writer;
    wire::write_header(writer, wire::MsgType::LocalGradient);
    writer.u32(msg.iteration);
    writer.u16(msg.client_id);
    writer.u32(msg.sample_count);
    writer.u32(static_cast<std::uint32_t>(msg.gradient.size()));
    for (double g : msg.gradient) {
        writer.f64(g);
    }
    writer.f64(msg.local_loss);
    return writer.take();
}

inline LocalGradientMsg decode_local_gradient(std::span<const std::uint8_t> data) {
    wire::ByteReader reader(data);
    reader.expect_header(wire::MsgType::LocalGradient);
    LocalGradientMsg msg;
    msg.iteration = reader.u32();
    msg.client_id = reader.u16();
    msg.sample_count = reader.u32();
    const std::uint32_t p = reader.u32();
    msg.gradient.resize(p);
    for (std::uint32_t k = 0; k < p; ++k) {
        msg.gradient[k] = reader.f64();
    }
    msg.local_loss = reader.f64();
    reader.expect_end();
    return msg;
}

/**
 * @brief A reliable ordered byte pipe speaking the wire formats: every
 * message is encoded into the stream on one side and length-framed and
 * decoded on the other, exactly as a remote deployment would see it.
 */
class FramedTransport final : public Transport {
  public:
    const ShadowSet &publish_shadows(const ShadowSet &set, std::uint16_t mom_chunks) override {
        downlink_ = encode_shadow_set(set, mom_chunks);
        received_ = decode_shadow_set(frame(downlink_, framed_shadow_size(downlink_)));
        return received_.set;
    }

    LocalGradientMsg upload_gradient(const LocalGradientMsg &msg) override {
        uplink_ = encode_local_gradient(msg);
        return decode_local_gradient(frame(uplink_, uplink_.size()));
    }

  private:
    static std::size_t framed_shadow_size(const std::vector<std::uint8_t> &stream) {
        // Peek the fixed header to learn the payload length.
        if (stream.size() < kShadowSetHeaderSize) {
            throw ProtocolError("message truncated at offset " +
                                std::to_string(stream.size()));
        }
        wire::ByteReader reader(stream);
        reader.expect_header(wire::MsgType::ShadowSet);
        reader.u32(); // iteration
        const std::uint16_t n_qubits = reader.u16();
        const std::uint32_t p = reader.u32();
        const std::uint32_t snapshots = reader.u32();
        return shadow_set_wire_size(n_qubits, p, snapshots);
    }

    std::span<const std::uint8_t> frame(const std::vector<std::uint8_t> &stream,
                                        std::size_t size) const {
        if (stream.size() < size) {
            throw ProtocolError("message truncated at offset " +
                                std::to_string(stream.size()));
        }
        return std::span<const std::uint8_t>(stream.data(), size);
    }

    std::vector<std::uint8_t> downlink_;
    std::vector<std::uint8_t> uplink_;
    ShadowSetMsg received_;
};

// --- Rounds -------------------------------------------------------------------

struct RoundMetrics {
    std::vector<double> client_losses;
    double grad_norm = 0.0;
};

struct RoundOptions {
    TrainMode mode = TrainMode::Shadow;
    MomConfig shadow; // M and M2, used in shadow mode
};

/**
 * @brief Execute exactly one training iteration: publish, compute local
 * gradients, aggregate, update. The update is atomic: on any failure the
 * server's (theta, optimizer state, iteration) are left untouched.
 */
inline RoundMetrics run_round(ServerState &server, const std::vector<ClientState> &clients,
                              const RoundOptions &options, const RngStream &rng,
                              Transport &transport) {
    if (clients.empty()) {
        throw UsageError("run_round needs at least one client");
    }

    std::vector<LocalGradientMsg> msgs;
    msgs.reserve(clients.size());

    if (options.mode == TrainMode::Shadow) {
        options.shadow.validate();
        // Fresh randomness per round: substream keyed by the iteration.
        ShadowSet set = collect_shadow_set(server.ansatz, server.theta,
                                           options.shadow.snapshots,
                                           rng.child(server.iteration));
        set.iteration = server.iteration;
        const ShadowSet &published = transport.publish_shadows(set, options.shadow.chunks);
        for (const ClientState &client : clients) {
            msgs.push_back(
                transport.upload_gradient(client_local_gradient(client, published)));
        }
    } else {
        ExactExpectationSource source(server.ansatz, server.theta);
        for (const ClientState &client : clients) {
            msgs.push_back(transport.upload_gradient(
                client_local_gradient(client, source, server.iteration)));
        }
    }

    RoundMetrics metrics;
    metrics.client_losses.reserve(msgs.size());
    for (const LocalGradientMsg &msg : msgs) {
        metrics.client_losses.push_back(msg.local_loss);
    }
    const GradientVector global = aggregate(std::move(msgs));
    metrics.grad_norm = std::sqrt(
        std::inner_product(global.begin(), global.end(), global.begin(), 0.0));

    // Commit point: mutate a copy, then swap in.
    ServerState next = server;
    optimizer_step(next, global);
    next.iteration += 1;
    server = std::move(next);
    return metrics;
}

// --- Experiment pipeline --------------------------------------------------------

/// Everything train() derives from the config before the first round.
struct PreparedExperiment {
    Ansatz ansatz;
    std::vector<ClientState> clients;
    std::vector<EncodedSample> pooled_train; // clients concatenated, metrics view
    std::vector<EncodedSample> test_samples;
    PartitionReport partition;
};

namespace detail {

inline std::vector<EncodedSample> encode_dataset(const FeatureDataset &features,
                                                 int n_qubits) {
    std::vector<EncodedSample> out;
    out.reserve(features.count());
    for (std::size_t i = 0; i < features.count(); ++i) {
        out.push_back(EncodedSample{encode_observable(features.feature(i), n_qubits),
                                    features.labels[i]});
    }
    return out;
}

} // namespace detail

/**
 * @brief Assemble the experiment: ingest IDX data, pick label-skewed client
 * index sets, fit PCA on the pooled drawn training images, rescale features
 * to [-1, 1] (test data clipped with the training map), and encode every
 * feature vector as O(x) = sum_j x_j Z_j.
 *
 * Substreams of the config seed: 2 drives the partition, 3 the test draw.
 */
inline PreparedExperiment prepare_experiment(const ExperimentConfig &config) {
    config.validate();

    PreparedExperiment prep;
    prep.ansatz = build_hea(config.n_qubits, config.layers);

    const RawDataset train_all =
        select_binary(load_idx(config.train_images, config.train_labels), config.class_a,
                      config.class_b);
    const RawDataset test_all =
        select_binary(load_idx(config.test_images, config.test_labels), config.class_a,
                      config.class_b);

    const RngStream root(config.seed);
    RngStream partition_rng = root.child(2);
    RngStream test_rng = root.child(3);

    IndexPartition partition =
        partition_indices(train_all.labels, config.partition_spec(), partition_rng);
    prep.partition = partition.report;

    // Pooled training images in client order; PCA and the feature range are
    // fit on exactly these.
    RawDataset pooled;
    pooled.rows = train_all.rows;
    pooled.cols = train_all.cols;
    std::vector<std::size_t> client_sizes;
    for (const auto &indices : partition.clients) {
        client_sizes.push_back(indices.size());
        for (std::size_t index : indices) {
            const auto image = train_all.image(index);
            pooled.pixels.insert(pooled.pixels.end(), image.begin(), image.end());
            pooled.labels.push_back(train_all.labels[index]);
        }
    }

    const PcaModel pca = fit_pca(pooled, config.n_qubits);
    const auto [train_features, rescale_map] = rescale_features(project_dataset(pca, pooled));

    const std::size_t test_total =
        static_cast<std::size_t>(config.n_clients) * config.test_per_client;
    const std::vector<std::size_t> test_indices =
        sample_indices(test_all.count(), test_total, test_rng);
    FeatureDataset test_features;
    test_features.dim = static_cast<std::size_t>(config.n_qubits);
    for (std::size_t index : test_indices) {
        test_features.append(pca.project_pixels(test_all.image(index)),
                             test_all.labels[index]);
    }
    test_features = apply_rescale(rescale_map, test_features, true);

    prep.pooled_train = detail::encode_dataset(train_features, config.n_qubits);
    prep.test_samples = detail::encode_dataset(test_features, config.n_qubits);

    MomConfig mom{config.snapshots, config.mom_chunks};
    std::size_t cursor = 0;
    for (int i = 0; i < config.n_clients; ++i) {
        ClientState client;
        client.client_id = i;
        client.mom = mom;
        client.samples.assign(prep.pooled_train.begin() + cursor,
                              prep.pooled_train.begin() + cursor + client_sizes[i]);
        cursor += client_sizes[i];
        prep.clients.push_back(std::move(client));
    }
    return prep;
}

/// Fraction of samples whose sign(e0) matches the label (e0 > 0 <=> class 1;
/// identical to thresholding logistic(e0) at 1/2).
inline double accuracy_from_e0(std::span<const double> e0s,
                               std::span<const std::uint8_t> labels) {
    std::size_t correct = 0;
    for (std::size_t s = 0; s < e0s.size(); ++s) {
        const bool predicted_one = e0s[s] > 0.0;
        correct += (predicted_one == (labels[s] != 0)) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(e0s.size());
}

namespace detail {

/// Unshifted expectations of many samples against one state, caching each
/// distinct Pauli string once.
inline std::vector<double> exact_e0s(const Statevector &state,
                                     std::span<const EncodedSample> samples) {
    std::unordered_map<std::string, double> cache;
    std::vector<double> e0s(samples.size(), 0.0);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        double value = 0.0;
        for (const PauliTerm &term : samples[s].observable.terms) {
            const std::string key = pauli_key(term.paulis);
            auto it = cache.find(key);
            if (it == cache.end()) {
                it = cache.emplace(key, pauli_expectation(state, term.paulis)).first;
            }
            value += term.coefficient * it->second;
        }
        e0s[s] = value;
    }
    return e0s;
}

inline std::vector<double> shadow_e0s(const ClassicalShadow &shadow, const MomConfig &mom,
                                      std::span<const EncodedSample> samples) {
    std::unordered_map<std::string, std::vector<double>> cache;
    std::vector<double> e0s(samples.size(), 0.0);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        std::vector<double> combined(mom.chunks, 0.0);
        for (const PauliTerm &term : samples[s].observable.terms) {
            auto &means = cache[pauli_key(term.paulis)];
            if (means.empty()) {
                means = pauli_chunk_means(shadow, term.paulis, mom);
            }
            for (std::uint16_t c = 0; c < mom.chunks; ++c) {
                combined[c] += term.coefficient * means[c];
            }
        }
        e0s[s] = detail::median_inplace(combined);
    }
    return e0s;
}

} // namespace detail

struct TrainResult {
    TrainingHistory history;
    PartitionReport partition;
    std::vector<double> final_theta;
    int param_count = 0;
};

/**
 * @brief The full training procedure: theta ~ U[-pi, pi) from the config
 * seed, then `epochs` federated rounds. Per-epoch metrics (train loss/acc,
 * test acc) are evaluated at the freshly updated parameters, by exact
 * expectation unless metrics_mode = shadow, in which case a fresh shadow of
 * the updated state (same M, M2) is estimated instead. grad_norm is the
 * round's aggregated-gradient norm.
 */
inline TrainResult train(const ExperimentConfig &config, Transport *transport = nullptr) {
    PreparedExperiment prep = prepare_experiment(config);

    InProcessTransport in_process;
    FramedTransport framed;
    if (transport == nullptr) {
        transport = (config.transport == TransportKind::Framed)
                        ? static_cast<Transport *>(&framed)
                        : static_cast<Transport *>(&in_process);
    }

    const RngStream root(config.seed);
    RngStream theta_rng = root.child(1);
    const RngStream round_rng = root.child(4);
    const RngStream metrics_rng = root.child(5);
    const RngStream batch_rng = root.child(6);

    ServerState server;
    server.ansatz = prep.ansatz;
    server.optimizer = config.optimizer;
    server.eta = config.eta;
    server.iteration = 1;
    server.theta.resize(prep.ansatz.param_count);
    constexpr double pi = 3.14159265358979323846;
    for (double &t : server.theta) {
        t = theta_rng.uniform(-pi, pi);
    }

    RoundOptions options;
    options.mode = config.mode;
    options.shadow = MomConfig{config.snapshots, config.mom_chunks};

    std::vector<std::uint8_t> train_labels;
    train_labels.reserve(prep.pooled_train.size());
    for (const EncodedSample &sample : prep.pooled_train) {
        train_labels.push_back(sample.label);
    }
    std::vector<std::uint8_t> test_labels;
    test_labels.reserve(prep.test_samples.size());
    for (const EncodedSample &sample : prep.test_samples) {
        test_labels.push_back(sample.label);
    }

    TrainResult result;
    result.partition = prep.partition;
    result.param_count = prep.ansatz.param_count;

    for (std::uint32_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();

        std::vector<ClientState> round_clients;
        const std::vector<ClientState> *clients = &prep.clients;
        if (config.batch_size > 0) {
            // Seeded per-round subsample per client; m_i follows the batch.
            round_clients = prep.clients;
            RngStream epoch_rng = batch_rng.child(epoch);
            for (ClientState &client : round_clients) {
                const std::size_t take = std::min(config.batch_size, client.samples.size());
                RngStream client_rng = epoch_rng.child(client.client_id);
                const std::vector<std::size_t> picks =
                    sample_indices(client.samples.size(), take, client_rng);
                std::vector<EncodedSample> batch;
                batch.reserve(take);
                for (std::size_t index : picks) {
                    batch.push_back(client.samples[index]);
                }
                client.samples = std::move(batch);
            }
            clients = &round_clients;
        }

        const RoundMetrics round = run_round(server, *clients, options, round_rng, *transport);

        EpochRecord record;
        record.epoch = epoch;
        record.grad_norm = round.grad_norm;

        if (config.metrics_mode == TrainMode::Exact) {
            const Statevector state = run_ansatz(prep.ansatz, server.theta);
            const std::vector<double> train_e0 = detail::exact_e0s(state, prep.pooled_train);
            const std::vector<double> test_e0 = detail::exact_e0s(state, prep.test_samples);
            record.train_loss = predict_and_loss(train_e0, train_labels).first;
            record.train_acc = accuracy_from_e0(train_e0, train_labels);
            record.test_acc = accuracy_from_e0(test_e0, test_labels);
        } else {
            const Statevector state = run_ansatz(prep.ansatz, server.theta);
            RngStream epoch_rng = metrics_rng.child(epoch);
            const ClassicalShadow shadow =
                collect_shadow(state, config.snapshots, epoch_rng);
            const MomConfig mom{config.snapshots, config.mom_chunks};
            const std::vector<double> train_e0 =
                detail::shadow_e0s(shadow, mom, prep.pooled_train);
            const std::vector<double> test_e0 =
                detail::shadow_e0s(shadow, mom, prep.test_samples);
            record.train_loss = predict_and_loss(train_e0, train_labels).first;
            record.train_acc = accuracy_from_e0(train_e0, train_labels);
            record.test_acc = accuracy_from_e0(test_e0, test_labels);
        }

        record.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        result.history.epochs.push_back(record);
    }

    result.final_theta = server.theta;
    return result;
}

} // namespace ccqfl
