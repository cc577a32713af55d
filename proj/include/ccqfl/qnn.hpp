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
 * The data-encoding-observable QNN: classical data enters the measurement
 * operator O(x) = sum_j x_j Z_j rather than the quantum state. Expectation
 * bundles {E, E_k+-} are evaluated either exactly (statevectors) or from a
 * published classical shadow set; parameter-shift plus the logistic
 * cross-entropy chain rule turns them into loss gradients.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ccqfl/errors.hpp"
#include "ccqfl/observable.hpp"
#include "ccqfl/shadows.hpp"
#include "ccqfl/sim.hpp"

namespace ccqfl {

/**
 * @brief Encode a feature vector as O(x) = sum_j x_j Z_j. Requires
 * d = n_qubits; zero-coefficient terms are dropped (harmless by linearity).
 */
inline Observable encode_observable(std::span<const double> x, int n_qubits) {
    if (static_cast<int>(x.size()) != n_qubits) {
        throw ConfigError("feature dimension " + std::to_string(x.size()) +
                          " must equal qubit count " + std::to_string(n_qubits));
    }
    Observable observable;
    observable.n_qubits = n_qubits;
    for (int j = 0; j < n_qubits; ++j) {
        if (x[j] != 0.0) {
            observable.add_term(x[j], single_qubit_pauli(n_qubits, j, Pauli::Z));
        }
    }
    return observable;
}

/// A data-encoding observable paired with its binary target.
struct EncodedSample {
    Observable observable;
    std::uint8_t label = 0; // 0 or 1
};

/**
 * @brief The 2p+1 expectation values of one observable: the unshifted value
 * and, per parameter, the pair at theta_k +- pi/2.
 */
struct ExpectationBundle {
    double e0 = 0.0;
    std::vector<std::pair<double, double>> shifted; // (plus, minus) per parameter
};

/**
 * @brief Anything that can evaluate expectation bundles against a fixed
 * parameterized state family: exact statevectors on the server, or a
 * received shadow set on a client.
 */
class ExpectationSource {
  public:
    virtual ~ExpectationSource() = default;

    virtual int n_qubits() const = 0;
    virtual std::uint32_t param_count() const = 0;

    /// All 2p+1 expectations of one observable.
    virtual ExpectationBundle bundle(const Observable &observable) = 0;

    /// The unshifted expectation only (cheaper when no gradient is needed).
    virtual double expectation(const Observable &observable) = 0;
};

/// Spec-facing name for ExpectationSource::bundle.
inline ExpectationBundle expectation_bundle(ExpectationSource &provider,
                                            const Observable &observable) {
    return provider.bundle(observable);
}

/**
 * @brief Exact bundles from 2p+1 dense statevector simulations, one per
 * shift. Per-Pauli-string expectations are cached across observables, so a
 * batch of samples sharing the same strings (as the Z_j encoding does) pays
 * for each string once.
 */
class ExactExpectationSource final : public ExpectationSource {
  public:
    ExactExpectationSource(const Ansatz &ansatz, std::span<const double> theta)
        : n_qubits_(ansatz.n_qubits), param_count_(ansatz.param_count) {
        if (static_cast<int>(theta.size()) != ansatz.param_count) {
            throw UsageError("theta length does not match ansatz parameter count");
        }
        const std::size_t total = ShadowSet::entry_count_for(param_count_);
        states_.reserve(total);
        std::vector<double> shifted(theta.begin(), theta.end());
        states_.push_back(run_ansatz(ansatz, shifted));
        for (std::uint32_t k = 0; k < param_count_; ++k) {
            shifted[k] = theta[k] + kHalfPi;
            states_.push_back(run_ansatz(ansatz, shifted));
            shifted[k] = theta[k] - kHalfPi;
            states_.push_back(run_ansatz(ansatz, shifted));
            shifted[k] = theta[k];
        }
    }

    int n_qubits() const override { return n_qubits_; }
    std::uint32_t param_count() const override { return param_count_; }

    ExpectationBundle bundle(const Observable &observable) override {
        check(observable);
        ExpectationBundle out;
        const std::size_t total = states_.size();
        std::vector<double> values(total, 0.0);
        for (const PauliTerm &term : observable.terms) {
            const std::vector<double> &per_entry = string_values(term.paulis);
            for (std::size_t e = 0; e < total; ++e) {
                values[e] += term.coefficient * per_entry[e];
            }
        }
        out.e0 = values[0];
        out.shifted.reserve(param_count_);
        for (std::uint32_t k = 0; k < param_count_; ++k) {
            out.shifted.emplace_back(values[ShadowSet::shift_entry(k, true)],
                                     values[ShadowSet::shift_entry(k, false)]);
        }
        return out;
    }

    double expectation(const Observable &observable) override {
        check(observable);
        return exact_expectation(states_[0], observable);
    }

  private:
    void check(const Observable &observable) const {
        if (observable.n_qubits != n_qubits_) {
            throw UsageError("observable qubit count does not match the source");
        }
    }

    const std::vector<double> &string_values(const PauliString &paulis) {
        const std::string key = pauli_key(paulis);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            std::vector<double> per_entry(states_.size());
            for (std::size_t e = 0; e < states_.size(); ++e) {
                per_entry[e] = pauli_expectation(states_[e], paulis);
            }
            it = cache_.emplace(key, std::move(per_entry)).first;
        }
        return it->second;
    }

    int n_qubits_;
    std::uint32_t param_count_;
    std::vector<Statevector> states_;
    std::unordered_map<std::string, std::vector<double>> cache_;
};

/**
 * @brief Bundles estimated from a published shadow set by median of means.
 * Per-Pauli-string chunk means are cached per entry; an observable's
 * estimate combines them with its coefficients and takes the median, which
 * is exactly estimate_observable's reduction. Deterministic given the set.
 */
class ShadowExpectationSource final : public ExpectationSource {
  public:
    ShadowExpectationSource(const ShadowSet &set, const MomConfig &mom)
        : set_(set), mom_(mom) {
        mom_.validate();
        if (set_.entries.size() != ShadowSet::entry_count_for(set_.param_count)) {
            throw ProtocolError("shadow set does not hold 2p+1 entries");
        }
        if (set_.snapshots_per_entry() != mom_.snapshots) {
            throw ProtocolError("median-of-means M = " + std::to_string(mom_.snapshots) +
                                " does not match shadow size " +
                                std::to_string(set_.snapshots_per_entry()));
        }
    }

    int n_qubits() const override { return set_.n_qubits(); }
    std::uint32_t param_count() const override { return set_.param_count; }

    ExpectationBundle bundle(const Observable &observable) override {
        check(observable);
        const std::size_t total = set_.entries.size();
        std::vector<double> values(total);
        for (std::size_t e = 0; e < total; ++e) {
            values[e] = entry_estimate(e, observable);
        }
        ExpectationBundle out;
        out.e0 = values[0];
        out.shifted.reserve(set_.param_count);
        for (std::uint32_t k = 0; k < set_.param_count; ++k) {
            out.shifted.emplace_back(values[ShadowSet::shift_entry(k, true)],
                                     values[ShadowSet::shift_entry(k, false)]);
        }
        return out;
    }

    double expectation(const Observable &observable) override {
        check(observable);
        return entry_estimate(0, observable);
    }

  private:
    void check(const Observable &observable) const {
        if (observable.n_qubits != set_.n_qubits()) {
            throw UsageError("observable qubit count does not match the shadow set");
        }
    }

    double entry_estimate(std::size_t entry, const Observable &observable) {
        std::vector<double> combined(mom_.chunks, 0.0);
        for (const PauliTerm &term : observable.terms) {
            const std::vector<double> &means = chunk_means(entry, term.paulis);
            for (std::uint16_t c = 0; c < mom_.chunks; ++c) {
                combined[c] += term.coefficient * means[c];
            }
        }
        return detail::median_inplace(combined);
    }

    const std::vector<double> &chunk_means(std::size_t entry, const PauliString &paulis) {
        const std::string key = pauli_key(paulis);
        auto &per_entry = cache_[key];
        if (per_entry.empty()) {
            per_entry.resize(set_.entries.size());
        }
        std::vector<double> &means = per_entry[entry];
        if (means.empty()) {
            means = pauli_chunk_means(set_.entries[entry], paulis, mom_);
        }
        return means;
    }

    const ShadowSet &set_;
    MomConfig mom_;
    std::unordered_map<std::string, std::vector<std::vector<double>>> cache_;
};

/// Parameter-shift derivative per component: (E_k+ - E_k-) / 2.
inline std::vector<double> expectation_gradient(const ExpectationBundle &bundle) {
    std::vector<double> grad(bundle.shifted.size());
    for (std::size_t k = 0; k < bundle.shifted.size(); ++k) {
        grad[k] = 0.5 * (bundle.shifted[k].first - bundle.shifted[k].second);
    }
    return grad;
}

inline constexpr double kProbClamp = 1e-12;

/// logistic(e) = 1 / (1 + exp(-e)).
inline double logistic(double e) { return 1.0 / (1.0 + std::exp(-e)); }

/**
 * @brief Mean binary cross-entropy of logistic(e0) against the labels
 * (natural log; probabilities clamped to [1e-12, 1-1e-12] inside the logs).
 * Returns the loss and the per-sample probabilities.
 */
inline std::pair<double, std::vector<double>>
predict_and_loss(std::span<const double> e0s, std::span<const std::uint8_t> labels) {
    if (e0s.size() != labels.size()) {
        throw UsageError("expectation and label counts differ");
    }
    if (e0s.empty()) {
        throw UsageError("predict_and_loss needs at least one sample");
    }
    std::vector<double> probs(e0s.size());
    double loss = 0.0;
    for (std::size_t s = 0; s < e0s.size(); ++s) {
        const double p = logistic(e0s[s]);
        probs[s] = p;
        const double clamped = std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
        loss -= labels[s] ? std::log(clamped) : std::log(1.0 - clamped);
    }
    loss /= static_cast<double>(e0s.size());
    return {loss, std::move(probs)};
}

inline std::pair<double, std::vector<double>>
predict_and_loss(std::span<const ExpectationBundle> bundles,
                 std::span<const std::uint8_t> labels) {
    std::vector<double> e0s(bundles.size());
    for (std::size_t s = 0; s < bundles.size(); ++s) {
        e0s[s] = bundles[s].e0;
    }
    return predict_and_loss(e0s, labels);
}

/**
 * @brief Chain-rule loss gradient for logistic + cross-entropy:
 * component k = (1/S) * sum_s (p_s - y_s) * dE_s/dtheta_k, with dE from the
 * parameter shift rule.
 */
inline std::vector<double> loss_gradient(std::span<const ExpectationBundle> bundles,
                                         std::span<const std::uint8_t> labels) {
    if (bundles.size() != labels.size()) {
        throw UsageError("bundle and label counts differ");
    }
    if (bundles.empty()) {
        throw UsageError("loss_gradient needs at least one sample");
    }
    const std::size_t p = bundles.front().shifted.size();
    std::vector<double> grad(p, 0.0);
    for (std::size_t s = 0; s < bundles.size(); ++s) {
        if (bundles[s].shifted.size() != p) {
            throw UsageError("bundles disagree on parameter count");
        }
        const double residual = logistic(bundles[s].e0) - static_cast<double>(labels[s]);
        for (std::size_t k = 0; k < p; ++k) {
            grad[k] += residual * 0.5 *
                       (bundles[s].shifted[k].first - bundles[s].shifted[k].second);
        }
    }
    for (double &g : grad) {
        g /= static_cast<double>(bundles.size());
    }
    return grad;
}

} // namespace ccqfl
