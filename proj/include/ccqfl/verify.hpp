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
 * Self-contained brute-force checks behind `ccqfl verify`. Each suite
 * recomputes its target quantity by enumeration or finite differences with
 * its own dense matrix arithmetic, independent of the estimator paths it
 * checks, and reports the worst deviation observed.
 */

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "ccqfl/federation.hpp"
#include "ccqfl/qnn.hpp"
#include "ccqfl/rng.hpp"
#include "ccqfl/shadows.hpp"
#include "ccqfl/sim.hpp"

namespace ccqfl::verify {

struct SuiteResult {
    bool passed = false;
    std::string report;
};

namespace detail {

using Cx = std::complex<double>;
using Matrix = std::vector<Cx>; // row-major, square

inline Matrix matmul(const Matrix &a, const Matrix &b, std::size_t n) {
    Matrix out(n * n, Cx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const Cx aik = a[i * n + k];
            for (std::size_t j = 0; j < n; ++j) {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    return out;
}

inline Matrix kron(const Matrix &a, std::size_t na, const Matrix &b, std::size_t nb) {
    Matrix out(na * nb * na * nb);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < na; ++j) {
            for (std::size_t k = 0; k < nb; ++k) {
                for (std::size_t l = 0; l < nb; ++l) {
                    out[(i * nb + k) * (na * nb) + (j * nb + l)] =
                        a[i * na + j] * b[k * nb + l];
                }
            }
        }
    }
    return out;
}

inline Matrix basis_rotation_2x2(Basis basis) {
    const double inv_sqrt2 = 0.70710678118654752440;
    switch (basis) {
    case Basis::X:
        return {Cx{inv_sqrt2, 0}, Cx{inv_sqrt2, 0}, Cx{inv_sqrt2, 0}, Cx{-inv_sqrt2, 0}};
    case Basis::Y:
        return {Cx{inv_sqrt2, 0}, Cx{0, -inv_sqrt2}, Cx{inv_sqrt2, 0}, Cx{0, inv_sqrt2}};
    default:
        return {Cx{1, 0}, Cx{0, 0}, Cx{0, 0}, Cx{1, 0}};
    }
}

/// 3 W^dag |b><b| W - I for one qubit.
inline Matrix snapshot_2x2(Basis basis, int outcome) {
    const Matrix w = basis_rotation_2x2(basis);
    // column `outcome` of W^dag is the measured eigenvector
    const Cx v0 = std::conj(w[outcome * 2 + 0]);
    const Cx v1 = std::conj(w[outcome * 2 + 1]);
    Matrix out(4);
    out[0] = 3.0 * v0 * std::conj(v0) - 1.0;
    out[1] = 3.0 * v0 * std::conj(v1);
    out[2] = 3.0 * v1 * std::conj(v0);
    out[3] = 3.0 * v1 * std::conj(v1) - 1.0;
    return out;
}

/// Normalized random complex vector (rotation-invariant direction).
inline std::vector<Cx> random_state(int n_qubits, RngStream &rng) {
    std::vector<Cx> psi(std::size_t{1} << n_qubits);
    double norm = 0.0;
    for (auto &a : psi) {
        a = Cx{rng.normal(), rng.normal()};
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto &a : psi) {
        a /= norm;
    }
    return psi;
}

/// Expectation of the inverted-channel snapshot over all 3^n basis choices
/// and 2^n outcomes, weighted by (1/3)^n times the Born probability.
inline Matrix enumerate_channel_average(const std::vector<Cx> &psi, int n_qubits) {
    const std::size_t dim = psi.size();
    Matrix average(dim * dim, Cx{0.0, 0.0});
    std::vector<Basis> bases(n_qubits);
    std::size_t basis_combos = 1;
    for (int q = 0; q < n_qubits; ++q) {
        basis_combos *= 3;
    }
    const double basis_weight = 1.0 / static_cast<double>(basis_combos);

    for (std::size_t combo = 0; combo < basis_combos; ++combo) {
        std::size_t code = combo;
        for (int q = 0; q < n_qubits; ++q) {
            bases[q] = static_cast<Basis>(code % 3);
            code /= 3;
        }
        // W = w_{n-1} kron ... kron w_0 (qubit 0 least significant)
        Matrix w = basis_rotation_2x2(bases[n_qubits - 1]);
        std::size_t wdim = 2;
        for (int q = n_qubits - 2; q >= 0; --q) {
            w = kron(w, wdim, basis_rotation_2x2(bases[q]), 2);
            wdim *= 2;
        }
        // rotated = W psi
        std::vector<Cx> rotated(dim, Cx{0.0, 0.0});
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                rotated[i] += w[i * dim + j] * psi[j];
            }
        }
        for (std::size_t outcome = 0; outcome < dim; ++outcome) {
            const double prob = std::norm(rotated[outcome]);
            if (prob == 0.0) {
                continue;
            }
            Matrix snapshot =
                snapshot_2x2(bases[n_qubits - 1], static_cast<int>((outcome >> (n_qubits - 1)) & 1));
            std::size_t sdim = 2;
            for (int q = n_qubits - 2; q >= 0; --q) {
                snapshot = kron(snapshot, sdim,
                                snapshot_2x2(bases[q], static_cast<int>((outcome >> q) & 1)), 2);
                sdim *= 2;
            }
            const double weight = basis_weight * prob;
            for (std::size_t i = 0; i < dim * dim; ++i) {
                average[i] += weight * snapshot[i];
            }
        }
    }
    return average;
}

} // namespace detail

/**
 * @brief Inverted-channel unbiasedness by full enumeration: for seeded
 * random pure states with n in {1,2,3}, the enumerated snapshot average must
 * reproduce |psi><psi| entrywise within 1e-10.
 */
inline SuiteResult channel_suite(int states = 20, std::uint64_t seed = 11) {
    const RngStream root(seed);
    double worst = 0.0;
    for (int i = 0; i < states; ++i) {
        const int n_qubits = 1 + i % 3;
        RngStream rng = root.child(i);
        const std::vector<detail::Cx> psi = detail::random_state(n_qubits, rng);
        const detail::Matrix average = detail::enumerate_channel_average(psi, n_qubits);
        const std::size_t dim = psi.size();
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                const detail::Cx expected = psi[r] * std::conj(psi[c]);
                worst = std::max(worst, std::abs(average[r * dim + c] - expected));
            }
        }
    }
    SuiteResult result;
    result.passed = worst <= 1e-10;
    std::ostringstream report;
    report << "channel: " << states << " states (n in {1,2,3}), max entrywise deviation "
           << worst << " (tolerance 1e-10)";
    result.report = report.str();
    return result;
}

/**
 * @brief Parameter-shift loss gradients vs central finite differences
 * (h = 1e-4) on random 8-qubit, 5-layer instances.
 */
inline SuiteResult gradient_suite(int instances = 5, std::uint64_t seed = 23) {
    const Ansatz ansatz = build_hea(8, 5);
    const RngStream root(seed);
    constexpr double pi = 3.14159265358979323846;
    constexpr double h = 1e-4;
    double worst = 0.0;

    for (int inst = 0; inst < instances; ++inst) {
        RngStream rng = root.child(inst);
        std::vector<double> theta(ansatz.param_count);
        for (double &t : theta) {
            t = rng.uniform(-pi, pi);
        }
        std::vector<EncodedSample> samples;
        std::vector<std::uint8_t> labels;
        for (int s = 0; s < 4; ++s) {
            std::vector<double> x(8);
            for (double &v : x) {
                v = rng.uniform(-1.0, 1.0);
            }
            const auto label = static_cast<std::uint8_t>(rng.uniform_int(2));
            samples.push_back(EncodedSample{encode_observable(x, 8), label});
            labels.push_back(label);
        }

        auto loss_at = [&](const std::vector<double> &params) {
            const Statevector state = run_ansatz(ansatz, params);
            std::vector<double> e0s(samples.size());
            for (std::size_t s = 0; s < samples.size(); ++s) {
                e0s[s] = exact_expectation(state, samples[s].observable);
            }
            return predict_and_loss(e0s, labels).first;
        };

        ExactExpectationSource source(ansatz, theta);
        std::vector<ExpectationBundle> bundles;
        for (const EncodedSample &sample : samples) {
            bundles.push_back(source.bundle(sample.observable));
        }
        const std::vector<double> analytic = loss_gradient(bundles, labels);

        std::vector<double> probe = theta;
        for (int k = 0; k < ansatz.param_count; ++k) {
            probe[k] = theta[k] + h;
            const double up = loss_at(probe);
            probe[k] = theta[k] - h;
            const double down = loss_at(probe);
            probe[k] = theta[k];
            worst = std::max(worst, std::abs(analytic[k] - (up - down) / (2.0 * h)));
        }
    }
    SuiteResult result;
    result.passed = worst <= 1e-5;
    std::ostringstream report;
    report << "gradient: " << instances << " instances (p = 80), max |shift - fd| = "
           << worst << " (tolerance 1e-5)";
    result.report = report.str();
    return result;
}

/**
 * @brief Aggregation-pooling identity: weighted client gradients of random
 * partitions equal the pooled-dataset gradient within 1e-10.
 */
inline SuiteResult aggregation_suite(int partitions = 10, std::uint64_t seed = 31) {
    const Ansatz ansatz = build_hea(8, 2);
    const RngStream root(seed);
    constexpr double pi = 3.14159265358979323846;
    constexpr int total_samples = 60;
    constexpr int n_clients = 3;
    double worst = 0.0;

    RngStream data_rng = root.child(0);
    std::vector<double> theta(ansatz.param_count);
    for (double &t : theta) {
        t = data_rng.uniform(-pi, pi);
    }
    std::vector<EncodedSample> pooled;
    for (int s = 0; s < total_samples; ++s) {
        std::vector<double> x(8);
        for (double &v : x) {
            v = data_rng.uniform(-1.0, 1.0);
        }
        pooled.push_back(
            EncodedSample{encode_observable(x, 8),
                          static_cast<std::uint8_t>(data_rng.uniform_int(2))});
    }

    ExactExpectationSource source(ansatz, theta);
    ClientState pooled_client;
    pooled_client.client_id = 0;
    pooled_client.samples = pooled;
    const GradientVector pooled_grad =
        client_local_gradient(pooled_client, source, 1).gradient;

    for (int trial = 0; trial < partitions; ++trial) {
        RngStream rng = root.child(100 + trial);
        // random assignment, every client nonempty
        std::vector<int> owner(total_samples);
        for (int s = 0; s < total_samples; ++s) {
            owner[s] = (s < n_clients) ? s : static_cast<int>(rng.uniform_int(n_clients));
        }
        std::vector<LocalGradientMsg> msgs;
        for (int c = 0; c < n_clients; ++c) {
            ClientState client;
            client.client_id = c;
            for (int s = 0; s < total_samples; ++s) {
                if (owner[s] == c) {
                    client.samples.push_back(pooled[s]);
                }
            }
            msgs.push_back(client_local_gradient(client, source, 1));
        }
        const GradientVector aggregated = aggregate(std::move(msgs));
        for (std::size_t k = 0; k < aggregated.size(); ++k) {
            worst = std::max(worst, std::abs(aggregated[k] - pooled_grad[k]));
        }
    }
    SuiteResult result;
    result.passed = worst <= 1e-10;
    std::ostringstream report;
    report << "aggregation: " << partitions
           << " random partitions of 60 samples into 3 clients, max |delta| = " << worst
           << " (tolerance 1e-10)";
    result.report = report.str();
    return result;
}

/**
 * @brief Estimator concentration: the median |<Z_0>| error over 50 seeds
 * must shrink by a factor in [1.2, 1.7] when M doubles from 2000 to 4000
 * (consistent with M^{-1/2} scaling). Each seed's M = 4000 shadow extends
 * its M = 2000 shadow, which sharpens the ratio without biasing it.
 */
inline SuiteResult concentration_suite(int seeds = 50, std::uint64_t seed = 25) {
    const Ansatz ansatz = build_hea(8, 5);
    const RngStream root(seed);
    constexpr double pi = 3.14159265358979323846;
    RngStream theta_rng = root.child(0);
    std::vector<double> theta(ansatz.param_count);
    for (double &t : theta) {
        t = theta_rng.uniform(-pi, pi);
    }
    const Statevector state = run_ansatz(ansatz, theta);

    Observable z0;
    z0.n_qubits = 8;
    z0.add_term(1.0, single_qubit_pauli(8, 0, Pauli::Z));
    const double exact = exact_expectation(state, z0);

    auto median_error = [&](std::uint32_t snapshots) {
        std::vector<double> errors(seeds);
        for (int s = 0; s < seeds; ++s) {
            RngStream rng = root.child(1000 + s);
            const ClassicalShadow shadow = collect_shadow(state, snapshots, rng);
            const double estimate =
                estimate_observable(shadow, z0, MomConfig{snapshots, 10});
            errors[s] = std::abs(estimate - exact);
        }
        return ccqfl::detail::median_inplace(errors);
    };

    const double error_small = median_error(2000);
    const double error_large = median_error(4000);
    const double ratio = error_small / error_large;

    SuiteResult result;
    result.passed = ratio >= 1.2 && ratio <= 1.7;
    std::ostringstream report;
    report << "concentration: median |<Z_0>| error " << error_small << " at M = 2000, "
           << error_large << " at M = 4000, ratio " << ratio << " (expected in [1.2, 1.7])";
    result.report = report.str();
    return result;
}

inline SuiteResult run_suite(const std::string &name) {
    if (name == "channel") {
        return channel_suite();
    }
    if (name == "gradient") {
        return gradient_suite();
    }
    if (name == "aggregation") {
        return aggregation_suite();
    }
    if (name == "concentration") {
        return concentration_suite();
    }
    throw UsageError("unknown verify suite '" + name +
                     "' (expected channel|gradient|aggregation|concentration)");
}

} // namespace ccqfl::verify
