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
 * Classical shadows from random Pauli measurements: collection, the
 * factorized inverted channel, and median-of-means expectation estimation.
 *
 * A snapshot stores only (basis, outcome) per qubit. For random Pauli
 * measurements the inverted channel factorizes per qubit as
 * 3 W^dag |b><b| W - I, so the estimate of a Pauli string is a product of
 * per-qubit factors from snapshot_pauli_factor and never touches a dense
 * 2^n matrix.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ccqfl/errors.hpp"
#include "ccqfl/observable.hpp"
#include "ccqfl/rng.hpp"
#include "ccqfl/sim.hpp"
#include "ccqfl/wire.hpp"

namespace ccqfl {

/**
 * @brief Median-of-means layout: M snapshots split in order into `chunks`
 * (M2) chunks of M / M2 each. M2 must divide M; leftovers are never
 * silently dropped.
 */
struct MomConfig {
    std::uint32_t snapshots = 1000; // M
    std::uint16_t chunks = 10;      // M2

    void validate() const {
        if (snapshots < 1) {
            throw ConfigError("snapshot count M must be >= 1");
        }
        if (chunks < 1) {
            throw ConfigError("chunk count M2 must be >= 1");
        }
        if (snapshots % chunks != 0) {
            throw ConfigError("chunk count M2 = " + std::to_string(chunks) +
                              " does not divide M = " + std::to_string(snapshots));
        }
    }

    std::uint32_t chunk_size() const { return snapshots / chunks; } // M1
};

/// One randomized measurement record: a basis and an outcome bit per qubit.
struct Snapshot {
    std::vector<Basis> bases;
    std::vector<std::uint8_t> outcomes;
};

/// Packed cell: 2 * basis + outcome, the wire encoding (legal values 0..5).
inline std::uint8_t pack_cell(Basis basis, std::uint8_t outcome) {
    return static_cast<std::uint8_t>(2 * static_cast<std::uint8_t>(basis) + (outcome & 1));
}

/**
 * @brief M snapshots of one state, stored packed (one byte per qubit per
 * snapshot, in collection order). The byte layout doubles as the wire
 * payload.
 */
class ClassicalShadow {
  public:
    ClassicalShadow() = default;
    explicit ClassicalShadow(int n_qubits) : n_qubits_(n_qubits) {}

    int n_qubits() const { return n_qubits_; }
    std::size_t size() const {
        return n_qubits_ == 0 ? 0 : cells_.size() / static_cast<std::size_t>(n_qubits_);
    }

    void append(std::span<const Basis> bases, std::span<const std::uint8_t> outcomes) {
        if (bases.size() != static_cast<std::size_t>(n_qubits_) ||
            outcomes.size() != static_cast<std::size_t>(n_qubits_)) {
            throw UsageError("snapshot length does not match shadow qubit count");
        }
        for (std::size_t q = 0; q < bases.size(); ++q) {
            cells_.push_back(pack_cell(bases[q], outcomes[q]));
        }
    }

    Basis basis(std::size_t snapshot, int qubit) const {
        return static_cast<Basis>(cell(snapshot, qubit) >> 1);
    }
    std::uint8_t outcome(std::size_t snapshot, int qubit) const {
        return cell(snapshot, qubit) & 1;
    }

    Snapshot snapshot(std::size_t index) const {
        Snapshot snap;
        snap.bases.reserve(n_qubits_);
        snap.outcomes.reserve(n_qubits_);
        for (int q = 0; q < n_qubits_; ++q) {
            snap.bases.push_back(basis(index, q));
            snap.outcomes.push_back(outcome(index, q));
        }
        return snap;
    }

    std::span<const std::uint8_t> bytes() const { return cells_; }

    /// Rebuild from packed payload bytes, validating every cell.
    static ClassicalShadow from_bytes(int n_qubits, std::span<const std::uint8_t> bytes) {
        if (n_qubits < 1 || bytes.size() % static_cast<std::size_t>(n_qubits) != 0) {
            throw ProtocolError("shadow payload length is not a multiple of the qubit count");
        }
        ClassicalShadow shadow(n_qubits);
        shadow.cells_.assign(bytes.begin(), bytes.end());
        for (std::size_t i = 0; i < shadow.cells_.size(); ++i) {
            if (shadow.cells_[i] > 5) {
                throw ProtocolError("illegal snapshot cell value " +
                                    std::to_string(shadow.cells_[i]) + " at payload byte " +
                                    std::to_string(i));
            }
        }
        return shadow;
    }

    bool operator==(const ClassicalShadow &other) const = default;

  private:
    std::uint8_t cell(std::size_t snapshot, int qubit) const {
        return cells_[snapshot * static_cast<std::size_t>(n_qubits_) +
                      static_cast<std::size_t>(qubit)];
    }

    int n_qubits_ = 0;
    std::vector<std::uint8_t> cells_;
};

/**
 * @brief Per-qubit trace Tr[P (3 W^dag|b><b|W - I)] for the factorized
 * inverted channel: 1 for P = I, 3 * (-1)^outcome when P matches the
 * measured basis, 0 otherwise.
 */
inline double snapshot_pauli_factor(Basis basis, std::uint8_t outcome, Pauli pauli) {
    if (pauli == Pauli::I) {
        return 1.0;
    }
    if (pauli != basis_pauli(basis)) {
        return 0.0;
    }
    return (outcome & 1) ? -3.0 : 3.0;
}

/// Product of per-qubit factors; lies in {0, +-3^b} for a b-local string.
inline double snapshot_estimate(const Snapshot &snapshot, const PauliString &paulis) {
    if (paulis.size() != snapshot.bases.size() || paulis.size() != snapshot.outcomes.size()) {
        throw UsageError("pauli string length does not match snapshot length");
    }
    double value = 1.0;
    for (std::size_t q = 0; q < paulis.size(); ++q) {
        value *= snapshot_pauli_factor(snapshot.bases[q], snapshot.outcomes[q], paulis[q]);
        if (value == 0.0) {
            return 0.0;
        }
    }
    return value;
}

/// Same estimate evaluated against a packed shadow without materializing
/// a Snapshot.
inline double snapshot_estimate(const ClassicalShadow &shadow, std::size_t index,
                                const PauliString &paulis) {
    if (paulis.size() != static_cast<std::size_t>(shadow.n_qubits())) {
        throw UsageError("pauli string length does not match shadow qubit count");
    }
    double value = 1.0;
    for (std::size_t q = 0; q < paulis.size(); ++q) {
        const Pauli p = paulis[q];
        if (p == Pauli::I) {
            continue;
        }
        const Basis basis = shadow.basis(index, static_cast<int>(q));
        if (basis_pauli(basis) != p) {
            return 0.0;
        }
        value *= shadow.outcome(index, static_cast<int>(q)) ? -3.0 : 3.0;
    }
    return value;
}

namespace detail {

inline double median_inplace(std::vector<double> &values) {
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    if (n % 2 == 1) {
        return values[mid];
    }
    // even count: mean of the two central values
    const double upper = values[mid];
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

} // namespace detail

/**
 * @brief Split `values` in order into `chunks` equal chunks, average within
 * each, and return the median across chunks (even counts: mean of the two
 * central values). With chunks = 1 this is the plain empirical mean.
 */
inline double median_of_means(std::span<const double> values, std::uint16_t chunks) {
    MomConfig mom{static_cast<std::uint32_t>(values.size()), chunks};
    mom.validate();
    const std::uint32_t chunk_size = mom.chunk_size();
    std::vector<double> means(chunks);
    for (std::uint16_t c = 0; c < chunks; ++c) {
        double sum = 0.0;
        for (std::uint32_t j = 0; j < chunk_size; ++j) {
            sum += values[static_cast<std::size_t>(c) * chunk_size + j];
        }
        means[c] = sum / chunk_size;
    }
    return detail::median_inplace(means);
}

/// Chunk means of the single-string estimator over a shadow's snapshots.
inline std::vector<double> pauli_chunk_means(const ClassicalShadow &shadow,
                                             const PauliString &paulis,
                                             const MomConfig &mom) {
    mom.validate();
    if (shadow.size() != mom.snapshots) {
        throw ConfigError("median-of-means M = " + std::to_string(mom.snapshots) +
                          " does not match shadow size " + std::to_string(shadow.size()));
    }
    const std::uint32_t chunk_size = mom.chunk_size();
    std::vector<double> means(mom.chunks, 0.0);
    std::size_t index = 0;
    for (std::uint16_t c = 0; c < mom.chunks; ++c) {
        double sum = 0.0;
        for (std::uint32_t j = 0; j < chunk_size; ++j, ++index) {
            sum += snapshot_estimate(shadow, index, paulis);
        }
        means[c] = sum / chunk_size;
    }
    return means;
}

/**
 * @brief Median-of-means estimate of Tr[O rho] from a shadow: per-term chunk
 * means are combined with the observable's coefficients chunk by chunk, and
 * the median of the combined chunk means is returned.
 */
inline double estimate_observable(const ClassicalShadow &shadow, const Observable &observable,
                                  const MomConfig &mom) {
    if (observable.n_qubits != shadow.n_qubits()) {
        throw UsageError("observable qubit count does not match shadow");
    }
    std::vector<double> combined(mom.chunks, 0.0);
    for (const PauliTerm &term : observable.terms) {
        const std::vector<double> means = pauli_chunk_means(shadow, term.paulis, mom);
        for (std::uint16_t c = 0; c < mom.chunks; ++c) {
            combined[c] += term.coefficient * means[c];
        }
    }
    return detail::median_inplace(combined);
}

/**
 * @brief Collect M snapshots of `state`: every qubit's basis is drawn
 * uniformly from {X, Y, Z} independently, then the rotated state is
 * measured once. Snapshot order is the collection order. Draw order (and
 * therefore the result) matches composing measure_in_bases with the same
 * stream; the scratch state is reused across snapshots.
 */
inline ClassicalShadow collect_shadow(const Statevector &state, std::uint32_t snapshots,
                                      RngStream &rng) {
    if (snapshots < 1) {
        throw ConfigError("snapshot count M must be >= 1");
    }
    ClassicalShadow shadow(state.n_qubits);
    std::vector<Basis> bases(state.n_qubits);
    std::vector<std::uint8_t> bits(state.n_qubits);
    Statevector scratch;
    for (std::uint32_t j = 0; j < snapshots; ++j) {
        for (int q = 0; q < state.n_qubits; ++q) {
            bases[q] = static_cast<Basis>(rng.uniform_int(3));
        }
        scratch = state;
        apply_basis_rotations(scratch, bases);
        const double u = rng.uniform01();
        double cumulative = 0.0;
        std::size_t outcome_index = scratch.dim() - 1;
        for (std::size_t i = 0; i < scratch.dim(); ++i) {
            cumulative += std::norm(scratch.amplitudes[i]);
            if (u < cumulative) {
                outcome_index = i;
                break;
            }
        }
        for (int q = 0; q < state.n_qubits; ++q) {
            bits[q] = static_cast<std::uint8_t>((outcome_index >> q) & 1);
        }
        shadow.append(bases, bits);
    }
    return shadow;
}

/**
 * @brief The 2p+1 shadows published per training iteration, ordered as
 * [unshifted, (k=1,+), (k=1,-), ..., (k=p,+), (k=p,-)].
 */
struct ShadowSet {
    std::uint32_t iteration = 0;
    std::uint32_t param_count = 0; // p
    std::vector<ClassicalShadow> entries;

    static std::size_t entry_count_for(std::uint32_t param_count) {
        return 2 * static_cast<std::size_t>(param_count) + 1;
    }

    /// Entry index for the +/- shift of 0-based parameter k (entry 0 is
    /// unshifted).
    static std::size_t shift_entry(std::uint32_t k, bool plus) {
        return 2 * static_cast<std::size_t>(k) + (plus ? 1 : 2);
    }

    int n_qubits() const { return entries.empty() ? 0 : entries.front().n_qubits(); }
    std::size_t snapshots_per_entry() const {
        return entries.empty() ? 0 : entries.front().size();
    }

    bool operator==(const ShadowSet &other) const = default;
};

/**
 * @brief Build the full shadow set for theta: entry 0 from V(theta)|0>,
 * entries (k,+-) from theta with theta_k shifted by +-pi/2. Every entry
 * draws fresh randomness from its own substream rng.child(entry), so the
 * result is bit-identical whether entries run serially or in parallel.
 */
inline ShadowSet collect_shadow_set(const Ansatz &ansatz, std::span<const double> theta,
                                    std::uint32_t snapshots, const RngStream &rng,
                                    unsigned n_threads = 0) {
    if (static_cast<int>(theta.size()) != ansatz.param_count) {
        throw UsageError("theta length does not match ansatz parameter count");
    }
    const std::uint32_t p = static_cast<std::uint32_t>(ansatz.param_count);
    const std::size_t total = ShadowSet::entry_count_for(p);

    ShadowSet set;
    set.param_count = p;
    set.entries.assign(total, ClassicalShadow(ansatz.n_qubits));

    auto collect_entry = [&](std::size_t e) {
        std::vector<double> shifted(theta.begin(), theta.end());
        if (e > 0) {
            const std::size_t k = (e - 1) / 2;
            shifted[k] += (e % 2 == 1) ? kHalfPi : -kHalfPi;
        }
        const Statevector state = run_ansatz(ansatz, shifted);
        RngStream stream = rng.child(e);
        set.entries[e] = collect_shadow(state, snapshots, stream);
    };

    if (n_threads == 0) {
        n_threads = std::max(1u, std::thread::hardware_concurrency());
    }
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(total));
    if (n_threads <= 1) {
        for (std::size_t e = 0; e < total; ++e) {
            collect_entry(e);
        }
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (unsigned w = 0; w < n_threads; ++w) {
            workers.emplace_back([&, w]() {
                for (std::size_t e = w; e < total; e += n_threads) {
                    collect_entry(e);
                }
            });
        }
        for (auto &worker : workers) {
            worker.join();
        }
    }
    return set;
}

// --- Shadow-set wire format ------------------------------------------------
//
// magic "CCQF" | version u8 = 1 | msg_type u8 = 1 | iteration u32 |
// n_qubits u16 | p u32 | M u32 | M2 u16 |
// payload: (2p+1) * M snapshots in entry order, n_qubits bytes each,
// byte = 2 * basis + outcome (X=0, Y=1, Z=2; legal values 0..5).

inline constexpr std::size_t kShadowSetHeaderSize = 22;

inline std::size_t shadow_set_wire_size(int n_qubits, std::uint32_t param_count,
                                        std::uint32_t snapshots) {
    return kShadowSetHeaderSize + ShadowSet::entry_count_for(param_count) *
                                      static_cast<std::size_t>(snapshots) *
                                      static_cast<std::size_t>(n_qubits);
}

/// A decoded shadow-set message: the set plus the advertised M2 chunking.
struct ShadowSetMsg {
    ShadowSet set;
    std::uint16_t mom_chunks = 1;
};

inline std::vector<std::uint8_t> encode_shadow_set(const ShadowSet &set,
                                                   std::uint16_t mom_chunks) {
    if (set.entries.size() != ShadowSet::entry_count_for(set.param_count)) {
        throw UsageError("shadow set must hold exactly 2p+1 entries");
    }
    const std::size_t snapshots = set.snapshots_per_entry();
    for (const ClassicalShadow &entry : set.entries) {
        if (entry.size() != snapshots || entry.n_qubits() != set.n_qubits()) {
            throw UsageError("shadow set entries must share n_qubits and M");
        }
    }
    wire::ByteWriter writer;
    wire::write_header(writer, wire::MsgType::ShadowSet);
    writer.u32(set.iteration);
    writer.u16(static_cast<std::uint16_t>(set.n_qubits()));
    writer.u32(set.param_count);
    writer.u32(static_cast<std::uint32_t>(snapshots));
    writer.u16(mom_chunks);
    for (const ClassicalShadow &entry : set.entries) {
        writer.bytes(entry.bytes());
    }
    return writer.take();
}

inline ShadowSetMsg decode_shadow_set(std::span<const std::uint8_t> data) {
    wire::ByteReader reader(data);
    reader.expect_header(wire::MsgType::ShadowSet);
    ShadowSetMsg msg;
    msg.set.iteration = reader.u32();
    const std::uint16_t n_qubits = reader.u16();
    msg.set.param_count = reader.u32();
    const std::uint32_t snapshots = reader.u32();
    msg.mom_chunks = reader.u16();
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ProtocolError("illegal qubit count " + std::to_string(n_qubits) +
                            " in shadow header");
    }
    if (snapshots < 1) {
        throw ProtocolError("illegal snapshot count 0 in shadow header");
    }
    const std::size_t entry_count = ShadowSet::entry_count_for(msg.set.param_count);
    const std::size_t entry_bytes = static_cast<std::size_t>(snapshots) * n_qubits;
    msg.set.entries.reserve(entry_count);
    for (std::size_t e = 0; e < entry_count; ++e) {
        const std::size_t base = reader.offset();
        const auto view = reader.bytes(entry_bytes);
        for (std::size_t i = 0; i < view.size(); ++i) {
            if (view[i] > 5) {
                throw ProtocolError("illegal snapshot cell value " + std::to_string(view[i]) +
                                    " at offset " + std::to_string(base + i));
            }
        }
        msg.set.entries.push_back(ClassicalShadow::from_bytes(n_qubits, view));
    }
    reader.expect_end();
    return msg;
}

} // namespace ccqfl
