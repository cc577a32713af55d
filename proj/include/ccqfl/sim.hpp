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
 * Dense statevector simulation of the server's parameterized circuit: gate
 * application, exact Pauli-observable expectations, and sampling of
 * measurements in rotated Pauli bases.
 *
 * Conventions:
 *  - qubit 0 is the least-significant bit of the amplitude index;
 *  - basis rotations are X -> H and Y -> H*Sdg (applied to the state before
 *    a computational-basis measurement), Z -> identity;
 *  - global phase is unconstrained everywhere.
 */

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccqfl/errors.hpp"
#include "ccqfl/observable.hpp"
#include "ccqfl/rng.hpp"

namespace ccqfl {

inline constexpr int kMaxQubits = 24;
inline constexpr double kHalfPi = 1.57079632679489661923;

/**
 * @brief Normalized pure state of n qubits as 2^n complex amplitudes.
 */
struct Statevector {
    int n_qubits = 0;
    std::vector<std::complex<double>> amplitudes;

    std::size_t dim() const { return amplitudes.size(); }
};

/// |0...0> on n_qubits. Throws ConfigError outside 1 <= n <= 24.
inline Statevector zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("qubit count " + std::to_string(n_qubits) + " outside [1, " +
                          std::to_string(kMaxQubits) + "]");
    }
    Statevector state;
    state.n_qubits = n_qubits;
    state.amplitudes.assign(std::size_t{1} << n_qubits, {0.0, 0.0});
    state.amplitudes[0] = {1.0, 0.0};
    return state;
}

/// |sum |a|^2 - 1|, for norm-preservation checks.
inline double norm_error(const Statevector &state) {
    double total = 0.0;
    for (const auto &a : state.amplitudes) {
        total += std::norm(a);
    }
    return std::abs(total - 1.0);
}

enum class GateKind : std::uint8_t { RY, RZ, CZ, H, BasisRotX, BasisRotY };

inline bool is_parameterized(GateKind kind) {
    return kind == GateKind::RY || kind == GateKind::RZ;
}

/**
 * @brief One circuit element. RY/RZ carry a slot into the parameter vector;
 * all other kinds are fixed.
 */
struct Gate {
    GateKind kind = GateKind::H;
    std::array<int, 2> targets = {0, 0};
    int n_targets = 1;
    int param_slot = -1; // >= 0 iff kind is RY or RZ

    static Gate ry(int qubit, int slot) { return {GateKind::RY, {qubit, 0}, 1, slot}; }
    static Gate rz(int qubit, int slot) { return {GateKind::RZ, {qubit, 0}, 1, slot}; }
    static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, 2, -1}; }
    static Gate h(int qubit) { return {GateKind::H, {qubit, 0}, 1, -1}; }
    static Gate basis_rot_x(int qubit) { return {GateKind::BasisRotX, {qubit, 0}, 1, -1}; }
    static Gate basis_rot_y(int qubit) { return {GateKind::BasisRotY, {qubit, 0}, 1, -1}; }
};

namespace detail {

inline void apply_single_qubit(Statevector &state, int qubit,
                               const std::array<std::complex<double>, 4> &m) {
    const std::size_t step = std::size_t{1} << qubit;
    const std::size_t dim = state.dim();
    auto *amp = state.amplitudes.data();
    for (std::size_t base = 0; base < dim; base += 2 * step) {
        for (std::size_t k = base; k < base + step; ++k) {
            const std::complex<double> a0 = amp[k];
            const std::complex<double> a1 = amp[k + step];
            amp[k] = m[0] * a0 + m[1] * a1;
            amp[k + step] = m[2] * a0 + m[3] * a1;
        }
    }
}

inline void apply_cz(Statevector &state, int a, int b) {
    const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
    const std::size_t dim = state.dim();
    auto *amp = state.amplitudes.data();
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & mask) == mask) {
            amp[i] = -amp[i];
        }
    }
}

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// H = (1/sqrt2) [[1, 1], [1, -1]]
inline constexpr std::array<std::complex<double>, 4> kHadamard = {
    std::complex<double>{kInvSqrt2, 0.0}, std::complex<double>{kInvSqrt2, 0.0},
    std::complex<double>{kInvSqrt2, 0.0}, std::complex<double>{-kInvSqrt2, 0.0}};

// H * Sdg = (1/sqrt2) [[1, -i], [1, i]]: maps |+i> -> |0>, |-i> -> |1>.
inline constexpr std::array<std::complex<double>, 4> kYBasisRot = {
    std::complex<double>{kInvSqrt2, 0.0}, std::complex<double>{0.0, -kInvSqrt2},
    std::complex<double>{kInvSqrt2, 0.0}, std::complex<double>{0.0, kInvSqrt2}};

} // namespace detail

/**
 * @brief Apply one gate in place. The angle must be supplied iff the gate is
 * parameterized (RY/RZ); it is the rotation angle in radians.
 *
 * RY(t) = exp(-i t Y / 2), RZ(t) = exp(-i t Z / 2); both are Pauli/2
 * generated, so the +-pi/2 parameter-shift derivative identity is exact.
 */
inline void apply_gate(Statevector &state, const Gate &gate,
                       std::optional<double> angle = std::nullopt) {
    for (int k = 0; k < gate.n_targets; ++k) {
        const int target = gate.targets[k];
        if (target < 0 || target >= state.n_qubits) {
            throw UsageError("gate target " + std::to_string(target) +
                             " out of range for " + std::to_string(state.n_qubits) +
                             " qubits");
        }
    }
    if (is_parameterized(gate.kind) != angle.has_value()) {
        throw UsageError(angle.has_value() ? "angle supplied for a fixed gate"
                                           : "parameterized gate is missing its angle");
    }

    switch (gate.kind) {
    case GateKind::RY: {
        const double c = std::cos(*angle / 2.0);
        const double s = std::sin(*angle / 2.0);
        detail::apply_single_qubit(state, gate.targets[0],
                                   {std::complex<double>{c, 0.0}, {-s, 0.0}, {s, 0.0}, {c, 0.0}});
        break;
    }
    case GateKind::RZ: {
        const std::complex<double> e0 = std::polar(1.0, -*angle / 2.0);
        const std::complex<double> e1 = std::polar(1.0, *angle / 2.0);
        detail::apply_single_qubit(state, gate.targets[0], {e0, {0.0, 0.0}, {0.0, 0.0}, e1});
        break;
    }
    case GateKind::CZ:
        if (gate.targets[0] == gate.targets[1]) {
            throw UsageError("CZ targets must be distinct");
        }
        detail::apply_cz(state, gate.targets[0], gate.targets[1]);
        break;
    case GateKind::H:
    case GateKind::BasisRotX:
        detail::apply_single_qubit(state, gate.targets[0], detail::kHadamard);
        break;
    case GateKind::BasisRotY:
        detail::apply_single_qubit(state, gate.targets[0], detail::kYBasisRot);
        break;
    }
}

/**
 * @brief A parameterized circuit: an ordered gate list over n qubits with
 * param_count distinct parameter slots, each used exactly once.
 */
struct Ansatz {
    int n_qubits = 0;
    int layers = 0;
    std::vector<Gate> gates;
    int param_count = 0;
};

/**
 * @brief Hardware-efficient ansatz: per layer, RY then RZ on every qubit
 * (each with its own parameter) followed by CZ on ring pairs (q, q+1 mod n).
 * For n = 2 the ring collapses to a single CZ. p = 2 * n_qubits * layers.
 */
inline Ansatz build_hea(int n_qubits, int layers) {
    if (n_qubits < 2) {
        throw ConfigError("hardware-efficient ansatz needs at least 2 qubits");
    }
    if (n_qubits > kMaxQubits) {
        throw ConfigError("qubit count " + std::to_string(n_qubits) + " above " +
                          std::to_string(kMaxQubits));
    }
    if (layers < 1) {
        throw ConfigError("layer count must be >= 1");
    }
    Ansatz ansatz;
    ansatz.n_qubits = n_qubits;
    ansatz.layers = layers;
    int slot = 0;
    for (int layer = 0; layer < layers; ++layer) {
        for (int q = 0; q < n_qubits; ++q) {
            ansatz.gates.push_back(Gate::ry(q, slot++));
        }
        for (int q = 0; q < n_qubits; ++q) {
            ansatz.gates.push_back(Gate::rz(q, slot++));
        }
        for (int q = 0; q + 1 < n_qubits; ++q) {
            ansatz.gates.push_back(Gate::cz(q, q + 1));
        }
        if (n_qubits > 2) { // the closing pair duplicates (0,1) on a 2-qubit ring
            ansatz.gates.push_back(Gate::cz(n_qubits - 1, 0));
        }
    }
    ansatz.param_count = slot;
    return ansatz;
}

/// V(theta)|0...0>. Pure function of (ansatz, theta).
inline Statevector run_ansatz(const Ansatz &ansatz, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != ansatz.param_count) {
        throw UsageError("theta length " + std::to_string(theta.size()) +
                         " does not match parameter count " +
                         std::to_string(ansatz.param_count));
    }
    Statevector state = zero_state(ansatz.n_qubits);
    for (const Gate &gate : ansatz.gates) {
        if (gate.param_slot >= 0) {
            apply_gate(state, gate, theta[gate.param_slot]);
        } else {
            apply_gate(state, gate);
        }
    }
    return state;
}

/// <psi| P |psi> for a single Pauli string.
inline double pauli_expectation(const Statevector &state, const PauliString &paulis) {
    if (paulis.size() != static_cast<std::size_t>(state.n_qubits)) {
        throw UsageError("pauli string length does not match qubit count");
    }
    std::uint64_t xmask = 0; // qubits flipped by the string (X and Y factors)
    std::uint64_t yzmask = 0; // qubits contributing a (-1)^bit sign (Y and Z factors)
    int y_count = 0;
    for (std::size_t q = 0; q < paulis.size(); ++q) {
        switch (paulis[q]) {
        case Pauli::I:
            break;
        case Pauli::X:
            xmask |= std::uint64_t{1} << q;
            break;
        case Pauli::Y:
            xmask |= std::uint64_t{1} << q;
            yzmask |= std::uint64_t{1} << q;
            ++y_count;
            break;
        case Pauli::Z:
            yzmask |= std::uint64_t{1} << q;
            break;
        }
    }
    const auto *amp = state.amplitudes.data();
    const std::size_t dim = state.dim();
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double sign = (std::popcount(i & yzmask) & 1) ? -1.0 : 1.0;
        acc += sign * std::conj(amp[i ^ xmask]) * amp[i];
    }
    // P|i> = i^{#Y} (-1)^{parity} |i ^ xmask>; fold in the global i^{#Y}.
    static constexpr std::array<std::complex<double>, 4> kPhase = {
        std::complex<double>{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    return (kPhase[y_count & 3] * acc).real();
}

/// Tr[|psi><psi| O] = sum_t c_t <psi|P_t|psi>. Real by Hermiticity.
inline double exact_expectation(const Statevector &state, const Observable &observable) {
    if (observable.n_qubits != state.n_qubits) {
        throw UsageError("observable qubit count " + std::to_string(observable.n_qubits) +
                         " does not match state qubit count " +
                         std::to_string(state.n_qubits));
    }
    double value = 0.0;
    for (const PauliTerm &term : observable.terms) {
        value += term.coefficient * pauli_expectation(state, term.paulis);
    }
    return value;
}

/// Rotate each qubit so the requested Pauli eigenbasis becomes computational.
inline void apply_basis_rotations(Statevector &state, std::span<const Basis> bases) {
    for (int q = 0; q < state.n_qubits; ++q) {
        switch (bases[q]) {
        case Basis::X:
            detail::apply_single_qubit(state, q, detail::kHadamard);
            break;
        case Basis::Y:
            detail::apply_single_qubit(state, q, detail::kYBasisRot);
            break;
        case Basis::Z:
            break;
        }
    }
}

/**
 * @brief Sample one n-bit outcome from measuring every qubit in its given
 * Pauli basis. The caller's state is left untouched; sampling follows the
 * Born probabilities of the rotated copy.
 */
inline std::vector<std::uint8_t> measure_in_bases(const Statevector &state,
                                                  std::span<const Basis> bases,
                                                  RngStream &rng) {
    if (bases.size() != static_cast<std::size_t>(state.n_qubits)) {
        throw UsageError("one measurement basis required per qubit");
    }
    Statevector rotated = state;
    apply_basis_rotations(rotated, bases);

    const double u = rng.uniform01();
    double cumulative = 0.0;
    std::size_t outcome_index = rotated.dim() - 1;
    for (std::size_t i = 0; i < rotated.dim(); ++i) {
        cumulative += std::norm(rotated.amplitudes[i]);
        if (u < cumulative) {
            outcome_index = i;
            break;
        }
    }

    std::vector<std::uint8_t> bits(state.n_qubits);
    for (int q = 0; q < state.n_qubits; ++q) {
        bits[q] = static_cast<std::uint8_t>((outcome_index >> q) & 1);
    }
    return bits;
}

} // namespace ccqfl
