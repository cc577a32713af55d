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
 * Pauli strings and weighted-sum observables. Real coefficients times Pauli
 * strings keep every observable Hermitian by construction.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ccqfl/errors.hpp"

namespace ccqfl {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Measurement basis for a single qubit. The numeric values are the wire
/// codes (X=0, Y=1, Z=2) and must not change.
enum class Basis : std::uint8_t { X = 0, Y = 1, Z = 2 };

/// The Pauli whose eigenbasis a measurement basis refers to.
inline Pauli basis_pauli(Basis b) {
    switch (b) {
    case Basis::X:
        return Pauli::X;
    case Basis::Y:
        return Pauli::Y;
    default:
        return Pauli::Z;
    }
}

/// One factor per qubit; length equals the qubit count.
using PauliString = std::vector<Pauli>;

/// Number of non-identity factors (the locality b of the string).
inline int locality(const PauliString &paulis) {
    int count = 0;
    for (Pauli p : paulis) {
        if (p != Pauli::I) {
            ++count;
        }
    }
    return count;
}

/// A Pauli string supported on a single qubit.
inline PauliString single_qubit_pauli(std::size_t n_qubits, std::size_t qubit, Pauli p) {
    PauliString s(n_qubits, Pauli::I);
    s.at(qubit) = p;
    return s;
}

struct PauliTerm {
    double coefficient = 0.0;
    PauliString paulis;
};

/**
 * @brief Weighted sum of Pauli strings, O = sum_t c_t P_t.
 */
struct Observable {
    int n_qubits = 0;
    std::vector<PauliTerm> terms;

    void add_term(double coefficient, PauliString paulis) {
        if (static_cast<int>(paulis.size()) != n_qubits) {
            throw UsageError("observable term length " + std::to_string(paulis.size()) +
                             " does not match qubit count " + std::to_string(n_qubits));
        }
        if (!std::isfinite(coefficient)) {
            throw UsageError("observable coefficient must be finite");
        }
        terms.push_back(PauliTerm{coefficient, std::move(paulis)});
    }
};

/// Stable key for caching per-Pauli-string results.
inline std::string pauli_key(const PauliString &paulis) {
    std::string key(paulis.size(), '\0');
    for (std::size_t q = 0; q < paulis.size(); ++q) {
        key[q] = static_cast<char>(paulis[q]);
    }
    return key;
}

} // namespace ccqfl
