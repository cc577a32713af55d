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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "ccqfl/sim.hpp"

using namespace ccqfl;

namespace {
constexpr double kPi = 3.14159265358979323846;

Observable all_z_observable(int n_qubits, const std::vector<double> &coeffs) {
    Observable obs;
    obs.n_qubits = n_qubits;
    for (int j = 0; j < n_qubits; ++j) {
        obs.add_term(coeffs[j], single_qubit_pauli(n_qubits, j, Pauli::Z));
    }
    return obs;
}

Observable single_term(int n_qubits, int qubit, Pauli p, double c = 1.0) {
    Observable obs;
    obs.n_qubits = n_qubits;
    obs.add_term(c, single_qubit_pauli(n_qubits, qubit, p));
    return obs;
}
} // namespace

TEST_CASE("zero_state prepares |0...0>") {
    const Statevector one = zero_state(1);
    REQUIRE(one.amplitudes == std::vector<std::complex<double>>{{1.0, 0.0}, {0.0, 0.0}});

    const Statevector two = zero_state(2);
    REQUIRE(two.dim() == 4);
    REQUIRE(two.amplitudes[0] == std::complex<double>{1.0, 0.0});
    for (std::size_t i = 1; i < 4; ++i) {
        REQUIRE(two.amplitudes[i] == std::complex<double>{0.0, 0.0});
    }

    const Statevector eight = zero_state(8);
    REQUIRE(eight.dim() == 256);
    REQUIRE(eight.amplitudes[0].real() == 1.0);

    REQUIRE_THROWS_AS(zero_state(0), ConfigError);
    REQUIRE_THROWS_AS(zero_state(25), ConfigError);
}

TEST_CASE("single gates act as their matrices") {
    SECTION("RY(pi) flips |0> to |1> up to global phase") {
        Statevector state = zero_state(1);
        apply_gate(state, Gate::ry(0, 0), kPi);
        REQUIRE(std::abs(state.amplitudes[0]) < 1e-12);
        REQUIRE(std::abs(std::abs(state.amplitudes[1]) - 1.0) < 1e-12);
    }

    SECTION("CZ flips the phase of |11> only") {
        Statevector state = zero_state(2);
        state.amplitudes = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
        apply_gate(state, Gate::cz(0, 1));
        REQUIRE(state.amplitudes[3] == std::complex<double>{-1.0, 0.0});

        state.amplitudes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
        apply_gate(state, Gate::cz(0, 1));
        REQUIRE(state.amplitudes[1] == std::complex<double>{1.0, 0.0});
    }

    SECTION("RZ leaves <Z> of a Z eigenstate unchanged") {
        Statevector state = zero_state(1);
        apply_gate(state, Gate::rz(0, 0), 1.234);
        REQUIRE(exact_expectation(state, single_term(1, 0, Pauli::Z)) ==
                Catch::Approx(1.0).margin(1e-12));
    }

    SECTION("usage errors") {
        Statevector state = zero_state(2);
        REQUIRE_THROWS_AS(apply_gate(state, Gate::h(2)), UsageError);
        REQUIRE_THROWS_AS(apply_gate(state, Gate::ry(0, 0)), UsageError);
        REQUIRE_THROWS_AS(apply_gate(state, Gate::h(0), 0.5), UsageError);
        REQUIRE_THROWS_AS(apply_gate(state, Gate::cz(1, 1)), UsageError);
    }
}

TEST_CASE("build_hea layout and parameter count") {
    const Ansatz big = build_hea(8, 5);
    REQUIRE(big.param_count == 80); // 2 * 8 * 5
    REQUIRE(big.gates.size() == 5 * (8 + 8 + 8));

    const Ansatz small = build_hea(2, 1);
    REQUIRE(small.param_count == 4);
    // RY0, RY1, RZ0, RZ1, then a single CZ on the deduplicated 2-ring.
    REQUIRE(small.gates.size() == 5);
    REQUIRE(small.gates[4].kind == GateKind::CZ);

    REQUIRE(build_hea(3, 2).param_count == 12);

    SECTION("every param slot appears exactly once") {
        std::set<int> slots;
        for (const Gate &gate : big.gates) {
            if (gate.param_slot >= 0) {
                REQUIRE(slots.insert(gate.param_slot).second);
            }
        }
        REQUIRE(static_cast<int>(slots.size()) == big.param_count);
        REQUIRE(*slots.rbegin() == big.param_count - 1);
    }

    REQUIRE_THROWS_AS(build_hea(1, 5), ConfigError);
    REQUIRE_THROWS_AS(build_hea(4, 0), ConfigError);
}

TEST_CASE("run_ansatz") {
    const Ansatz ansatz = build_hea(8, 5);

    SECTION("all-zero parameters leave every <Z_j> at 1") {
        const std::vector<double> theta(ansatz.param_count, 0.0);
        const Statevector state = run_ansatz(ansatz, theta);
        for (int j = 0; j < 8; ++j) {
            REQUIRE(exact_expectation(state, single_term(8, j, Pauli::Z)) ==
                    Catch::Approx(1.0).margin(1e-10));
        }
    }

    SECTION("norm is preserved for random parameters") {
        RngStream rng(404);
        std::vector<double> theta(ansatz.param_count);
        for (double &t : theta) {
            t = rng.uniform(-kPi, kPi);
        }
        const Statevector state = run_ansatz(ansatz, theta);
        REQUIRE(norm_error(state) < 1e-10);

        SECTION("and the result is a pure function of (ansatz, theta)") {
            const Statevector again = run_ansatz(ansatz, theta);
            REQUIRE(again.amplitudes == state.amplitudes);
        }
    }

    SECTION("single-qubit toy circuit") {
        Ansatz toy;
        toy.n_qubits = 1;
        toy.layers = 1;
        toy.gates = {Gate::ry(0, 0)};
        toy.param_count = 1;
        const std::vector<double> theta = {kPi / 2.0};
        const Statevector state = run_ansatz(toy, theta);
        REQUIRE(exact_expectation(state, single_term(1, 0, Pauli::Z)) ==
                Catch::Approx(0.0).margin(1e-10));
    }

    SECTION("length mismatch") {
        const std::vector<double> theta(3, 0.0);
        REQUIRE_THROWS_AS(run_ansatz(ansatz, theta), UsageError);
    }
}

TEST_CASE("exact_expectation") {
    SECTION("|0...0> with O = sum_j Z_j") {
        const Statevector state = zero_state(8);
        REQUIRE(exact_expectation(state, all_z_observable(8, std::vector<double>(8, 1.0))) ==
                Catch::Approx(8.0).margin(1e-12));
    }

    SECTION("<0|X|0> = 0") {
        const Statevector state = zero_state(8);
        REQUIRE(exact_expectation(state, single_term(8, 1, Pauli::X)) ==
                Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("RY(theta)|0> measured in Z gives cos(theta)") {
        Statevector state = zero_state(1);
        apply_gate(state, Gate::ry(0, 0), kPi / 3.0);
        REQUIRE(exact_expectation(state, single_term(1, 0, Pauli::Z)) ==
                Catch::Approx(0.5).margin(1e-10));
    }

    SECTION("qubit mismatch is a usage error") {
        const Statevector state = zero_state(2);
        REQUIRE_THROWS_AS(exact_expectation(state, single_term(3, 0, Pauli::Z)), UsageError);
    }

    SECTION("linear in the coefficients") {
        RngStream rng(71);
        const Ansatz ansatz = build_hea(4, 2);
        std::vector<double> theta(ansatz.param_count);
        for (double &t : theta) {
            t = rng.uniform(-kPi, kPi);
        }
        const Statevector state = run_ansatz(ansatz, theta);

        auto random_pauli_string = [&rng]() {
            PauliString s(4);
            for (Pauli &p : s) {
                p = static_cast<Pauli>(rng.uniform_int(4));
            }
            return s;
        };
        for (int trial = 0; trial < 20; ++trial) {
            Observable a{4, {}};
            Observable b{4, {}};
            for (int t = 0; t < 3; ++t) {
                a.add_term(rng.uniform(-2.0, 2.0), random_pauli_string());
                b.add_term(rng.uniform(-2.0, 2.0), random_pauli_string());
            }
            const double alpha = rng.uniform(-2.0, 2.0);
            const double beta = rng.uniform(-2.0, 2.0);
            Observable combined{4, {}};
            for (const PauliTerm &term : a.terms) {
                combined.add_term(alpha * term.coefficient, term.paulis);
            }
            for (const PauliTerm &term : b.terms) {
                combined.add_term(beta * term.coefficient, term.paulis);
            }
            const double lhs = exact_expectation(state, combined);
            const double rhs = alpha * exact_expectation(state, a) +
                               beta * exact_expectation(state, b);
            REQUIRE(lhs == Catch::Approx(rhs).margin(1e-10));
        }
    }
}

TEST_CASE("measure_in_bases respects eigenstates") {
    RngStream rng(99);

    SECTION("Z basis on |0> and |1>") {
        const Statevector zero = zero_state(1);
        Statevector one = zero_state(1);
        apply_gate(one, Gate::ry(0, 0), kPi);
        const std::vector<Basis> basis = {Basis::Z};
        for (int i = 0; i < 50; ++i) {
            REQUIRE(measure_in_bases(zero, basis, rng)[0] == 0);
            REQUIRE(measure_in_bases(one, basis, rng)[0] == 1);
        }
    }

    SECTION("X basis on |+> and |->") {
        Statevector plus = zero_state(1);
        apply_gate(plus, Gate::h(0));
        Statevector minus = zero_state(1);
        apply_gate(minus, Gate::ry(0, 0), kPi);
        apply_gate(minus, Gate::h(0));
        const std::vector<Basis> basis = {Basis::X};
        for (int i = 0; i < 50; ++i) {
            REQUIRE(measure_in_bases(plus, basis, rng)[0] == 0);
            REQUIRE(measure_in_bases(minus, basis, rng)[0] == 1);
        }
    }

    SECTION("Y basis on |+i> and |-i>") {
        // |+i> = (|0> + i|1>)/sqrt2, |-i> = (|0> - i|1>)/sqrt2
        Statevector plus_i = zero_state(1);
        plus_i.amplitudes = {{1.0 / std::sqrt(2.0), 0.0}, {0.0, 1.0 / std::sqrt(2.0)}};
        Statevector minus_i = zero_state(1);
        minus_i.amplitudes = {{1.0 / std::sqrt(2.0), 0.0}, {0.0, -1.0 / std::sqrt(2.0)}};
        const std::vector<Basis> basis = {Basis::Y};
        for (int i = 0; i < 50; ++i) {
            REQUIRE(measure_in_bases(plus_i, basis, rng)[0] == 0);
            REQUIRE(measure_in_bases(minus_i, basis, rng)[0] == 1);
        }
    }

    SECTION("the input state is not mutated") {
        Statevector plus = zero_state(1);
        apply_gate(plus, Gate::h(0));
        const auto before = plus.amplitudes;
        const std::vector<Basis> basis = {Basis::Y};
        (void)measure_in_bases(plus, basis, rng);
        REQUIRE(plus.amplitudes == before);
    }

    SECTION("basis count must match") {
        const Statevector state = zero_state(2);
        const std::vector<Basis> basis = {Basis::Z};
        REQUIRE_THROWS_AS(measure_in_bases(state, basis, rng), UsageError);
    }
}

TEST_CASE("measure_in_bases samples the Born distribution") {
    const Statevector state = zero_state(1); // X-basis outcome is a fair coin
    const std::vector<Basis> basis = {Basis::X};
    RngStream rng(1234);
    const int samples = 100000;
    int zeros = 0;
    for (int i = 0; i < samples; ++i) {
        zeros += (measure_in_bases(state, basis, rng)[0] == 0) ? 1 : 0;
    }
    const double frequency = static_cast<double>(zeros) / samples;
    REQUIRE(frequency == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("norm preserved across random gate sequences") {
    RngStream rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        Statevector state = zero_state(4);
        for (int g = 0; g < 100; ++g) {
            const int kind = static_cast<int>(rng.uniform_int(4));
            const int q = static_cast<int>(rng.uniform_int(4));
            switch (kind) {
            case 0:
                apply_gate(state, Gate::ry(q, 0), rng.uniform(-kPi, kPi));
                break;
            case 1:
                apply_gate(state, Gate::rz(q, 0), rng.uniform(-kPi, kPi));
                break;
            case 2:
                apply_gate(state, Gate::h(q));
                break;
            default:
                apply_gate(state, Gate::cz(q, (q + 1) % 4));
                break;
            }
        }
        REQUIRE(norm_error(state) <= 1e-10);
    }
}
