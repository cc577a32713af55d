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

// Test-only dense matrix oracle. Everything here is built from textbook
// definitions (explicit 2x2 matrices, Kronecker products, traces) and never
// calls the library's statevector or shadow paths, so it can stand as an
// independent reference for them.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracle {

using Cx = std::complex<double>;

struct Matrix {
    std::size_t n = 0;        // square dimension
    std::vector<Cx> a;        // row-major

    Matrix() = default;
    explicit Matrix(std::size_t dim) : n(dim), a(dim * dim, Cx{0.0, 0.0}) {}

    Cx &at(std::size_t r, std::size_t c) { return a[r * n + c]; }
    const Cx &at(std::size_t r, std::size_t c) const { return a[r * n + c]; }
};

inline Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.at(i, i) = 1.0;
    }
    return m;
}

inline Matrix mul(const Matrix &x, const Matrix &y) {
    Matrix out(x.n);
    for (std::size_t i = 0; i < x.n; ++i) {
        for (std::size_t k = 0; k < x.n; ++k) {
            const Cx xik = x.at(i, k);
            for (std::size_t j = 0; j < x.n; ++j) {
                out.at(i, j) += xik * y.at(k, j);
            }
        }
    }
    return out;
}

inline Matrix adjoint(const Matrix &x) {
    Matrix out(x.n);
    for (std::size_t i = 0; i < x.n; ++i) {
        for (std::size_t j = 0; j < x.n; ++j) {
            out.at(i, j) = std::conj(x.at(j, i));
        }
    }
    return out;
}

inline Matrix kron(const Matrix &x, const Matrix &y) {
    Matrix out(x.n * y.n);
    for (std::size_t i = 0; i < x.n; ++i) {
        for (std::size_t j = 0; j < x.n; ++j) {
            for (std::size_t k = 0; k < y.n; ++k) {
                for (std::size_t l = 0; l < y.n; ++l) {
                    out.at(i * y.n + k, j * y.n + l) = x.at(i, j) * y.at(k, l);
                }
            }
        }
    }
    return out;
}

inline Cx trace(const Matrix &x) {
    Cx t = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
        t += x.at(i, i);
    }
    return t;
}

inline std::vector<Cx> apply(const Matrix &x, const std::vector<Cx> &v) {
    std::vector<Cx> out(v.size(), Cx{0.0, 0.0});
    for (std::size_t i = 0; i < x.n; ++i) {
        for (std::size_t j = 0; j < x.n; ++j) {
            out[i] += x.at(i, j) * v[j];
        }
    }
    return out;
}

inline Matrix outer(const std::vector<Cx> &v) {
    Matrix out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            out.at(i, j) = v[i] * std::conj(v[j]);
        }
    }
    return out;
}

// --- Textbook single-qubit matrices ----------------------------------------

inline Matrix pauli_matrix(int which) { // 0 I, 1 X, 2 Y, 3 Z
    Matrix m(2);
    switch (which) {
    case 0:
        m.at(0, 0) = 1.0;
        m.at(1, 1) = 1.0;
        break;
    case 1:
        m.at(0, 1) = 1.0;
        m.at(1, 0) = 1.0;
        break;
    case 2:
        m.at(0, 1) = Cx{0.0, -1.0};
        m.at(1, 0) = Cx{0.0, 1.0};
        break;
    default:
        m.at(0, 0) = 1.0;
        m.at(1, 1) = -1.0;
        break;
    }
    return m;
}

inline Matrix hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix m(2);
    m.at(0, 0) = s;
    m.at(0, 1) = s;
    m.at(1, 0) = s;
    m.at(1, 1) = -s;
    return m;
}

inline Matrix s_dagger() {
    Matrix m(2);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = Cx{0.0, -1.0};
    return m;
}

/// Measurement rotation for basis code 0=X, 1=Y, 2=Z: H, H*Sdg, I.
inline Matrix basis_rotation(int basis) {
    switch (basis) {
    case 0:
        return hadamard();
    case 1:
        return mul(hadamard(), s_dagger());
    default:
        return identity(2);
    }
}

/// Projector |b><b| for a one-qubit outcome bit.
inline Matrix outcome_projector(int bit) {
    Matrix m(2);
    m.at(bit, bit) = 1.0;
    return m;
}

/// The single-qubit inverted-channel snapshot 3 W^dag |b><b| W - I.
inline Matrix snapshot_matrix(int basis, int bit) {
    const Matrix w = basis_rotation(basis);
    Matrix m = mul(mul(adjoint(w), outcome_projector(bit)), w);
    for (auto &entry : m.a) {
        entry *= 3.0;
    }
    for (std::size_t i = 0; i < m.n; ++i) {
        m.at(i, i) -= 1.0;
    }
    return m;
}

/// Full n-qubit operator from per-qubit 2x2 factors, qubit 0 least
/// significant: F_{n-1} kron ... kron F_0.
inline Matrix kron_chain(const std::vector<Matrix> &factors) {
    Matrix out = factors.back();
    for (std::size_t q = factors.size() - 1; q-- > 0;) {
        out = kron(out, factors[q]);
    }
    return out;
}

} // namespace oracle
