// Copyright 2026 The nmrqcels Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <bit>
#include <cmath>

#include "tables.hpp"

namespace nmrqcels::kernels::detail {

namespace {

inline double parity_sign(std::uint64_t v) {
    return (std::popcount(v) & 1) ? -1.0 : 1.0;
}

void apply_pauli_scalar(const cplx *in, cplx *out, std::size_t dim, PauliMask m) {
    const cplx ph = i_power(m.num_y);
    for (std::size_t c = 0; c < dim; ++c) {
        const std::size_t src = c ^ m.x;
        out[c] = ph * parity_sign(src & m.z) * in[src];
    }
}

cplx pauli_expectation_scalar(const cplx *psi, std::size_t dim, PauliMask m) {
    double re = 0.0, im = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        const std::size_t src = c ^ m.x;
        const cplx v = std::conj(psi[c]) * psi[src] * parity_sign(src & m.z);
        re += v.real();
        im += v.imag();
    }
    return i_power(m.num_y) * cplx(re, im);
}

void pauli_rotation_scalar(cplx *psi, std::size_t dim, PauliMask m, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    // -i sin(angle) times the i^num_y phase of P
    const cplx k = cplx(0.0, -s) * i_power(m.num_y);
    if (m.x == 0) {
        for (std::size_t b = 0; b < dim; ++b)
            psi[b] *= c + k * parity_sign(b & m.z);
        return;
    }
    const std::uint64_t high = std::uint64_t{1} << (63 - std::countl_zero(m.x));
    for (std::size_t a = 0; a < dim; ++a) {
        if (a & high)
            continue;
        const std::size_t b = a ^ m.x;
        const cplx va = psi[a], vb = psi[b];
        psi[a] = c * va + k * parity_sign(b & m.z) * vb;
        psi[b] = c * vb + k * parity_sign(a & m.z) * va;
    }
}

void matvec_scalar(const cplx *a, std::size_t rows, std::size_t cols, const cplx *x,
                   cplx *y) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        const cplx xj = x[j];
        const cplx *col = a + j * rows;
        for (std::size_t r = 0; r < rows; ++r)
            y[r] += col[r] * xj;
    }
}

} // namespace

const KernelTable scalar_table = {apply_pauli_scalar, pauli_expectation_scalar,
                                  pauli_rotation_scalar, matvec_scalar};

} // namespace nmrqcels::kernels::detail
