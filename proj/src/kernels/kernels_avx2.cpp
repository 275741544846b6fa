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
#include <immintrin.h>

#include <bit>
#include <cmath>

#include "tables.hpp"

namespace nmrqcels::kernels::detail {

namespace {

// A __m256d holds two complex doubles: [re0, im0, re1, im1].

inline __m256d load2(const cplx *p) {
    return _mm256_loadu_pd(reinterpret_cast<const double *>(p));
}
inline void store2(cplx *p, __m256d v) {
    _mm256_storeu_pd(reinterpret_cast<double *>(p), v);
}
inline __m256d swap_halves(__m256d v) { return _mm256_permute2f128_pd(v, v, 0x01); }
inline __m256d swap_re_im(__m256d v) { return _mm256_permute_pd(v, 0x5); }

// Lane-wise complex product v * k.
inline __m256d cmul(__m256d v, __m256d k) {
    const __m256d kr = _mm256_movedup_pd(k);
    const __m256d ki = _mm256_permute_pd(k, 0xF);
    return _mm256_fmaddsub_pd(v, kr, _mm256_mul_pd(swap_re_im(v), ki));
}

inline double parity_sign(std::uint64_t v) {
    return (std::popcount(v) & 1) ? -1.0 : 1.0;
}

inline __m256d sign_pair(double s0, double s1) { return _mm256_setr_pd(s0, s0, s1, s1); }

// Amplitudes [psi[c ^ x], psi[(c + 1) ^ x]] for even c.
inline __m256d partner(const cplx *psi, std::size_t c, std::uint64_t x) {
    const __m256d v = load2(psi + ((c ^ x) & ~std::size_t{1}));
    return (x & 1) ? swap_halves(v) : v;
}

void apply_pauli_avx2(const cplx *in, cplx *out, std::size_t dim, PauliMask m) {
    if (dim < 2) {
        scalar_table.apply_pauli(in, out, dim, m);
        return;
    }
    const cplx ph = i_power(m.num_y);
    const __m256d k = _mm256_setr_pd(ph.real(), ph.imag(), ph.real(), ph.imag());
    for (std::size_t c = 0; c < dim; c += 2) {
        const __m256d s = sign_pair(parity_sign((c ^ m.x) & m.z),
                                    parity_sign(((c + 1) ^ m.x) & m.z));
        store2(out + c, cmul(_mm256_mul_pd(partner(in, c, m.x), s), k));
    }
}

cplx pauli_expectation_avx2(const cplx *psi, std::size_t dim, PauliMask m) {
    if (dim < 2)
        return scalar_table.pauli_expectation(psi, dim, m);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    for (std::size_t c = 0; c < dim; c += 2) {
        const __m256d s = sign_pair(parity_sign((c ^ m.x) & m.z),
                                    parity_sign(((c + 1) ^ m.x) & m.z));
        const __m256d a = load2(psi + c);
        const __m256d u = _mm256_mul_pd(partner(psi, c, m.x), s);
        // conj(a) u: re = ar ur + ai ui, im = ar ui - ai ur
        acc_re = _mm256_fmadd_pd(a, u, acc_re);
        acc_im = _mm256_fmadd_pd(a, swap_re_im(u), acc_im);
    }
    alignas(32) double r[4], i[4];
    _mm256_store_pd(r, acc_re);
    _mm256_store_pd(i, acc_im);
    return i_power(m.num_y) * cplx((r[0] + r[1]) + (r[2] + r[3]),
                                   (i[0] - i[1]) + (i[2] - i[3]));
}

void pauli_rotation_avx2(cplx *psi, std::size_t dim, PauliMask m, double angle) {
    if (dim < 2) {
        scalar_table.pauli_rotation(psi, dim, m, angle);
        return;
    }
    const double cs = std::cos(angle), sn = std::sin(angle);
    const cplx k = cplx(0.0, -sn) * i_power(m.num_y);
    const __m256d cvec = _mm256_set1_pd(cs);
    if (m.x == 0) {
        for (std::size_t c = 0; c < dim; c += 2) {
            const double s0 = parity_sign(c & m.z), s1 = parity_sign((c + 1) & m.z);
            const __m256d w = _mm256_setr_pd(cs + k.real() * s0, k.imag() * s0,
                                             cs + k.real() * s1, k.imag() * s1);
            store2(psi + c, cmul(load2(psi + c), w));
        }
        return;
    }
    auto coeff = [&](std::size_t c) {
        const double s0 = parity_sign((c ^ m.x) & m.z);
        const double s1 = parity_sign(((c + 1) ^ m.x) & m.z);
        return _mm256_setr_pd(k.real() * s0, k.imag() * s0, k.real() * s1, k.imag() * s1);
    };
    if (m.x == 1) {
        for (std::size_t c = 0; c < dim; c += 2) {
            const __m256d v = load2(psi + c);
            store2(psi + c, _mm256_fmadd_pd(cvec, v, cmul(swap_halves(v), coeff(c))));
        }
        return;
    }
    const std::uint64_t high = std::uint64_t{1} << (63 - std::countl_zero(m.x));
    for (std::size_t c = 0; c < dim; c += 2) {
        if (c & high)
            continue;
        const std::size_t d = (c ^ m.x) & ~std::size_t{1};
        const __m256d va = load2(psi + c);
        const __m256d vb = load2(psi + d);
        const __m256d pa = (m.x & 1) ? swap_halves(vb) : vb;
        const __m256d pb = (m.x & 1) ? swap_halves(va) : va;
        store2(psi + c, _mm256_fmadd_pd(cvec, va, cmul(pa, coeff(c))));
        store2(psi + d, _mm256_fmadd_pd(cvec, vb, cmul(pb, coeff(d))));
    }
}

void matvec_avx2(const cplx *a, std::size_t rows, std::size_t cols, const cplx *x,
                 cplx *y) {
    const std::size_t even = rows & ~std::size_t{1};
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        const cplx *col = a + j * rows;
        const __m256d xr = _mm256_set1_pd(x[j].real());
        const __m256d xi = _mm256_set1_pd(x[j].imag());
        for (std::size_t r = 0; r < even; r += 2) {
            const __m256d v = load2(col + r);
            const __m256d prod =
                _mm256_fmaddsub_pd(v, xr, _mm256_mul_pd(swap_re_im(v), xi));
            store2(y + r, _mm256_add_pd(load2(y + r), prod));
        }
        if (even != rows)
            y[rows - 1] += col[rows - 1] * x[j];
    }
}

} // namespace

const KernelTable avx2_table = {apply_pauli_avx2, pauli_expectation_avx2,
                                pauli_rotation_avx2, matvec_avx2};

} // namespace nmrqcels::kernels::detail
