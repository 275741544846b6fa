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
#pragma once

// Data-parallel statevector kernels. Every kernel has a portable scalar
// reference implementation and, on x86-64, an AVX2/FMA variant. The variant
// is chosen once at startup from CPUID and can be forced with
// NMRQCELS_ISA=scalar|avx2 or set_active_isa().

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace nmrqcels::kernels {

using cplx = std::complex<double>;

/// Symplectic form of a Pauli string: P = i^num_y X^x Z^z, so that
/// P|b> = i^num_y (-1)^popcount(b & z) |b ^ x>.
struct PauliMask {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    unsigned num_y = 0;
};

enum class Isa { scalar, avx2 };

struct KernelTable {
    /// out = P in. `in` and `out` must not alias.
    void (*apply_pauli)(const cplx *in, cplx *out, std::size_t dim,
                        PauliMask mask);
    /// <psi|P|psi>
    cplx (*pauli_expectation)(const cplx *psi, std::size_t dim, PauliMask mask);
    /// psi <- exp(-i angle P) psi = cos(angle) psi - i sin(angle) P psi
    void (*pauli_rotation)(cplx *psi, std::size_t dim, PauliMask mask,
                           double angle);
    /// y = A x with A column-major rows x cols. y must not alias x.
    void (*matvec)(const cplx *a, std::size_t rows, std::size_t cols,
                   const cplx *x, cplx *y);
};

bool isa_supported(Isa isa);
const KernelTable &table(Isa isa);

Isa active_isa();
void set_active_isa(Isa isa);
std::string_view to_string(Isa isa);

void apply_pauli(std::span<const cplx> in, std::span<cplx> out, PauliMask mask);
cplx pauli_expectation(std::span<const cplx> psi, PauliMask mask);
void pauli_rotation(std::span<cplx> psi, PauliMask mask, double angle);
void matvec(std::span<const cplx> a, std::size_t rows, std::size_t cols,
            std::span<const cplx> x, std::span<cplx> y);

} // namespace nmrqcels::kernels
