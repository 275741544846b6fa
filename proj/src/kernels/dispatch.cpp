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
#include <atomic>
#include <cstdlib>
#include <string>

#include "nmrqcels/error.hpp"
#include "tables.hpp"

namespace nmrqcels::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(NMRQCELS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    const bool avx2 = cpu_has_avx2();
    if (const char *env = std::getenv("NMRQCELS_ISA")) {
        const std::string v(env);
        if (v == "scalar")
            return Isa::scalar;
        if (v == "avx2" && avx2)
            return Isa::avx2;
    }
    return avx2 ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa> &active() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

void check_dim(std::size_t a, std::size_t b, const char *what) {
    if (a != b)
        throw DimensionError(std::string(what) + ": size " + std::to_string(a) +
                             " does not match " + std::to_string(b));
}

} // namespace

bool isa_supported(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

const KernelTable &table(Isa isa) {
#if defined(NMRQCELS_HAVE_AVX2)
    if (isa == Isa::avx2 && cpu_has_avx2())
        return detail::avx2_table;
#endif
    if (isa == Isa::avx2)
        throw std::runtime_error("AVX2 kernels are not available on this machine");
    return detail::scalar_table;
}

Isa active_isa() { return active().load(); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa))
        throw std::runtime_error("AVX2 kernels are not available on this machine");
    active().store(isa);
}

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void apply_pauli(std::span<const cplx> in, std::span<cplx> out, PauliMask mask) {
    check_dim(in.size(), out.size(), "apply_pauli");
    table(active_isa()).apply_pauli(in.data(), out.data(), in.size(), mask);
}

cplx pauli_expectation(std::span<const cplx> psi, PauliMask mask) {
    return table(active_isa()).pauli_expectation(psi.data(), psi.size(), mask);
}

void pauli_rotation(std::span<cplx> psi, PauliMask mask, double angle) {
    table(active_isa()).pauli_rotation(psi.data(), psi.size(), mask, angle);
}

void matvec(std::span<const cplx> a, std::size_t rows, std::size_t cols,
            std::span<const cplx> x, std::span<cplx> y) {
    check_dim(a.size(), rows * cols, "matvec matrix");
    check_dim(x.size(), cols, "matvec input");
    check_dim(y.size(), rows, "matvec output");
    table(active_isa()).matvec(a.data(), rows, cols, x.data(), y.data());
}

} // namespace nmrqcels::kernels
