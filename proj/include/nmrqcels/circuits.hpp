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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nmrqcels/dataset.hpp"
#include "nmrqcels/hamiltonian.hpp"
#include "nmrqcels/rng.hpp"
#include "nmrqcels/simulator.hpp"
#include "nmrqcels/trotter.hpp"

namespace nmrqcels {

/// a * P with a complex weight.
struct LcuTerm {
    cplx coefficient;
    PauliString pauli;
};

/// M = sum_i a_i P_i encoded as PREP^dagger SELECT PREP with
/// PREP|0> = sum_i sqrt(|a_i| / lambda) |i> and
/// SELECT = sum_i |i><i| (a_i/|a_i|) P_i (identity on unused indices).
class BlockEncoding {
  public:
    static BlockEncoding build(std::span<const LcuTerm> terms);

    [[nodiscard]] std::size_t n_ancilla() const { return n_ancilla_; }
    [[nodiscard]] std::size_t n_system() const { return n_system_; }
    [[nodiscard]] std::size_t n_terms() const { return select_.size(); }
    /// Length 2^n_ancilla; zero past n_terms().
    [[nodiscard]] const std::vector<double> &prep_amplitudes() const { return prep_; }
    /// Unit-coefficient Pauli strings.
    [[nodiscard]] const std::vector<PauliString> &select_terms() const { return select_; }
    [[nodiscard]] const std::vector<cplx> &select_phases() const { return phases_; }
    [[nodiscard]] double lambda() const { return lambda_; }

    /// Real orthogonal PREP whose first column is prep_amplitudes().
    [[nodiscard]] const Eigen::MatrixXd &prep_unitary() const { return prep_unitary_; }

    /// The full block-encoding unitary on ancilla (high bits) and system
    /// (low bits) registers applied to `joint`, in place.
    void apply(std::span<cplx> joint) const;

  private:
    std::size_t n_ancilla_ = 0;
    std::size_t n_system_ = 0;
    std::vector<double> prep_;
    std::vector<PauliString> select_;
    std::vector<cplx> phases_;
    double lambda_ = 0.0;
    Eigen::MatrixXd prep_unitary_;
};

/// Terms of M = M_x + i M_y: (1/2, X_k) and (i/2, Y_k).
std::vector<LcuTerm> magnetization_lcu_terms(const SpinSystemSpec &spec);
BlockEncoding magnetization_block_encoding(const SpinSystemSpec &spec);

/// lambda <0|_a <psi| U_BE |0>_a |psi> = <psi|M|psi>.
cplx lcu_expectation(const StateVector &psi, const BlockEncoding &be);

enum class ReadoutBasis { identity, s_dagger };

struct ShotConfig {
    /// 0 selects exact readout probabilities.
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    static ShotConfig exact() { return {}; }
    static ShotConfig sampled(std::uint64_t shots, std::uint64_t seed);
    [[nodiscard]] bool is_exact() const { return shots == 0; }
};

/// Probability of reading 0 on the test ancilla of the Hadamard test for
/// controlled-U_BE on |psi>.
double hadamard_test_p0(const StateVector &psi, ReadoutBasis w, const BlockEncoding &be);

/// lambda (2 p0 - 1): Re<M> for w = identity, Im<M> for w = s_dagger. With
/// a sampled config p0 is replaced by the observed frequency of 0 over
/// `shots` draws from `stream`; `stream` is ignored in exact mode.
double hadamard_test(const StateVector &psi, ReadoutBasis w, const BlockEncoding &be,
                     std::uint64_t shots, RandomStream *stream);

/// Time evolution for circuit datasets: exact or a product formula.
struct EvolutionChoice {
    std::optional<ProductFormula> trotter;
};

/// Emulates the measurement circuit for the magnetization signal of a spin
/// system started in the Hadamard state.
class CircuitEmulator {
  public:
    CircuitEmulator(const SpinSystemSpec &spec, EvolutionChoice evolution,
                    Interaction interaction = Interaction::full);

    [[nodiscard]] StateVector evolved_state(double t) const;
    /// Single Hadamard-test estimate at time t.
    [[nodiscard]] double hadamard_test(double t, ReadoutBasis w, const ShotConfig &shots,
                                       std::uint64_t point_index) const;
    /// Re + i Im from two Hadamard tests; sampled mode draws both from the
    /// stream derived from (seed, point_index).
    [[nodiscard]] cplx measure(double t, const ShotConfig &shots,
                               std::uint64_t point_index) const;

    [[nodiscard]] const BlockEncoding &block_encoding() const { return be_; }
    [[nodiscard]] const EvolutionChoice &evolution() const { return evolution_; }

  private:
    SpinSystemSpec spec_;
    EvolutionChoice evolution_;
    PauliSum h_;
    std::optional<EvolutionOracle> oracle_;
    std::vector<cplx> coords_;
    StateVector psi0_;
    BlockEncoding be_;
};

SignalDataset generate_dataset(const SpinSystemSpec &spec, std::span<const double> times,
                               const EvolutionChoice &evolution, const ShotConfig &shots,
                               Interaction interaction = Interaction::full);

} // namespace nmrqcels
