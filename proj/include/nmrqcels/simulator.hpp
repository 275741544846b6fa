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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nmrqcels/dataset.hpp"
#include "nmrqcels/hamiltonian.hpp"

namespace nmrqcels {

class StateVector {
  public:
    /// |0...0> on n qubits.
    explicit StateVector(std::size_t n_qubits);
    /// Takes ownership of `amplitudes`; the length must be 2^n_qubits and the
    /// norm 1 within 1e-10.
    StateVector(std::size_t n_qubits, std::vector<cplx> amplitudes);

    static StateVector basis(std::size_t n_qubits, std::size_t index);

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const { return amps_.size(); }
    [[nodiscard]] std::span<const cplx> amplitudes() const { return amps_; }
    [[nodiscard]] std::span<cplx> amplitudes() { return amps_; }
    [[nodiscard]] const cplx &operator[](std::size_t i) const { return amps_[i]; }
    [[nodiscard]] double norm() const;

  private:
    std::size_t n_qubits_ = 0;
    std::vector<cplx> amps_;
};

StateVector hadamard_state(std::size_t n_qubits);

/// Cached eigendecomposition H = V diag(E) V^dagger of a Hermitian PauliSum.
class EvolutionOracle {
  public:
    explicit EvolutionOracle(const PauliSum &hamiltonian);

    [[nodiscard]] const Eigen::VectorXd &eigenvalues() const { return energies_; }
    [[nodiscard]] const Eigen::MatrixXcd &eigenvectors() const { return vectors_; }
    [[nodiscard]] const PauliSum &source() const { return source_; }
    [[nodiscard]] std::size_t n_qubits() const { return source_.register_size(); }

    /// ||V diag(E) V^dagger - H||_F / ||H||_F
    [[nodiscard]] double reconstruction_error() const;

    /// Coordinates V^dagger psi of a state in the eigenbasis.
    [[nodiscard]] std::vector<cplx> to_eigenbasis(const StateVector &psi) const;
    /// V diag(exp(-i E t)) coords
    [[nodiscard]] StateVector from_eigenbasis(const std::vector<cplx> &coords,
                                              double t) const;

  private:
    PauliSum source_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd vectors_;
    Eigen::MatrixXcd vectors_adj_;
};

StateVector evolve_exact(const EvolutionOracle &oracle, const StateVector &psi, double t);

cplx expect(const StateVector &psi, const PauliSum &obs);
cplx expect(const StateVector &psi, const PauliString &term);

/// M(t) = <psi0| e^{iHt} (M_x + i M_y) e^{-iHt} |psi0> for the Hadamard
/// initial state, with the eigendecomposition computed once.
class MagnetizationEvaluator {
  public:
    explicit MagnetizationEvaluator(const SpinSystemSpec &spec,
                                    Interaction interaction = Interaction::full);

    [[nodiscard]] cplx operator()(double t) const;
    [[nodiscard]] const EvolutionOracle &oracle() const { return oracle_; }
    [[nodiscard]] const SpinSystemSpec &spec() const { return spec_; }
    [[nodiscard]] const PauliSum &mx() const { return mx_; }
    [[nodiscard]] const PauliSum &my() const { return my_; }

  private:
    SpinSystemSpec spec_;
    EvolutionOracle oracle_;
    PauliSum mx_, my_;
    std::vector<cplx> coords_;
};

/// e^{-eta t} M(t) at every requested time; evaluated in parallel, ordered
/// by input index.
SignalDataset magnetization_signal(const SpinSystemSpec &spec,
                                   std::span<const double> times, double eta,
                                   Interaction interaction = Interaction::full);

} // namespace nmrqcels
