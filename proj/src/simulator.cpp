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
#include "nmrqcels/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <tuple>

#include "nmrqcels/error.hpp"
#include "nmrqcels/kernels.hpp"
#include "nmrqcels/parallel.hpp"

namespace nmrqcels {

namespace {

std::size_t checked_dim(std::size_t n_qubits) {
    if (n_qubits == 0 || n_qubits > kDenseQubitLimit)
        throw DimensionError("register size must be in [1, " +
                             std::to_string(kDenseQubitLimit) + "], got " +
                             std::to_string(n_qubits));
    return std::size_t{1} << n_qubits;
}

void check_register(const StateVector &psi, std::size_t n_qubits, const char *what) {
    if (psi.n_qubits() != n_qubits)
        throw DimensionError(std::string(what) + ": state has " +
                             std::to_string(psi.n_qubits()) + " qubits, operator acts on " +
                             std::to_string(n_qubits));
}

} // namespace

StateVector::StateVector(std::size_t n_qubits)
    : n_qubits_(n_qubits), amps_(checked_dim(n_qubits), cplx{0.0, 0.0}) {
    amps_[0] = 1.0;
}

StateVector::StateVector(std::size_t n_qubits, std::vector<cplx> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
    if (amps_.size() != checked_dim(n_qubits))
        throw DimensionError("state of " + std::to_string(n_qubits) + " qubits needs " +
                             std::to_string(checked_dim(n_qubits)) + " amplitudes, got " +
                             std::to_string(amps_.size()));
    if (std::abs(norm() - 1.0) > 1e-10)
        throw NumericalError("state vector is not normalized (norm " +
                             std::to_string(norm()) + ")");
}

StateVector StateVector::basis(std::size_t n_qubits, std::size_t index) {
    StateVector s(n_qubits);
    if (index >= s.dim())
        throw DimensionError("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

double StateVector::norm() const {
    double s = 0.0;
    for (const auto &a : amps_)
        s += std::norm(a);
    return std::sqrt(s);
}

StateVector hadamard_state(std::size_t n_qubits) {
    const std::size_t dim = checked_dim(n_qubits);
    return StateVector(n_qubits, std::vector<cplx>(dim, 1.0 / std::sqrt(double(dim))));
}

EvolutionOracle::EvolutionOracle(const PauliSum &hamiltonian) : source_(hamiltonian) {
    checked_dim(hamiltonian.register_size());
    const Eigen::MatrixXcd h = pauli_sum_to_dense(hamiltonian);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success)
        throw NumericalError("Hamiltonian eigendecomposition failed");
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    vectors_adj_ = vectors_.adjoint();
}

double EvolutionOracle::reconstruction_error() const {
    const Eigen::MatrixXcd h = pauli_sum_to_dense(source_);
    const Eigen::MatrixXcd r =
        vectors_ * energies_.cast<cplx>().asDiagonal() * vectors_adj_;
    const double scale = h.norm();
    return scale == 0.0 ? r.norm() : (r - h).norm() / scale;
}

std::vector<cplx> EvolutionOracle::to_eigenbasis(const StateVector &psi) const {
    check_register(psi, n_qubits(), "evolve_exact");
    const std::size_t dim = psi.dim();
    std::vector<cplx> out(dim);
    kernels::matvec({vectors_adj_.data(), dim * dim}, dim, dim, psi.amplitudes(), out);
    return out;
}

StateVector EvolutionOracle::from_eigenbasis(const std::vector<cplx> &coords, double t) const {
    const std::size_t dim = coords.size();
    if (dim != std::size_t(energies_.size()))
        throw DimensionError("eigenbasis coordinates have the wrong length");
    std::vector<cplx> phased(dim), out(dim);
    for (std::size_t k = 0; k < dim; ++k)
        phased[k] = coords[k] * std::polar(1.0, -energies_[Eigen::Index(k)] * t);
    kernels::matvec({vectors_.data(), dim * dim}, dim, dim, phased, out);
    return StateVector(n_qubits(), std::move(out));
}

StateVector evolve_exact(const EvolutionOracle &oracle, const StateVector &psi, double t) {
    if (!std::isfinite(t))
        throw NumericalError("evolution time is not finite");
    return oracle.from_eigenbasis(oracle.to_eigenbasis(psi), t);
}

cplx expect(const StateVector &psi, const PauliString &term) {
    check_register(psi, term.size(), "expect");
    return term.coefficient() * kernels::pauli_expectation(psi.amplitudes(), term.mask());
}

cplx expect(const StateVector &psi, const PauliSum &obs) {
    check_register(psi, obs.register_size(), "expect");
    cplx acc{0.0, 0.0};
    for (const auto &t : obs)
        acc += t.coefficient() * kernels::pauli_expectation(psi.amplitudes(), t.mask());
    return acc;
}

MagnetizationEvaluator::MagnetizationEvaluator(const SpinSystemSpec &spec,
                                               Interaction interaction)
    : spec_(spec), oracle_(build_nmr_hamiltonian(spec, interaction)) {
    std::tie(mx_, my_) = build_magnetization(spec);
    coords_ = oracle_.to_eigenbasis(hadamard_state(spec.n_spins));
}

cplx MagnetizationEvaluator::operator()(double t) const {
    const StateVector psi = oracle_.from_eigenbasis(coords_, t);
    const cplx x = expect(psi, mx_), y = expect(psi, my_);
    return {x.real() - y.imag(), x.imag() + y.real()};
}

SignalDataset magnetization_signal(const SpinSystemSpec &spec, std::span<const double> times,
                                   double eta, Interaction interaction) {
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw ConfigError("eta must be a finite non-negative damping rate");
    const MagnetizationEvaluator eval(spec, interaction);
    SignalDataset ds;
    ds.times.assign(times.begin(), times.end());
    ds.values.resize(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
        ds.values[i] = std::exp(-eta * times[i]) * eval(times[i]);
    });
    ds.provenance = {};
    ds.spec_fingerprint = spec.fingerprint();
    ds.metadata["interaction"] = to_string(interaction);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", eta);
    ds.metadata["eta"] = buf;
    ds.metadata["observable"] = "<M_x> + i<M_y>";
    ds.validate();
    return ds;
}

} // namespace nmrqcels
