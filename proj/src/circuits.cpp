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
#include "nmrqcels/circuits.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include "nmrqcels/error.hpp"
#include "nmrqcels/kernels.hpp"
#include "nmrqcels/parallel.hpp"

namespace nmrqcels {

namespace {

std::size_t ceil_log2(std::size_t n) {
    return n <= 1 ? 0 : std::size_t(std::bit_width(n - 1));
}

// Householder reflection exchanging e0 and the unit vector `a`.
Eigen::MatrixXd householder_prep(const std::vector<double> &a) {
    const Eigen::Index n = Eigen::Index(a.size());
    Eigen::VectorXd v = -Eigen::Map<const Eigen::VectorXd>(a.data(), n);
    v[0] += 1.0;
    const double vv = v.squaredNorm();
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    if (vv > 1e-30)
        p -= (2.0 / vv) * v * v.transpose();
    return p;
}

} // namespace

BlockEncoding BlockEncoding::build(std::span<const LcuTerm> terms) {
    if (terms.empty())
        throw ConfigError("block encoding needs at least one term");
    BlockEncoding be;
    be.n_system_ = terms.front().pauli.size();
    for (const auto &t : terms) {
        if (t.pauli.size() != be.n_system_)
            throw DimensionError("block encoding terms act on different registers");
        const double mag = std::abs(t.coefficient);
        if (!(mag > 0.0) || !std::isfinite(mag))
            throw ConfigError("block encoding coefficients must be finite and nonzero");
        be.lambda_ += mag;
        be.select_.push_back(t.pauli.with_coefficient(1.0));
        be.phases_.push_back(t.coefficient / mag);
    }
    be.n_ancilla_ = ceil_log2(terms.size());
    if (be.n_ancilla_ + be.n_system_ > kDenseQubitLimit)
        throw DimensionError("block encoding exceeds the dense register limit");
    be.prep_.assign(std::size_t{1} << be.n_ancilla_, 0.0);
    for (std::size_t i = 0; i < terms.size(); ++i)
        be.prep_[i] = std::sqrt(std::abs(terms[i].coefficient) / be.lambda_);
    be.prep_unitary_ = householder_prep(be.prep_);
    return be;
}

void BlockEncoding::apply(std::span<cplx> joint) const {
    const Eigen::Index d = Eigen::Index(1) << n_system_;
    const Eigen::Index a = Eigen::Index(1) << n_ancilla_;
    if (Eigen::Index(joint.size()) != a * d)
        throw DimensionError("joint register has the wrong length for this block encoding");
    Eigen::Map<Eigen::MatrixXcd> cols(joint.data(), d, a);
    const Eigen::MatrixXcd prep = prep_unitary_.cast<cplx>();
    Eigen::MatrixXcd work = cols * prep.transpose();
    std::vector<cplx> tmp(std::size_t(d), cplx{});
    for (std::size_t i = 0; i < select_.size(); ++i) {
        std::span<cplx> col(work.col(Eigen::Index(i)).data(), std::size_t(d));
        kernels::apply_pauli(col, tmp, select_[i].mask());
        for (Eigen::Index r = 0; r < d; ++r)
            col[std::size_t(r)] = phases_[i] * tmp[std::size_t(r)];
    }
    cols = work * prep;
}

std::vector<LcuTerm> magnetization_lcu_terms(const SpinSystemSpec &spec) {
    const auto [mx, my] = build_magnetization(spec);
    std::vector<LcuTerm> out;
    for (const auto &t : mx)
        out.push_back({cplx(t.coefficient(), 0.0), t});
    for (const auto &t : my)
        out.push_back({cplx(0.0, t.coefficient()), t});
    return out;
}

BlockEncoding magnetization_block_encoding(const SpinSystemSpec &spec) {
    const auto terms = magnetization_lcu_terms(spec);
    return BlockEncoding::build(terms);
}

namespace {

std::vector<cplx> embed(const StateVector &psi, const BlockEncoding &be) {
    if (psi.n_qubits() != be.n_system())
        throw DimensionError("state has " + std::to_string(psi.n_qubits()) +
                             " qubits, block encoding acts on " +
                             std::to_string(be.n_system()));
    std::vector<cplx> joint(psi.dim() << be.n_ancilla(), cplx{});
    std::copy(psi.amplitudes().begin(), psi.amplitudes().end(), joint.begin());
    return joint;
}

} // namespace

cplx lcu_expectation(const StateVector &psi, const BlockEncoding &be) {
    std::vector<cplx> joint = embed(psi, be);
    be.apply(joint);
    cplx acc{};
    for (std::size_t s = 0; s < psi.dim(); ++s)
        acc += std::conj(psi[s]) * joint[s];
    return be.lambda() * acc;
}

ShotConfig ShotConfig::sampled(std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0)
        throw ConfigError("sampled readout needs at least one shot");
    return {shots, seed};
}

double hadamard_test_p0(const StateVector &psi, ReadoutBasis w, const BlockEncoding &be) {
    const double r = 1.0 / std::sqrt(2.0);
    // test ancilla after the first Hadamard: both branches carry |0>_a|psi>/sqrt2
    std::vector<cplx> branch0 = embed(psi, be);
    for (auto &v : branch0)
        v *= r;
    std::vector<cplx> branch1 = branch0;
    be.apply(branch1);
    if (w == ReadoutBasis::s_dagger)
        for (auto &v : branch1)
            v *= cplx(0.0, -1.0);
    double p0 = 0.0;
    for (std::size_t i = 0; i < branch0.size(); ++i)
        p0 += std::norm(r * (branch0[i] + branch1[i]));
    return std::clamp(p0, 0.0, 1.0);
}

double hadamard_test(const StateVector &psi, ReadoutBasis w, const BlockEncoding &be,
                     std::uint64_t shots, RandomStream *stream) {
    const double p0 = hadamard_test_p0(psi, w, be);
    if (shots == 0)
        return be.lambda() * (2.0 * p0 - 1.0);
    if (stream == nullptr)
        throw ConfigError("sampled Hadamard test needs a random stream");
    const double freq = double(stream->binomial(shots, p0)) / double(shots);
    return be.lambda() * (2.0 * freq - 1.0);
}

CircuitEmulator::CircuitEmulator(const SpinSystemSpec &spec, EvolutionChoice evolution,
                                 Interaction interaction)
    : spec_(spec), evolution_(evolution), h_(build_nmr_hamiltonian(spec, interaction)),
      psi0_(hadamard_state(spec.n_spins)), be_(magnetization_block_encoding(spec)) {
    if (evolution_.trotter) {
        evolution_.trotter->validate();
    } else {
        oracle_.emplace(h_);
        coords_ = oracle_->to_eigenbasis(psi0_);
    }
}

StateVector CircuitEmulator::evolved_state(double t) const {
    if (evolution_.trotter)
        return evolve_trotter(psi0_, h_, t, *evolution_.trotter);
    return oracle_->from_eigenbasis(coords_, t);
}

double CircuitEmulator::hadamard_test(double t, ReadoutBasis w, const ShotConfig &shots,
                                      std::uint64_t point_index) const {
    RandomStream stream(derive_seed(shots.seed, point_index));
    return nmrqcels::hadamard_test(evolved_state(t), w, be_, shots.shots, &stream);
}

cplx CircuitEmulator::measure(double t, const ShotConfig &shots,
                              std::uint64_t point_index) const {
    const StateVector psi = evolved_state(t);
    RandomStream stream(derive_seed(shots.seed, point_index));
    const double re = nmrqcels::hadamard_test(psi, ReadoutBasis::identity, be_, shots.shots,
                                              &stream);
    const double im = nmrqcels::hadamard_test(psi, ReadoutBasis::s_dagger, be_, shots.shots,
                                              &stream);
    return {re, im};
}

SignalDataset generate_dataset(const SpinSystemSpec &spec, std::span<const double> times,
                               const EvolutionChoice &evolution, const ShotConfig &shots,
                               Interaction interaction) {
    const CircuitEmulator emu(spec, evolution, interaction);
    SignalDataset ds;
    ds.times.assign(times.begin(), times.end());
    ds.values.resize(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
        ds.values[i] = emu.measure(times[i], shots, i);
    });
    ds.provenance.source = Provenance::Source::circuit;
    ds.provenance.shots = shots.shots;
    if (evolution.trotter) {
        ds.provenance.trotter_order = evolution.trotter->order;
        ds.provenance.trotter_steps = evolution.trotter->steps;
    }
    ds.spec_fingerprint = spec.fingerprint();
    ds.metadata["mode"] = shots.is_exact() ? "exact" : "sampled";
    ds.metadata["shots"] = std::to_string(shots.shots);
    ds.metadata["seed"] = std::to_string(shots.seed);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", emu.block_encoding().lambda());
    ds.metadata["lambda"] = buf;
    ds.metadata["normalization"] =
        "value = lambda*(2*p0(W=I)-1) + i*lambda*(2*p0(W=Sdg)-1) = <M_x> + i<M_y>";
    ds.metadata["interaction"] = to_string(interaction);
    ds.validate();
    return ds;
}

} // namespace nmrqcels
