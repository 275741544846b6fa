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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nmrqcels/dataset.hpp"
#include "nmrqcels/hamiltonian.hpp"
#include "nmrqcels/simulator.hpp"

namespace nmrqcels {

/// Order-6 composition weights (Yoshida solution A). The symmetric
/// second-order step is applied with weights w3 w2 w1 w0 w1 w2 w3.
namespace yoshida6 {
inline constexpr double w1 = -1.17767998417887100694641568;
inline constexpr double w2 = 0.235573213359358133684793182;
inline constexpr double w3 = 0.784513610477557263819497634;
inline constexpr double w0 = 1.0 - 2.0 * (w1 + w2 + w3);
} // namespace yoshida6

struct ProductFormula {
    /// 1, 2, 4 (Suzuki triple jump) or 6 (Yoshida).
    int order = 2;
    int steps = 1;

    void validate() const;
};

struct Stage {
    std::size_t term;
    double multiplier;
};

struct StageSchedule {
    std::vector<Stage> stages;

    /// Per-term multiplier sums; each is 1 for a consistent formula.
    [[nodiscard]] std::vector<double> term_totals(std::size_t n_terms) const;
};

/// One step of the formula over `n_terms` terms in builder order, with
/// adjacent stages on the same term merged.
StageSchedule build_schedule(const ProductFormula &formula, std::size_t n_terms);

/// In-place exp(-i coeff P t).
void apply_pauli_exponential(StateVector &psi, const PauliString &term, double t);
StateVector exp_pauli_string(const StateVector &psi, const PauliString &term, double t);

StateVector evolve_trotter(const StateVector &psi, const PauliSum &h, double t,
                           const ProductFormula &formula);

/// R = sqrt(sum |s_n - s'_n|^2). Times must match exactly.
double signal_error(const SignalDataset &s, const SignalDataset &s_trotter);

/// Magnetization signal with Trotterized evolution from the Hadamard state.
SignalDataset trotter_magnetization_signal(const SpinSystemSpec &spec,
                                           std::span<const double> times,
                                           const ProductFormula &formula,
                                           Interaction interaction = Interaction::full);

struct TrotterStudyConfig {
    std::vector<int> orders{1, 2, 4, 6};
    std::vector<int> steps{2, 10, 50};
    /// Sample counts, each at most the largest; sample sets are nested
    /// prefixes of one draw of max(n_samples) times.
    std::vector<std::size_t> n_samples;
    double t_scale = 20.0;
    std::uint64_t seed = 0;
};

struct TrotterStudyRow {
    int order;
    int steps;
    std::size_t n_samples;
    double r;
};

std::vector<TrotterStudyRow> trotter_study(const SpinSystemSpec &spec,
                                           const TrotterStudyConfig &cfg);

struct OrderScaling {
    int order;
    std::size_t stages_per_step;
    double slope;
    std::vector<double> step_sizes;
    std::vector<double> errors;
};

/// Single-step local error ||S(h) psi - exp(-iHh) psi|| for h = t/steps,
/// with the log-log slope against h fitted by least squares.
OrderScaling measure_order_scaling(const PauliSum &h, const StateVector &psi, int order,
                                   double t, std::span<const int> steps);

} // namespace nmrqcels
