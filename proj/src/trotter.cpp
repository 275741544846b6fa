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
#include "nmrqcels/trotter.hpp"

#include <algorithm>
#include <cmath>

#include "nmrqcels/error.hpp"
#include "nmrqcels/kernels.hpp"
#include "nmrqcels/parallel.hpp"
#include "nmrqcels/qcels.hpp"

namespace nmrqcels {

namespace {

void append_merged(std::vector<Stage> &out, Stage s) {
    if (!out.empty() && out.back().term == s.term)
        out.back().multiplier += s.multiplier;
    else
        out.push_back(s);
}

// Symmetric second-order step of duration `w` (in units of the step).
void append_strang(std::vector<Stage> &out, std::size_t n_terms, double w) {
    for (std::size_t k = 0; k + 1 < n_terms; ++k)
        append_merged(out, {k, w / 2.0});
    append_merged(out, {n_terms - 1, w});
    for (std::size_t k = n_terms - 1; k-- > 0;)
        append_merged(out, {k, w / 2.0});
}

} // namespace

void ProductFormula::validate() const {
    if (order != 1 && order != 2 && order != 4 && order != 6)
        throw ConfigError("trotter order must be 1, 2, 4 or 6, got " + std::to_string(order));
    if (steps < 1)
        throw ConfigError("trotter steps must be at least 1, got " + std::to_string(steps));
}

std::vector<double> StageSchedule::term_totals(std::size_t n_terms) const {
    std::vector<double> totals(n_terms, 0.0);
    for (const auto &s : stages)
        totals.at(s.term) += s.multiplier;
    return totals;
}

StageSchedule build_schedule(const ProductFormula &formula, std::size_t n_terms) {
    formula.validate();
    if (n_terms == 0)
        throw ConfigError("product formula needs at least one term");
    StageSchedule sched;
    auto &st = sched.stages;
    switch (formula.order) {
    case 1:
        for (std::size_t k = 0; k < n_terms; ++k)
            st.push_back({k, 1.0});
        break;
    case 2:
        append_strang(st, n_terms, 1.0);
        break;
    case 4: {
        const double x1 = 1.0 / (2.0 - std::cbrt(2.0));
        const double x0 = -std::cbrt(2.0) * x1;
        for (double w : {x1, x0, x1})
            append_strang(st, n_terms, w);
        break;
    }
    case 6: {
        using namespace yoshida6;
        for (double w : {w3, w2, w1, w0, w1, w2, w3})
            append_strang(st, n_terms, w);
        break;
    }
    default:
        break;
    }
    return sched;
}

void apply_pauli_exponential(StateVector &psi, const PauliString &term, double t) {
    if (psi.n_qubits() != term.size())
        throw DimensionError("Pauli exponential on " + std::to_string(term.size()) +
                             " qubits applied to a " + std::to_string(psi.n_qubits()) +
                             "-qubit state");
    kernels::pauli_rotation(psi.amplitudes(), term.mask(), term.coefficient() * t);
}

StateVector exp_pauli_string(const StateVector &psi, const PauliString &term, double t) {
    StateVector out = psi;
    apply_pauli_exponential(out, term, t);
    return out;
}

StateVector evolve_trotter(const StateVector &psi, const PauliSum &h, double t,
                           const ProductFormula &formula) {
    if (psi.n_qubits() != h.register_size())
        throw DimensionError("Hamiltonian and state registers differ");
    if (!std::isfinite(t))
        throw NumericalError("evolution time is not finite");
    const StageSchedule sched = build_schedule(formula, h.size());
    const double dt = t / formula.steps;
    StateVector out = psi;
    const auto &terms = h.terms();
    for (int s = 0; s < formula.steps; ++s)
        for (const auto &stage : sched.stages)
            apply_pauli_exponential(out, terms[stage.term], stage.multiplier * dt);
    return out;
}

double signal_error(const SignalDataset &s, const SignalDataset &s_trotter) {
    s.validate();
    s_trotter.validate();
    if (s.size() != s_trotter.size())
        throw DimensionError("signal_error: datasets have " + std::to_string(s.size()) +
                             " and " + std::to_string(s_trotter.size()) + " samples");
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.times[i] != s_trotter.times[i])
            throw DimensionError("signal_error: sample " + std::to_string(i) +
                                 " has mismatched times");
        acc += std::norm(s.values[i] - s_trotter.values[i]);
    }
    return std::sqrt(acc);
}

SignalDataset trotter_magnetization_signal(const SpinSystemSpec &spec,
                                           std::span<const double> times,
                                           const ProductFormula &formula,
                                           Interaction interaction) {
    formula.validate();
    const PauliSum h = build_nmr_hamiltonian(spec, interaction);
    const auto [mx, my] = build_magnetization(spec);
    const StateVector psi0 = hadamard_state(spec.n_spins);
    SignalDataset ds;
    ds.times.assign(times.begin(), times.end());
    ds.values.resize(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
        const StateVector psi = evolve_trotter(psi0, h, times[i], formula);
        const cplx x = expect(psi, mx), y = expect(psi, my);
        ds.values[i] = {x.real() - y.imag(), x.imag() + y.real()};
    });
    ds.provenance.source = Provenance::Source::trotter;
    ds.provenance.trotter_order = formula.order;
    ds.provenance.trotter_steps = formula.steps;
    ds.spec_fingerprint = spec.fingerprint();
    ds.metadata["interaction"] = to_string(interaction);
    ds.metadata["observable"] = "<M_x> + i<M_y>";
    ds.validate();
    return ds;
}

std::vector<TrotterStudyRow> trotter_study(const SpinSystemSpec &spec,
                                           const TrotterStudyConfig &cfg) {
    if (cfg.n_samples.empty() || cfg.orders.empty() || cfg.steps.empty())
        throw ConfigError("trotter_study grid must be non-empty");
    if (!(cfg.t_scale > 0.0))
        throw ConfigError("trotter_study.t_scale must be positive");
    for (std::size_t n : cfg.n_samples)
        if (n == 0)
            throw ConfigError("trotter_study.n_samples entries must be positive");
    for (int o : cfg.orders)
        ProductFormula{o, 1}.validate();
    for (int s : cfg.steps)
        ProductFormula{1, s}.validate();

    const std::size_t n_max = *std::max_element(cfg.n_samples.begin(), cfg.n_samples.end());
    const std::vector<double> times = sample_times(cfg.t_scale, n_max, cfg.seed);
    const SignalDataset exact = magnetization_signal(spec, times, 0.0);

    std::vector<TrotterStudyRow> rows;
    for (int order : cfg.orders) {
        for (int steps : cfg.steps) {
            const SignalDataset approx =
                trotter_magnetization_signal(spec, times, {order, steps});
            std::vector<double> cumulative(n_max);
            double acc = 0.0;
            for (std::size_t i = 0; i < n_max; ++i) {
                acc += std::norm(exact.values[i] - approx.values[i]);
                cumulative[i] = acc;
            }
            for (std::size_t n : cfg.n_samples)
                rows.push_back({order, steps, n, std::sqrt(cumulative[n - 1])});
        }
    }
    return rows;
}

OrderScaling measure_order_scaling(const PauliSum &h, const StateVector &psi, int order,
                                   double t, std::span<const int> steps) {
    if (steps.size() < 2)
        throw ConfigError("order scaling needs at least two step counts");
    const EvolutionOracle oracle(h);
    OrderScaling out;
    out.order = order;
    out.stages_per_step = build_schedule({order, 1}, h.size()).stages.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int s : steps) {
        const double dt = t / s;
        const StateVector approx = evolve_trotter(psi, h, dt, {order, 1});
        const StateVector exact = evolve_exact(oracle, psi, dt);
        double err = 0.0;
        for (std::size_t i = 0; i < psi.dim(); ++i)
            err += std::norm(approx[i] - exact[i]);
        err = std::sqrt(err);
        out.step_sizes.push_back(dt);
        out.errors.push_back(err);
        const double x = std::log(dt), y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = double(steps.size());
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return out;
}

} // namespace nmrqcels
