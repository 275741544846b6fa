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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmrqcels/circuits.hpp"
#include "nmrqcels/dataset.hpp"
#include "nmrqcels/hamiltonian.hpp"
#include "nmrqcels/lbfgsb.hpp"

namespace nmrqcels {

struct QcelsHyperParams {
    double epsilon = 1e-3;
    double delta_param = 1.0;
    double overlap_p = 0.1;
    std::size_t n_samples = 0;
    double t0 = 0.0;
    std::size_t n_iterations = 0;
    std::size_t k_peaks = 0;

    void validate() const;
};

/// N = round(1/sqrt(eps)), J = ceil(log2(1/eps)) + 2. Without an override
/// t0 comes from t0_formula().
QcelsHyperParams compute_hyperparams(double epsilon, double delta_param, std::size_t k_peaks,
                                     std::optional<double> t0_override);

/// 2^(-(1 + log2(1/eps)) * delta / (N eps)). Available for completeness;
/// the values it produces are far below usable starting times.
double t0_formula(double epsilon, double delta_param, std::size_t n_samples);

/// n draws from a standard-deviation-T Gaussian truncated to [-T, T].
std::vector<double> sample_times(double t_scale, std::size_t n, std::uint64_t seed);

struct PeakEstimate {
    double amplitude = 0.0;
    /// Internal angular unit (rad/s, rescaled).
    double theta = 0.0;
};

enum class Normalization {
    raw,
    /// sum of amplitudes is 1
    unit_sum,
    /// sum of squared amplitudes is 1
    unit_norm,
};

std::string to_string(Normalization n);

struct PeakSet {
    std::vector<PeakEstimate> peaks;
    Normalization normalization = Normalization::raw;

    [[nodiscard]] PeakSet sorted() const;
    [[nodiscard]] PeakSet normalized(Normalization mode) const;
    [[nodiscard]] std::vector<double> centers_ppm(const SpinSystemSpec &spec) const;
    [[nodiscard]] std::vector<double> amplitudes() const;
    [[nodiscard]] std::size_t size() const { return peaks.size(); }
};

/// Merge peaks whose centers are closer than `min_separation` (amplitudes
/// summed, center amplitude-weighted).
PeakSet merge_close_peaks(const PeakSet &peaks, double min_separation);

struct CostValue {
    double value = 0.0;
    std::vector<double> grad_r;
    std::vector<double> grad_theta;
};

/// L = (1/N) sum_n |y_n - sum_k r_k exp(-i theta_k t_n)|^2 and its gradient.
CostValue cost_and_grad(std::span<const double> r, std::span<const double> theta,
                        std::span<const double> times, std::span<const cplx> values);
CostValue cost_and_grad(std::span<const double> r, std::span<const double> theta,
                        const SignalDataset &dataset);

/// Evaluates the fitted signal O(t) = sum_k r_k exp(-i theta_k t) model
/// target at the requested times. The stream seed lets sampled sources
/// stay independent of scheduling.
class SignalSource {
  public:
    virtual ~SignalSource() = default;
    virtual std::vector<cplx> evaluate(std::span<const double> times,
                                       std::uint64_t stream_seed) const = 0;
    [[nodiscard]] virtual Provenance provenance() const = 0;
    /// Upper bound on |theta| over all transition frequencies.
    [[nodiscard]] virtual double frequency_bound() const = 0;
};

/// O(t) = <psi0| U(t)^dagger M U(t) |psi0> with U(t) = exp(+iHt), from
/// exact diagonalization.
class SimulatorSource final : public SignalSource {
  public:
    SimulatorSource(const SpinSystemSpec &spec, Interaction interaction = Interaction::full);
    std::vector<cplx> evaluate(std::span<const double> times,
                               std::uint64_t stream_seed) const override;
    [[nodiscard]] Provenance provenance() const override { return {}; }
    [[nodiscard]] double frequency_bound() const override { return bound_; }

  private:
    MagnetizationEvaluator eval_;
    double bound_;
};

/// Same observable measured through the emulated Hadamard-test circuit.
class CircuitSource final : public SignalSource {
  public:
    CircuitSource(const SpinSystemSpec &spec, EvolutionChoice evolution, std::uint64_t shots,
                  Interaction interaction = Interaction::full);
    std::vector<cplx> evaluate(std::span<const double> times,
                               std::uint64_t stream_seed) const override;
    [[nodiscard]] Provenance provenance() const override;
    [[nodiscard]] double frequency_bound() const override { return bound_; }

  private:
    CircuitEmulator emu_;
    std::uint64_t shots_;
    double bound_;
};

struct IterationTrace {
    std::size_t j = 0;
    double t_j = 0.0;
    std::vector<double> times;
    std::vector<double> r;
    std::vector<double> theta;
    std::vector<double> theta_lower;
    std::vector<double> theta_upper;
    double initial_cost = 0.0;
    double cost = 0.0;
    OptStatus status = OptStatus::converged;
    std::size_t optimizer_iterations = 0;
    bool failed = false;
    std::string message;
};

struct QcelsOptions {
    OptimizerConfig optimizer = default_optimizer();

    /// The cost reaches ~1e-20 on exact data, so the stopping rules are
    /// far tighter than the generic defaults.
    static OptimizerConfig default_optimizer() {
        OptimizerConfig c;
        c.grad_tol = 1e-18;
        c.step_tol = 1e-15;
        c.max_iters = 20000;
        return c;
    }
};

struct IterationResult {
    PeakSet peaks;
    IterationTrace trace;
};

/// One level of the fit at T_j = 2^j t0. Without `prev` the centers start
/// clustered at zero with bounds (-pi/T_j, pi/T_j); with `prev` each center
/// is bounded to theta_prev +- pi/T_j and warm-started there.
IterationResult run_iteration(std::size_t j, const std::optional<PeakSet> &prev,
                              const QcelsHyperParams &hyper, const SignalSource &source,
                              std::uint64_t seed, const QcelsOptions &options = {});

struct QcelsResult {
    /// Unit-norm amplitudes, merged and sorted by center.
    PeakSet peaks;
    /// Last iteration's fit before merging and normalization.
    PeakSet raw_peaks;
    std::vector<IterationTrace> trace;
    std::size_t signal_evaluations = 0;
    std::vector<std::string> warnings;
    bool failed = false;
};

QcelsResult run_pipeline(const SpinSystemSpec &spec, const QcelsHyperParams &hyper,
                         const SignalSource &source, std::uint64_t seed,
                         const QcelsOptions &options = {});

} // namespace nmrqcels
