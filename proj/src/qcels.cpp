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
#include "nmrqcels/qcels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nmrqcels/error.hpp"
#include "nmrqcels/parallel.hpp"
#include "nmrqcels/rng.hpp"

namespace nmrqcels {

void QcelsHyperParams::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("qcels.epsilon must lie in (0, 1)");
    if (n_samples < 1 || n_iterations < 1 || k_peaks < 1)
        throw ConfigError("qcels needs N, J and K all at least 1");
    if (!(t0 > 0.0) || !std::isfinite(t0))
        throw ConfigError("qcels.t0 must be positive");
}

double t0_formula(double epsilon, double delta_param, std::size_t n_samples) {
    const double exponent =
        -(1.0 + std::log2(1.0 / epsilon)) * delta_param / (double(n_samples) * epsilon);
    return std::exp2(exponent);
}

QcelsHyperParams compute_hyperparams(double epsilon, double delta_param, std::size_t k_peaks,
                                     std::optional<double> t0_override) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("qcels.epsilon must lie in (0, 1), got " + std::to_string(epsilon));
    QcelsHyperParams h;
    h.epsilon = epsilon;
    h.delta_param = delta_param;
    h.k_peaks = k_peaks;
    h.n_samples = std::size_t(std::llround(1.0 / std::sqrt(epsilon)));
    // guard exact powers of two against log2 rounding up
    h.n_iterations = std::size_t(std::ceil(std::log2(1.0 / epsilon) - 1e-12)) + 2;
    h.t0 = t0_override ? *t0_override : t0_formula(epsilon, delta_param, h.n_samples);
    h.validate();
    return h;
}

std::vector<double> sample_times(double t_scale, std::size_t n, std::uint64_t seed) {
    if (!(t_scale > 0.0) || !std::isfinite(t_scale))
        throw ConfigError("time scale must be positive");
    RandomStream rng(seed);
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        const double x = t_scale * (2.0 * rng.uniform() - 1.0);
        const double accept = std::exp(-0.5 * (x / t_scale) * (x / t_scale));
        if (rng.uniform() <= accept)
            out.push_back(x);
    }
    return out;
}

std::string to_string(Normalization n) {
    switch (n) {
    case Normalization::raw: return "raw";
    case Normalization::unit_sum: return "unit_sum";
    case Normalization::unit_norm: return "unit_norm";
    }
    return "raw";
}

PeakSet PeakSet::sorted() const {
    PeakSet out = *this;
    std::stable_sort(out.peaks.begin(), out.peaks.end(),
                     [](const PeakEstimate &a, const PeakEstimate &b) { return a.theta < b.theta; });
    return out;
}

PeakSet PeakSet::normalized(Normalization mode) const {
    PeakSet out = *this;
    out.normalization = mode;
    double scale = 1.0;
    if (mode == Normalization::unit_sum) {
        scale = 0.0;
        for (const auto &p : peaks)
            scale += p.amplitude;
    } else if (mode == Normalization::unit_norm) {
        scale = 0.0;
        for (const auto &p : peaks)
            scale += p.amplitude * p.amplitude;
        scale = std::sqrt(scale);
    }
    if (mode != Normalization::raw && !(scale > 0.0))
        throw NumericalError("cannot normalize a peak set with zero total amplitude");
    for (auto &p : out.peaks)
        p.amplitude /= scale;
    return out;
}

std::vector<double> PeakSet::centers_ppm(const SpinSystemSpec &spec) const {
    std::vector<double> out;
    for (const auto &p : peaks)
        out.push_back(angular_to_ppm(p.theta, spec));
    return out;
}

std::vector<double> PeakSet::amplitudes() const {
    std::vector<double> out;
    for (const auto &p : peaks)
        out.push_back(p.amplitude);
    return out;
}

PeakSet merge_close_peaks(const PeakSet &peaks, double min_separation) {
    const PeakSet s = peaks.sorted();
    PeakSet out;
    out.normalization = peaks.normalization;
    for (const auto &p : s.peaks) {
        if (!out.peaks.empty() && p.theta - out.peaks.back().theta < min_separation) {
            auto &q = out.peaks.back();
            const double w = q.amplitude + p.amplitude;
            q.theta = w > 0 ? (q.theta * q.amplitude + p.theta * p.amplitude) / w
                            : 0.5 * (q.theta + p.theta);
            q.amplitude = w;
        } else {
            out.peaks.push_back(p);
        }
    }
    return out;
}

CostValue cost_and_grad(std::span<const double> r, std::span<const double> theta,
                        std::span<const double> times, std::span<const cplx> values) {
    const std::size_t k_peaks = r.size();
    if (theta.size() != k_peaks)
        throw DimensionError("r and theta lengths differ");
    if (times.size() != values.size())
        throw DimensionError("dataset times and values lengths differ");
    if (times.empty())
        throw DimensionError("cost needs a non-empty dataset");
    const double inv_n = 1.0 / double(times.size());
    CostValue out;
    out.grad_r.assign(k_peaks, 0.0);
    out.grad_theta.assign(k_peaks, 0.0);
    std::vector<cplx> e(k_peaks);
    for (std::size_t n = 0; n < times.size(); ++n) {
        const double t = times[n];
        cplx model{};
        for (std::size_t k = 0; k < k_peaks; ++k) {
            e[k] = std::polar(1.0, -theta[k] * t);
            model += r[k] * e[k];
        }
        const cplx rho = values[n] - model;
        out.value += std::norm(rho);
        for (std::size_t k = 0; k < k_peaks; ++k) {
            // conj(rho) e_k
            const cplx ce = std::conj(rho) * e[k];
            out.grad_r[k] -= 2.0 * ce.real();
            // d model / d theta_k = -i t r_k e_k, so dL = -2 Re(conj(rho)(-i t r_k e_k))
            out.grad_theta[k] -= 2.0 * t * r[k] * ce.imag();
        }
    }
    out.value *= inv_n;
    for (auto &g : out.grad_r)
        g *= inv_n;
    for (auto &g : out.grad_theta)
        g *= inv_n;
    return out;
}

CostValue cost_and_grad(std::span<const double> r, std::span<const double> theta,
                        const SignalDataset &dataset) {
    return cost_and_grad(r, theta, dataset.times, dataset.values);
}

namespace {

constexpr double kDeadAmplitude = 1e-3;
constexpr double kSplitShare = 0.6;

// Moves collapsed terms onto the strongest live terms and splits the
// amplitude between the pair; the model function is unchanged.
void reseed_dead_terms(std::vector<double> &theta, std::vector<double> &r) {
    const double r_max = *std::max_element(r.begin(), r.end());
    if (!(r_max > 0.0))
        return;
    std::vector<std::size_t> live, dead;
    for (std::size_t k = 0; k < r.size(); ++k)
        (r[k] > kDeadAmplitude * r_max ? live : dead).push_back(k);
    std::stable_sort(live.begin(), live.end(),
                     [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });
    for (std::size_t i = 0; i < dead.size() && i < live.size(); ++i) {
        const std::size_t host = live[i], k = dead[i];
        const double total = r[host] + r[k];
        theta[k] = theta[host];
        r[host] = kSplitShare * total;
        r[k] = (1.0 - kSplitShare) * total;
    }
}

double spectral_bound(const SpinSystemSpec &spec, Interaction interaction) {
    return 2.0 * build_nmr_hamiltonian(spec, interaction).one_norm();
}

} // namespace

SimulatorSource::SimulatorSource(const SpinSystemSpec &spec, Interaction interaction)
    : eval_(spec, interaction), bound_(spectral_bound(spec, interaction)) {}

std::vector<cplx> SimulatorSource::evaluate(std::span<const double> times,
                                            std::uint64_t) const {
    std::vector<cplx> out(times.size());
    parallel_for(times.size(), [&](std::size_t i) { out[i] = eval_(-times[i]); });
    return out;
}

CircuitSource::CircuitSource(const SpinSystemSpec &spec, EvolutionChoice evolution,
                             std::uint64_t shots, Interaction interaction)
    : emu_(spec, evolution, interaction), shots_(shots),
      bound_(spectral_bound(spec, interaction)) {}

std::vector<cplx> CircuitSource::evaluate(std::span<const double> times,
                                          std::uint64_t stream_seed) const {
    const ShotConfig cfg{shots_, stream_seed};
    std::vector<cplx> out(times.size());
    parallel_for(times.size(), [&](std::size_t i) { out[i] = emu_.measure(-times[i], cfg, i); });
    return out;
}

Provenance CircuitSource::provenance() const {
    Provenance p;
    p.source = Provenance::Source::circuit;
    p.shots = shots_;
    if (emu_.evolution().trotter) {
        p.trotter_order = emu_.evolution().trotter->order;
        p.trotter_steps = emu_.evolution().trotter->steps;
    }
    return p;
}

IterationResult run_iteration(std::size_t j, const std::optional<PeakSet> &prev,
                              const QcelsHyperParams &hyper, const SignalSource &source,
                              std::uint64_t seed, const QcelsOptions &options) {
    hyper.validate();
    const std::size_t k_peaks = hyper.k_peaks;
    if (prev && prev->size() != k_peaks)
        throw DimensionError("previous peak set has " + std::to_string(prev->size()) +
                             " peaks, expected K = " + std::to_string(k_peaks));
    const double t_j = std::ldexp(hyper.t0, int(j));
    const std::uint64_t level_seed = derive_seed(seed, j);

    IterationResult res;
    auto &tr = res.trace;
    tr.j = j;
    tr.t_j = t_j;
    tr.times = sample_times(t_j, hyper.n_samples, derive_seed(level_seed, 0));
    const std::vector<cplx> values = source.evaluate(tr.times, derive_seed(level_seed, 1));

    double ymax = 0.0;
    for (const auto &v : values)
        ymax = std::max(ymax, std::abs(v));
    const double r_max = ymax > 0.0 ? 2.0 * ymax : 1.0;
    const double half_width = std::numbers::pi / t_j;

    std::vector<double> r0(k_peaks), theta0(k_peaks), center(k_peaks, 0.0);
    for (std::size_t k = 0; k < k_peaks; ++k) {
        if (prev) {
            center[k] = prev->peaks[k].theta;
            theta0[k] = center[k];
            r0[k] = std::clamp(prev->peaks[k].amplitude, 0.0, r_max);
        } else {
            // nearly coincident start; the fit separates the terms itself
            theta0[k] = (double(k) - 0.5 * double(k_peaks - 1)) * 1e-6 * half_width;
            r0[k] = ymax / double(k_peaks);
        }
    }

    if (prev) {
        reseed_dead_terms(center, r0);
        theta0 = center;
    }

    // variables: r_k, then u_k = theta_k T_j
    BoxBounds bounds;
    std::vector<double> x0;
    for (std::size_t k = 0; k < k_peaks; ++k) {
        bounds.lower.push_back(0.0);
        bounds.upper.push_back(r_max);
        x0.push_back(r0[k]);
    }
    for (std::size_t k = 0; k < k_peaks; ++k) {
        tr.theta_lower.push_back(center[k] - half_width);
        tr.theta_upper.push_back(center[k] + half_width);
        bounds.lower.push_back(tr.theta_lower.back() * t_j);
        bounds.upper.push_back(tr.theta_upper.back() * t_j);
        x0.push_back(std::clamp(theta0[k] * t_j, bounds.lower.back(), bounds.upper.back()));
    }

    const Objective objective = [&](std::span<const double> x, std::span<double> g) {
        std::vector<double> theta(k_peaks);
        for (std::size_t k = 0; k < k_peaks; ++k)
            theta[k] = x[k_peaks + k] / t_j;
        const CostValue c = cost_and_grad(x.subspan(0, k_peaks), theta, tr.times, values);
        for (std::size_t k = 0; k < k_peaks; ++k) {
            g[k] = c.grad_r[k];
            g[k_peaks + k] = c.grad_theta[k] / t_j;
        }
        return c.value;
    };
    {
        std::vector<double> g(2 * k_peaks);
        tr.initial_cost = objective(x0, g);
    }

    const OptResult opt = minimize(objective, x0, bounds, options.optimizer);
    tr.status = opt.status;
    tr.optimizer_iterations = opt.iterations;
    tr.message = opt.message;
    tr.cost = opt.f;
    tr.failed = !std::isfinite(opt.f);
    for (std::size_t k = 0; k < k_peaks; ++k) {
        tr.r.push_back(opt.x[k]);
        // keep the reported center inside its interval after unscaling
        tr.theta.push_back(
            std::clamp(opt.x[k_peaks + k] / t_j, tr.theta_lower[k], tr.theta_upper[k]));
    }
    res.peaks.normalization = Normalization::raw;
    for (std::size_t k = 0; k < k_peaks; ++k)
        res.peaks.peaks.push_back({tr.r[k], tr.theta[k]});
    return res;
}

QcelsResult run_pipeline(const SpinSystemSpec &spec, const QcelsHyperParams &hyper,
                         const SignalSource &source, std::uint64_t seed,
                         const QcelsOptions &options) {
    spec.validate();
    hyper.validate();
    QcelsResult out;

    const std::size_t expected = spec.n_spins << (spec.n_spins - 1);
    if (hyper.k_peaks < expected)
        out.warnings.push_back("K = " + std::to_string(hyper.k_peaks) +
                               " is below n_spins * 2^(n_spins-1) = " +
                               std::to_string(expected) + "; some lines may be merged");

    const double t_first = std::ldexp(hyper.t0, 1);
    const double bound = source.frequency_bound();
    if (!(bound * t_first < std::numbers::pi))
        throw ConfigError("qcels.t0 too large: frequencies up to " + std::to_string(bound) +
                          " rad/s alias at T_1 = " + std::to_string(t_first) +
                          " s; choose t0 < " + std::to_string(std::numbers::pi / (2.0 * bound)) +
                          " s or increase spin_system.rescale");

    std::optional<PeakSet> prev;
    for (std::size_t j = 1; j <= hyper.n_iterations; ++j) {
        IterationResult it = run_iteration(j, prev, hyper, source, seed, options);
        out.signal_evaluations += it.trace.times.size();
        const bool failed = it.trace.failed;
        out.trace.push_back(std::move(it.trace));
        if (failed) {
            out.failed = true;
            break;
        }
        prev = std::move(it.peaks);
    }
    if (!prev)
        return out;
    out.raw_peaks = *prev;
    const double sep = std::abs(ppm_to_angular(0.5 * hyper.epsilon, spec));
    out.peaks = merge_close_peaks(*prev, sep).normalized(Normalization::unit_norm).sorted();
    return out;
}

} // namespace nmrqcels
