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
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <doctest.h>

#include "nmrqcels/error.hpp"
#include "nmrqcels/qcels.hpp"
#include "nmrqcels/rng.hpp"
#include "oracles.hpp"

using namespace nmrqcels;
using std::numbers::pi;

namespace {

SpinSystemSpec sulfanol() {
    SpinSystemSpec s;
    s.n_spins = 2;
    s.delta_ppm = {3.44, 7.40};
    s.couplings[{0, 1}] = 2.32;
    s.reference_freq_hz = 1e6;
    return s;
}

oracle::Spin to_oracle(const SpinSystemSpec &s) {
    oracle::Spin o;
    o.delta_ppm = s.delta_ppm;
    for (auto [ij, hz] : s.couplings)
        o.couplings.emplace_back(ij.first, ij.second, hz);
    o.nu = s.reference_freq_hz;
    o.rescale = s.rescale;
    return o;
}

/// sum_k r_k exp(-i theta_k t)
class SyntheticSource final : public SignalSource {
  public:
    SyntheticSource(std::vector<double> r, std::vector<double> theta)
        : r_(std::move(r)), theta_(std::move(theta)) {}
    std::vector<cplx> evaluate(std::span<const double> times, std::uint64_t) const override {
        ++calls;
        evaluations += times.size();
        std::vector<cplx> out;
        for (double t : times) {
            cplx v = 0;
            for (std::size_t k = 0; k < r_.size(); ++k)
                v += r_[k] * std::exp(cplx(0, -theta_[k] * t));
            out.push_back(v);
        }
        return out;
    }
    [[nodiscard]] Provenance provenance() const override { return {}; }
    [[nodiscard]] double frequency_bound() const override {
        double m = 0;
        for (double t : theta_)
            m = std::max(m, std::abs(t));
        return 2 * m;
    }
    mutable std::size_t calls = 0;
    mutable std::size_t evaluations = 0;

  private:
    std::vector<double> r_, theta_;
};

QcelsHyperParams hyper_for(double eps, std::size_t k, double t0) {
    return compute_hyperparams(eps, 1.0, k, t0);
}

} // namespace

TEST_CASE("hyperparameters") {
    const auto a = compute_hyperparams(1e-3, 1.0, 4, 0.0015);
    CHECK(a.n_samples == 32);
    CHECK(a.n_iterations == 12);
    CHECK(a.t0 == 0.0015);
    const auto b = compute_hyperparams(1e-5, 1.0, 4, 0.00015);
    CHECK(b.n_samples == 316);
    CHECK(b.n_iterations == 19);
    const auto c = compute_hyperparams(0.25, 1.0, 1, 1.0);
    CHECK(c.n_samples == 2);
    CHECK(c.n_iterations == 4);
    const auto f = compute_hyperparams(1e-3, 1.0, 4, std::nullopt);
    CHECK(f.t0 == t0_formula(1e-3, 1.0, 32));
    CHECK(f.t0 > 0.0);
    CHECK_THROWS_AS(compute_hyperparams(0.0, 1.0, 4, 1.0), ConfigError);
    CHECK_THROWS_AS(compute_hyperparams(1.0, 1.0, 4, 1.0), ConfigError);
    CHECK_THROWS_AS(compute_hyperparams(1e-3, 1.0, 0, 1.0), ConfigError);
    CHECK_THROWS_AS(compute_hyperparams(1e-3, 1.0, 4, -1.0), ConfigError);
}

TEST_CASE("truncated gaussian sampling") {
    const double t = 20.0;
    const auto xs = sample_times(t, 100000, 12345);
    REQUIRE(xs.size() == 100000);
    for (double x : xs)
        CHECK_MESSAGE(std::abs(x) <= t, x);
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double ss = 0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / double(xs.size()));
    CHECK(sd == doctest::Approx(oracle::truncated_gaussian_std(t)).epsilon(0.02));
    CHECK(std::abs(mean) <= 0.02 * t);

    CHECK(sample_times(1.0, 50, 7) == sample_times(1.0, 50, 7));
    CHECK(sample_times(1.0, 50, 7) != sample_times(1.0, 50, 8));
    const auto pre = sample_times(1.0, 10, 7);
    const auto longer = sample_times(1.0, 50, 7);
    CHECK(std::equal(pre.begin(), pre.end(), longer.begin()));
    CHECK_THROWS_AS(sample_times(0.0, 5, 1), ConfigError);
}

TEST_CASE("cost function") {
    std::vector<double> times{-1.0, -0.3, 0.0, 0.2, 0.9, 1.7};
    const std::vector<double> r{0.7, 0.2}, th{3.0, -5.5};
    const SyntheticSource src(r, th);
    const auto y = src.evaluate(times, 0);
    CHECK(cost_and_grad(r, th, times, y).value <= 1e-30);

    const std::vector<double> zero{0.0}, any{1.3};
    double mean_sq = 0;
    for (const auto &v : y)
        mean_sq += std::norm(v);
    mean_sq /= double(y.size());
    CHECK(cost_and_grad(zero, any, times, y).value == doctest::Approx(mean_sq).epsilon(1e-14));

    SignalDataset ds;
    ds.times = times;
    ds.values = y;
    CHECK(cost_and_grad(zero, any, ds).value == doctest::Approx(mean_sq).epsilon(1e-14));

    CHECK_THROWS_AS(cost_and_grad(r, any, times, y), DimensionError);
    CHECK_THROWS_AS(cost_and_grad(r, th, std::vector<double>{0.0}, y), DimensionError);
    CHECK_THROWS_AS(cost_and_grad(r, th, std::vector<double>{}, std::vector<cplx>{}), DimensionError);
}

TEST_CASE("cost gradient matches finite differences") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ur(0.0, 1.0), ut(-50.0, 50.0), tt(-0.05, 0.05);
    std::normal_distribution<double> g;
    double worst = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t k = 1 + std::size_t(rep % 4);
        std::vector<double> times(32);
        std::vector<cplx> values(32);
        for (std::size_t i = 0; i < 32; ++i) {
            times[i] = tt(rng);
            values[i] = {g(rng), g(rng)};
        }
        std::vector<double> x(2 * k);
        for (std::size_t i = 0; i < k; ++i) {
            x[i] = ur(rng);
            x[k + i] = ut(rng);
        }
        const Objective f = [&](std::span<const double> v, std::span<double> grad) {
            const auto c = cost_and_grad(v.subspan(0, k), v.subspan(k, k), times, values);
            std::copy(c.grad_r.begin(), c.grad_r.end(), grad.begin());
            std::copy(c.grad_theta.begin(), c.grad_theta.end(), grad.begin() + std::ptrdiff_t(k));
            return c.value;
        };
        worst = std::max(worst, check_gradient(f, x));
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("single iteration") {
    const SyntheticSource src({0.6, 0.4}, {30.0, 41.0});
    const auto hyper = hyper_for(1e-3, 2, 0.01);
    const auto first = run_iteration(1, std::nullopt, hyper, src, 5);
    CHECK(first.trace.t_j == 0.02);
    CHECK(first.trace.times.size() == 32);
    const auto second = run_iteration(2, first.peaks, hyper, src, 5);
    CHECK(second.trace.t_j == 0.04);
    for (std::size_t k = 0; k < 2; ++k) {
        const double w1 = first.trace.theta_upper[k] - first.trace.theta_lower[k];
        const double w2 = second.trace.theta_upper[k] - second.trace.theta_lower[k];
        CHECK(w1 == doctest::Approx(2 * pi / 0.02));
        CHECK(w2 == doctest::Approx(w1 / 2));
        CHECK(second.trace.theta_lower[k] == doctest::Approx(first.peaks.peaks[k].theta - pi / 0.04));
    }
    // warm start: the first cost of level 2 is level 1's optimum on level 2's data
    const auto values = src.evaluate(second.trace.times, 0);
    std::vector<double> r, th;
    for (const auto &p : first.peaks.peaks) {
        r.push_back(p.amplitude);
        th.push_back(p.theta);
    }
    CHECK(second.trace.initial_cost ==
          doctest::Approx(cost_and_grad(r, th, second.trace.times, values).value).epsilon(1e-12));

    PeakSet wrong;
    wrong.peaks.resize(3);
    CHECK_THROWS_AS(run_iteration(2, wrong, hyper, src, 5), DimensionError);
}

TEST_CASE("synthetic exponentials are recovered within epsilon") {
    auto spec = sulfanol();
    const std::vector<double> true_ppm{1.0, 2.5, 4.0, 7.25};
    const std::vector<double> amps{0.3, 0.5, 0.8, 0.4};
    std::vector<double> th;
    for (double p : true_ppm)
        th.push_back(ppm_to_angular(p, spec));
    const SyntheticSource src(amps, th);
    const double eps = 1e-3;
    const auto hyper = hyper_for(eps, 4, 0.0015);
    const auto res = run_pipeline(spec, hyper, src, 77);
    REQUIRE_FALSE(res.failed);
    REQUIRE(res.peaks.size() == 4);
    const auto c = res.peaks.centers_ppm(spec);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(std::abs(c[k] - true_ppm[k]) <= eps);
    const double norm = std::sqrt(0.09 + 0.25 + 0.64 + 0.16);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(res.peaks.peaks[k].amplitude == doctest::Approx(amps[k] / norm).epsilon(1e-3));
    CHECK(res.signal_evaluations == hyper.n_iterations * hyper.n_samples);
    CHECK(src.evaluations == hyper.n_iterations * hyper.n_samples);
    CHECK(res.trace.size() == hyper.n_iterations);
    for (std::size_t j = 0; j < res.trace.size(); ++j)
        CHECK(res.trace[j].t_j == std::ldexp(0.0015, int(j + 1)));
}

TEST_CASE("sulfanol pipeline properties") {
    const auto spec = sulfanol();
    const double eps = 1e-3;
    const auto hyper = hyper_for(eps, 4, 0.0015);
    const SimulatorSource src(spec);
    const auto res = run_pipeline(spec, hyper, src, 20240917);
    REQUIRE_FALSE(res.failed);
    REQUIRE(res.peaks.size() == 4);
    CHECK(res.signal_evaluations == 384);
    CHECK(res.warnings.empty());

    for (const auto &tr : res.trace)
        for (std::size_t k = 0; k < tr.theta.size(); ++k) {
            CHECK(tr.theta[k] >= tr.theta_lower[k]);
            CHECK(tr.theta[k] <= tr.theta_upper[k]);
            CHECK(tr.r[k] >= 0.0);
        }

    const auto c = res.peaks.centers_ppm(spec);
    CHECK(std::is_sorted(c.begin(), c.end()));
    const double d0 = c[1] - c[0], d1 = c[3] - c[2];
    CHECK(std::abs(d0 - d1) <= 10 * eps);
    CHECK(std::abs((c[0] + c[1]) / 2 + (c[2] + c[3]) / 2 - (3.44 + 7.40)) <= 10 * eps);

    const auto lines = oracle::spectral_lines(oracle::nmr_hamiltonian(to_oracle(spec)), 2);
    REQUIRE(lines.size() == 4);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(std::abs(c[k] - angular_to_ppm(lines[k].theta, spec)) <= eps);

    const auto a = res.peaks.amplitudes();
    CHECK(a[1] > a[0]);
    CHECK(a[2] > a[3]);
    double sq = 0;
    for (double v : a)
        sq += v * v;
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-12));

    const auto again = run_pipeline(spec, hyper, src, 20240917);
    CHECK(again.peaks.centers_ppm(spec) == c);
}

namespace {

void check_against_oracle(const SpinSystemSpec &spec, double eps, std::uint64_t seed) {
    const auto lines = oracle::spectral_lines(oracle::nmr_hamiltonian(to_oracle(spec)), spec.n_spins);
    double wmax = 0;
    for (const auto &l : lines)
        wmax = std::max(wmax, l.weight);
    std::size_t k = 0;
    for (const auto &l : lines)
        k += l.weight > 0.01 * wmax ? 1 : 0;
    const SimulatorSource src(spec);
    const double t0 = 0.5 * pi / (4.0 * src.frequency_bound());
    const auto res = run_pipeline(spec, hyper_for(eps, k, t0), src, seed);
    REQUIRE_FALSE(res.failed);
    const auto centers = res.peaks.centers_ppm(spec);
    INFO("n = ", spec.n_spins, ", lines = ", lines.size(), ", K = ", k);
    for (double c : centers) {
        double best = 1e9;
        for (const auto &l : lines)
            best = std::min(best, std::abs(c - angular_to_ppm(l.theta, spec)));
        CHECK(best <= eps);
    }
    for (const auto &l : lines) {
        if (l.weight < 0.05 * wmax)
            continue;
        double best = 1e9;
        for (double c : centers)
            best = std::min(best, std::abs(c - angular_to_ppm(l.theta, spec)));
        CHECK(best <= eps);
    }
}

} // namespace

TEST_CASE("oracle equivalence on random two spin systems") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> d(0.5, 9.5), jj(1.0, 8.0);
    for (int rep = 0; rep < 2; ++rep) {
        SpinSystemSpec spec;
        spec.n_spins = 2;
        spec.reference_freq_hz = 1e6;
        spec.delta_ppm = {d(rng), d(rng)};
        spec.couplings[{0, 1}] = jj(rng);
        check_against_oracle(spec, 1e-3, 11 + rep);
    }
}

TEST_CASE("oracle equivalence on three spin systems") {
    SpinSystemSpec a;
    a.n_spins = 3;
    a.reference_freq_hz = 1e6;
    a.delta_ppm = {3.44, 7.40, 9.0};
    a.couplings[{0, 1}] = 2.32;
    SUBCASE("one isolated spin") { check_against_oracle(a, 1e-4, 11); }

    SpinSystemSpec b;
    b.n_spins = 3;
    b.reference_freq_hz = 1e8;
    b.rescale = 100.0;
    b.delta_ppm = {1.0, 4.0, 7.5};
    b.couplings[{0, 1}] = 6.0;
    b.couplings[{1, 2}] = 4.0;
    SUBCASE("weakly coupled chain") { check_against_oracle(b, 1e-4, 11); }

    b.couplings[{0, 2}] = 2.0;
    SUBCASE("weakly coupled triangle") { check_against_oracle(b, 1e-4, 11); }
}

TEST_CASE("zz-only interaction converges to the closed-form doublets") {
    const auto spec = sulfanol();
    const double eps = 1e-3;
    const SimulatorSource src(spec, Interaction::zz_only);
    const auto res = run_pipeline(spec, hyper_for(eps, 4, 0.0015), src, 20240917);
    const auto c = res.peaks.centers_ppm(spec);
    REQUIRE(c.size() == 4);
    const std::vector<double> want{3.44 - 1.16, 3.44 + 1.16, 7.40 - 1.16, 7.40 + 1.16};
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(std::abs(c[k] - want[k]) <= eps);
}

TEST_CASE("circuit source with exact readout matches the simulator source") {
    const auto spec = sulfanol();
    const auto hyper = hyper_for(1e-3, 4, 0.0015);
    const auto a = run_pipeline(spec, hyper, SimulatorSource(spec), 3);
    const auto b = run_pipeline(spec, hyper, CircuitSource(spec, {}, 0), 3);
    const auto ca = a.peaks.centers_ppm(spec), cb = b.peaks.centers_ppm(spec);
    REQUIRE(ca.size() == cb.size());
    for (std::size_t k = 0; k < ca.size(); ++k)
        CHECK(std::abs(ca[k] - cb[k]) <= 1e-6);
    CHECK(CircuitSource(spec, {ProductFormula{6, 50}}, 1000).provenance().describe() ==
          "circuit(shots=1000,trotter(order=6,steps=50))");
}

TEST_CASE("pipeline guards") {
    auto spec = sulfanol();
    const SimulatorSource src(spec);
    CHECK_THROWS_AS(run_pipeline(spec, hyper_for(1e-3, 4, 0.05), src, 1), ConfigError);
    const auto res = run_pipeline(spec, hyper_for(1e-2, 2, 0.0015), src, 1);
    REQUIRE(res.warnings.size() == 1);
    CHECK(res.warnings[0].find("K = 2") != std::string::npos);
}

TEST_CASE("peak set helpers") {
    PeakSet s;
    s.peaks = {{3.0, 2.0}, {4.0, -1.0}, {0.0, 5.0}};
    const auto sorted = s.sorted();
    CHECK(sorted.peaks[0].theta == -1.0);
    CHECK(sorted.peaks[2].theta == 5.0);
    const auto sum = s.normalized(Normalization::unit_sum);
    double total = 0;
    for (const auto &p : sum.peaks)
        total += p.amplitude;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    const auto l2 = s.normalized(Normalization::unit_norm);
    CHECK(l2.peaks[0].amplitude == doctest::Approx(0.6));
    CHECK(l2.normalization == Normalization::unit_norm);
    PeakSet zero;
    zero.peaks = {{0.0, 1.0}};
    CHECK_THROWS_AS(static_cast<void>(zero.normalized(Normalization::unit_sum)), NumericalError);

    PeakSet close;
    close.peaks = {{1.0, 10.0}, {3.0, 10.4}, {1.0, 20.0}};
    const auto merged = merge_close_peaks(close, 0.5);
    REQUIRE(merged.size() == 2);
    CHECK(merged.peaks[0].amplitude == 4.0);
    CHECK(merged.peaks[0].theta == doctest::Approx(10.3));
    CHECK(merged.peaks[1].theta == 20.0);
}
