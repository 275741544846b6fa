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
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <doctest.h>

#include "nmrqcels/dataset.hpp"
#include "nmrqcels/error.hpp"
#include "nmrqcels/hamiltonian.hpp"
#include "nmrqcels/simulator.hpp"
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

SpinSystemSpec random_spec(std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> d(0.5, 9.5), jj(-15.0, 15.0);
    SpinSystemSpec s;
    s.n_spins = n;
    for (std::size_t i = 0; i < n; ++i)
        s.delta_ppm.push_back(d(rng));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            s.couplings[{i, j}] = jj(rng);
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

StateVector from_eigen(const Eigen::VectorXcd &v, std::size_t n) {
    return StateVector(n, std::vector<cplx>(v.data(), v.data() + v.size()));
}

double distance(const StateVector &a, const StateVector &b) {
    double d = 0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        d += std::norm(a[i] - b[i]);
    return std::sqrt(d);
}

} // namespace

TEST_CASE("state construction") {
    const StateVector z(3);
    CHECK(z.dim() == 8);
    CHECK(z[0] == cplx(1.0));
    CHECK(z.norm() == 1.0);
    CHECK(StateVector::basis(2, 3)[3] == cplx(1.0));
    CHECK_THROWS_AS(StateVector::basis(2, 4), DimensionError);
    CHECK_THROWS_AS(StateVector(1, {1.0, 1.0}), NumericalError);
    CHECK_THROWS_AS(StateVector(2, {1.0, 0.0}), DimensionError);
    for (std::size_t n = 1; n <= 3; ++n) {
        const auto h = hadamard_state(n);
        for (std::size_t i = 0; i < h.dim(); ++i)
            CHECK(h[i].real() == doctest::Approx(1.0 / std::sqrt(double(h.dim()))));
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(expect(h, PauliString::single(n, k, Pauli::X, 1.0)).real() == doctest::Approx(1.0));
            CHECK(std::abs(expect(h, PauliString::single(n, k, Pauli::Y, 1.0))) <= 1e-14);
        }
    }
}

TEST_CASE("expectation values") {
    const StateVector plus = hadamard_state(1);
    CHECK(expect(plus, PauliString("X", 1.0)).real() == doctest::Approx(1.0));
    CHECK(std::abs(expect(StateVector(1), PauliString("X", 1.0))) <= 1e-15);
    const auto [mx, my] = build_magnetization(sulfanol());
    CHECK(expect(hadamard_state(2), mx).real() == doctest::Approx(1.0));
    CHECK(std::abs(expect(hadamard_state(2), my)) <= 1e-14);

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const auto psi = from_eigen(oracle::random_state(8, rng), 3);
        const auto h = build_nmr_hamiltonian(random_spec(3, rng));
        CHECK(std::abs(expect(psi, h).imag()) <= 1e-12 * h.one_norm());
    }
}

TEST_CASE("eigendecomposition reconstructs the hamiltonian") {
    std::mt19937_64 rng(21);
    for (std::size_t n = 1; n <= 5; ++n) {
        const EvolutionOracle o(build_nmr_hamiltonian(random_spec(n, rng)));
        CHECK(o.reconstruction_error() <= 1e-12);
        CHECK(o.n_qubits() == n);
    }
}

TEST_CASE("exact evolution matches the matrix exponential") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> tt(-3.0, 3.0);
    for (std::size_t n = 1; n <= 3; ++n) {
        for (int rep = 0; rep < 5; ++rep) {
            const auto spec = random_spec(n, rng);
            const EvolutionOracle o(build_nmr_hamiltonian(spec));
            const Eigen::VectorXcd psi0 = oracle::random_state(std::size_t{1} << n, rng);
            const double t = tt(rng);
            const auto got = evolve_exact(o, from_eigen(psi0, n), t);
            const Eigen::VectorXcd want = oracle::propagator(oracle::nmr_hamiltonian(to_oracle(spec)), t) * psi0;
            CHECK(distance(got, from_eigen(want.normalized(), n)) <= 1e-10);
        }
    }
}

TEST_CASE("evolution properties") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> tt(-50.0, 50.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rep % 3;
        const EvolutionOracle o(build_nmr_hamiltonian(random_spec(n, rng)));
        const auto psi = from_eigen(oracle::random_state(std::size_t{1} << n, rng), n);
        const double t = tt(rng);
        const auto fwd = evolve_exact(o, psi, t);
        CHECK(std::abs(fwd.norm() - 1.0) <= 1e-10);
        if (rep % 10 == 0) {
            CHECK(distance(evolve_exact(o, fwd, -t), psi) <= 1e-10);
            CHECK(distance(evolve_exact(o, psi, 0.0), psi) <= 1e-12);
            const double s = tt(rng);
            CHECK(distance(evolve_exact(o, evolve_exact(o, psi, s), t), evolve_exact(o, psi, s + t)) <=
                  1e-9);
        }
    }
}

TEST_CASE("single spin precesses at its chemical shift") {
    SpinSystemSpec s;
    s.n_spins = 1;
    s.delta_ppm = {3.44};
    s.reference_freq_hz = 1e6;
    const MagnetizationEvaluator ev(s);
    const double w = 2 * pi * 3.44;
    for (double t : {0.0, 0.1, 1.7, -2.5}) {
        const cplx want = 0.5 * std::exp(cplx(0, w * t));
        CHECK(std::abs(ev(t) - want) <= 1e-12);
    }
}

TEST_CASE("magnetization signal closed forms") {
    SUBCASE("zz-only coupling splits each line by J") {
        const auto spec = sulfanol();
        const MagnetizationEvaluator ev(spec, Interaction::zz_only);
        const double w0 = 2 * pi * 3.44, w1 = 2 * pi * 7.40, wj = 2 * pi * 2.32;
        for (double t = -5.0; t <= 5.0; t += 0.37) {
            const cplx want = 0.25 * (std::exp(cplx(0, (w0 + wj / 2) * t)) + std::exp(cplx(0, (w0 - wj / 2) * t)) +
                                      std::exp(cplx(0, (w1 + wj / 2) * t)) + std::exp(cplx(0, (w1 - wj / 2) * t)));
            CHECK(std::abs(ev(t) - want) <= 1e-10);
        }
    }
    SUBCASE("uncoupled spins") {
        std::mt19937_64 rng(2);
        auto spec = random_spec(3, rng);
        spec.couplings.clear();
        const MagnetizationEvaluator ev(spec);
        for (double t = -2.0; t <= 2.0; t += 0.13) {
            cplx want = 0;
            for (double d : spec.delta_ppm)
                want += 0.5 * std::exp(cplx(0, 2 * pi * d * t));
            CHECK(std::abs(ev(t) - want) <= 1e-10);
        }
    }
    SUBCASE("full hamiltonian against the dense oracle") {
        std::mt19937_64 rng(6);
        for (std::size_t n = 2; n <= 3; ++n) {
            const auto spec = random_spec(n, rng);
            const MagnetizationEvaluator ev(spec);
            const auto h = oracle::nmr_hamiltonian(to_oracle(spec));
            for (double t : {0.0, 0.05, 0.8, -1.3})
                CHECK(std::abs(ev(t) - oracle::signal(h, n, t)) <= 1e-10);
        }
    }
}

TEST_CASE("signal at t = 0 equals n/2") {
    std::mt19937_64 rng(1);
    for (std::size_t n = 1; n <= 4; ++n) {
        const MagnetizationEvaluator ev(random_spec(n, rng));
        CHECK(std::abs(ev(0.0) - cplx(0.5 * double(n))) <= 1e-12);
    }
}

TEST_CASE("damped dataset") {
    const auto spec = sulfanol();
    std::vector<double> times;
    for (int i = 0; i < 64; ++i)
        times.push_back(0.05 * i);
    const auto plain = magnetization_signal(spec, times, 0.0);
    const auto damped = magnetization_signal(spec, times, 0.3);
    REQUIRE(damped.size() == 64);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(std::abs(damped.values[i] - plain.values[i] * std::exp(-0.3 * times[i])) <= 1e-14);
    CHECK(damped.provenance.source == Provenance::Source::exact);
    CHECK(damped.spec_fingerprint == spec.fingerprint());
    CHECK(magnetization_signal(spec, {}, 0.0).empty());
    CHECK_THROWS_AS(magnetization_signal(spec, times, -1.0), ConfigError);
}

TEST_CASE("dataset csv round trip") {
    const auto spec = sulfanol();
    std::vector<double> times{0.0, 0.1, 1.0 / 3.0, 2.5};
    auto ds = magnetization_signal(spec, times, 0.1);
    ds.provenance = Provenance::parse("circuit(shots=1000,trotter(order=6,steps=50))");
    const auto path = std::filesystem::temp_directory_path() / "nmrqcels_roundtrip.csv";
    write_signal_csv(ds, path);
    const auto back = read_signal_csv(path);
    std::filesystem::remove(path);
    CHECK(back.times == ds.times);
    CHECK(back.values == ds.values);
    CHECK(back.provenance == ds.provenance);
    CHECK(back.spec_fingerprint == ds.spec_fingerprint);
    CHECK(back.metadata == ds.metadata);
}

TEST_CASE("provenance strings") {
    for (const char *s : {"exact", "trotter(order=4,steps=10)", "circuit(exact)", "circuit(shots=1000)",
                          "circuit(shots=1000,trotter(order=6,steps=50))"})
        CHECK(Provenance::parse(s).describe() == s);
    CHECK_THROWS(Provenance::parse("magic"));
}

TEST_CASE("dataset validation") {
    SignalDataset ds;
    ds.times = {0.0, 1.0};
    ds.values = {1.0};
    CHECK_THROWS_AS(ds.validate(), DimensionError);
    ds.values = {1.0, cplx(std::nan(""), 0.0)};
    CHECK_THROWS_AS(ds.validate(), NumericalError);
}
