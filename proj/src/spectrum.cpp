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
#include "nmrqcels/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fftw3.h>

#include "nmrqcels/error.hpp"
#include "nmrqcels/parallel.hpp"
#include "nmrqcels/simulator.hpp"

namespace nmrqcels {

SpectrumGrid lorentzian_render(const PeakSet &peaks, const SpinSystemSpec &spec, double eta,
                               double f_min, double f_max, std::size_t n_points) {
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw ConfigError("spectrum.eta must be positive");
    if (!(f_min < f_max) || !std::isfinite(f_min) || !std::isfinite(f_max))
        throw ConfigError("spectrum.f_min must be below spectrum.f_max");
    if (n_points < 2)
        throw ConfigError("spectrum.n_points must be at least 2");
    SpectrumGrid g;
    g.eta = eta;
    g.f_ppm.resize(n_points);
    g.total.assign(n_points, 0.0);
    g.per_peak.assign(peaks.size(), std::vector<double>(n_points, 0.0));
    const double step = (f_max - f_min) / double(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i)
        g.f_ppm[i] = i + 1 == n_points ? f_max : f_min + step * double(i);
    parallel_for(n_points, [&](std::size_t i) {
        const double w = ppm_to_angular(g.f_ppm[i], spec);
        double sum = 0.0;
        for (std::size_t k = 0; k < peaks.size(); ++k) {
            const double d = w - peaks.peaks[k].theta;
            const double v = peaks.peaks[k].amplitude * eta / (eta * eta + d * d);
            g.per_peak[k][i] = v;
            sum += v;
        }
        g.total[i] = sum;
    });
    return g;
}

PeakSet exact_transition_peaks(const SpinSystemSpec &spec, Interaction interaction,
                               double min_weight, double merge_tol) {
    const MagnetizationEvaluator eval(spec, interaction);
    const auto &oracle = eval.oracle();
    const Eigen::MatrixXcd &v = oracle.eigenvectors();
    const Eigen::VectorXd &e = oracle.eigenvalues();
    const Eigen::MatrixXcd m = pauli_sum_to_dense(eval.mx()) +
                               cplx(0.0, 1.0) * pauli_sum_to_dense(eval.my());
    const Eigen::MatrixXcd mv = v.adjoint() * m * v;
    const StateVector psi0 = hadamard_state(spec.n_spins);
    const Eigen::VectorXcd c =
        v.adjoint() * Eigen::Map<const Eigen::VectorXcd>(psi0.amplitudes().data(),
                                                          Eigen::Index(psi0.dim()));
    std::vector<std::pair<double, cplx>> lines;
    for (Eigen::Index a = 0; a < e.size(); ++a)
        for (Eigen::Index b = 0; b < e.size(); ++b) {
            const cplx w = std::conj(c[a]) * c[b] * mv(a, b);
            if (std::abs(w) > min_weight)
                lines.emplace_back(e[a] - e[b], w);
        }
    std::sort(lines.begin(), lines.end(),
              [](const auto &x, const auto &y) { return x.first < y.first; });
    std::vector<std::pair<double, cplx>> merged;
    for (const auto &l : lines) {
        if (!merged.empty() && l.first - merged.back().first < merge_tol)
            merged.back().second += l.second;
        else
            merged.push_back(l);
    }
    PeakSet out;
    for (const auto &[theta, w] : merged)
        if (std::abs(w) > min_weight)
            out.peaks.push_back({std::abs(w), theta});
    return out;
}

DftBaseline fid_dft_baseline(const SpinSystemSpec &spec, double eta, double dt,
                             std::size_t n_points, Interaction interaction) {
    if (!(eta > 0.0))
        throw ConfigError("dft_baseline.eta must be positive");
    if (!(dt > 0.0))
        throw ConfigError("dft_baseline.dt must be positive");
    if (n_points < 2 || !std::has_single_bit(n_points))
        throw ConfigError("dft_baseline.n_points must be a power of two");
    const double nyquist = std::numbers::pi / dt;
    for (const auto &p : exact_transition_peaks(spec, interaction).peaks)
        if (std::abs(p.theta) > nyquist)
            throw ConfigError("dft_baseline.dt too large: line at " +
                              std::to_string(angular_to_ppm(p.theta, spec)) + " ppm (" +
                              std::to_string(p.theta) + " rad/s) exceeds the Nyquist limit " +
                              std::to_string(nyquist) + " rad/s");

    std::vector<double> times(n_points);
    for (std::size_t n = 0; n < n_points; ++n)
        times[n] = dt * double(n);
    const SignalDataset fid = magnetization_signal(spec, times, eta, interaction);

    const int len = int(n_points);
    fftw_complex *buf = fftw_alloc_complex(n_points);
    fftw_plan plan = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    DftBaseline out;
    for (std::size_t n = 0; n < n_points; ++n) {
        buf[n][0] = fid.values[n].real();
        buf[n][1] = fid.values[n].imag();
        out.fid_energy += std::norm(fid.values[n]) * dt;
    }
    fftw_execute(plan);
    const double df = 1.0 / (double(n_points) * dt);
    out.spectrum.resize(n_points);
    out.grid.f_ppm.resize(n_points);
    out.grid.total.resize(n_points);
    out.grid.eta = eta;
    // reorder so frequencies run from -N/2 to N/2 - 1
    for (std::size_t i = 0; i < n_points; ++i) {
        const std::size_t k = (i + n_points / 2) % n_points;
        const double f = (double(i) - double(n_points / 2)) * df;
        const std::complex<double> x(buf[k][0] * dt, buf[k][1] * dt);
        out.spectrum[i] = x;
        out.grid.f_ppm[i] = angular_to_ppm(2.0 * std::numbers::pi * f, spec);
        out.grid.total[i] = x.real();
        out.spectrum_energy += std::norm(x) * df;
    }
    fftw_destroy_plan(plan);
    fftw_free(buf);
    out.bin_width_ppm = angular_to_ppm(2.0 * std::numbers::pi * df, spec);
    out.signal_evaluations = n_points;
    return out;
}

PeakSet analytic_highfield_peaks(const SpinSystemSpec &spec) {
    spec.validate();
    PeakSet out;
    for (double d : spec.delta_ppm)
        out.peaks.push_back({0.5, ppm_to_angular(d, spec)});
    return out.sorted();
}

PeakSet analytic_zz_peaks(const SpinSystemSpec &spec) {
    spec.validate();
    if (spec.n_spins != 2 || spec.couplings.size() > 1)
        throw ConfigError("ZZ splitting closed form needs exactly two spins and one coupling");
    const double j = spec.couplings.empty() ? 0.0 : spec.couplings.begin()->second;
    const double half = hz_to_angular(j, spec) / 2.0;
    PeakSet out;
    for (double d : spec.delta_ppm) {
        const double w = ppm_to_angular(d, spec);
        out.peaks.push_back({0.25, w - half});
        out.peaks.push_back({0.25, w + half});
    }
    return out.sorted();
}

std::vector<double> find_maxima(const SpectrumGrid &grid, std::size_t count) {
    std::vector<std::size_t> idx;
    const auto &y = grid.total;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] && y[i] >= y[i + 1])
            idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
    if (idx.size() > count)
        idx.resize(count);
    std::vector<double> out;
    for (std::size_t i : idx)
        out.push_back(grid.f_ppm[i]);
    std::sort(out.begin(), out.end());
    return out;
}

double integrate_angular(const SpectrumGrid &grid, const SpinSystemSpec &spec) {
    double acc = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double dw =
            ppm_to_angular(grid.f_ppm[i], spec) - ppm_to_angular(grid.f_ppm[i - 1], spec);
        acc += 0.5 * (grid.total[i] + grid.total[i - 1]) * dw;
    }
    return acc;
}

} // namespace nmrqcels
