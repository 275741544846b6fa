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
#include <vector>

#include "nmrqcels/hamiltonian.hpp"
#include "nmrqcels/qcels.hpp"

namespace nmrqcels {

struct SpectrumGrid {
    /// Strictly increasing ppm axis.
    std::vector<double> f_ppm;
    std::vector<double> total;
    /// One curve per peak; empty for the DFT baseline.
    std::vector<std::vector<double>> per_peak;
    double eta = 0.0;

    [[nodiscard]] std::size_t size() const { return f_ppm.size(); }
};

/// sum_k A_k eta / (eta^2 + (omega(f) - theta_k)^2) with omega(f) the
/// internal angular frequency of f ppm.
SpectrumGrid lorentzian_render(const PeakSet &peaks, const SpinSystemSpec &spec, double eta,
                               double f_min, double f_max, std::size_t n_points);

struct DftBaseline {
    /// Real part of the spectrum on an ascending ppm axis.
    SpectrumGrid grid;
    /// Complex spectrum in the same order.
    std::vector<std::complex<double>> spectrum;
    double bin_width_ppm = 0.0;
    std::size_t signal_evaluations = 0;
    /// sum |x_n|^2 dt and sum |X_k|^2 df
    double fid_energy = 0.0;
    double spectrum_energy = 0.0;
};

/// Uniformly sampled FID e^{-eta t} M(t), transformed with the kernel
/// e^{-2 pi i f t} so lines appear at +delta.
DftBaseline fid_dft_baseline(const SpinSystemSpec &spec, double eta, double dt,
                             std::size_t n_points, Interaction interaction = Interaction::full);

/// Transition lines of the magnetization signal from exact diagonalization:
/// theta = E_a - E_b with weight conj(c_a) c_b <a|M|b>, for |weight| above
/// `min_weight`. Lines closer than `merge_tol` (rad/s) are combined.
PeakSet exact_transition_peaks(const SpinSystemSpec &spec,
                               Interaction interaction = Interaction::full,
                               double min_weight = 1e-12, double merge_tol = 1e-9);

/// One line per spin at delta_k with amplitude 1/2.
PeakSet analytic_highfield_peaks(const SpinSystemSpec &spec);

/// delta_0 +- J/2 and delta_1 +- J/2, amplitude 1/4 each.
PeakSet analytic_zz_peaks(const SpinSystemSpec &spec);

/// Ppm positions of the `count` tallest local maxima, ascending.
std::vector<double> find_maxima(const SpectrumGrid &grid, std::size_t count);

/// Trapezoid integral of the total curve over the angular axis.
double integrate_angular(const SpectrumGrid &grid, const SpinSystemSpec &spec);

} // namespace nmrqcels
