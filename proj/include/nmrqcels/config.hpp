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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmrqcels/hamiltonian.hpp"
#include "nmrqcels/lbfgsb.hpp"
#include "nmrqcels/qcels.hpp"
#include "nmrqcels/trotter.hpp"

namespace nmrqcels {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 20240917;

enum class SourceKind { exact, trotter, circuit };

struct SimulateSection {
    SourceKind source = SourceKind::exact;
    double t_start = 0.0;
    double t_stop = 1.0;
    std::size_t n_points = 256;
    double eta = 0.0;
    std::optional<ProductFormula> trotter;
    std::uint64_t shots = 0;
};

struct QcelsSection {
    double epsilon = 1e-3;
    double delta_param = 1.0;
    std::size_t k_peaks = 4;
    std::optional<double> t0;
    bool t0_from_formula = false;
    /// exact or circuit
    SourceKind source = SourceKind::exact;
    std::optional<ProductFormula> trotter;
    std::uint64_t shots = 0;
    QcelsOptions options;
};

struct DftSection {
    double eta = 0.1;
    double dt = 0.05;
    std::size_t n_points = 4096;
};

struct TrotterStudySection {
    TrotterStudyConfig grid;
    /// Total time for the order-scaling fit; 0 picks 4 / sum|coefficients|.
    double slope_t = 0.0;
    std::vector<int> slope_steps{4, 8, 16, 32};
};

struct InlinePeak {
    double amplitude;
    double center_ppm;
};

struct SpectrumSection {
    double eta = 0.1;
    double f_min = 0.0;
    double f_max = 10.0;
    std::size_t n_points = 2001;
    std::vector<InlinePeak> peaks;
    std::optional<std::filesystem::path> peaks_csv;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    SpinSystemSpec spin_system;
    Interaction interaction = Interaction::full;
    std::uint64_t seed = kDefaultSeed;
    std::optional<SimulateSection> simulate;
    std::optional<QcelsSection> qcels;
    std::optional<DftSection> dft_baseline;
    std::optional<TrotterStudySection> trotter_study;
    std::optional<SpectrumSection> spectrum;
    /// Directory of the config file; relative paths resolve against it.
    std::filesystem::path base_dir;
};

SpinSystemSpec parse_spin_system(const nlohmann::json &j, Interaction *interaction = nullptr);
nlohmann::json to_json(const SpinSystemSpec &spec);

RunConfig parse_run_config(const nlohmann::json &j, const std::filesystem::path &base_dir);
RunConfig load_run_config(const std::filesystem::path &path);

/// Reads `amplitude` and `center_ppm` columns of a peaks CSV.
std::vector<InlinePeak> read_peaks_csv(const std::filesystem::path &path);

} // namespace nmrqcels
