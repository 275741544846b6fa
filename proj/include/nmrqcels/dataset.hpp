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
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace nmrqcels {

using cplx = std::complex<double>;

struct Provenance {
    enum class Source { exact, trotter, circuit };

    Source source = Source::exact;
    /// Product formula behind the evolution; order 0 means exact evolution.
    int trotter_order = 0;
    int trotter_steps = 0;
    /// Circuit readout: 0 means exact probabilities.
    std::uint64_t shots = 0;

    /// e.g. "exact", "trotter(order=4,steps=10)", "circuit(shots=1000,trotter(order=6,steps=50))"
    [[nodiscard]] std::string describe() const;
    static Provenance parse(const std::string &text);

    bool operator==(const Provenance &) const = default;
};

struct SignalDataset {
    std::vector<double> times;
    std::vector<cplx> values;
    Provenance provenance;
    std::string spec_fingerprint;
    /// Free-form bookkeeping written as `# key=value` lines.
    std::map<std::string, std::string> metadata;

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] bool empty() const { return times.empty(); }

    /// Throws NumericalError on non-finite entries or DimensionError on a
    /// times/values length mismatch.
    void validate() const;
};

void write_signal_csv(const SignalDataset &ds, const std::filesystem::path &path);
SignalDataset read_signal_csv(const std::filesystem::path &path);

} // namespace nmrqcels
