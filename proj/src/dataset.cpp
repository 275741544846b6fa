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
#include "nmrqcels/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "nmrqcels/error.hpp"

namespace nmrqcels {

std::string Provenance::describe() const {
    const std::string trotter = "trotter(order=" + std::to_string(trotter_order) +
                                ",steps=" + std::to_string(trotter_steps) + ")";
    switch (source) {
    case Source::exact: return "exact";
    case Source::trotter: return trotter;
    case Source::circuit: {
        std::string s = "circuit(";
        s += shots == 0 ? std::string("exact") : "shots=" + std::to_string(shots);
        if (trotter_order != 0)
            s += "," + trotter;
        return s + ")";
    }
    }
    return "exact";
}

Provenance Provenance::parse(const std::string &text) {
    static const std::regex trotter_re(R"(trotter\(order=(\d+),steps=(\d+)\))");
    static const std::regex shots_re(R"(shots=(\d+))");
    Provenance p;
    std::smatch m;
    if (text == "exact")
        return p;
    if (text.rfind("circuit(", 0) == 0) {
        p.source = Source::circuit;
        if (std::regex_search(text, m, shots_re))
            p.shots = std::stoull(m[1]);
    } else if (text.rfind("trotter(", 0) == 0) {
        p.source = Source::trotter;
    } else {
        throw ConfigError("unrecognized provenance '" + text + "'");
    }
    if (std::regex_search(text, m, trotter_re)) {
        p.trotter_order = std::stoi(m[1]);
        p.trotter_steps = std::stoi(m[2]);
    } else if (p.source == Source::trotter) {
        throw ConfigError("unrecognized provenance '" + text + "'");
    }
    return p;
}

void SignalDataset::validate() const {
    if (times.size() != values.size())
        throw DimensionError("dataset has " + std::to_string(times.size()) + " times but " +
                             std::to_string(values.size()) + " values");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]))
            throw NumericalError("dataset time " + std::to_string(i) + " is not finite");
        if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
            throw NumericalError("dataset value " + std::to_string(i) + " is not finite");
    }
}

void write_signal_csv(const SignalDataset &ds, const std::filesystem::path &path) {
    ds.validate();
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << "# provenance=" << ds.provenance.describe() << '\n';
    out << "# spec=" << ds.spec_fingerprint << '\n';
    for (const auto &[k, v] : ds.metadata)
        out << "# " << k << '=' << v << '\n';
    out << "t_seconds,re,im\n";
    char buf[128];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", ds.times[i],
                      ds.values[i].real(), ds.values[i].imag());
        out << buf;
    }
    if (!out)
        throw ConfigError("failed writing " + path.string());
}

SignalDataset read_signal_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read " + path.string());
    SignalDataset ds;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const auto body = line.substr(line.find_first_not_of("# "));
            const auto eq = body.find('=');
            if (eq == std::string::npos)
                continue;
            const auto key = body.substr(0, eq), value = body.substr(eq + 1);
            if (key == "provenance")
                ds.provenance = Provenance::parse(value);
            else if (key == "spec")
                ds.spec_fingerprint = value;
            else
                ds.metadata[key] = value;
            continue;
        }
        if (!header) {
            if (line != "t_seconds,re,im")
                throw ConfigError(path.string() + ": expected header t_seconds,re,im");
            header = true;
            continue;
        }
        std::istringstream row(line);
        double t, re, im;
        char c1, c2;
        if (!(row >> t >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',')
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": malformed row");
        ds.times.push_back(t);
        ds.values.emplace_back(re, im);
    }
    ds.validate();
    return ds;
}

} // namespace nmrqcels
