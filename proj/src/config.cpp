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
#include "nmrqcels/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nmrqcels/error.hpp"

namespace nmrqcels {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string &field, const std::string &what) {
    throw ConfigError("field '" + field + "': " + what);
}

void check_keys(const json &obj, const std::string &path, std::set<std::string> allowed) {
    if (!obj.is_object())
        fail(path, "expected an object");
    allowed.insert("description");
    for (const auto &[k, v] : obj.items())
        if (!allowed.count(k))
            fail(path.empty() ? k : path + "." + k, "unknown key");
}

const json &require(const json &obj, const std::string &key, const std::string &path) {
    if (!obj.contains(key))
        fail(path + key, "missing");
    return obj.at(key);
}

double as_number(const json &v, const std::string &field) {
    if (!v.is_number())
        fail(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        fail(field, "must be finite");
    return d;
}

double positive(const json &v, const std::string &field) {
    const double d = as_number(v, field);
    if (!(d > 0))
        fail(field, "must be positive");
    return d;
}

std::uint64_t as_count(const json &v, const std::string &field, bool allow_zero = false) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0))
        fail(field, "expected a non-negative integer");
    const auto n = v.get<std::uint64_t>();
    if (!allow_zero && n == 0)
        fail(field, "must be at least 1");
    return n;
}

std::uint64_t as_seed(const json &v, const std::string &field) {
    return as_count(v, field, true);
}

std::optional<double> opt_number(const json &obj, const char *key, const std::string &path) {
    if (!obj.contains(key))
        return std::nullopt;
    return as_number(obj.at(key), path + key);
}

ProductFormula parse_formula(const json &v, const std::string &field) {
    check_keys(v, field, {"order", "steps"});
    ProductFormula f;
    f.order = int(as_count(require(v, "order", field + "."), field + ".order"));
    f.steps = int(as_count(require(v, "steps", field + "."), field + ".steps"));
    try {
        f.validate();
    } catch (const ConfigError &e) {
        fail(field, e.what());
    }
    return f;
}

SourceKind parse_source(const json &v, const std::string &field, bool allow_trotter) {
    if (!v.is_string())
        fail(field, "expected a string");
    const auto s = v.get<std::string>();
    if (s == "exact")
        return SourceKind::exact;
    if (s == "circuit")
        return SourceKind::circuit;
    if (s == "trotter" && allow_trotter)
        return SourceKind::trotter;
    fail(field, allow_trotter ? "must be exact, trotter or circuit"
                              : "must be exact or circuit");
}

template <class T>
std::vector<T> parse_list(const json &v, const std::string &field, T (*conv)(const json &,
                                                                              const std::string &)) {
    if (!v.is_array() || v.empty())
        fail(field, "expected a non-empty array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(conv(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

int as_int_count(const json &v, const std::string &f) { return int(as_count(v, f)); }
std::size_t as_size(const json &v, const std::string &f) { return std::size_t(as_count(v, f)); }

SimulateSection parse_simulate(const json &j) {
    const std::string p = "simulate.";
    check_keys(j, "simulate", {"source", "t_start", "t_stop", "n_points", "eta", "trotter", "shots"});
    SimulateSection s;
    if (j.contains("source"))
        s.source = parse_source(j["source"], p + "source", true);
    if (auto v = opt_number(j, "t_start", p))
        s.t_start = *v;
    if (auto v = opt_number(j, "t_stop", p))
        s.t_stop = *v;
    if (j.contains("n_points"))
        s.n_points = as_size(j["n_points"], p + "n_points");
    if (auto v = opt_number(j, "eta", p)) {
        if (*v < 0)
            fail(p + "eta", "must be non-negative");
        s.eta = *v;
    }
    if (j.contains("trotter"))
        s.trotter = parse_formula(j["trotter"], p + "trotter");
    if (j.contains("shots"))
        s.shots = as_count(j["shots"], p + "shots", true);
    if (s.source == SourceKind::trotter && !s.trotter)
        fail(p + "trotter", "required when source is trotter");
    if (s.shots > 0 && s.source != SourceKind::circuit)
        fail(p + "shots", "only meaningful for the circuit source");
    if (!(s.t_stop >= s.t_start))
        fail(p + "t_stop", "must not be below t_start");
    return s;
}

QcelsSection parse_qcels(const json &j) {
    const std::string p = "qcels.";
    check_keys(j, "qcels", {"epsilon", "delta_param", "k_peaks", "t0", "t0_from_formula",
                            "source", "trotter", "shots", "optimizer"});
    QcelsSection q;
    q.epsilon = positive(require(j, "epsilon", p), p + "epsilon");
    if (!(q.epsilon < 1))
        fail(p + "epsilon", "must lie in (0, 1)");
    if (auto v = opt_number(j, "delta_param", p))
        q.delta_param = *v;
    q.k_peaks = as_size(require(j, "k_peaks", p), p + "k_peaks");
    if (j.contains("t0"))
        q.t0 = positive(j["t0"], p + "t0");
    if (j.contains("t0_from_formula")) {
        if (!j["t0_from_formula"].is_boolean())
            fail(p + "t0_from_formula", "expected a boolean");
        q.t0_from_formula = j["t0_from_formula"].get<bool>();
    }
    if (!q.t0 && !q.t0_from_formula)
        fail(p + "t0", "missing (set t0_from_formula to use the closed-form value)");
    if (j.contains("source"))
        q.source = parse_source(j["source"], p + "source", false);
    if (j.contains("trotter")) {
        q.trotter = parse_formula(j["trotter"], p + "trotter");
        if (q.source != SourceKind::circuit)
            fail(p + "trotter", "only used with the circuit source");
    }
    if (j.contains("shots")) {
        q.shots = as_count(j["shots"], p + "shots", true);
        if (q.shots > 0 && q.source != SourceKind::circuit)
            fail(p + "shots", "only meaningful for the circuit source");
    }
    if (j.contains("optimizer")) {
        const auto &o = j["optimizer"];
        const std::string op = p + "optimizer.";
        check_keys(o, p + "optimizer", {"memory", "grad_tol", "step_tol", "max_iters", "variant"});
        auto &c = q.options.optimizer;
        if (o.contains("memory"))
            c.memory = as_size(o["memory"], op + "memory");
        if (o.contains("grad_tol"))
            c.grad_tol = positive(o["grad_tol"], op + "grad_tol");
        if (o.contains("step_tol"))
            c.step_tol = positive(o["step_tol"], op + "step_tol");
        if (o.contains("max_iters"))
            c.max_iters = as_size(o["max_iters"], op + "max_iters");
        if (o.contains("variant")) {
            const auto &v = o["variant"];
            if (v == "lbfgsb")
                c.variant = OptimizerVariant::lbfgsb;
            else if (v == "projected_lbfgs")
                c.variant = OptimizerVariant::projected_lbfgs;
            else
                fail(op + "variant", "must be lbfgsb or projected_lbfgs");
        }
    }
    return q;
}

DftSection parse_dft(const json &j) {
    const std::string p = "dft_baseline.";
    check_keys(j, "dft_baseline", {"eta", "dt", "n_points"});
    DftSection d;
    d.eta = positive(require(j, "eta", p), p + "eta");
    d.dt = positive(require(j, "dt", p), p + "dt");
    d.n_points = as_size(require(j, "n_points", p), p + "n_points");
    if ((d.n_points & (d.n_points - 1)) != 0 || d.n_points < 2)
        fail(p + "n_points", "must be a power of two");
    return d;
}

TrotterStudySection parse_study(const json &j) {
    const std::string p = "trotter_study.";
    check_keys(j, "trotter_study", {"orders", "steps", "n_samples", "t_scale", "slope_t",
                                    "slope_steps"});
    TrotterStudySection s;
    if (j.contains("orders"))
        s.grid.orders = parse_list<int>(j["orders"], p + "orders", as_int_count);
    if (j.contains("steps"))
        s.grid.steps = parse_list<int>(j["steps"], p + "steps", as_int_count);
    s.grid.n_samples =
        parse_list<std::size_t>(require(j, "n_samples", p), p + "n_samples", as_size);
    if (auto v = opt_number(j, "t_scale", p)) {
        if (!(*v > 0))
            fail(p + "t_scale", "must be positive");
        s.grid.t_scale = *v;
    }
    if (auto v = opt_number(j, "slope_t", p)) {
        if (!(*v > 0))
            fail(p + "slope_t", "must be positive");
        s.slope_t = *v;
    }
    if (j.contains("slope_steps"))
        s.slope_steps = parse_list<int>(j["slope_steps"], p + "slope_steps", as_int_count);
    for (std::size_t i = 0; i < s.grid.orders.size(); ++i)
        try {
            ProductFormula{s.grid.orders[i], 1}.validate();
        } catch (const ConfigError &e) {
            fail(p + "orders[" + std::to_string(i) + "]", e.what());
        }
    return s;
}

SpectrumSection parse_spectrum(const json &j, const std::filesystem::path &base) {
    const std::string p = "spectrum.";
    check_keys(j, "spectrum", {"eta", "f_min", "f_max", "n_points", "peaks", "peaks_csv"});
    SpectrumSection s;
    s.eta = positive(require(j, "eta", p), p + "eta");
    if (auto v = opt_number(j, "f_min", p))
        s.f_min = *v;
    if (auto v = opt_number(j, "f_max", p))
        s.f_max = *v;
    if (!(s.f_min < s.f_max))
        fail(p + "f_max", "must exceed f_min");
    if (j.contains("n_points")) {
        s.n_points = as_size(j["n_points"], p + "n_points");
        if (s.n_points < 2)
            fail(p + "n_points", "must be at least 2");
    }
    if (j.contains("peaks")) {
        const auto &arr = j["peaks"];
        if (!arr.is_array())
            fail(p + "peaks", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string f = p + "peaks[" + std::to_string(i) + "]";
            check_keys(arr[i], f, {"amplitude", "center_ppm"});
            const double a = as_number(require(arr[i], "amplitude", f + "."), f + ".amplitude");
            if (a < 0)
                fail(f + ".amplitude", "must be non-negative");
            s.peaks.push_back({a, as_number(require(arr[i], "center_ppm", f + "."),
                                            f + ".center_ppm")});
        }
    }
    if (j.contains("peaks_csv")) {
        if (!j["peaks_csv"].is_string())
            fail(p + "peaks_csv", "expected a path string");
        std::filesystem::path path = j["peaks_csv"].get<std::string>();
        if (path.is_relative())
            path = base / path;
        if (!std::filesystem::exists(path))
            fail(p + "peaks_csv", "file " + path.string() + " does not exist");
        s.peaks_csv = path;
    }
    return s;
}

} // namespace

SpinSystemSpec parse_spin_system(const json &j, Interaction *interaction) {
    const std::string p = "spin_system.";
    check_keys(j, "spin_system", {"n_spins", "delta_ppm", "couplings", "reference_freq_hz",
                                  "field_tesla", "rescale", "interaction"});
    SpinSystemSpec s;
    s.n_spins = as_size(require(j, "n_spins", p), p + "n_spins");
    const auto &d = require(j, "delta_ppm", p);
    if (!d.is_array())
        fail(p + "delta_ppm", "expected an array");
    for (std::size_t i = 0; i < d.size(); ++i)
        s.delta_ppm.push_back(as_number(d[i], p + "delta_ppm[" + std::to_string(i) + "]"));
    if (j.contains("couplings")) {
        const auto &c = j["couplings"];
        if (!c.is_array())
            fail(p + "couplings", "expected an array of [i, j, J_hz]");
        for (std::size_t k = 0; k < c.size(); ++k) {
            const std::string f = p + "couplings[" + std::to_string(k) + "]";
            if (!c[k].is_array() || c[k].size() != 3)
                fail(f, "expected [i, j, J_hz]");
            const auto i = as_count(c[k][0], f + "[0]", true);
            const auto jj = as_count(c[k][1], f + "[1]", true);
            const double hz = as_number(c[k][2], f + "[2]");
            if (!(i < jj) || jj >= s.n_spins)
                fail(f, "spin indices (" + std::to_string(i) + ", " + std::to_string(jj) +
                            ") need 0 <= i < j < n_spins = " + std::to_string(s.n_spins));
            if (!s.couplings.emplace(std::make_pair(i, jj), hz).second)
                fail(f, "duplicate coupling (" + std::to_string(i) + ", " +
                            std::to_string(jj) + ")");
        }
    }
    const bool has_nu = j.contains("reference_freq_hz"), has_b = j.contains("field_tesla");
    if (has_nu == has_b)
        fail(p + "reference_freq_hz", "give exactly one of reference_freq_hz or field_tesla");
    s.reference_freq_hz = has_nu ? positive(j["reference_freq_hz"], p + "reference_freq_hz")
                                 : reference_freq_from_field(
                                       positive(j["field_tesla"], p + "field_tesla"));
    if (j.contains("rescale"))
        s.rescale = positive(j["rescale"], p + "rescale");
    if (j.contains("interaction")) {
        if (!j["interaction"].is_string())
            fail(p + "interaction", "expected a string");
        try {
            const auto it = interaction_from_string(j["interaction"].get<std::string>());
            if (interaction)
                *interaction = it;
        } catch (const ConfigError &e) {
            fail(p + "interaction", e.what());
        }
    }
    s.validate();
    return s;
}

json to_json(const SpinSystemSpec &spec) {
    json j;
    j["n_spins"] = spec.n_spins;
    j["delta_ppm"] = spec.delta_ppm;
    j["couplings"] = json::array();
    for (const auto &[key, hz] : spec.couplings)
        j["couplings"].push_back({key.first, key.second, hz});
    j["reference_freq_hz"] = spec.reference_freq_hz;
    j["rescale"] = spec.rescale;
    return j;
}

RunConfig parse_run_config(const json &j, const std::filesystem::path &base_dir) {
    check_keys(j, "", {"schema_version", "spin_system", "seed", "simulate", "qcels",
                       "dft_baseline", "trotter_study", "spectrum"});
    RunConfig c;
    c.base_dir = base_dir;
    const auto &v = require(j, "schema_version", "");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
        fail("schema_version", "unsupported (expected " + std::to_string(kSchemaVersion) + ")");
    c.spin_system = parse_spin_system(require(j, "spin_system", ""), &c.interaction);
    if (j.contains("seed"))
        c.seed = as_seed(j["seed"], "seed");
    if (j.contains("simulate"))
        c.simulate = parse_simulate(j["simulate"]);
    if (j.contains("qcels"))
        c.qcels = parse_qcels(j["qcels"]);
    if (j.contains("dft_baseline"))
        c.dft_baseline = parse_dft(j["dft_baseline"]);
    if (j.contains("trotter_study"))
        c.trotter_study = parse_study(j["trotter_study"]);
    if (j.contains("spectrum"))
        c.spectrum = parse_spectrum(j["spectrum"], base_dir);
    return c;
}

RunConfig load_run_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_run_config(j, path.parent_path());
}

std::vector<InlinePeak> read_peaks_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read peaks file " + path.string());
    std::string line;
    int col_amp = -1, col_ppm = -1;
    std::vector<InlinePeak> out;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (col_amp < 0) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == "amplitude")
                    col_amp = int(i);
                if (cells[i] == "center_ppm")
                    col_ppm = int(i);
            }
            if (col_amp < 0 || col_ppm < 0)
                throw ConfigError(path.string() + ": header needs amplitude and center_ppm");
            continue;
        }
        try {
            out.push_back({std::stod(cells.at(std::size_t(col_amp))),
                           std::stod(cells.at(std::size_t(col_ppm)))});
        } catch (const std::exception &) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
        }
    }
    return out;
}

} // namespace nmrqcels
