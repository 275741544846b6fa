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
#include "nmrqcels/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "nmrqcels/circuits.hpp"
#include "nmrqcels/error.hpp"
#include "nmrqcels/kernels.hpp"
#include "nmrqcels/parallel.hpp"
#include "nmrqcels/qcels.hpp"
#include "nmrqcels/simulator.hpp"
#include "nmrqcels/spectrum.hpp"
#include "nmrqcels/trotter.hpp"

namespace nmrqcels {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path &path) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    return out;
}

void ensure_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("output directory " + dir.string() + " is not writable");
    const fs::path probe = dir / ".nmrqcels_write_probe";
    {
        std::ofstream p(probe);
        if (!p)
            throw ConfigError("output directory " + dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

template <class T> const T &need(const std::optional<T> &section, const char *name) {
    if (!section)
        throw ConfigError(std::string("field '") + name + "': section missing for this command");
    return *section;
}

std::unique_ptr<SignalSource> make_source(const RunConfig &cfg, const QcelsSection &q) {
    if (q.source == SourceKind::circuit)
        return std::make_unique<CircuitSource>(cfg.spin_system, EvolutionChoice{q.trotter},
                                               q.shots, cfg.interaction);
    return std::make_unique<SimulatorSource>(cfg.spin_system, cfg.interaction);
}

void write_peaks(const PeakSet &peaks, const SpinSystemSpec &spec, const fs::path &path) {
    auto out = open_out(path);
    out << "# normalization=" << to_string(peaks.normalization) << '\n';
    out << "k,amplitude,center_ppm,center_rad_s\n";
    for (std::size_t k = 0; k < peaks.size(); ++k)
        out << k << ',' << num(peaks.peaks[k].amplitude) << ','
            << num(angular_to_ppm(peaks.peaks[k].theta, spec)) << ','
            << num(peaks.peaks[k].theta) << '\n';
}

void write_trace(const std::vector<IterationTrace> &trace, std::size_t k_peaks,
                 const SpinSystemSpec &spec, const fs::path &path) {
    auto out = open_out(path);
    out << "iter,T_j,cost";
    for (std::size_t k = 0; k < k_peaks; ++k)
        out << ",theta_" << k;
    out << '\n';
    for (const auto &it : trace) {
        out << it.j << ',' << num(it.t_j) << ',' << num(it.cost);
        for (double th : it.theta)
            out << ',' << num(angular_to_ppm(th, spec));
        out << '\n';
    }
}

void write_grid(const SpectrumGrid &g, const fs::path &path) {
    auto out = open_out(path);
    out << "f_ppm,total";
    for (std::size_t k = 0; k < g.per_peak.size(); ++k)
        out << ",peak_" << k;
    out << '\n';
    for (std::size_t i = 0; i < g.size(); ++i) {
        out << num(g.f_ppm[i]) << ',' << num(g.total[i]);
        for (const auto &curve : g.per_peak)
            out << ',' << num(curve[i]);
        out << '\n';
    }
}

} // namespace

int cmd_simulate(const RunConfig &cfg, const fs::path &out_dir, std::ostream &log) {
    const auto &s = need(cfg.simulate, "simulate");
    ensure_dir(out_dir);
    std::vector<double> times(s.n_points);
    for (std::size_t i = 0; i < s.n_points; ++i)
        times[i] = s.n_points == 1 ? s.t_start
                                   : s.t_start + (s.t_stop - s.t_start) * double(i) /
                                                     double(s.n_points - 1);
    SignalDataset ds;
    switch (s.source) {
    case SourceKind::exact:
        ds = magnetization_signal(cfg.spin_system, times, s.eta, cfg.interaction);
        break;
    case SourceKind::trotter:
        ds = trotter_magnetization_signal(cfg.spin_system, times, *s.trotter, cfg.interaction);
        break;
    case SourceKind::circuit: {
        const ShotConfig shots = s.shots ? ShotConfig::sampled(s.shots, cfg.seed)
                                         : ShotConfig::exact();
        ds = generate_dataset(cfg.spin_system, times, EvolutionChoice{s.trotter}, shots,
                              cfg.interaction);
        break;
    }
    }
    if (s.source != SourceKind::exact) {
        for (std::size_t i = 0; i < ds.size(); ++i)
            ds.values[i] *= std::exp(-s.eta * ds.times[i]);
        ds.metadata["eta"] = num(s.eta);
    }
    write_signal_csv(ds, out_dir / "signal.csv");
    log << "simulate: " << ds.size() << " samples (" << ds.provenance.describe() << ") -> "
        << (out_dir / "signal.csv").string() << '\n';
    return kExitOk;
}

int cmd_estimate(const RunConfig &cfg, const fs::path &out_dir, std::ostream &log) {
    const auto &q = need(cfg.qcels, "qcels");
    ensure_dir(out_dir);
    const auto &spec = cfg.spin_system;
    const QcelsHyperParams hyper =
        compute_hyperparams(q.epsilon, q.delta_param, q.k_peaks,
                            q.t0_from_formula ? std::nullopt : q.t0);
    const auto source = make_source(cfg, q);
    const QcelsResult res = run_pipeline(spec, hyper, *source, cfg.seed, q.options);
    for (const auto &w : res.warnings)
        log << "warning: " << w << '\n';

    write_peaks(res.peaks, spec, out_dir / "peaks.csv");
    write_trace(res.trace, hyper.k_peaks, spec, out_dir / "trace.csv");

    json meta;
    meta["command"] = "estimate";
    meta["spin_system"] = to_json(spec);
    meta["spec_fingerprint"] = spec.fingerprint();
    meta["interaction"] = to_string(cfg.interaction);
    meta["seed"] = cfg.seed;
    meta["source"] = source->provenance().describe();
    meta["hyperparameters"] = {{"epsilon", hyper.epsilon},       {"delta_param", hyper.delta_param},
                               {"overlap_p", hyper.overlap_p},   {"n_samples", hyper.n_samples},
                               {"n_iterations", hyper.n_iterations}, {"t0", hyper.t0},
                               {"k_peaks", hyper.k_peaks},
                               {"t0_from_formula", q.t0_from_formula}};
    const auto &oc = q.options.optimizer;
    meta["optimizer"] = {{"memory", oc.memory},
                         {"grad_tol", oc.grad_tol},
                         {"step_tol", oc.step_tol},
                         {"max_iters", oc.max_iters},
                         {"variant", oc.variant == OptimizerVariant::lbfgsb ? "lbfgsb"
                                                                            : "projected_lbfgs"}};
    meta["signal_evaluations"] = res.signal_evaluations;
    meta["evaluation_budget"] = hyper.n_iterations * hyper.n_samples;
    meta["failed"] = res.failed;
    meta["warnings"] = res.warnings;
    meta["normalization"] = to_string(res.peaks.normalization);
    json iters = json::array();
    for (const auto &it : res.trace)
        iters.push_back({{"j", it.j},
                         {"T_j", it.t_j},
                         {"initial_cost", it.initial_cost},
                         {"cost", it.cost},
                         {"status", to_string(it.status)},
                         {"optimizer_iterations", it.optimizer_iterations},
                         {"failed", it.failed}});
    meta["iterations"] = iters;
    json peaks = json::array();
    const auto ppm = res.peaks.centers_ppm(spec);
    for (std::size_t k = 0; k < res.peaks.size(); ++k)
        peaks.push_back({{"amplitude", res.peaks.peaks[k].amplitude}, {"center_ppm", ppm[k]}});
    meta["peaks"] = peaks;

    if (cfg.dft_baseline && !res.failed) {
        const auto &d = *cfg.dft_baseline;
        const DftBaseline base = fid_dft_baseline(spec, d.eta, d.dt, d.n_points, cfg.interaction);
        const auto maxima = find_maxima(base.grid, res.peaks.size());
        double worst_bins = 0.0;
        for (double c : ppm) {
            double best = INFINITY;
            for (double m : maxima)
                best = std::min(best, std::abs(m - c));
            worst_bins = std::max(worst_bins, best / base.bin_width_ppm);
        }
        meta["dft_baseline"] = {{"eta", d.eta},
                                {"dt", d.dt},
                                {"n_points", d.n_points},
                                {"signal_evaluations", base.signal_evaluations},
                                {"bin_width_ppm", base.bin_width_ppm},
                                {"maxima_ppm", maxima},
                                {"max_offset_bins", worst_bins}};
        log << "dft baseline: " << base.signal_evaluations << " evaluations, maxima within "
            << worst_bins << " bins of the fitted centers\n";
    }
    {
        auto out = open_out(out_dir / "run.json");
        out << meta.dump(2) << '\n';
    }

    log << "estimate: J=" << hyper.n_iterations << " N=" << hyper.n_samples
        << " signal evaluations=" << res.signal_evaluations << '\n';
    for (std::size_t k = 0; k < res.peaks.size(); ++k) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  peak %zu: center %.6f ppm, amplitude %.5f\n", k,
                      ppm[k], res.peaks.peaks[k].amplitude);
        log << buf;
    }
    if (res.failed) {
        log << "estimate: optimizer failed at iteration " << res.trace.back().j << ": "
            << res.trace.back().message << '\n';
        return kExitOptimizer;
    }
    return kExitOk;
}

int cmd_trotter_study(const RunConfig &cfg, const fs::path &out_dir, std::ostream &log) {
    const auto &s = need(cfg.trotter_study, "trotter_study");
    ensure_dir(out_dir);
    TrotterStudyConfig grid = s.grid;
    grid.seed = cfg.seed;
    const auto rows = trotter_study(cfg.spin_system, grid);
    {
        auto out = open_out(out_dir / "trotter_study.csv");
        out << "order,steps,n_samples,R\n";
        for (const auto &r : rows)
            out << r.order << ',' << r.steps << ',' << r.n_samples << ',' << num(r.r) << '\n';
    }
    const PauliSum h = build_nmr_hamiltonian(cfg.spin_system, cfg.interaction);
    const double t = s.slope_t > 0 ? s.slope_t : 4.0 / h.one_norm();
    const StateVector psi = hadamard_state(cfg.spin_system.n_spins);
    {
        auto out = open_out(out_dir / "trotter_orders.csv");
        out << "order,stages_per_step,slope\n";
        for (int order : grid.orders) {
            const auto sc = measure_order_scaling(h, psi, order, t, s.slope_steps);
            out << order << ',' << sc.stages_per_step << ',' << num(sc.slope) << '\n';
            log << "order " << order << ": " << sc.stages_per_step
                << " stages per step, local error slope " << sc.slope << '\n';
        }
    }
    log << "trotter-study: " << rows.size() << " cells -> "
        << (out_dir / "trotter_study.csv").string() << '\n';
    return kExitOk;
}

int cmd_spectrum(const RunConfig &cfg, const fs::path &out_dir, std::ostream &log,
                 const std::optional<fs::path> &peaks_csv) {
    const auto &s = need(cfg.spectrum, "spectrum");
    std::vector<InlinePeak> inline_peaks = s.peaks;
    if (peaks_csv)
        inline_peaks = read_peaks_csv(*peaks_csv);
    else if (s.peaks_csv)
        inline_peaks = read_peaks_csv(*s.peaks_csv);
    if (inline_peaks.empty())
        throw ConfigError("field 'spectrum.peaks': no peaks to render");
    ensure_dir(out_dir);
    PeakSet peaks;
    for (const auto &p : inline_peaks)
        peaks.peaks.push_back({p.amplitude, ppm_to_angular(p.center_ppm, cfg.spin_system)});
    const SpectrumGrid g =
        lorentzian_render(peaks, cfg.spin_system, s.eta, s.f_min, s.f_max, s.n_points);
    write_grid(g, out_dir / "spectrum.csv");
    log << "spectrum: " << g.size() << " points, " << peaks.size() << " peaks -> "
        << (out_dir / "spectrum.csv").string() << '\n';
    return kExitOk;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Spin-system NMR simulation and MM-QCELS spectral estimation"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Override the configured seed");
    app.add_option("--threads", threads, "Worker thread cap (0 = hardware)");
    app.fallthrough();

    auto *sim = app.add_subcommand("simulate", "Write a magnetization time series");
    auto *est = app.add_subcommand("estimate", "Run the MM-QCELS peak estimator");
    auto *study = app.add_subcommand("trotter-study", "Product-formula signal error study");
    auto *spec = app.add_subcommand("spectrum", "Render peaks as Lorentzian lines");
    std::string peaks_path;
    spec->add_option("--peaks", peaks_path, "Peaks CSV (overrides the config)");

    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (threads > 0)
            set_max_threads(threads);
        RunConfig cfg = load_run_config(config_path);
        if (seed)
            cfg.seed = *seed;
        if (*sim)
            return cmd_simulate(cfg, out_dir, out);
        if (*est)
            return cmd_estimate(cfg, out_dir, out);
        if (*study)
            return cmd_trotter_study(cfg, out_dir, out);
        std::optional<fs::path> p;
        if (!peaks_path.empty()) {
            if (!fs::exists(peaks_path))
                throw ConfigError("field '--peaks': file " + peaks_path + " does not exist");
            p = peaks_path;
        }
        return cmd_spectrum(cfg, out_dir, out, p);
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DimensionError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

} // namespace nmrqcels
