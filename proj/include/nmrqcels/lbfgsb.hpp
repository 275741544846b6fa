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
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nmrqcels {

/// Objective value; the gradient is written into `grad` (same length as x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct BoxBounds {
    std::vector<double> lower;
    std::vector<double> upper;

    static BoxBounds unbounded(std::size_t n);
    [[nodiscard]] std::size_t size() const { return lower.size(); }
    [[nodiscard]] bool has_finite() const;
    void validate(std::size_t n) const;
};

enum class OptimizerVariant {
    /// Generalized Cauchy point, subspace minimization, strong-Wolfe search.
    lbfgsb,
    /// Two-loop L-BFGS on the free variables with projected backtracking.
    projected_lbfgs,
};

struct OptimizerConfig {
    std::size_t memory = 10;
    double grad_tol = 1e-10;
    double step_tol = 1e-12;
    std::size_t max_iters = 2000;
    OptimizerVariant variant = OptimizerVariant::lbfgsb;

    void validate() const;
};

enum class OptStatus { converged, max_iters, line_search_failure };

std::string to_string(OptStatus status);

struct OptResult {
    std::vector<double> x;
    double f = 0.0;
    /// Infinity norm of the projected gradient at x.
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    OptStatus status = OptStatus::converged;
    std::string message;
};

/// Called once per accepted iterate with (iteration, x, f).
using IterateObserver =
    std::function<void(std::size_t, std::span<const double>, double)>;

OptResult minimize(const Objective &f, std::vector<double> x0, const BoxBounds &bounds,
                   const OptimizerConfig &cfg = {}, const IterateObserver &observer = {});

/// Max over i of |g_i - fd_i| / max(|g_i|, |fd_i|, 1e-8) with central
/// differences of step 1e-6 max(1, |x_i|).
double check_gradient(const Objective &f, std::span<const double> x);

} // namespace nmrqcels
