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
#include "nmrqcels/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>

#include <Eigen/Dense>

#include "nmrqcels/error.hpp"

namespace nmrqcels {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;
constexpr int kMaxLineSearchEvals = 30;
constexpr double kFlatTol = 1e3 * kEps;

struct Problem {
    const Objective &f;
    Vec lower, upper;
    std::size_t evaluations = 0;

    double eval(const Vec &x, Vec &g) {
        ++evaluations;
        g.resize(x.size());
        return f(std::span<const double>(x.data(), std::size_t(x.size())),
                 std::span<double>(g.data(), std::size_t(g.size())));
    }

    Vec project(const Vec &x) const { return x.cwiseMax(lower).cwiseMin(upper); }

    double projected_gradient_norm(const Vec &x, const Vec &g) const {
        return (project(x - g) - x).lpNorm<Eigen::Infinity>();
    }

    /// Largest alpha with x + alpha d inside the box.
    double max_step(const Vec &x, const Vec &d) const {
        double a = kInf;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (d[i] > 0 && std::isfinite(upper[i]))
                a = std::min(a, (upper[i] - x[i]) / d[i]);
            else if (d[i] < 0 && std::isfinite(lower[i]))
                a = std::min(a, (lower[i] - x[i]) / d[i]);
        }
        return std::max(a, 0.0);
    }
};

class Memory {
  public:
    explicit Memory(std::size_t m) : m_(m) {}

    void push(const Vec &s, const Vec &y) {
        const double sy = s.dot(y), yy = y.squaredNorm();
        if (!(sy > kEps * yy) || !std::isfinite(sy))
            return;
        pairs_.emplace_back(s, y);
        if (pairs_.size() > m_)
            pairs_.pop_front();
        theta_ = yy / sy;
    }

    void clear() {
        pairs_.clear();
        theta_ = 1.0;
    }
    [[nodiscard]] bool empty() const { return pairs_.empty(); }

    /// Dense limited-memory BFGS matrix built from theta I.
    [[nodiscard]] Mat dense(Eigen::Index n) const {
        Mat b = theta_ * Mat::Identity(n, n);
        for (const auto &[s, y] : pairs_) {
            const Vec bs = b * s;
            const double sbs = s.dot(bs);
            if (!(sbs > 0.0))
                continue;
            b += y * y.transpose() / y.dot(s) - bs * bs.transpose() / sbs;
        }
        return b;
    }

    /// Two-loop recursion: approximate inverse Hessian times q.
    [[nodiscard]] Vec inverse_apply(Vec q) const {
        std::vector<double> alpha(pairs_.size());
        for (std::size_t k = pairs_.size(); k-- > 0;) {
            const auto &[s, y] = pairs_[k];
            alpha[k] = s.dot(q) / y.dot(s);
            q -= alpha[k] * y;
        }
        q /= theta_;
        for (std::size_t k = 0; k < pairs_.size(); ++k) {
            const auto &[s, y] = pairs_[k];
            const double beta = y.dot(q) / y.dot(s);
            q += (alpha[k] - beta) * s;
        }
        return q;
    }

  private:
    std::size_t m_;
    std::deque<std::pair<Vec, Vec>> pairs_;
    double theta_ = 1.0;
};

/// Generalized Cauchy point of the quadratic model along the projected
/// steepest-descent path.
Vec cauchy_point(const Problem &p, const Vec &x, const Vec &g, const Mat &b) {
    const Eigen::Index n = x.size();
    Vec t(n), d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (g[i] < 0)
            t[i] = std::isfinite(p.upper[i]) ? (x[i] - p.upper[i]) / g[i] : kInf;
        else if (g[i] > 0)
            t[i] = std::isfinite(p.lower[i]) ? (x[i] - p.lower[i]) / g[i] : kInf;
        else
            t[i] = kInf;
        d[i] = t[i] > 0 ? -g[i] : 0.0;
    }
    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < n; ++i)
        if (t[i] > 0 && std::isfinite(t[i]))
            order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index c) { return t[a] < t[c]; });

    Vec z = Vec::Zero(n);
    Vec xc = x;
    double t_old = 0.0;
    std::size_t next = 0;
    while (true) {
        const Vec bd = b * d;
        const double fp = g.dot(d) + z.dot(bd);
        const double fpp = d.dot(bd);
        if (fp >= 0 || d.isZero(0.0))
            break;
        const double dt_min = fpp > 0 ? -fp / fpp : kInf;
        const double dt = next < order.size() ? t[order[next]] - t_old : kInf;
        if (dt_min < dt) {
            z += dt_min * d;
            break;
        }
        if (!std::isfinite(dt))
            break;
        // advance to the breakpoint and pin that variable at its bound
        z += dt * d;
        const Eigen::Index bidx = order[next++];
        z[bidx] = (d[bidx] > 0 ? p.upper[bidx] : p.lower[bidx]) - x[bidx];
        d[bidx] = 0.0;
        t_old += dt;
        // any later breakpoints at the same t also hit their bounds now
        while (next < order.size() && t[order[next]] <= t_old) {
            const Eigen::Index j = order[next++];
            z[j] = (d[j] > 0 ? p.upper[j] : p.lower[j]) - x[j];
            d[j] = 0.0;
        }
    }
    xc = p.project(x + z);
    return xc;
}

struct Direction {
    Vec d;
    bool ok = false;
};

Direction lbfgsb_direction(const Problem &p, const Vec &x, const Vec &g, const Memory &mem) {
    const Eigen::Index n = x.size();
    const Mat b = mem.dense(n);
    const Vec xc = cauchy_point(p, x, g, b);

    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
        if (xc[i] > p.lower[i] && xc[i] < p.upper[i])
            free.push_back(i);

    Vec xbar = xc;
    if (!free.empty()) {
        const Eigen::Index nf = Eigen::Index(free.size());
        const Vec r = g + b * (xc - x);
        Mat bff(nf, nf);
        Vec rf(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
            rf[a] = r[free[std::size_t(a)]];
            for (Eigen::Index c = 0; c < nf; ++c)
                bff(a, c) = b(free[std::size_t(a)], free[std::size_t(c)]);
        }
        const Vec du = bff.ldlt().solve(-rf);
        if (du.allFinite()) {
            Vec cand = xc;
            for (Eigen::Index a = 0; a < nf; ++a)
                cand[free[std::size_t(a)]] += du[a];
            const Vec projected = p.project(cand);
            if ((projected - x).dot(g) < 0) {
                xbar = projected;
            } else {
                Vec step = cand - xc;
                const double alpha = std::min(1.0, p.max_step(xc, step));
                xbar = p.project(xc + alpha * step);
            }
        }
    }
    Direction out;
    out.d = xbar - x;
    out.ok = out.d.dot(g) < 0;
    return out;
}

Direction projected_lbfgs_direction(const Problem &p, const Vec &x, const Vec &g,
                                    const Memory &mem) {
    const Eigen::Index n = x.size();
    Vec mask = Vec::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i)
        if ((x[i] <= p.lower[i] && g[i] > 0) || (x[i] >= p.upper[i] && g[i] < 0))
            mask[i] = 0.0;
    Direction out;
    out.d = -mem.inverse_apply(g.cwiseProduct(mask)).cwiseProduct(mask);
    out.ok = out.d.dot(g) < 0 && out.d.allFinite();
    return out;
}

struct LinePoint {
    double alpha;
    double f;
    Vec x;
    Vec g;
};

enum class SearchOutcome { accepted, no_step, non_finite };

struct SearchResult {
    SearchOutcome outcome = SearchOutcome::no_step;
    LinePoint point;
    /// Model decrease -g.d for the unit step.
    double predicted = 0.0;
};

// Strong-Wolfe search along d from x (bracketing then zoom with cubic
// interpolation). Trial points are projected onto the box.
SearchResult wolfe_search(Problem &p, const Vec &x, double f0, const Vec &g0, const Vec &d,
                          double alpha_init, double alpha_max) {
    const double dphi0 = g0.dot(d);
    int evals = 0;
    SearchResult res;
    res.predicted = -dphi0;
    auto trial = [&](double a) {
        LinePoint pt;
        pt.alpha = a;
        pt.x = p.project(x + a * d);
        pt.f = p.eval(pt.x, pt.g);
        ++evals;
        return pt;
    };
    auto finite = [](const LinePoint &pt) { return std::isfinite(pt.f) && pt.g.allFinite(); };
    auto armijo = [&](const LinePoint &pt) { return pt.f <= f0 + kC1 * pt.alpha * dphi0; };
    auto curvature = [&](const LinePoint &pt) {
        return std::abs(pt.g.dot(d)) <= -kC2 * dphi0;
    };
    // approximate Wolfe conditions once f differences reach round-off
    const double f_noise = kFlatTol * std::abs(f0);
    auto approx_wolfe = [&](const LinePoint &pt) {
        const double dphi = pt.g.dot(d);
        return pt.f <= f0 && f0 - pt.f <= f_noise && dphi <= (2.0 * kC1 - 1.0) * dphi0 &&
               dphi >= kC2 * dphi0;
    };

    LinePoint lo{0.0, f0, x, g0};
    double dphi_lo = dphi0;
    LinePoint hi;
    bool bracketed = false;
    double a = std::min(alpha_init, alpha_max);
    for (;;) {
        LinePoint pt = trial(a);
        if (!finite(pt)) {
            res.outcome = SearchOutcome::non_finite;
            return res;
        }
        const double dphi = pt.g.dot(d);
        if (approx_wolfe(pt)) {
            res.outcome = SearchOutcome::accepted;
            res.point = std::move(pt);
            return res;
        }
        if (!armijo(pt) || (lo.alpha > 0 && pt.f >= lo.f)) {
            hi = std::move(pt);
            bracketed = true;
            break;
        }
        if (curvature(pt)) {
            res.outcome = SearchOutcome::accepted;
            res.point = std::move(pt);
            return res;
        }
        if (dphi >= 0) {
            hi = std::move(lo);
            lo = std::move(pt);
            dphi_lo = dphi;
            bracketed = true;
            break;
        }
        if (a >= alpha_max || evals >= kMaxLineSearchEvals) {
            // cannot move further inside the box; sufficient decrease holds
            res.outcome = SearchOutcome::accepted;
            res.point = std::move(pt);
            return res;
        }
        lo = std::move(pt);
        dphi_lo = dphi;
        a = std::min(4.0 * a, alpha_max);
    }

    if (bracketed) {
        double dphi_hi = hi.g.size() ? hi.g.dot(d) : dphi0;
        while (evals < kMaxLineSearchEvals) {
            const double a_lo = lo.alpha, a_hi = hi.alpha;
            const double width = std::abs(a_hi - a_lo);
            if (width <= kEps * std::max(1.0, std::abs(a_lo)))
                break;
            // cubic interpolation with a safeguard toward the midpoint
            double a_new;
            {
                const double d1 = dphi_lo + dphi_hi - 3.0 * (lo.f - hi.f) / (a_lo - a_hi);
                const double disc = d1 * d1 - dphi_lo * dphi_hi;
                if (disc >= 0 && std::isfinite(disc)) {
                    const double d2 = std::copysign(std::sqrt(disc), a_hi - a_lo);
                    a_new = a_hi - (a_hi - a_lo) * (dphi_hi + d2 - d1) /
                                       (dphi_hi - dphi_lo + 2.0 * d2);
                } else {
                    a_new = 0.5 * (a_lo + a_hi);
                }
                const double lo_b = std::min(a_lo, a_hi) + 0.1 * width;
                const double hi_b = std::max(a_lo, a_hi) - 0.1 * width;
                if (!std::isfinite(a_new) || a_new < lo_b || a_new > hi_b)
                    a_new = 0.5 * (a_lo + a_hi);
            }
            LinePoint pt = trial(a_new);
            if (!finite(pt)) {
                res.outcome = SearchOutcome::non_finite;
                return res;
            }
            const double dphi = pt.g.dot(d);
            if (approx_wolfe(pt)) {
                res.outcome = SearchOutcome::accepted;
                res.point = std::move(pt);
                return res;
            }
            if (!armijo(pt) || pt.f >= lo.f) {
                hi = std::move(pt);
                dphi_hi = dphi;
                continue;
            }
            if (curvature(pt)) {
                res.outcome = SearchOutcome::accepted;
                res.point = std::move(pt);
                return res;
            }
            if (dphi * (hi.alpha - lo.alpha) >= 0) {
                hi = std::move(lo);
                dphi_hi = dphi_lo;
            }
            lo = std::move(pt);
            dphi_lo = dphi;
        }
    }
    if (lo.alpha > 0 && lo.f < f0) {
        res.outcome = SearchOutcome::accepted;
        res.point = std::move(lo);
    }
    return res;
}

// Projected backtracking for the fallback variant.
SearchResult backtracking_search(Problem &p, const Vec &x, double f0, const Vec &g0,
                                 const Vec &d, double alpha_init) {
    SearchResult res;
    res.predicted = -g0.dot(d);
    double a = alpha_init;
    for (int k = 0; k < 60; ++k, a *= 0.5) {
        LinePoint pt;
        pt.alpha = a;
        pt.x = p.project(x + a * d);
        pt.f = p.eval(pt.x, pt.g);
        if (!std::isfinite(pt.f) || !pt.g.allFinite()) {
            res.outcome = SearchOutcome::non_finite;
            return res;
        }
        if (pt.f <= f0 + kC1 * g0.dot(pt.x - x) && pt.f < f0) {
            res.outcome = SearchOutcome::accepted;
            res.point = std::move(pt);
            return res;
        }
    }
    return res;
}

} // namespace

BoxBounds BoxBounds::unbounded(std::size_t n) {
    return {std::vector<double>(n, -kInf), std::vector<double>(n, kInf)};
}

bool BoxBounds::has_finite() const {
    return std::any_of(lower.begin(), lower.end(), [](double v) { return std::isfinite(v); }) ||
           std::any_of(upper.begin(), upper.end(), [](double v) { return std::isfinite(v); });
}

void BoxBounds::validate(std::size_t n) const {
    if (lower.size() != n || upper.size() != n)
        throw DimensionError("bounds have " + std::to_string(lower.size()) + "/" +
                             std::to_string(upper.size()) + " entries for " +
                             std::to_string(n) + " variables");
    for (std::size_t i = 0; i < n; ++i)
        if (!(lower[i] <= upper[i]) || std::isnan(lower[i]) || std::isnan(upper[i]))
            throw ConfigError("bound " + std::to_string(i) + " has lower > upper");
}

void OptimizerConfig::validate() const {
    if (memory == 0 || max_iters == 0 || !(grad_tol > 0) || !(step_tol > 0))
        throw ConfigError("optimizer settings must all be positive");
}

std::string to_string(OptStatus status) {
    switch (status) {
    case OptStatus::converged: return "converged";
    case OptStatus::max_iters: return "max_iters";
    case OptStatus::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

OptResult minimize(const Objective &f, std::vector<double> x0, const BoxBounds &bounds,
                   const OptimizerConfig &cfg, const IterateObserver &observer) {
    cfg.validate();
    const std::size_t n = x0.size();
    if (n == 0)
        throw DimensionError("minimize needs at least one variable");
    bounds.validate(n);

    Problem p{f, Eigen::Map<const Vec>(bounds.lower.data(), Eigen::Index(n)),
              Eigen::Map<const Vec>(bounds.upper.data(), Eigen::Index(n))};
    Vec x = p.project(Eigen::Map<const Vec>(x0.data(), Eigen::Index(n)));
    const bool constrained = bounds.has_finite();
    bool boxed = true;
    for (std::size_t i = 0; i < n; ++i)
        boxed = boxed && std::isfinite(bounds.lower[i]) && std::isfinite(bounds.upper[i]);

    OptResult out;
    auto finish = [&](OptStatus st, std::string msg, double fx, const Vec &gx) {
        out.x.assign(x.data(), x.data() + n);
        out.f = fx;
        out.grad_norm = gx.allFinite() ? p.projected_gradient_norm(x, gx) : kInf;
        out.status = st;
        out.message = std::move(msg);
        out.evaluations = p.evaluations;
        return out;
    };

    Vec g;
    double fx = p.eval(x, g);
    if (!std::isfinite(fx) || !g.allFinite())
        return finish(OptStatus::line_search_failure, "non-finite objective at the start point",
                      fx, g);
    if (observer)
        observer(0, std::span<const double>(x.data(), n), fx);

    Memory mem(cfg.memory);
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        const double pg = p.projected_gradient_norm(x, g);
        if (pg <= cfg.grad_tol)
            return finish(OptStatus::converged, "projected gradient below tolerance", fx, g);

        SearchResult sr;
        for (int attempt = 0; attempt < 2; ++attempt) {
            Direction dir = cfg.variant == OptimizerVariant::lbfgsb
                                ? lbfgsb_direction(p, x, g, mem)
                                : projected_lbfgs_direction(p, x, g, mem);
            if (!dir.ok || !dir.d.allFinite()) {
                if (mem.empty())
                    break;
                mem.clear();
                continue;
            }
            if (cfg.variant == OptimizerVariant::lbfgsb) {
                double alpha_max = kInf;
                if (constrained)
                    alpha_max = iter == 0 ? 1.0 : std::max(1.0, p.max_step(x, dir.d));
                if (!std::isfinite(alpha_max))
                    alpha_max = 1e10;
                const double alpha0 =
                    (iter == 0 && !boxed) ? std::min(1.0 / dir.d.norm(), alpha_max) : 1.0;
                sr = wolfe_search(p, x, fx, g, dir.d, alpha0, alpha_max);
            } else {
                const double alpha0 = mem.empty() ? std::min(1.0, 1.0 / dir.d.norm()) : 1.0;
                sr = backtracking_search(p, x, fx, g, dir.d, alpha0);
            }
            if (sr.outcome != SearchOutcome::no_step || mem.empty())
                break;
            mem.clear();
        }
        if (sr.outcome == SearchOutcome::non_finite)
            return finish(OptStatus::line_search_failure,
                          "non-finite objective or gradient along the search direction", fx,
                          g);
        if (sr.outcome == SearchOutcome::no_step) {
            out.iterations = iter;
            if (sr.predicted <= kFlatTol * std::abs(fx))
                return finish(OptStatus::converged, "objective flat to round-off", fx, g);
            return finish(OptStatus::line_search_failure,
                          "no acceptable step along the search direction", fx, g);
        }

        const Vec s = sr.point.x - x;
        const Vec y = sr.point.g - g;
        const double xnorm = x.lpNorm<Eigen::Infinity>();
        x = std::move(sr.point.x);
        g = std::move(sr.point.g);
        fx = sr.point.f;
        out.iterations = iter + 1;
        if (observer)
            observer(iter + 1, std::span<const double>(x.data(), n), fx);
        mem.push(s, y);
        if (s.lpNorm<Eigen::Infinity>() <= cfg.step_tol * std::max(1.0, xnorm))
            return finish(OptStatus::converged, "step below tolerance", fx, g);
    }
    if (p.projected_gradient_norm(x, g) <= cfg.grad_tol)
        return finish(OptStatus::converged, "projected gradient below tolerance", fx, g);
    return finish(OptStatus::max_iters, "iteration limit reached", fx, g);
}

double check_gradient(const Objective &f, std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> g(n), tmp(n), xp(x.begin(), x.end());
    f(x, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + h;
        const double fp = f(xp, tmp);
        xp[i] = x[i] - h;
        const double fm = f(xp, tmp);
        xp[i] = x[i];
        const double fd = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::abs(g[i]), std::abs(fd), 1e-8});
        worst = std::max(worst, std::abs(g[i] - fd) / denom);
    }
    return worst;
}

} // namespace nmrqcels
