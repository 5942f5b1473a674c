#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "vqbench/optimizers/common.hpp"

namespace vqbench {

namespace detail {

struct LbfgsPair {
  std::vector<double> s, y;
  double rho = 0.0;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace detail

// Box-constrained limited-memory BFGS: projected gradient identifies the
// active set, a two-loop recursion over the free subspace proposes the step,
// and a strong-Wolfe line search (c1 = 1e-4, c2 = 0.9) capped at the nearest
// bound accepts it. Memory 10. Stops when the projected gradient infinity
// norm drops below 1e-6 or the energy budget runs out; a failed line search
// returns best-so-far as `stalled`.
inline RunRecord run_lbfgsb(Objective& obj, const std::vector<double>& x0,
                            long budget) {
  RunRecord record;
  detail::TracedObjective f(obj, record);
  const int n = obj.dimension();
  const auto& bounds = obj.bounds();
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  constexpr double pg_tol = 1e-6;
  constexpr std::size_t memory = 10;

  std::vector<double> x = detail::clamp_to_bounds(x0, bounds);
  double fx = f.evaluate(x);
  std::vector<double> g = f.gradient(x);
  std::deque<detail::LbfgsPair> pairs;

  const auto projected_gradient = [&](const std::vector<double>& xx,
                                      const std::vector<double>& gg) {
    std::vector<double> pg(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      const auto& [lo, hi] = bounds[ii];
      if (xx[ii] <= lo && gg[ii] > 0.0) continue;  // pinned at lower bound
      if (xx[ii] >= hi && gg[ii] < 0.0) continue;  // pinned at upper bound
      pg[ii] = gg[ii];
    }
    return pg;
  };

  TerminationReason reason = TerminationReason::Budget;
  while (true) {
    const std::vector<double> pg = projected_gradient(x, g);
    double pg_norm = 0.0;
    for (double v : pg) pg_norm = std::max(pg_norm, std::abs(v));
    if (pg_norm < pg_tol) {
      reason = TerminationReason::Converged;
      break;
    }
    if (f.energy_evals() >= budget) break;

    // Two-loop recursion on the free subspace.
    std::vector<double> q = pg;
    std::vector<double> alphas(pairs.size(), 0.0);
    for (std::size_t k = pairs.size(); k-- > 0;) {
      alphas[k] = pairs[k].rho * detail::dot(pairs[k].s, q);
      for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alphas[k] * pairs[k].y[i];
    }
    if (!pairs.empty()) {
      const auto& last = pairs.back();
      const double gamma =
          detail::dot(last.s, last.y) / std::max(detail::dot(last.y, last.y), 1e-300);
      for (double& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double beta = pairs[k].rho * detail::dot(pairs[k].y, q);
      for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] += pairs[k].s[i] * (alphas[k] - beta);
      }
    }
    std::vector<double> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      d[ii] = pg[ii] == 0.0 ? 0.0 : -q[ii];
    }
    double slope = detail::dot(g, d);
    if (!(slope < 0.0)) {
      // Not a descent direction; fall back to steepest descent on the free set.
      pairs.clear();
      for (int i = 0; i < n; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        d[ii] = -pg[ii];
      }
      slope = detail::dot(g, d);
      if (!(slope < 0.0)) {
        reason = TerminationReason::Stalled;
        break;
      }
    }

    // Largest feasible step along d.
    double alpha_max = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      const auto& [lo, hi] = bounds[ii];
      if (d[ii] > 0.0) alpha_max = std::min(alpha_max, (hi - x[ii]) / d[ii]);
      if (d[ii] < 0.0) alpha_max = std::min(alpha_max, (lo - x[ii]) / d[ii]);
    }
    if (!(alpha_max > 0.0)) {
      reason = TerminationReason::Stalled;
      break;
    }

    const auto point_at = [&](double a) {
      std::vector<double> xx(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        xx[ii] = x[ii] + a * d[ii];
      }
      return detail::clamp_to_bounds(std::move(xx), bounds);
    };

    // Strong Wolfe search (Nocedal & Wright alg. 3.5/3.6) on [0, alpha_max].
    struct Trial {
      double a = 0.0, f = 0.0, slope = 0.0;
      std::vector<double> x, g;
    };
    const auto probe = [&](double a) {
      Trial t;
      t.a = a;
      t.x = point_at(a);
      t.f = f.evaluate(t.x);
      t.g = f.gradient(t.x);
      t.slope = detail::dot(t.g, d);
      return t;
    };

    bool accepted = false;
    Trial acc;
    const double f0 = fx;
    const double slope0 = slope;
    double a_prev = 0.0;
    double f_prev = f0;
    double slope_prev = slope0;
    Trial lo_t, hi_t;
    bool zooming = false;
    double a_cur = std::min(1.0, alpha_max);
    for (int iter = 0; iter < 12 && f.energy_evals() < budget; ++iter) {
      if (!zooming) {
        Trial t = probe(a_cur);
        if (t.f > f0 + c1 * t.a * slope0 || (iter > 0 && t.f >= f_prev)) {
          lo_t = {a_prev, f_prev, slope_prev, point_at(a_prev), {}};
          hi_t = t;
          zooming = true;
          continue;
        }
        if (std::abs(t.slope) <= -c2 * slope0) {
          acc = std::move(t);
          accepted = true;
          break;
        }
        if (t.slope >= 0.0) {
          lo_t = t;
          hi_t = {a_prev, f_prev, slope_prev, point_at(a_prev), {}};
          zooming = true;
          continue;
        }
        if (t.a >= alpha_max - 1e-15) {
          // Bound hit with sufficient decrease: accept the capped step.
          acc = std::move(t);
          accepted = true;
          break;
        }
        a_prev = t.a;
        f_prev = t.f;
        slope_prev = t.slope;
        a_cur = std::min(2.0 * t.a, alpha_max);
      } else {
        const double a_mid = 0.5 * (lo_t.a + hi_t.a);
        if (std::abs(hi_t.a - lo_t.a) < 1e-14) break;
        Trial t = probe(a_mid);
        if (t.f > f0 + c1 * t.a * slope0 || t.f >= lo_t.f) {
          hi_t = std::move(t);
        } else {
          if (std::abs(t.slope) <= -c2 * slope0) {
            acc = std::move(t);
            accepted = true;
            break;
          }
          if (t.slope * (hi_t.a - lo_t.a) >= 0.0) hi_t = lo_t;
          lo_t = std::move(t);
        }
      }
    }

    if (!accepted) {
      if (f.energy_evals() >= budget) {
        reason = TerminationReason::Budget;
      } else {
        reason = TerminationReason::Stalled;
      }
      break;
    }

    std::vector<double> s(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      s[ii] = acc.x[ii] - x[ii];
      y[ii] = acc.g[ii] - g[ii];
    }
    const double sy = detail::dot(s, y);
    if (sy > 1e-10) {
      pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (pairs.size() > memory) pairs.pop_front();
    }
    x = std::move(acc.x);
    fx = acc.f;
    g = std::move(acc.g);
  }

  record.finalize(reason);
  return record;
}

}  // namespace vqbench
