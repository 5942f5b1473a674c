#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vqbench/optimizers/common.hpp"

namespace vqbench {

// Simplex method with the classic coefficients (reflect 1, expand 2,
// contract 0.5, shrink 0.5). Unbounded: decoded points may leave the box;
// the angles are periodic so nothing breaks.
inline RunRecord run_nelder_mead(Objective& obj, const std::vector<double>& x0,
                                 long budget) {
  RunRecord record;
  detail::TracedObjective f(obj, record);
  const int n = obj.dimension();

  std::vector<std::vector<double>> simplex;
  std::vector<double> values;
  simplex.push_back(x0);
  values.push_back(f.evaluate(x0));
  for (int i = 0; i < n && f.energy_evals() < budget; ++i) {
    std::vector<double> v = x0;
    const auto& [lo, hi] = obj.bounds()[static_cast<std::size_t>(i)];
    v[static_cast<std::size_t>(i)] += 0.05 * (hi - lo);
    simplex.push_back(v);
    values.push_back(f.evaluate(v));
  }
  if (simplex.size() < static_cast<std::size_t>(n) + 1) {
    record.finalize(TerminationReason::Budget);
    return record;
  }

  const auto order = [&] {
    std::vector<std::size_t> idx(simplex.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> v2;
    for (std::size_t k : idx) {
      s2.push_back(std::move(simplex[k]));
      v2.push_back(values[k]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };

  TerminationReason reason = TerminationReason::Budget;
  while (true) {
    order();
    // Diameter: max infinity-distance from the best vertex.
    double diameter = 0.0;
    for (std::size_t k = 1; k < simplex.size(); ++k) {
      for (int i = 0; i < n; ++i) {
        diameter = std::max(diameter,
                            std::abs(simplex[k][static_cast<std::size_t>(i)] -
                                     simplex[0][static_cast<std::size_t>(i)]));
      }
    }
    if (diameter < 1e-6 || values.back() - values.front() < 1e-8) {
      reason = TerminationReason::Converged;
      break;
    }
    if (f.energy_evals() >= budget) break;

    std::vector<double> centroid(static_cast<std::size_t>(n), 0.0);
    for (std::size_t k = 0; k + 1 < simplex.size(); ++k) {
      for (int i = 0; i < n; ++i) {
        centroid[static_cast<std::size_t>(i)] +=
            simplex[k][static_cast<std::size_t>(i)] / static_cast<double>(n);
      }
    }
    const auto blend = [&](double t) {
      std::vector<double> p(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        p[ii] = centroid[ii] + t * (centroid[ii] - simplex.back()[ii]);
      }
      return p;
    };

    const std::vector<double> reflected = blend(1.0);
    const double fr = f.evaluate(reflected);
    if (fr < values.front()) {
      if (f.energy_evals() < budget) {
        const std::vector<double> expanded = blend(2.0);
        const double fe = f.evaluate(expanded);
        if (fe < fr) {
          simplex.back() = expanded;
          values.back() = fe;
        } else {
          simplex.back() = reflected;
          values.back() = fr;
        }
      } else {
        simplex.back() = reflected;
        values.back() = fr;
      }
    } else if (fr < values[values.size() - 2]) {
      simplex.back() = reflected;
      values.back() = fr;
    } else if (f.energy_evals() < budget) {
      const bool outside = fr < values.back();
      const std::vector<double> contracted = blend(outside ? 0.5 : -0.5);
      const double fc = f.evaluate(contracted);
      if (fc < std::min(fr, values.back())) {
        simplex.back() = contracted;
        values.back() = fc;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t k = 1; k < simplex.size() && f.energy_evals() < budget;
             ++k) {
          for (int i = 0; i < n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            simplex[k][ii] = simplex[0][ii] + 0.5 * (simplex[k][ii] - simplex[0][ii]);
          }
          values[k] = f.evaluate(simplex[k]);
        }
      }
    }
    if (f.energy_evals() >= budget) break;
  }

  record.finalize(reason);
  return record;
}

}  // namespace vqbench
