#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "vqbench/optimizers/common.hpp"
#include "vqbench/rng.hpp"

namespace vqbench {

struct GpConfig {
  int n_initial = 5;
  int restarts = 5;        // multi-start LML ascent restarts
  int refit_every = 5;     // full hyperparameter refit cadence (acquisitions)
  int fit_iters = 40;      // ascent iterations per start
  double fit_lr = 0.08;
  int search_points = 1000;  // random EI search
  int polish_iters = 60;     // local simplex polish on EI
  double stall_tol = 1e-6;
  int stall_iters = 10;
  double noise_floor = 1e-10;
  bool learn_noise = false;  // fixed at the floor for exact (WaveFunction) data
};

namespace detail {

// GP regression with a Matern-5/2 ARD kernel in normalized coordinates
// (inputs scaled to [0,1]^d, observations standardized).
class GaussianProcess {
 public:
  GaussianProcess(int dim, const GpConfig& cfg) : dim_(dim), cfg_(cfg) {
    theta_ = Eigen::VectorXd::Zero(dim_ + 2);
    theta_.head(dim_).setConstant(std::log(0.3));
    theta_(dim_) = 0.0;                          // log signal std
    theta_(dim_ + 1) = std::log(std::sqrt(cfg_.noise_floor));
  }

  void set_data(const std::vector<std::vector<double>>& xs,
                const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    x_ = Eigen::MatrixXd(n, dim_);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < dim_; ++j) {
        x_(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = ys[static_cast<std::size_t>(i)];
    y_mean_ = y.mean();
    const double var = (y.array() - y_mean_).square().sum() /
                       std::max(1, n - 1);
    y_std_ = var > 1e-300 ? std::sqrt(var) : 1.0;
    y_ = (y.array() - y_mean_) / y_std_;
    // Per-dimension squared distances, reused across fit iterations.
    dist2_.assign(static_cast<std::size_t>(dim_), Eigen::MatrixXd(n, n));
    for (int d = 0; d < dim_; ++d) {
      auto& m = dist2_[static_cast<std::size_t>(d)];
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double diff = x_(i, d) - x_(j, d);
          m(i, j) = diff * diff;
        }
      }
    }
    factorized_ = false;
  }

  // Multi-start LML ascent; on total factorization failure the previous
  // hyperparameters are kept. Between full refits the incumbent
  // hyperparameters are reused as-is (only the Cholesky is refreshed).
  void fit(Rng& rng, bool full_restarts) {
    if (!full_restarts) return;
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(theta_);
    {
      for (int r = 0; r < cfg_.restarts; ++r) {
        Eigen::VectorXd t(dim_ + 2);
        for (int d = 0; d < dim_; ++d) {
          t(d) = std::log(rng.uniform(0.05, 1.0));
        }
        t(dim_) = std::log(rng.uniform(0.3, 2.0));
        t(dim_ + 1) = cfg_.learn_noise
                          ? std::log(std::sqrt(rng.uniform(1e-6, 0.1)))
                          : std::log(std::sqrt(cfg_.noise_floor));
        starts.push_back(std::move(t));
      }
    }
    double best_lml = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta = theta_;
    bool any_ok = false;
    for (auto& start : starts) {
      Eigen::VectorXd t = start;
      if (!ascend(t)) continue;
      const auto lml = log_marginal(t, nullptr);
      if (lml && *lml > best_lml) {
        best_lml = *lml;
        best_theta = t;
        any_ok = true;
      }
    }
    if (any_ok) theta_ = best_theta;
    factorized_ = false;
  }

  // Cholesky refresh for the current data and hyperparameters.
  bool factorize() {
    if (factorized_) return true;
    const int n = static_cast<int>(y_.size());
    if (n == 0) return false;
    const Eigen::MatrixXd k_signal = signal_kernel(theta_);
    const double noise_var =
        std::max(sq(std::exp(theta_(dim_ + 1))), cfg_.noise_floor);
    for (double jitter = 1e-8; jitter <= 1.01e-4; jitter *= 10.0) {
      Eigen::MatrixXd k = k_signal;
      k.diagonal().array() += noise_var + jitter;
      llt_.compute(k);
      if (llt_.info() == Eigen::Success) {
        alpha_ = llt_.solve(y_);
        factorized_ = true;
        return true;
      }
    }
    return false;
  }

  struct Posterior {
    double mean = 0.0;    // un-normalized
    double stddev = 0.0;  // un-normalized latent std
  };

  Posterior predict(const std::vector<double>& x) const {
    const int n = static_cast<int>(y_.size());
    Eigen::VectorXd ks(n);
    const double sf2 = sq(std::exp(theta_(dim_)));
    for (int i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (int d = 0; d < dim_; ++d) {
        const double diff = x[static_cast<std::size_t>(d)] - x_(i, d);
        r2 += sq(diff / std::exp(theta_(d)));
      }
      ks(i) = sf2 * matern52(std::sqrt(std::max(0.0, r2)));
    }
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    const double mean_n = ks.dot(alpha_);
    const double var_n = std::max(0.0, sf2 - v.squaredNorm());
    return {y_mean_ + y_std_ * mean_n, y_std_ * std::sqrt(var_n)};
  }

  double best_observed() const {
    return y_mean_ + y_std_ * y_.minCoeff();
  }

  // Expected improvement for minimization.
  double expected_improvement(const std::vector<double>& x) const {
    const Posterior p = predict(x);
    const double improve = best_observed() - p.mean;
    if (p.stddev < 1e-14) return std::max(0.0, improve);
    const double z = improve / p.stddev;
    return improve * norm_cdf(z) + p.stddev * norm_pdf(z);
  }

  // Posterior mean at a point (used by interpolation checks).
  double posterior_mean(const std::vector<double>& x) const {
    return predict(x).mean;
  }

 private:
  static double sq(double v) { return v * v; }
  static double matern52(double r) {
    const double u = std::sqrt(5.0) * r;
    return (1.0 + u + u * u / 3.0) * std::exp(-u);
  }
  static double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  }
  static double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
  }

  Eigen::MatrixXd signal_kernel(const Eigen::VectorXd& theta) const {
    const int n = static_cast<int>(y_.size());
    const double sf2 = sq(std::exp(theta(dim_)));
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
    for (int d = 0; d < dim_; ++d) {
      r2 += dist2_[static_cast<std::size_t>(d)] / sq(std::exp(theta(d)));
    }
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        k(i, j) = sf2 * matern52(std::sqrt(std::max(0.0, r2(i, j))));
      }
    }
    return k;
  }

  // Log marginal likelihood; optionally fills the gradient wrt theta.
  std::optional<double> log_marginal(const Eigen::VectorXd& theta,
                                     Eigen::VectorXd* grad) const {
    const int n = static_cast<int>(y_.size());
    const double sf2 = sq(std::exp(theta(dim_)));
    const double sn2 = std::max(sq(std::exp(theta(dim_ + 1))), cfg_.noise_floor);
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
    for (int d = 0; d < dim_; ++d) {
      r2 += dist2_[static_cast<std::size_t>(d)] / sq(std::exp(theta(d)));
    }
    const Eigen::MatrixXd r = r2.array().max(0.0).sqrt();
    const Eigen::MatrixXd u = std::sqrt(5.0) * r;
    const Eigen::MatrixXd expu = (-u).array().exp();
    Eigen::MatrixXd k_signal =
        sf2 * ((1.0 + u.array() + u.array().square() / 3.0) * expu.array()).matrix();

    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter_used = 0.0;
    for (double jitter = 1e-8; jitter <= 1.01e-4; jitter *= 10.0) {
      Eigen::MatrixXd k = k_signal;
      k.diagonal().array() += sn2 + jitter;
      llt.compute(k);
      if (llt.info() == Eigen::Success) {
        jitter_used = jitter;
        break;
      }
    }
    if (llt.info() != Eigen::Success) return std::nullopt;

    const Eigen::VectorXd alpha = llt.solve(y_);
    double log_det = 0.0;
    for (int i = 0; i < n; ++i) log_det += std::log(llt.matrixL()(i, i));
    const double lml = -0.5 * y_.dot(alpha) - log_det -
                       0.5 * n * std::log(2.0 * std::numbers::pi);
    if (grad) {
      const Eigen::MatrixXd kinv =
          llt.solve(Eigen::MatrixXd::Identity(n, n));
      const Eigen::MatrixXd w = alpha * alpha.transpose() - kinv;
      grad->resize(dim_ + 2);
      // d k / d log(l_d) = sf2 * (5/3) (1+u) exp(-u) * dist2_d / l_d^2
      const Eigen::ArrayXXd common =
          sf2 * (5.0 / 3.0) * (1.0 + u.array()) * expu.array();
      for (int d = 0; d < dim_; ++d) {
        const double l2 = sq(std::exp(theta(d)));
        const Eigen::ArrayXXd dk =
            common * dist2_[static_cast<std::size_t>(d)].array() / l2;
        (*grad)(d) = 0.5 * (w.array() * dk).sum();
      }
      (*grad)(dim_) = 0.5 * (w.array() * (2.0 * k_signal).array()).sum();
      const double dn = cfg_.learn_noise ? 2.0 * sn2 : 0.0;
      (*grad)(dim_ + 1) = 0.5 * w.trace() * dn;
      (void)jitter_used;
    }
    return lml;
  }

  // Adam ascent in log space with range clamps.
  bool ascend(Eigen::VectorXd& theta) const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd grad;
    bool any = false;
    for (int it = 0; it < cfg_.fit_iters; ++it) {
      const auto lml = log_marginal(theta, &grad);
      if (!lml) return any;
      any = true;
      m = 0.9 * m + 0.1 * grad;
      v = 0.999 * v.array() + 0.001 * grad.array().square();
      const double bc1 = 1.0 - std::pow(0.9, it + 1);
      const double bc2 = 1.0 - std::pow(0.999, it + 1);
      theta.array() += cfg_.fit_lr * (m.array() / bc1) /
                       ((v.array() / bc2).sqrt() + 1e-8);
      for (int d = 0; d < dim_; ++d) {
        theta(d) = std::clamp(theta(d), std::log(1e-3), std::log(1e3));
      }
      theta(dim_) = std::clamp(theta(dim_), std::log(1e-4), std::log(1e3));
      theta(dim_ + 1) = std::clamp(theta(dim_ + 1),
                                   0.5 * std::log(cfg_.noise_floor),
                                   std::log(10.0));
      if (!cfg_.learn_noise) {
        theta(dim_ + 1) = 0.5 * std::log(cfg_.noise_floor);
      }
    }
    return any;
  }

  int dim_;
  GpConfig cfg_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<Eigen::MatrixXd> dist2_;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  Eigen::VectorXd theta_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  bool factorized_ = false;
};

}  // namespace detail

// Bayesian optimization: 5 uniform initial points, GP surrogate refit by
// multi-start LML ascent, expected improvement maximized by random search
// plus a local simplex polish. Stops when the best cost is unimproved by
// stall_tol for stall_iters consecutive acquisitions, or at budget.
inline RunRecord run_bayesian(Objective& obj, long budget, const GpConfig& cfg,
                              std::uint64_t seed) {
  const int dim = obj.dimension();
  if (dim > 30) {
    throw std::invalid_argument("Bayesian optimization limited to <= 30 dims");
  }
  RunRecord record;
  detail::TracedObjective f(obj, record);
  const auto& bounds = obj.bounds();
  Rng rng(derive_stream(seed, "bayes"));

  // Work in [0,1]^d.
  const auto denorm = [&](const std::vector<double>& u) {
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
      const auto& [lo, hi] = bounds[static_cast<std::size_t>(d)];
      x[static_cast<std::size_t>(d)] = lo + (hi - lo) * u[static_cast<std::size_t>(d)];
    }
    return x;
  };

  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  double best = std::numeric_limits<double>::infinity();
  const auto observe = [&](const std::vector<double>& u) {
    const double y = f.evaluate(denorm(u));
    xs.push_back(u);
    ys.push_back(y);
    best = std::min(best, y);
    return y;
  };

  for (int i = 0; i < cfg.n_initial && f.energy_evals() < budget; ++i) {
    std::vector<double> u(static_cast<std::size_t>(dim));
    for (auto& v : u) v = rng.uniform();
    observe(u);
  }

  detail::GaussianProcess gp(dim, cfg);
  TerminationReason reason = TerminationReason::Budget;
  int stall = 0;
  int acquisitions = 0;
  while (f.energy_evals() < budget) {
    gp.set_data(xs, ys);
    gp.fit(rng, acquisitions % cfg.refit_every == 0);
    if (!gp.factorize()) {
      // Surrogate unusable; fall back to a random probe.
      std::vector<double> u(static_cast<std::size_t>(dim));
      for (auto& v : u) v = rng.uniform();
      observe(u);
      ++acquisitions;
      continue;
    }

    std::vector<double> best_u(static_cast<std::size_t>(dim));
    double best_ei = -1.0;
    for (int s = 0; s < cfg.search_points; ++s) {
      std::vector<double> u(static_cast<std::size_t>(dim));
      for (auto& v : u) v = rng.uniform();
      const double ei = gp.expected_improvement(u);
      if (ei > best_ei) {
        best_ei = ei;
        best_u = std::move(u);
      }
    }
    // Local polish: small projected simplex walk on -EI (surrogate only).
    {
      std::vector<std::vector<double>> simplex{best_u};
      std::vector<double> vals{-gp.expected_improvement(best_u)};
      for (int d = 0; d < dim; ++d) {
        auto u = best_u;
        u[static_cast<std::size_t>(d)] =
            std::clamp(u[static_cast<std::size_t>(d)] + 0.05, 0.0, 1.0);
        simplex.push_back(u);
        vals.push_back(-gp.expected_improvement(u));
      }
      for (int it = 0; it < cfg.polish_iters; ++it) {
        std::size_t worst = 0, best_i = 0;
        for (std::size_t k = 1; k < vals.size(); ++k) {
          if (vals[k] > vals[worst]) worst = k;
          if (vals[k] < vals[best_i]) best_i = k;
        }
        std::vector<double> centroid(static_cast<std::size_t>(dim), 0.0);
        for (std::size_t k = 0; k < simplex.size(); ++k) {
          if (k == worst) continue;
          for (int d = 0; d < dim; ++d) {
            centroid[static_cast<std::size_t>(d)] +=
                simplex[k][static_cast<std::size_t>(d)] / static_cast<double>(dim);
          }
        }
        std::vector<double> refl(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) {
          const std::size_t dd = static_cast<std::size_t>(d);
          refl[dd] = std::clamp(2.0 * centroid[dd] - simplex[worst][dd], 0.0, 1.0);
        }
        const double fr = -gp.expected_improvement(refl);
        if (fr < vals[worst]) {
          simplex[worst] = std::move(refl);
          vals[worst] = fr;
        } else {
          for (int d = 0; d < dim; ++d) {
            const std::size_t dd = static_cast<std::size_t>(d);
            simplex[worst][dd] = 0.5 * (simplex[worst][dd] + simplex[best_i][dd]);
          }
          vals[worst] = -gp.expected_improvement(simplex[worst]);
        }
      }
      std::size_t best_i = 0;
      for (std::size_t k = 1; k < vals.size(); ++k) {
        if (vals[k] < vals[best_i]) best_i = k;
      }
      if (-vals[best_i] > best_ei) {
        best_ei = -vals[best_i];
        best_u = simplex[best_i];
      }
    }

    const double prev_best = best;
    observe(best_u);
    ++acquisitions;
    if (prev_best - best > cfg.stall_tol) {
      stall = 0;
    } else {
      ++stall;
      if (stall >= cfg.stall_iters) {
        reason = TerminationReason::Converged;
        break;
      }
    }
  }

  record.finalize(f.energy_evals() >= budget ? TerminationReason::Budget : reason);
  return record;
}

}  // namespace vqbench
