#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vqbench/optimizers/common.hpp"
#include "vqbench/pauli.hpp"
#include "vqbench/rng.hpp"

namespace vqbench {

// ---------------------------------------------------------------------------
// Model

// Weight bundle for the two stacked LSTM layers plus the affine head.
// Gate row blocks, in order: input, forget, candidate, output.
struct ModelTensors {
  Eigen::MatrixXd w0_in, w0_rec;  // 4H x 2, 4H x H
  Eigen::VectorXd b0;             // 4H
  Eigen::MatrixXd w1_in, w1_rec;  // 4H x H, 4H x H
  Eigen::VectorXd b1;             // 4H
  Eigen::VectorXd head_w;         // H
  double head_b = 0.0;

  static ModelTensors zeros(int hidden) {
    ModelTensors t;
    t.w0_in = Eigen::MatrixXd::Zero(4 * hidden, 2);
    t.w0_rec = Eigen::MatrixXd::Zero(4 * hidden, hidden);
    t.b0 = Eigen::VectorXd::Zero(4 * hidden);
    t.w1_in = Eigen::MatrixXd::Zero(4 * hidden, hidden);
    t.w1_rec = Eigen::MatrixXd::Zero(4 * hidden, hidden);
    t.b1 = Eigen::VectorXd::Zero(4 * hidden);
    t.head_w = Eigen::VectorXd::Zero(hidden);
    t.head_b = 0.0;
    return t;
  }
};

struct TensorRef {
  double* data;
  std::size_t size;
};

inline std::vector<TensorRef> tensor_refs(ModelTensors& t) {
  return {
      {t.w0_in.data(), static_cast<std::size_t>(t.w0_in.size())},
      {t.w0_rec.data(), static_cast<std::size_t>(t.w0_rec.size())},
      {t.b0.data(), static_cast<std::size_t>(t.b0.size())},
      {t.w1_in.data(), static_cast<std::size_t>(t.w1_in.size())},
      {t.w1_rec.data(), static_cast<std::size_t>(t.w1_rec.size())},
      {t.b1.data(), static_cast<std::size_t>(t.b1.size())},
      {t.head_w.data(), static_cast<std::size_t>(t.head_w.size())},
      {&t.head_b, 1},
  };
}

// Coordinatewise LSTM optimizer: one shared model applied per optimizee
// parameter. Model size is independent of the optimizee dimension.
struct MetaModel {
  int hidden = 20;
  double output_scale = 0.1;
  double preprocess_r = 10.0;
  ModelTensors tensors;
  std::string problem_class;  // trained-for tag; empty until trained
  std::string environment;
  int version = 1;
};

// Gate weights uniform in [-1/sqrt(H), 1/sqrt(H)], forget bias +1, head zero;
// the untrained optimizer is a no-op so training starts from stationarity.
inline MetaModel meta_model_init(int hidden, double output_scale, double r,
                                 Rng& rng) {
  MetaModel m;
  m.hidden = hidden;
  m.output_scale = output_scale;
  m.preprocess_r = r;
  m.tensors = ModelTensors::zeros(hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::MatrixXd* w :
       {&m.tensors.w0_in, &m.tensors.w0_rec, &m.tensors.w1_in, &m.tensors.w1_rec}) {
    for (Eigen::Index i = 0; i < w->size(); ++i) {
      w->data()[i] = rng.uniform(-bound, bound);
    }
  }
  m.tensors.b0.segment(hidden, hidden).setConstant(1.0);
  m.tensors.b1.segment(hidden, hidden).setConstant(1.0);
  return m;
}

// ---------------------------------------------------------------------------
// Preprocessing (gradient -> two bounded input channels)

inline std::pair<double, double> preprocess_gradient(double g, double r) {
  if (!std::isfinite(g)) throw std::invalid_argument("non-finite gradient");
  const double mag = std::abs(g);
  if (mag >= std::exp(-r)) {
    return {std::log(mag) / r, g > 0 ? 1.0 : (g < 0 ? -1.0 : 0.0)};
  }
  return {-1.0, std::exp(r) * g};
}

// ---------------------------------------------------------------------------
// Forward / backward machinery (batched over coordinates)

// Per-coordinate recurrent state, stored column-per-coordinate.
struct MetaState {
  Eigen::MatrixXd h0, c0, h1, c1;  // H x K

  static MetaState zeros(int hidden, int n_coords) {
    MetaState s;
    s.h0 = Eigen::MatrixXd::Zero(hidden, n_coords);
    s.c0 = Eigen::MatrixXd::Zero(hidden, n_coords);
    s.h1 = Eigen::MatrixXd::Zero(hidden, n_coords);
    s.c1 = Eigen::MatrixXd::Zero(hidden, n_coords);
    return s;
  }
};

namespace detail {

struct CellCache {
  Eigen::MatrixXd x, h_prev, c_prev;
  Eigen::MatrixXd gi, gf, gg, go;  // gate activations, H x K
  Eigen::MatrixXd c, tanh_c, h;
};

inline CellCache lstm_cell_forward(const Eigen::MatrixXd& w_in,
                                   const Eigen::MatrixXd& w_rec,
                                   const Eigen::VectorXd& bias,
                                   const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& h_prev,
                                   const Eigen::MatrixXd& c_prev) {
  const int hidden = static_cast<int>(h_prev.rows());
  CellCache cc;
  cc.x = x;
  cc.h_prev = h_prev;
  cc.c_prev = c_prev;
  Eigen::MatrixXd z = w_in * x + w_rec * h_prev;
  z.colwise() += bias;
  const auto sigmoid = [](const Eigen::MatrixXd& m) {
    return (1.0 / (1.0 + (-m.array()).exp())).matrix();
  };
  cc.gi = sigmoid(z.topRows(hidden));
  cc.gf = sigmoid(z.middleRows(hidden, hidden));
  cc.gg = z.middleRows(2 * hidden, hidden).array().tanh().matrix();
  cc.go = sigmoid(z.bottomRows(hidden));
  cc.c = cc.gf.cwiseProduct(c_prev) + cc.gi.cwiseProduct(cc.gg);
  cc.tanh_c = cc.c.array().tanh().matrix();
  cc.h = cc.go.cwiseProduct(cc.tanh_c);
  return cc;
}

struct CellGrads {
  Eigen::MatrixXd dx, dh_prev, dc_prev;
};

inline CellGrads lstm_cell_backward(const Eigen::MatrixXd& w_in,
                                    const Eigen::MatrixXd& w_rec,
                                    const CellCache& cc,
                                    const Eigen::MatrixXd& dh,
                                    const Eigen::MatrixXd& dc_carry,
                                    Eigen::MatrixXd& dw_in,
                                    Eigen::MatrixXd& dw_rec,
                                    Eigen::VectorXd& db) {
  const int hidden = static_cast<int>(cc.h.rows());
  const Eigen::MatrixXd d_o = dh.cwiseProduct(cc.tanh_c);
  const Eigen::MatrixXd dc =
      (dh.array() * cc.go.array() * (1.0 - cc.tanh_c.array().square())).matrix() +
      dc_carry;
  const Eigen::MatrixXd d_f = dc.cwiseProduct(cc.c_prev);
  const Eigen::MatrixXd d_i = dc.cwiseProduct(cc.gg);
  const Eigen::MatrixXd d_g = dc.cwiseProduct(cc.gi);
  Eigen::MatrixXd dz(4 * hidden, cc.h.cols());
  dz.topRows(hidden) =
      (d_i.array() * cc.gi.array() * (1.0 - cc.gi.array())).matrix();
  dz.middleRows(hidden, hidden) =
      (d_f.array() * cc.gf.array() * (1.0 - cc.gf.array())).matrix();
  dz.middleRows(2 * hidden, hidden) =
      (d_g.array() * (1.0 - cc.gg.array().square())).matrix();
  dz.bottomRows(hidden) =
      (d_o.array() * cc.go.array() * (1.0 - cc.go.array())).matrix();
  dw_in += dz * cc.x.transpose();
  dw_rec += dz * cc.h_prev.transpose();
  db += dz.rowwise().sum();
  CellGrads out;
  out.dx = w_in.transpose() * dz;
  out.dh_prev = w_rec.transpose() * dz;
  out.dc_prev = dc.cwiseProduct(cc.gf);
  return out;
}

struct StepCache {
  CellCache l0, l1;
  Eigen::VectorXd delta;  // K
};

inline StepCache meta_forward_step(const MetaModel& m, MetaState& state,
                                   const std::vector<double>& grads) {
  const int k = static_cast<int>(grads.size());
  Eigen::MatrixXd x(2, k);
  for (int i = 0; i < k; ++i) {
    const auto [a, b] =
        preprocess_gradient(grads[static_cast<std::size_t>(i)], m.preprocess_r);
    x(0, i) = a;
    x(1, i) = b;
  }
  StepCache sc;
  sc.l0 = lstm_cell_forward(m.tensors.w0_in, m.tensors.w0_rec, m.tensors.b0, x,
                            state.h0, state.c0);
  sc.l1 = lstm_cell_forward(m.tensors.w1_in, m.tensors.w1_rec, m.tensors.b1,
                            sc.l0.h, state.h1, state.c1);
  sc.delta = m.output_scale *
             ((m.tensors.head_w.transpose() * sc.l1.h).transpose().array() +
              m.tensors.head_b)
                 .matrix();
  state.h0 = sc.l0.h;
  state.c0 = sc.l0.c;
  state.h1 = sc.l1.h;
  state.c1 = sc.l1.c;
  return sc;
}

}  // namespace detail

// One coordinatewise LSTM step: preprocess each slot's gradient, advance that
// slot's recurrent state, emit its parameter update.
inline std::vector<double> meta_step(const MetaModel& model, MetaState& state,
                                     const std::vector<double>& grads) {
  if (state.h0.cols() != static_cast<Eigen::Index>(grads.size())) {
    throw std::invalid_argument("state / gradient size mismatch");
  }
  const detail::StepCache sc = detail::meta_forward_step(model, state, grads);
  return std::vector<double>(sc.delta.data(), sc.delta.data() + sc.delta.size());
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double adam_lr = 0.003;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  int horizon_start = 3;
  int horizon_cap = 10;
  int n_train_problems = 200;  // 100 for Fermi-Hubbard
  double omega = 1.0;          // per-step loss weight (all equal)
  int max_unroll_steps = 100;
  double convergence_tol = 1e-6;
  int convergence_window = 5;
  double init_lo = -std::numbers::pi / 2.0;
  double init_hi = std::numbers::pi / 2.0;
};

struct MetaTrainProblem {
  int dimension = 0;
  std::function<double(const std::vector<double>&)> cost;
  std::function<std::vector<double>(const std::vector<double>&)> grad;
};

using ProblemSampler =
    std::function<MetaTrainProblem(int problem_index, std::uint64_t stream)>;

namespace detail {

struct AdamState {
  ModelTensors m, v;
  long t = 0;
};

inline void adam_update(MetaModel& model, ModelTensors& grads, AdamState& adam,
                        const TrainConfig& cfg) {
  ++adam.t;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.t));
  auto weights = tensor_refs(model.tensors);
  auto g = tensor_refs(grads);
  auto m = tensor_refs(adam.m);
  auto v = tensor_refs(adam.v);
  for (std::size_t ti = 0; ti < weights.size(); ++ti) {
    for (std::size_t i = 0; i < weights[ti].size; ++i) {
      double gi = g[ti].data[i];
      if (cfg.weight_decay != 0.0) gi += cfg.weight_decay * weights[ti].data[i];
      m[ti].data[i] = cfg.adam_beta1 * m[ti].data[i] + (1.0 - cfg.adam_beta1) * gi;
      v[ti].data[i] =
          cfg.adam_beta2 * v[ti].data[i] + (1.0 - cfg.adam_beta2) * gi * gi;
      weights[ti].data[i] -= cfg.adam_lr * (m[ti].data[i] / bc1) /
                             (std::sqrt(v[ti].data[i] / bc2) + cfg.adam_eps);
    }
  }
}

struct WindowResult {
  double loss = 0.0;
  std::vector<double> costs;  // recorded per-step costs
  std::vector<double> final_params;
  ModelTensors grads;
  bool finite = true;
};

// Unrolls `horizon` LSTM steps from `params`, recording the cost after each
// step, then backpropagates the summed loss through the unrolled graph.
// The optimizee gradients feeding each step are treated as constants
// (second-order terms dropped). `pending_grad` must hold the optimizee
// gradient at `params` on entry and holds the gradient at the final point on
// exit, ready to start the next window.
inline WindowResult run_window(const MetaModel& model,
                               const MetaTrainProblem& problem,
                               std::vector<double> params, MetaState& state,
                               std::vector<double>& pending_grad, int horizon,
                               bool with_gradients = true) {
  const int k = problem.dimension;
  const int hidden = model.hidden;
  WindowResult out;
  out.grads = ModelTensors::zeros(hidden);

  std::vector<detail::StepCache> caches;
  std::vector<Eigen::VectorXd> grad_after;  // optimizee grad at each new point
  caches.reserve(static_cast<std::size_t>(horizon));

  for (int t = 0; t < horizon; ++t) {
    caches.push_back(detail::meta_forward_step(model, state, pending_grad));
    const Eigen::VectorXd& delta = caches.back().delta;
    for (int i = 0; i < k; ++i) {
      params[static_cast<std::size_t>(i)] += delta(i);
    }
    const double c = problem.cost(params);
    out.costs.push_back(c);
    out.loss += c;
    if (!std::isfinite(c)) out.finite = false;
    pending_grad = problem.grad(params);
    Eigen::VectorXd g(k);
    for (int i = 0; i < k; ++i) g(i) = pending_grad[static_cast<std::size_t>(i)];
    if (!g.allFinite()) out.finite = false;
    grad_after.push_back(std::move(g));
  }
  out.final_params = params;
  if (!with_gradients || !out.finite) return out;

  // Backward pass. dL/dDelta_t = sum_{tau >= t} grad f(phi_{tau+1}).
  Eigen::MatrixXd dh1_carry = Eigen::MatrixXd::Zero(hidden, k);
  Eigen::MatrixXd dc1_carry = Eigen::MatrixXd::Zero(hidden, k);
  Eigen::MatrixXd dh0_carry = Eigen::MatrixXd::Zero(hidden, k);
  Eigen::MatrixXd dc0_carry = Eigen::MatrixXd::Zero(hidden, k);
  Eigen::VectorXd suffix = Eigen::VectorXd::Zero(k);
  for (int t = horizon - 1; t >= 0; --t) {
    suffix += grad_after[static_cast<std::size_t>(t)];
    const detail::StepCache& sc = caches[static_cast<std::size_t>(t)];
    // Head.
    out.grads.head_w +=
        model.output_scale * (sc.l1.h * suffix);
    out.grads.head_b += model.output_scale * suffix.sum();
    Eigen::MatrixXd dh1 =
        model.output_scale * (model.tensors.head_w * suffix.transpose());
    dh1 += dh1_carry;
    const detail::CellGrads g1 = detail::lstm_cell_backward(
        model.tensors.w1_in, model.tensors.w1_rec, sc.l1, dh1, dc1_carry,
        out.grads.w1_in, out.grads.w1_rec, out.grads.b1);
    dh1_carry = g1.dh_prev;
    dc1_carry = g1.dc_prev;
    Eigen::MatrixXd dh0 = g1.dx + dh0_carry;
    const detail::CellGrads g0 = detail::lstm_cell_backward(
        model.tensors.w0_in, model.tensors.w0_rec, sc.l0, dh0, dc0_carry,
        out.grads.w0_in, out.grads.w0_rec, out.grads.b0);
    dh0_carry = g0.dh_prev;
    dc0_carry = g0.dc_prev;
  }
  return out;
}

inline int horizon_for_problem(const TrainConfig& cfg, int index) {
  if (cfg.n_train_problems <= 1) return cfg.horizon_start;
  const double frac = static_cast<double>(index) /
                      static_cast<double>(cfg.n_train_problems - 1);
  const int t = cfg.horizon_start +
                static_cast<int>(std::lround(
                    frac * static_cast<double>(cfg.horizon_cap - cfg.horizon_start)));
  return std::clamp(t, cfg.horizon_start, cfg.horizon_cap);
}

inline bool costs_converged(const std::vector<double>& costs, double tol,
                            int window) {
  if (static_cast<int>(costs.size()) < window + 1) return false;
  double lo = costs.back(), hi = costs.back();
  for (int i = 0; i <= window; ++i) {
    const double c = costs[costs.size() - 1 - static_cast<std::size_t>(i)];
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return hi - lo < tol;
}

}  // namespace detail

// Curriculum training: one unrolled optimization per problem, summed-loss
// windows of growing horizon, one Adam update per window. Unrolls truncate
// at max_unroll_steps or on cost convergence.
inline MetaModel train_meta(MetaModel model, const ProblemSampler& sampler,
                            const TrainConfig& cfg, std::uint64_t seed) {
  detail::AdamState adam;
  adam.m = ModelTensors::zeros(model.hidden);
  adam.v = ModelTensors::zeros(model.hidden);

  for (int idx = 0; idx < cfg.n_train_problems; ++idx) {
    const MetaTrainProblem problem =
        sampler(idx, derive_stream(seed, "meta-problem", idx));
    const int horizon = detail::horizon_for_problem(cfg, idx);
    Rng init_rng(derive_stream(seed, "meta-init", idx));
    std::vector<double> params(static_cast<std::size_t>(problem.dimension));
    for (auto& p : params) p = init_rng.uniform(cfg.init_lo, cfg.init_hi);

    MetaState state = MetaState::zeros(model.hidden, problem.dimension);
    std::vector<double> history{problem.cost(params)};
    std::vector<double> pending = problem.grad(params);
    int steps = 0;
    while (steps < cfg.max_unroll_steps) {
      const int t_window = std::min(horizon, cfg.max_unroll_steps - steps);
      detail::WindowResult window =
          detail::run_window(model, problem, params, state, pending, t_window);
      bool params_ok = true;
      for (double p : window.final_params) params_ok = params_ok && std::isfinite(p);
      if (!params_ok) {
        std::cerr << "[train_meta] non-finite parameters on problem " << idx
                  << "; abandoning this unroll\n";
        break;
      }
      if (window.finite) {
        detail::adam_update(model, window.grads, adam, cfg);
      } else {
        std::cerr << "[train_meta] non-finite loss on problem " << idx
                  << "; window skipped\n";
      }
      params = std::move(window.final_params);
      history.insert(history.end(), window.costs.begin(), window.costs.end());
      steps += t_window;
      if (detail::costs_converged(history, cfg.convergence_tol,
                                  cfg.convergence_window)) {
        break;
      }
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Deployment

// Runs the frozen model as a standard optimizer: per iteration one gradient
// call (2m auxiliary evaluations) and one energy evaluation, stopping at
// max_iter or when the cost stops changing (same rule as training).
inline RunRecord meta_optimize(const MetaModel& model, Objective& obj,
                               const std::vector<double>& x0,
                               int max_iter = 100) {
  if (!obj.has_gradient()) {
    throw std::invalid_argument("meta-learner needs a gradient-capable objective");
  }
  RunRecord record;
  detail::TracedObjective f(obj, record);
  std::vector<double> params = x0;
  std::vector<double> history{f.evaluate(params)};
  MetaState state = MetaState::zeros(model.hidden, obj.dimension());
  TerminationReason reason = TerminationReason::Budget;
  for (int iter = 0; iter < max_iter; ++iter) {
    const std::vector<double> grads = f.gradient(params);
    const std::vector<double> delta = meta_step(model, state, grads);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] += delta[i];
    history.push_back(f.evaluate(params));
    if (detail::costs_converged(history, 1e-6, 5)) {
      reason = TerminationReason::Converged;
      break;
    }
  }
  record.finalize(reason);
  return record;
}

// ---------------------------------------------------------------------------
// Training-correctness oracle

// Verifies truncated BPTT against central finite differences on an optimizee
// with constant gradient (so the dropped second-order terms vanish exactly).
// Returns the max over weights of |bptt - fd| / max(|fd|, 1e-3), i.e. a
// relative error with a 1e-7 absolute floor at the 1e-4 acceptance level.
inline double bptt_gradient_check(const MetaModel& model, int horizon) {
  if (horizon < 1 || horizon > 5) {
    throw std::invalid_argument("gradient check horizon must be in [1, 5]");
  }
  const std::vector<double> coeffs{0.7, -1.3};
  MetaTrainProblem problem;
  problem.dimension = 2;
  problem.cost = [coeffs](const std::vector<double>& p) {
    return coeffs[0] * p[0] + coeffs[1] * p[1];
  };
  problem.grad = [coeffs](const std::vector<double>&) { return coeffs; };
  const std::vector<double> start{0.3, -0.4};

  const auto window_loss = [&](const MetaModel& m) {
    MetaState state = MetaState::zeros(m.hidden, problem.dimension);
    std::vector<double> pending = problem.grad(start);
    return detail::run_window(m, problem, start, state, pending, horizon,
                              /*with_gradients=*/false)
        .loss;
  };

  MetaState state = MetaState::zeros(model.hidden, problem.dimension);
  std::vector<double> pending = problem.grad(start);
  const detail::WindowResult analytic =
      detail::run_window(model, problem, start, state, pending, horizon);

  MetaModel probe = model;
  auto probe_refs = tensor_refs(probe.tensors);
  ModelTensors bptt = analytic.grads;
  auto bptt_refs = tensor_refs(bptt);
  constexpr double step = 1e-5;
  double max_err = 0.0;
  for (std::size_t ti = 0; ti < probe_refs.size(); ++ti) {
    for (std::size_t i = 0; i < probe_refs[ti].size; ++i) {
      const double saved = probe_refs[ti].data[i];
      probe_refs[ti].data[i] = saved + step;
      const double loss_plus = window_loss(probe);
      probe_refs[ti].data[i] = saved - step;
      const double loss_minus = window_loss(probe);
      probe_refs[ti].data[i] = saved;
      const double fd = (loss_plus - loss_minus) / (2.0 * step);
      const double err =
          std::abs(bptt_refs[ti].data[i] - fd) / std::max(std::abs(fd), 1e-3);
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

// ---------------------------------------------------------------------------
// Persistence

namespace detail {

inline Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

inline Json vector_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  }
  return v;
}

}  // namespace detail

inline Json meta_model_to_json(const MetaModel& m) {
  Json j;
  j["version"] = m.version;
  j["hidden"] = m.hidden;
  j["output_scale"] = m.output_scale;
  j["preprocess_r"] = m.preprocess_r;
  j["problem_class"] = m.problem_class;
  j["environment"] = m.environment;
  j["w0_in"] = detail::matrix_to_json(m.tensors.w0_in);
  j["w0_rec"] = detail::matrix_to_json(m.tensors.w0_rec);
  j["b0"] = detail::vector_to_json(m.tensors.b0);
  j["w1_in"] = detail::matrix_to_json(m.tensors.w1_in);
  j["w1_rec"] = detail::matrix_to_json(m.tensors.w1_rec);
  j["b1"] = detail::vector_to_json(m.tensors.b1);
  j["head_w"] = detail::vector_to_json(m.tensors.head_w);
  j["head_b"] = m.tensors.head_b;
  return j;
}

inline MetaModel meta_model_from_json(const Json& j) {
  MetaModel m;
  m.version = j.at("version").get<int>();
  m.hidden = j.at("hidden").get<int>();
  m.output_scale = j.at("output_scale").get<double>();
  m.preprocess_r = j.at("preprocess_r").get<double>();
  m.problem_class = j.at("problem_class").get<std::string>();
  m.environment = j.at("environment").get<std::string>();
  m.tensors.w0_in = detail::matrix_from_json(j.at("w0_in"));
  m.tensors.w0_rec = detail::matrix_from_json(j.at("w0_rec"));
  m.tensors.b0 = detail::vector_from_json(j.at("b0"));
  m.tensors.w1_in = detail::matrix_from_json(j.at("w1_in"));
  m.tensors.w1_rec = detail::matrix_from_json(j.at("w1_rec"));
  m.tensors.b1 = detail::vector_from_json(j.at("b1"));
  m.tensors.head_w = detail::vector_from_json(j.at("head_w"));
  m.tensors.head_b = j.at("head_b").get<double>();
  const int h = m.hidden;
  if (m.tensors.w0_in.rows() != 4 * h || m.tensors.w0_in.cols() != 2 ||
      m.tensors.w0_rec.cols() != h || m.tensors.w1_in.cols() != h ||
      m.tensors.head_w.size() != h) {
    throw std::invalid_argument("model tensor shapes inconsistent with hidden size");
  }
  return m;
}

}  // namespace vqbench
