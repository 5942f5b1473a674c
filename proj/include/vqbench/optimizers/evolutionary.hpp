#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vqbench/optimizers/common.hpp"
#include "vqbench/rng.hpp"

namespace vqbench {

struct EsConfig {
  int population = 20;
  int bits_total = 60;  // 60 for QAOA (10 bits x 6 params), 297 for VQE (11 x 27)
  double p_crossover = 0.9;
  double p_mutation = 0.01;
  double value_lo = -std::numbers::pi / 2.0;
  double value_hi = std::numbers::pi / 2.0;
};

namespace detail {

// Binary-reflected Gray decode, MSB first.
inline std::uint64_t gray_to_binary(const std::vector<std::uint8_t>& bits,
                                    std::size_t offset, std::size_t count) {
  std::uint64_t value = 0;
  std::uint8_t prev = 0;
  for (std::size_t k = 0; k < count; ++k) {
    prev ^= bits[offset + k];
    value = (value << 1) | prev;
  }
  return value;
}

inline std::vector<double> decode_genome(const std::vector<std::uint8_t>& bits,
                                         int dim, int bits_per_param,
                                         double lo, double hi) {
  std::vector<double> x(static_cast<std::size_t>(dim));
  const double denom =
      static_cast<double>((std::uint64_t{1} << bits_per_param) - 1);
  for (int k = 0; k < dim; ++k) {
    const std::uint64_t v = gray_to_binary(
        bits, static_cast<std::size_t>(k) * static_cast<std::size_t>(bits_per_param),
        static_cast<std::size_t>(bits_per_param));
    x[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(v) / denom;
  }
  return x;
}

}  // namespace detail

// Gray-coded generational GA: binary tournament parent selection, single-point
// crossover with probability p_crossover (children replace their parents),
// per-bit mutation, and elitism -- the fittest individual of the previous
// generation joins the next one and is evaluated first, giving the
// 21-evaluation generation period.
inline RunRecord run_evolutionary(Objective& obj, const EsConfig& cfg,
                                  long budget, std::uint64_t seed) {
  const int dim = obj.dimension();
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (cfg.bits_total % dim != 0) {
    throw std::invalid_argument("bits_total must be divisible by dimension");
  }
  const int bits_per_param = cfg.bits_total / dim;
  if (bits_per_param < 1 || bits_per_param > 62) {
    throw std::invalid_argument("bits per parameter out of range");
  }

  RunRecord record;
  detail::TracedObjective f(obj, record);
  Rng rng(derive_stream(seed, "es"));

  struct Individual {
    std::vector<std::uint8_t> bits;
    double cost = 0.0;
  };

  const auto evaluate_bits = [&](const std::vector<std::uint8_t>& bits) {
    return f.evaluate(detail::decode_genome(bits, dim, bits_per_param,
                                            cfg.value_lo, cfg.value_hi));
  };

  // Generation 0: random search.
  std::vector<Individual> pool;
  for (int i = 0; i < cfg.population && f.energy_evals() < budget; ++i) {
    Individual ind;
    ind.bits.resize(static_cast<std::size_t>(cfg.bits_total));
    for (auto& b : ind.bits) b = rng.bernoulli(0.5) ? 1 : 0;
    ind.cost = evaluate_bits(ind.bits);
    pool.push_back(std::move(ind));
  }

  const auto best_of = [](const std::vector<Individual>& v) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i].cost < v[b].cost) b = i;
    }
    return b;
  };

  const auto tournament = [&](const std::vector<Individual>& v) -> const Individual& {
    const int a = rng.uniform_int(0, static_cast<int>(v.size()) - 1);
    const int b = rng.uniform_int(0, static_cast<int>(v.size()) - 1);
    return v[static_cast<std::size_t>(v[static_cast<std::size_t>(a)].cost <=
                                              v[static_cast<std::size_t>(b)].cost
                                          ? a
                                          : b)];
  };

  while (f.energy_evals() < budget && !pool.empty()) {
    // Elite first so its (possibly re-drawn, in stochastic environments)
    // evaluation opens the generation.
    Individual elite = pool[best_of(pool)];
    std::vector<Individual> next;
    elite.cost = evaluate_bits(elite.bits);
    next.push_back(elite);

    std::vector<Individual> children;
    while (static_cast<int>(children.size()) < cfg.population) {
      const Individual& p1 = tournament(pool);
      const Individual& p2 = tournament(pool);
      Individual c1{p1.bits, 0.0};
      Individual c2{p2.bits, 0.0};
      if (rng.bernoulli(cfg.p_crossover)) {
        const int cut = rng.uniform_int(1, cfg.bits_total - 1);
        for (int k = cut; k < cfg.bits_total; ++k) {
          std::swap(c1.bits[static_cast<std::size_t>(k)],
                    c2.bits[static_cast<std::size_t>(k)]);
        }
      }
      for (auto& b : c1.bits) {
        if (rng.bernoulli(cfg.p_mutation)) b ^= 1;
      }
      for (auto& b : c2.bits) {
        if (rng.bernoulli(cfg.p_mutation)) b ^= 1;
      }
      children.push_back(std::move(c1));
      if (static_cast<int>(children.size()) < cfg.population) {
        children.push_back(std::move(c2));
      }
    }
    for (auto& child : children) {
      if (f.energy_evals() >= budget) break;
      child.cost = evaluate_bits(child.bits);
      next.push_back(std::move(child));
    }
    pool = std::move(next);
  }

  record.finalize(TerminationReason::Budget);
  return record;
}

}  // namespace vqbench
