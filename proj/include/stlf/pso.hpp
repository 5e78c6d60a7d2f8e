#pragma once

// Inertia-weight particle swarm minimizer over a flat real vector.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stlf/error.hpp"
#include "stlf/random.hpp"

namespace stlf::pso {

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> pbest_position;
  double pbest_fitness = std::numeric_limits<double>::infinity();
  double fitness = std::numeric_limits<double>::infinity();  // at `position`
};

// `synchronous`: every iteration moves all particles against the gbest known at
// the start of the iteration, then evaluates them and folds results into
// pbest/gbest in particle order.
// `paper`: particle-major nesting, each particle runs all of its iterations
// before the next particle starts, always against the current gbest.
enum class LoopOrder { synchronous, paper };

struct SwarmConfig {
  std::size_t particles = 20;
  std::size_t iterations = 30;
  double inertia = 0.729;
  double c1 = 1.49445;
  double c2 = 1.49445;
  double v_max = 0.5;
  double lower = -1.0;
  double upper = 1.0;
  std::uint64_t seed = 0;
  LoopOrder loop = LoopOrder::synchronous;

  void validate() const {
    if (particles < 1 || iterations < 1) throw UsageError("swarm needs >= 1 particle and iteration");
    if (inertia < 0 || c1 < 0 || c2 < 0) throw UsageError("swarm coefficients must be >= 0");
    if (!(v_max > 0)) throw UsageError("v_max must be > 0");
    if (!(lower < upper)) throw UsageError("swarm bounds need lower < upper");
  }
};

using Fitness = std::function<double(std::span<const double>)>;

struct TraceRow {
  std::size_t iteration = 0;  // 0 for the initial evaluation
  std::size_t particle = 0;
  double fitness = 0;
  double gbest_fitness = 0;
};

struct Result {
  std::vector<double> best_position;
  double best_fitness = std::numeric_limits<double>::infinity();
  std::vector<double> history;  // gbest fitness after every evaluation
  std::vector<TraceRow> trace;
};

namespace detail {

inline double evaluate(const Fitness& f, std::span<const double> x, std::size_t particle) {
  double v;
  try {
    v = f(x);
  } catch (const std::exception& e) {
    throw NumericError("fitness evaluation failed for particle " + std::to_string(particle) +
                       ": " + e.what());
  }
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Positions uniform in [lower, upper], velocities uniform in [-v_max, v_max];
/// each particle is evaluated once and its pbest set to the start position.
inline std::vector<Particle> init_swarm(const SwarmConfig& cfg, std::size_t dim,
                                        const Fitness& fitness, Rng& rng) {
  cfg.validate();
  if (dim < 1) throw UsageError("swarm dimension must be >= 1");
  std::vector<Particle> swarm(cfg.particles);
  for (auto& p : swarm) {
    p.position.resize(dim);
    p.velocity.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) p.position[k] = rng.uniform(cfg.lower, cfg.upper);
    for (std::size_t k = 0; k < dim; ++k) p.velocity[k] = rng.uniform(-cfg.v_max, cfg.v_max);
  }
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    auto& p = swarm[i];
    p.fitness = detail::evaluate(fitness, p.position, i);
    p.pbest_position = p.position;
    p.pbest_fitness = p.fitness;
  }
  return swarm;
}

// Index of the particle with the lowest pbest fitness (first on ties).
inline std::size_t best_particle(std::span<const Particle> swarm) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < swarm.size(); ++i) {
    if (swarm[i].pbest_fitness < swarm[best].pbest_fitness) best = i;
  }
  return best;
}

/// v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x), clamped to +-v_max, then
/// x <- x + v clamped to the bounds. A coordinate that hits a bound has its
/// velocity zeroed. `uniform01` supplies r1 and r2, fresh per coordinate.
template <class Uniform01>
void update_particle(Particle& p, std::span<const double> gbest, const SwarmConfig& cfg,
                     Uniform01&& uniform01) {
  const std::size_t dim = p.position.size();
  if (gbest.size() != dim || p.velocity.size() != dim || p.pbest_position.size() != dim) {
    throw ShapeError("particle and gbest dimensions differ");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    const double r1 = uniform01();
    const double r2 = uniform01();
    double v = cfg.inertia * p.velocity[k] + cfg.c1 * r1 * (p.pbest_position[k] - p.position[k]) +
               cfg.c2 * r2 * (gbest[k] - p.position[k]);
    v = std::clamp(v, -cfg.v_max, cfg.v_max);
    double x = p.position[k] + v;
    if (x < cfg.lower || x > cfg.upper) {
      x = std::clamp(x, cfg.lower, cfg.upper);
      v = 0.0;
    }
    p.position[k] = x;
    p.velocity[k] = v;
  }
}

namespace detail {

struct GlobalBest {
  std::vector<double> position;
  double fitness = std::numeric_limits<double>::infinity();
};

inline void fold(Particle& p, std::size_t iteration, std::size_t index, GlobalBest& g,
                 Result& r) {
  if (p.fitness < p.pbest_fitness) {
    p.pbest_fitness = p.fitness;
    p.pbest_position = p.position;
  }
  if (p.pbest_fitness < g.fitness) {
    g.fitness = p.pbest_fitness;
    g.position = p.pbest_position;
  }
  r.history.push_back(g.fitness);
  r.trace.push_back({iteration, index, p.fitness, g.fitness});
}

}  // namespace detail

/// Minimizes `fitness` over [lower, upper]^dim.
inline Result optimize(const Fitness& fitness, std::size_t dim, const SwarmConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  auto swarm = init_swarm(cfg, dim, fitness, rng);
  Result r;
  detail::GlobalBest g;
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    auto& p = swarm[i];
    if (p.pbest_fitness < g.fitness || g.position.empty()) {
      g.fitness = p.pbest_fitness;
      g.position = p.pbest_position;
    }
    r.history.push_back(g.fitness);
    r.trace.push_back({0, i, p.fitness, g.fitness});
  }
  auto draw = [&rng] { return rng.uniform(); };

  if (cfg.loop == LoopOrder::synchronous) {
    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
      const std::vector<double> gbest = g.position;
      for (auto& p : swarm) update_particle(p, gbest, cfg, draw);
      for (std::size_t i = 0; i < swarm.size(); ++i) {
        swarm[i].fitness = detail::evaluate(fitness, swarm[i].position, i);
      }
      for (std::size_t i = 0; i < swarm.size(); ++i) detail::fold(swarm[i], it, i, g, r);
    }
  } else {
    for (std::size_t i = 0; i < swarm.size(); ++i) {
      for (std::size_t it = 1; it <= cfg.iterations; ++it) {
        update_particle(swarm[i], g.position, cfg, draw);
        swarm[i].fitness = detail::evaluate(fitness, swarm[i].position, i);
        detail::fold(swarm[i], it, i, g, r);
      }
    }
  }
  r.best_position = std::move(g.position);
  r.best_fitness = g.fitness;
  return r;
}

}  // namespace stlf::pso
