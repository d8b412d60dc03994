#pragma once

// Single-tree simulator for continuous-time branching processes.
//
// A tree is grown by per-particle recursion over an explicit stack: pop a
// pending particle, draw its Exp(beta) lifetime, then either censor it at the
// horizon (it is still alive there) or draw its offspring count and push the
// children. Parents are always processed before their children and siblings
// in birth order, so edge ids are preorder indices and the random draws
// consumed by a replicate are a fixed function of (master_seed, replicate)
// alone. Every particle consumes one uniform for its lifetime and, only if it
// dies before the horizon, one more for its offspring count.
//
// The same core loop is shared by observers that record full edge lists,
// count the population, or tally censuses on the fly; given the same stream
// they all see the exact same tree.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwedge/offspring.hpp"
#include "gwedge/rng.hpp"

namespace gwedge {

inline constexpr std::uint64_t DEFAULT_PARTICLE_CAP = 10'000'000;

// Raised when a tree would exceed the particle cap. Experiments treat this as
// an abort rather than truncating the tree, which would bias every statistic
// conditioned on it.
struct OverflowError : std::runtime_error {
  explicit OverflowError(std::uint64_t cap)
      : std::runtime_error("particle cap exceeded (cap " + std::to_string(cap) + ")") {}
};

struct EdgeRecord {
  double birth_time;
  double end_time;             // death time, or the horizon when censored
  std::int32_t parent;         // preorder id of the parent, -1 for the root
  std::int32_t offspring;      // children produced at death; 0 when censored
  bool censored;               // particle still alive at the horizon

  double length() const { return end_time - birth_time; }
};

struct SimTree {
  double horizon = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t replicate = 0;
  std::vector<EdgeRecord> edges;
  std::uint64_t n_alive = 0;
  double martingale_value = 0.0;  // e^{-(m-1) beta t} * n_alive

  bool survived() const { return n_alive > 0; }
};

// Core loop. Observer::on_edge(id, parent, birth, end, censored, offspring)
// is invoked exactly once per particle, in preorder.
template <class Observer>
inline void run_branching(double beta, const OffspringSampler& sampler, double horizon,
                          CounterRng& rng, std::uint64_t particle_cap, Observer& obs) {
  if (particle_cap > 0x7FFFFFFFULL)
    throw std::invalid_argument("particle cap must fit 32-bit edge ids");
  struct Pending {
    double birth;
    std::int32_t parent;
  };
  std::vector<Pending> stack;
  stack.push_back({0.0, -1});
  std::uint64_t processed = 0;
  while (!stack.empty()) {
    const Pending cur = stack.back();
    stack.pop_back();
    if (processed >= particle_cap) throw OverflowError(particle_cap);
    const auto id = static_cast<std::int32_t>(processed++);
    const double death = cur.birth + rng.next_exponential(beta);
    if (death > horizon) {
      obs.on_edge(id, cur.parent, cur.birth, horizon, true, 0);
    } else {
      const int n = sampler.sample(rng.next_unit());
      obs.on_edge(id, cur.parent, cur.birth, death, false, n);
      for (int c = 0; c < n; ++c) stack.push_back({death, id});
    }
  }
}

namespace detail {

struct RecordingObserver {
  std::vector<EdgeRecord>* edges;
  std::uint64_t alive = 0;

  void on_edge(std::int32_t, std::int32_t parent, double birth, double end, bool censored,
               int offspring) {
    edges->push_back({birth, end, parent, offspring, censored});
    alive += censored ? 1 : 0;
  }
};

struct CountingObserver {
  std::uint64_t alive = 0;

  void on_edge(std::int32_t, std::int32_t, double, double, bool censored, int) {
    alive += censored ? 1 : 0;
  }
};

inline void check_horizon(double horizon) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon must be finite and >= 0");
}

}  // namespace detail

// Reuses the edge buffer of `out`; sampler must match params.offspring.
inline void simulate_tree_into(SimTree& out, const ModelParams& params,
                               const OffspringSampler& sampler, double horizon,
                               CounterRng& rng, std::uint64_t particle_cap) {
  detail::check_horizon(horizon);
  out.horizon = horizon;
  out.edges.clear();
  detail::RecordingObserver obs{&out.edges};
  run_branching(params.beta, sampler, horizon, rng, particle_cap, obs);
  out.n_alive = obs.alive;
  const double m = params.offspring.mean();
  out.martingale_value =
      std::exp(-(m - 1.0) * params.beta * horizon) * static_cast<double>(out.n_alive);
}

inline SimTree simulate_tree(const ModelParams& params, double horizon,
                             std::uint64_t master_seed, std::uint64_t replicate,
                             std::uint64_t particle_cap = DEFAULT_PARTICLE_CAP) {
  SimTree tree;
  tree.master_seed = master_seed;
  tree.replicate = replicate;
  CounterRng rng(master_seed, StreamDomain::replicate, replicate);
  OffspringSampler sampler(params.offspring);
  simulate_tree_into(tree, params, sampler, horizon, rng, particle_cap);
  return tree;
}

// Population size at the horizon without materializing edges. Consumes the
// stream exactly as simulate_tree does, so the two agree draw for draw.
inline std::uint64_t simulate_alive_count(const ModelParams& params,
                                          const OffspringSampler& sampler, double horizon,
                                          CounterRng& rng, std::uint64_t particle_cap) {
  detail::check_horizon(horizon);
  detail::CountingObserver obs;
  run_branching(params.beta, sampler, horizon, rng, particle_cap, obs);
  return obs.alive;
}

}  // namespace gwedge
