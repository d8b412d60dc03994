#pragma once

// Offspring laws for continuous-time branching processes.
//
// All laws are finite-support probability tables, so every moment used by the
// analytic layer exists and the x log x moment condition behind the
// martingale-limit results holds automatically. Constructors renormalize
// inputs whose total mass deviates from 1 by less than 1e-9 and reject
// anything worse; downstream code can therefore assume exact unit mass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gwedge {

class OffspringDistribution {
 public:
  // probs maps child count k >= 0 to its probability. Zero entries are
  // dropped; the remaining mass must be within 1e-9 of 1.
  explicit OffspringDistribution(const std::map<int, double>& probs) {
    double sum = 0.0;
    for (const auto& [k, p] : probs) {
      if (k < 0) throw std::invalid_argument("offspring count must be >= 0");
      if (!(p >= 0.0) || !std::isfinite(p))
        throw std::invalid_argument("offspring probability must be finite and >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("offspring probabilities must sum to 1 (within 1e-9)");
    for (const auto& [k, p] : probs) {
      if (p > 0.0) entries_.emplace_back(k, p / sum);
    }
    if (entries_.empty())
      throw std::invalid_argument("offspring law needs at least one positive entry");
    mean_ = 0.0;
    second_moment_ = 0.0;
    for (const auto& [k, p] : entries_) {
      mean_ += k * p;
      second_moment_ += static_cast<double>(k) * k * p;
    }
  }

  // Entries sorted by child count, probabilities strictly positive.
  const std::vector<std::pair<int, double>>& entries() const { return entries_; }

  double prob(int k) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                               [](const auto& e, int key) { return e.first < key; });
    return (it != entries_.end() && it->first == k) ? it->second : 0.0;
  }

  double mean() const { return mean_; }
  double second_moment() const { return second_moment_; }
  int max_count() const { return entries_.back().first; }
  bool supercritical() const { return mean_ > 1.0; }

 private:
  std::vector<std::pair<int, double>> entries_;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
};

// Branching parameters: every particle lives an Exp(beta) lifetime and is
// replaced at death by an offspring-law sample.
struct ModelParams {
  double beta;
  OffspringDistribution offspring;

  ModelParams(double beta_, OffspringDistribution offspring_)
      : beta(beta_), offspring(std::move(offspring_)) {
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw std::invalid_argument("beta must be finite and > 0");
  }
};

struct BirthDeathParams {
  double lambda;
  double mu;

  BirthDeathParams(double lambda_, double mu_) : lambda(lambda_), mu(mu_) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("lambda must be finite and > 0");
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw std::invalid_argument("mu must be finite and >= 0");
  }
};

// Binary-splitting embedding of the linear birth-death chain: total event
// rate beta = lambda + mu, a death leaves 0 children with probability
// mu/beta and 2 with probability lambda/beta, so m = 2*lambda/beta.
inline ModelParams birth_death_model(double lambda, double mu) {
  BirthDeathParams bd(lambda, mu);
  const double beta = bd.lambda + bd.mu;
  std::map<int, double> probs;
  probs[0] = bd.mu / beta;
  probs[2] = bd.lambda / beta;
  return ModelParams(beta, OffspringDistribution(probs));
}

// Push all mass above cap down to zero children: the truncated particle
// produces no offspring whenever the original would have produced more than
// cap. Truncation only ever lowers the mean.
inline OffspringDistribution truncate(const OffspringDistribution& dist, int cap) {
  if (cap < 0) throw std::invalid_argument("truncation cap must be >= 0");
  std::map<int, double> probs;
  double excess = 0.0;
  for (const auto& [k, p] : dist.entries()) {
    if (k <= cap)
      probs[k] += p;
    else
      excess += p;
  }
  probs[0] += excess;
  return OffspringDistribution(probs);
}

// Polynomially decaying law p_k proportional to k^-3 on 1..cutoff. Its mean
// increases with cutoff toward zeta(2)/zeta(3) ~ 1.3684; already supercritical
// for cutoff >= 2.
inline OffspringDistribution heavy_tail_zeta3(int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("zeta3 cutoff must be >= 2");
  std::map<int, double> probs;
  double sum = 0.0;
  for (int k = 1; k <= cutoff; ++k) sum += 1.0 / (static_cast<double>(k) * k * k);
  for (int k = 1; k <= cutoff; ++k)
    probs[k] = 1.0 / (static_cast<double>(k) * k * k) / sum;
  return OffspringDistribution(probs);
}

// Inverse-CDF sampler over the cumulative table. Lookup cost is logarithmic
// in the support size; the draw consumes exactly one uniform.
class OffspringSampler {
 public:
  explicit OffspringSampler(const OffspringDistribution& dist) {
    double acc = 0.0;
    counts_.reserve(dist.entries().size());
    cumulative_.reserve(dist.entries().size());
    for (const auto& [k, p] : dist.entries()) {
      acc += p;
      counts_.push_back(k);
      cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;  // guard against rounding shortfall
  }

  int sample(double u) const {
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return counts_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  std::vector<int> counts_;
  std::vector<double> cumulative_;
};

}  // namespace gwedge
