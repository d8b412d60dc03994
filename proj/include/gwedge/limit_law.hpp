#pragma once

// Limit laws for long-edge counts and for the centered k-th longest lengths.
//
// Conditional on survival, the count of class edges longer than alpha*_t + x
// converges to a mixed Poisson law: Poisson with random rate
// prefactor * e^{-m beta x} * M, where M is the (conditioned) martingale
// limit and the prefactor separates the classes. Two representations are
// supported:
//
//  - closed_form_birth_death: for the binary birth-death model M is
//    exponential, the mixture integrates to a geometric law, and the k-th
//    longest CDFs have explicit product forms;
//  - empirical_mixture: for any supercritical model, the mixture is averaged
//    over simulated martingale-limit samples.
//
// P(L^(k) - alpha* t <= x) in the limit equals P(count of edges >= alpha* t + x
// is < k), so the k-th longest CDF is a partial sum of count pmfs.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gwedge/analytics.hpp"
#include "gwedge/offspring.hpp"

namespace gwedge::analytics {

struct EmptyMixtureError : std::invalid_argument {
  EmptyMixtureError() : std::invalid_argument("empirical mixture needs at least one sample") {}
};

enum class LimitLawKind { closed_form_birth_death, empirical_mixture };

struct LimitLaw {
  LimitLawKind kind;
  EdgeClass edge_class;
  double x;  // offset in l = alpha* t + x used when evaluating count pmfs
  std::optional<BirthDeathParams> bd;  // closed form only
  std::shared_ptr<const std::vector<double>> mixture;  // positive samples, mixture only
};

inline LimitLaw closed_form_law(const BirthDeathParams& bd, EdgeClass cls, double x) {
  if (!(bd.lambda > bd.mu))
    throw std::domain_error("closed-form limit law requires lambda > mu");
  return LimitLaw{LimitLawKind::closed_form_birth_death, cls, x, bd, nullptr};
}

inline LimitLaw mixture_law(std::vector<double> samples, EdgeClass cls, double x) {
  if (samples.empty()) throw EmptyMixtureError();
  for (double v : samples) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("mixture samples must be finite and > 0");
  }
  return LimitLaw{LimitLawKind::empirical_mixture, cls, x, std::nullopt,
                  std::make_shared<const std::vector<double>>(std::move(samples))};
}

// Success parameter of the geometric count law for the birth-death model:
// p = 1 / (1 + lambda/(lambda-mu) * prefactor * e^{-m beta x}), counts on
// {0, 1, 2, ...} with pmf p (1-p)^k.
inline double geometric_parameter(const BirthDeathParams& bd, EdgeClass cls, double x) {
  if (!(bd.lambda > bd.mu))
    throw std::domain_error("geometric count law requires lambda > mu");
  const double beta = bd.lambda + bd.mu;
  const double m = 2.0 * bd.lambda / beta;
  const double scale = bd.lambda / (bd.lambda - bd.mu);
  return 1.0 / (1.0 + scale * class_prefactor(m, cls) * std::exp(-m * beta * x));
}

namespace detail {

// Poisson pmf at k, stable for large rates.
inline double poisson_pmf(int k, double rate) {
  if (rate == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(k) * std::log(rate) - rate -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

// P(Poisson(rate) < k) via the pmf recurrence.
inline double poisson_cdf_below(int k, double rate) {
  if (rate == 0.0) return k > 0 ? 1.0 : 0.0;
  double term = std::exp(-rate);
  double sum = 0.0;
  for (int j = 0; j < k; ++j) {
    sum += term;
    term *= rate / (j + 1);
  }
  return sum < 1.0 ? sum : 1.0;
}

inline double mixture_rate_scale(const LimitLaw& law, double beta, double m, double x) {
  return class_prefactor(m, law.edge_class) * std::exp(-m * beta * x);
}

}  // namespace detail

// pmf of the limiting count law at k, evaluated at the law's offset x.
// For the closed form, beta and m are taken from the stored birth-death
// parameters; for mixtures they must describe the model the samples came from.
inline double limit_pmf(const LimitLaw& law, int k, double beta, double m) {
  if (k < 0) throw std::invalid_argument("count k must be >= 0");
  if (law.kind == LimitLawKind::closed_form_birth_death) {
    const double p = geometric_parameter(*law.bd, law.edge_class, law.x);
    return p * std::pow(1.0 - p, k);
  }
  const double scale = detail::mixture_rate_scale(law, beta, m, law.x);
  const auto& samples = *law.mixture;
  double acc = 0.0;
  for (double mi : samples) acc += detail::poisson_pmf(k, scale * mi);
  return acc / static_cast<double>(samples.size());
}

// P(W^(k) <= x): CDF of the limit of L^(k) - alpha* t for the law's class,
// i.e. the probability that fewer than k edges beat the offset x.
inline double limit_cdf_kth(const LimitLaw& law, int k, double x, double beta, double m) {
  if (k < 1) throw std::invalid_argument("order index k must be >= 1");
  if (law.kind == LimitLawKind::closed_form_birth_death) {
    const double p = geometric_parameter(*law.bd, law.edge_class, x);
    return 1.0 - std::pow(1.0 - p, k);
  }
  const double scale = detail::mixture_rate_scale(law, beta, m, x);
  const auto& samples = *law.mixture;
  double acc = 0.0;
  for (double mi : samples) acc += detail::poisson_cdf_below(k, scale * mi);
  return acc / static_cast<double>(samples.size());
}

inline constexpr double PMF_TAIL_EPSILON = 1e-9;
inline constexpr int PMF_TABLE_CAP = 10'000;

// pmf table long enough that the dropped tail has mass <= PMF_TAIL_EPSILON
// (hard-capped at PMF_TABLE_CAP entries).
inline std::vector<double> pmf_table(const LimitLaw& law, double beta, double m) {
  std::vector<double> table;
  if (law.kind == LimitLawKind::closed_form_birth_death) {
    const double p = geometric_parameter(*law.bd, law.edge_class, law.x);
    double term = p;
    double cum = 0.0;
    while (static_cast<int>(table.size()) < PMF_TABLE_CAP) {
      table.push_back(term);
      cum += term;
      if (cum >= 1.0 - PMF_TAIL_EPSILON) break;
      term *= 1.0 - p;
    }
    return table;
  }
  const double scale = detail::mixture_rate_scale(law, beta, m, law.x);
  const auto& samples = *law.mixture;
  double max_rate = 0.0;
  for (double mi : samples) max_rate = std::max(max_rate, scale * mi);
  // Poisson mass above rate + 25 sqrt(rate) + 40 is far below the tail budget.
  int k_hint = static_cast<int>(max_rate + 25.0 * std::sqrt(max_rate) + 40.0);
  k_hint = std::min(k_hint, PMF_TABLE_CAP);
  std::vector<double> acc(static_cast<std::size_t>(k_hint), 0.0);
  for (double mi : samples) {
    const double rate = scale * mi;
    double term = std::exp(-rate);
    for (int k = 0; k < k_hint; ++k) {
      acc[static_cast<std::size_t>(k)] += term;
      term *= rate / (k + 1);
    }
  }
  const double n = static_cast<double>(samples.size());
  double cum = 0.0;
  for (int k = 0; k < k_hint; ++k) {
    const double p = acc[static_cast<std::size_t>(k)] / n;
    table.push_back(p);
    cum += p;
    if (cum >= 1.0 - PMF_TAIL_EPSILON) break;
  }
  return table;
}

}  // namespace gwedge::analytics
