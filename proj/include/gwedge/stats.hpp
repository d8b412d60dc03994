#pragma once

// Distances and test statistics used to compare empirical distributions with
// analytic references.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gwedge::stats {

// Total variation distance (1/2) sum |p_k - q_k| between two pmf tables;
// the shorter table is implicitly zero-padded.
inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    if (!(a >= 0.0) || !(b >= 0.0))
      throw std::invalid_argument("pmf entries must be >= 0");
    acc += std::abs(a - b);
  }
  return 0.5 * acc;
}

// Kolmogorov-Smirnov distance sup_x |F_n(x) - F(x)| between the empirical CDF
// of the samples and a reference CDF, evaluated at the sample points where the
// supremum is attained. Cdf must be a nondecreasing function into [0, 1].
template <class Cdf>
inline double ks_distance(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

// (sample mean - exact mean) / SE with the SE taken from the exact variance
// exact_second - exact_mean^2. Under the model hypothesis this is
// asymptotically standard normal.
inline double mean_z_score(const std::vector<double>& samples, double exact_mean,
                           double exact_second) {
  if (samples.empty()) throw std::invalid_argument("mean_z_score needs at least one sample");
  const double var = exact_second - exact_mean * exact_mean;
  if (!(var >= 0.0)) throw std::invalid_argument("exact variance must be >= 0");
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / static_cast<double>(samples.size());
  const double se = std::sqrt(var / static_cast<double>(samples.size()));
  if (se == 0.0) return mean == exact_mean ? 0.0 : INFINITY;
  return (mean - exact_mean) / se;
}

// Same z-statistic with the SE estimated from the samples themselves; for
// quantities whose exact second moment is unavailable.
inline double mean_z_score_empirical(const std::vector<double>& samples, double exact_mean) {
  if (samples.size() < 2)
    throw std::invalid_argument("empirical z-score needs at least two samples");
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  if (se == 0.0) return mean == exact_mean ? 0.0 : INFINITY;
  return (mean - exact_mean) / se;
}

// Normalized histogram of nonnegative integer samples.
inline std::vector<double> empirical_pmf(const std::vector<std::uint64_t>& values) {
  if (values.empty()) throw std::invalid_argument("empirical_pmf needs at least one value");
  std::uint64_t max_v = 0;
  for (auto v : values) max_v = std::max(max_v, v);
  std::vector<double> pmf(static_cast<std::size_t>(max_v) + 1, 0.0);
  const double w = 1.0 / static_cast<double>(values.size());
  for (auto v : values) pmf[static_cast<std::size_t>(v)] += w;
  return pmf;
}

}  // namespace gwedge::stats
