#pragma once

// Closed-form first and second moments for the number of long edges, and the
// related asymptotics.
//
// Conventions: beta is the branching rate, m > 1 the offspring mean, v the
// offspring second moment E[xi^2], t the census time, l the length threshold.
// Every formula is evaluated from the combined exponent -beta*(m*l - (m-1)*t)
// rather than from separate factors, so values stay finite whenever the final
// result is representable even if an intermediate like e^{beta*m*t} is not.
//
// Boundary convention: a pendant edge of the never-branching root has length
// exactly t, so the pendant and all-edge means vanish only for l > t and take
// the value e^{-beta*t} at l = t; the interior mean vanishes for l >= t. This
// keeps the additivity identity all = pendant + interior exact on the closed
// domain.

#include <cmath>
#include <stdexcept>

#include "gwedge/census.hpp"

namespace gwedge::analytics {

namespace detail {

inline void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::domain_error("beta must be finite and > 0");
}

inline void check_grid(double t, double l) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("t must be finite and >= 0");
  if (!(l >= 0.0) || !std::isfinite(l)) throw std::domain_error("l must be finite and >= 0");
}

inline void check_supercritical(double m) {
  if (!(m > 1.0) || !std::isfinite(m)) throw std::domain_error("offspring mean must be > 1");
}

// -beta*(m*l - (m-1)*t); exp of this is the pendant mean.
inline double pendant_exponent(double beta, double m, double t, double l) {
  return -beta * (m * l - (m - 1.0) * t);
}

}  // namespace detail

// Almost-sure linear growth rate of the longest-edge lengths: L^(k)/t -> 1 - 1/m.
inline double alpha_star(double m) {
  detail::check_supercritical(m);
  return 1.0 - 1.0 / m;
}

// E[number of pendant edges of length >= l at time t]. Valid for any m >= 0.
inline double mean_pendant_count(double beta, double m, double t, double l) {
  detail::check_beta(beta);
  detail::check_grid(t, l);
  if (!(m >= 0.0) || !std::isfinite(m)) throw std::domain_error("offspring mean must be >= 0");
  if (l > t) return 0.0;
  return std::exp(detail::pendant_exponent(beta, m, t, l));
}

// E[number of interior edges of length >= l at time t].
inline double mean_interior_count(double beta, double m, double t, double l) {
  detail::check_beta(beta);
  detail::check_supercritical(m);
  detail::check_grid(t, l);
  if (l >= t) return 0.0;
  return (std::exp(detail::pendant_exponent(beta, m, t, l)) - std::exp(-beta * l)) / (m - 1.0);
}

// E[number of edges of length >= l at time t], pendant and interior together.
inline double mean_all_count(double beta, double m, double t, double l) {
  detail::check_beta(beta);
  detail::check_supercritical(m);
  detail::check_grid(t, l);
  if (l > t) return 0.0;
  return (m * std::exp(detail::pendant_exponent(beta, m, t, l)) - std::exp(-beta * l)) /
         (m - 1.0);
}

// E[(pendant count)^2]; exact, not a bound.
inline double second_moment_pendant(double beta, double m, double v, double t, double l) {
  detail::check_beta(beta);
  detail::check_supercritical(m);
  detail::check_grid(t, l);
  if (l > t) throw std::domain_error("second_moment_pendant requires l <= t");
  const double a = std::exp(detail::pendant_exponent(beta, m, t, l));
  const double c = (v - m) / (m - 1.0);
  return a * (1.0 + c * (a - std::exp(-beta * l)));
}

// Upper bound on E[(interior count)^2]. Sharp in the long-threshold regime:
// when t - l and ml - (m-1)t both grow, the bracket tends to 1 and the bound
// is asymptotically equal to the interior mean (and hence to the second
// moment itself).
inline double variance_bound_interior(double beta, double m, double v, double t, double l) {
  detail::check_beta(beta);
  detail::check_supercritical(m);
  detail::check_grid(t, l);
  if (l > t) throw std::domain_error("variance_bound_interior requires l <= t");
  const double a = std::exp(detail::pendant_exponent(beta, m, t, l));
  return a / (m - 1.0) *
         (1.0 + 2.0 * beta * m * (t - l) * std::exp(-beta * m * l) +
          (v - m) / ((m - 1.0) * (m - 1.0)) * a);
}

// Combined-class companion to variance_bound_interior. The expression is
// exactly variance_bound_interior plus an upper estimate a(1 + (v-m)/(m-1) a)
// of the pendant second moment (a = the pendant mean), so it dominates
// E[(pendant count)^2] + E[(interior count)^2] and a fortiori the all-edge
// mean. The nonnegative cross moment 2 E[pendant * interior] is NOT part of
// it: in the long-threshold regime the cross term is lower order and this
// value still ~ the true combined second moment, but at moderate (t, l),
// where both classes are simultaneously populated, the true E[(all count)^2]
// can exceed it. Binary example (beta=1, m=2, v=4): at t=8, l=4 the exact
// combined second moment is 10 - 39 e^{-4} - 2 e^{-8} ~ 9.285 while this
// bound evaluates to ~ 6.005.
inline double variance_bound_all(double beta, double m, double v, double t, double l) {
  detail::check_beta(beta);
  detail::check_supercritical(m);
  detail::check_grid(t, l);
  if (l > t) throw std::domain_error("variance_bound_all requires l <= t");
  const double a = std::exp(detail::pendant_exponent(beta, m, t, l));
  return m / (m - 1.0) * a *
         (1.0 + 2.0 * beta * (t - l) * std::exp(-beta * m * l) +
          (v - m) * (m * m - 2.0 * m + 2.0) / (m * (m - 1.0) * (m - 1.0)) * a);
}

// Multiplier distinguishing the three edge classes in the limit laws:
// pendant 1, interior 1/(m-1), all m/(m-1).
inline double class_prefactor(double m, EdgeClass cls) {
  detail::check_supercritical(m);
  switch (cls) {
    case EdgeClass::pendant: return 1.0;
    case EdgeClass::interior: return 1.0 / (m - 1.0);
    default: return m / (m - 1.0);
  }
}

// First-order asymptotic for P(at least one edge of class >= l at time t),
// prefactor * e^{-beta*m*(l - alpha_star*t)}. Meaningful in the regime where
// the value is small; it is an upper estimate, not an exact probability.
inline double asymptotic_hit_probability(double beta, double m, double t, double l,
                                         EdgeClass cls) {
  detail::check_beta(beta);
  detail::check_grid(t, l);
  return class_prefactor(m, cls) * std::exp(detail::pendant_exponent(beta, m, t, l));
}

}  // namespace gwedge::analytics
