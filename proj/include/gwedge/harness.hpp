#pragma once

// Experiment harness: deterministic replicate farms plus the statistical
// experiments comparing simulation against the analytic layer.
//
// Determinism contract: every replicate draws from a counter-based stream
// keyed by (master_seed, domain, replicate index) and writes its result into
// a slot owned by that index. Workers claim indices from an atomic counter,
// so scheduling decides only who computes a slot, never its value, and the
// merged results (and therefore reports) are identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gwedge/analytics.hpp"
#include "gwedge/census.hpp"
#include "gwedge/limit_law.hpp"
#include "gwedge/offspring.hpp"
#include "gwedge/rng.hpp"
#include "gwedge/stats.hpp"
#include "gwedge/tree.hpp"

namespace gwedge::harness {

inline constexpr std::uint64_t MIN_SURVIVORS = 100;

struct TooFewSurvivorsError : std::runtime_error {
  TooFewSurvivorsError(std::uint64_t survivors, std::uint64_t required)
      : std::runtime_error("too few surviving replicates: " + std::to_string(survivors) +
                           " < " + std::to_string(required)) {}
};

// How the model entered the config; keeps enough structure to rebuild the
// branching parameters and to know whether closed-form limit laws apply.
struct ModelSpec {
  enum class Kind { birth_death, table, zeta3 };

  Kind kind = Kind::birth_death;
  double lambda = 0.0;           // birth_death
  double mu = 0.0;               // birth_death
  double beta = 0.0;             // table, zeta3
  std::map<int, double> table;   // table
  int cutoff = 0;                // zeta3

  static ModelSpec birth_death(double lambda, double mu) {
    ModelSpec s;
    s.kind = Kind::birth_death;
    s.lambda = lambda;
    s.mu = mu;
    return s;
  }

  static ModelSpec offspring_table(double beta, std::map<int, double> probs) {
    ModelSpec s;
    s.kind = Kind::table;
    s.beta = beta;
    s.table = std::move(probs);
    return s;
  }

  static ModelSpec zeta3(double beta, int cutoff) {
    ModelSpec s;
    s.kind = Kind::zeta3;
    s.beta = beta;
    s.cutoff = cutoff;
    return s;
  }

  ModelParams build() const {
    switch (kind) {
      case Kind::birth_death: return birth_death_model(lambda, mu);
      case Kind::table: return ModelParams(beta, OffspringDistribution(table));
      default: return ModelParams(beta, heavy_tail_zeta3(cutoff));
    }
  }

  std::optional<BirthDeathParams> birth_death_params() const {
    if (kind != Kind::birth_death) return std::nullopt;
    return BirthDeathParams(lambda, mu);
  }
};

enum class LawChoice { automatic, closed_form, mixture };

struct ExperimentConfig {
  ModelSpec model;
  double horizon_t = 0.0;
  std::vector<double> offsets_x;  // count experiment: thresholds l = alpha* t + x
  std::vector<int> ks;            // length experiment: order indices
  std::uint64_t replicates = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t particle_cap = DEFAULT_PARTICLE_CAP;
  double m_infty_horizon = 0.0;       // martingale-limit sampling horizon s
  std::uint64_t m_infty_samples = 0;  // martingale-limit replicate count
  LawChoice law = LawChoice::automatic;
  unsigned threads = 1;
  double tv_threshold = 0.03;
  double ks_threshold = 0.03;
  double z_threshold = 3.0;

  analytics::LimitLawKind resolved_law() const {
    if (law == LawChoice::closed_form) return analytics::LimitLawKind::closed_form_birth_death;
    if (law == LawChoice::mixture) return analytics::LimitLawKind::empirical_mixture;
    return model.kind == ModelSpec::Kind::birth_death
               ? analytics::LimitLawKind::closed_form_birth_death
               : analytics::LimitLawKind::empirical_mixture;
  }

  // Shared sanity checks for the statistical entry points. Throws
  // std::invalid_argument with a message naming the offending field.
  void validate(bool needs_offsets, bool needs_ks) const {
    const ModelParams params = model.build();  // validates model parameters
    const double m = params.offspring.mean();
    if (!(m > 1.0))
      throw std::invalid_argument("experiment requires a supercritical model (mean > 1)");
    if (!(horizon_t > 0.0) || !std::isfinite(horizon_t))
      throw std::invalid_argument("horizon must be finite and > 0");
    if (replicates < 100)
      throw std::invalid_argument("statistical runs need at least 100 replicates");
    if (particle_cap == 0) throw std::invalid_argument("particle cap must be > 0");
    // Expected population at the horizon must leave an order of magnitude of
    // headroom under the cap, otherwise overflow aborts become routine.
    const double growth = params.beta * (m - 1.0) * horizon_t;
    if (growth > std::log(static_cast<double>(particle_cap) / 10.0))
      throw std::invalid_argument(
          "horizon too large for particle cap: expected population exceeds cap/10");
    if (threads < 1 || threads > 256)
      throw std::invalid_argument("threads must be between 1 and 256");
    if (!(tv_threshold > 0.0) || !(ks_threshold > 0.0) || !(z_threshold > 0.0))
      throw std::invalid_argument("statistic thresholds must be > 0");
    const double alpha = analytics::alpha_star(m);
    if (needs_offsets) {
      if (offsets_x.empty()) throw std::invalid_argument("count experiment needs offsets_x");
      for (std::size_t i = 0; i < offsets_x.size(); ++i) {
        if (!std::isfinite(offsets_x[i])) throw std::invalid_argument("offsets must be finite");
        if (i > 0 && !(offsets_x[i] > offsets_x[i - 1]))
          throw std::invalid_argument("offsets_x must be strictly ascending");
        const double l = alpha * horizon_t + offsets_x[i];
        if (!(l >= 0.0) || !(l <= horizon_t))
          throw std::invalid_argument("offset places threshold outside [0, horizon]");
      }
    }
    if (needs_ks) {
      if (ks.empty()) throw std::invalid_argument("length experiment needs ks");
      for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1) throw std::invalid_argument("order indices must be >= 1");
        if (i > 0 && ks[i] <= ks[i - 1])
          throw std::invalid_argument("ks must be strictly ascending");
      }
    }
    if (resolved_law() == analytics::LimitLawKind::empirical_mixture) {
      if (!(m_infty_horizon > 0.0) || !std::isfinite(m_infty_horizon))
        throw std::invalid_argument("mixture law needs a martingale sampling horizon");
      if (params.beta * (m - 1.0) * m_infty_horizon < std::log(1000.0))
        throw std::invalid_argument(
            "martingale horizon too small: expected population must reach 1000");
      if (m_infty_samples < 100)
        throw std::invalid_argument("mixture law needs at least 100 martingale samples");
    } else if (model.kind != ModelSpec::Kind::birth_death) {
      throw std::invalid_argument("closed-form limit law requires a birth-death model");
    }
  }
};

namespace detail {

// Runs body(index, state) exactly once for each index in [0, n). Worker-local
// state comes from make_state(). On error the exception from the lowest
// failing index is rethrown after all workers stop.
template <class MakeState, class Body>
void parallel_replicates(std::uint64_t n, unsigned threads, MakeState&& make_state,
                         Body&& body) {
  if (threads <= 1) {
    auto state = make_state();
    for (std::uint64_t i = 0; i < n; ++i) body(i, state);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::uint64_t err_index = std::numeric_limits<std::uint64_t>::max();
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      auto state = make_state();
      while (!failed.load(std::memory_order_relaxed)) {
        const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) break;
        try {
          body(i, state);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

struct SimWorker {
  double beta;
  OffspringSampler sampler;
  SimTree scratch;
};

inline auto make_sim_worker(const ModelParams& params) {
  return [beta = params.beta, &params] {
    return SimWorker{beta, OffspringSampler(params.offspring), SimTree{}};
  };
}

}  // namespace detail

// Martingale values e^{-(m-1) beta s} N_s of the replicates that are still
// alive at s, in replicate order. Subcritical inputs are legal and simply
// yield few or no survivors; statistical configs enforce their own horizon
// floor before calling this.
inline std::vector<double> estimate_m_infty(const ModelParams& params, double s,
                                            std::uint64_t n, std::uint64_t master_seed,
                                            unsigned threads = 1,
                                            std::uint64_t particle_cap = DEFAULT_PARTICLE_CAP) {
  std::vector<std::uint64_t> alive(n, 0);
  detail::parallel_replicates(
      n, threads,
      [&params] { return OffspringSampler(params.offspring); },
      [&](std::uint64_t i, OffspringSampler& sampler) {
        CounterRng rng(master_seed, StreamDomain::martingale, i);
        alive[i] = simulate_alive_count(params, sampler, s, rng, particle_cap);
      });
  const double m = params.offspring.mean();
  const double discount = std::exp(-(m - 1.0) * params.beta * s);
  std::vector<double> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (alive[i] > 0) out.push_back(discount * static_cast<double>(alive[i]));
  }
  return out;
}

struct SurvivalSummary {
  std::uint64_t replicates = 0;
  std::uint64_t survivors = 0;
  double fraction = 0.0;
};

struct CountCell {
  EdgeClass edge_class = EdgeClass::pendant;
  double x = 0.0;
  double threshold = 0.0;  // l = alpha* t + x
  std::vector<double> empirical_pmf;     // count histogram among survivors, normalized
  std::vector<double> predicted_pmf;     // limit law at offset x
  double tv = 0.0;
  double exact_mean = 0.0;      // unconditional E[count]
  double empirical_mean = 0.0;  // unconditional, over all replicates
  double mean_z = 0.0;          // empirical-SE z-score against exact_mean
};

struct CountExperimentReport {
  ExperimentConfig config;
  SurvivalSummary survival;
  analytics::LimitLawKind law_used = analytics::LimitLawKind::closed_form_birth_death;
  std::uint64_t mixture_samples_used = 0;
  std::vector<CountCell> cells;
  bool thresholds_ok = true;
};

struct LengthCell {
  EdgeClass edge_class = EdgeClass::pendant;
  int k = 1;
  std::uint64_t defined = 0;    // survivors with at least k edges of the class
  std::uint64_t undefined = 0;  // survivors without
  bool undefined_flagged = false;  // undefined fraction exceeded 1%
  double ks = 0.0;
  std::vector<double> grid_x;
  std::vector<double> empirical_cdf;
  std::vector<double> predicted_cdf;
};

struct LengthExperimentReport {
  ExperimentConfig config;
  SurvivalSummary survival;
  analytics::LimitLawKind law_used = analytics::LimitLawKind::closed_form_birth_death;
  std::uint64_t mixture_samples_used = 0;
  std::vector<LengthCell> cells;
  bool thresholds_ok = true;
};

namespace detail {

inline constexpr EdgeClass ALL_CLASSES[3] = {EdgeClass::pendant, EdgeClass::interior,
                                             EdgeClass::all};

struct ResolvedLaw {
  analytics::LimitLawKind kind;
  std::optional<BirthDeathParams> bd;
  std::shared_ptr<const std::vector<double>> mixture;

  analytics::LimitLaw at(EdgeClass cls, double x) const {
    if (kind == analytics::LimitLawKind::closed_form_birth_death)
      return analytics::closed_form_law(*bd, cls, x);
    if (mixture->empty()) throw analytics::EmptyMixtureError();
    return analytics::LimitLaw{kind, cls, x, std::nullopt, mixture};
  }
};

inline ResolvedLaw resolve_law(const ExperimentConfig& config, const ModelParams& params,
                               std::uint64_t& mixture_samples_used) {
  ResolvedLaw law;
  law.kind = config.resolved_law();
  if (law.kind == analytics::LimitLawKind::closed_form_birth_death) {
    law.bd = config.model.birth_death_params();
    mixture_samples_used = 0;
    return law;
  }
  auto samples = estimate_m_infty(params, config.m_infty_horizon, config.m_infty_samples,
                                  config.master_seed, config.threads, config.particle_cap);
  if (samples.empty()) throw analytics::EmptyMixtureError();
  mixture_samples_used = samples.size();
  law.mixture = std::make_shared<const std::vector<double>>(std::move(samples));
  return law;
}

inline SurvivalSummary summarize_survival(std::uint64_t replicates, std::uint64_t survivors) {
  SurvivalSummary s;
  s.replicates = replicates;
  s.survivors = survivors;
  s.fraction = static_cast<double>(survivors) / static_cast<double>(replicates);
  return s;
}

}  // namespace detail

inline CountExperimentReport run_count_experiment(const ExperimentConfig& config) {
  config.validate(true, false);
  const ModelParams params = config.model.build();
  const double m = params.offspring.mean();
  const double beta = params.beta;
  const double alpha = analytics::alpha_star(m);
  const double t = config.horizon_t;

  std::vector<double> thresholds;
  thresholds.reserve(config.offsets_x.size());
  for (double x : config.offsets_x) thresholds.push_back(alpha * t + x);

  const std::size_t nx = thresholds.size();
  const std::uint64_t n = config.replicates;
  std::vector<std::uint32_t> slot_counts(n * 3 * nx, 0);
  std::vector<std::uint8_t> slot_survived(n, 0);

  detail::parallel_replicates(
      n, config.threads, detail::make_sim_worker(params),
      [&](std::uint64_t i, detail::SimWorker& w) {
        CounterRng rng(config.master_seed, StreamDomain::replicate, i);
        simulate_tree_into(w.scratch, params, w.sampler, t, rng, config.particle_cap);
        slot_survived[i] = w.scratch.survived() ? 1 : 0;
        const SnapshotStats stats = snapshot_stats(w.scratch, t, thresholds, 0);
        std::uint32_t* dst = &slot_counts[i * 3 * nx];
        for (int c = 0; c < 3; ++c)
          for (std::size_t j = 0; j < nx; ++j)
            dst[c * nx + j] = static_cast<std::uint32_t>(stats.counts[c][j]);
      });

  std::uint64_t survivors = 0;
  for (auto s : slot_survived) survivors += s;
  if (survivors < MIN_SURVIVORS) throw TooFewSurvivorsError(survivors, MIN_SURVIVORS);

  CountExperimentReport report;
  report.config = config;
  report.survival = detail::summarize_survival(n, survivors);
  std::uint64_t mixture_used = 0;
  const detail::ResolvedLaw law = detail::resolve_law(config, params, mixture_used);
  report.law_used = law.kind;
  report.mixture_samples_used = mixture_used;

  for (EdgeClass cls : detail::ALL_CLASSES) {
    for (std::size_t j = 0; j < nx; ++j) {
      CountCell cell;
      cell.edge_class = cls;
      cell.x = config.offsets_x[j];
      cell.threshold = thresholds[j];

      std::vector<std::uint64_t> surv_counts;
      surv_counts.reserve(survivors);
      std::vector<double> all_counts(n, 0.0);
      const int c = static_cast<int>(cls);
      for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint32_t value = slot_counts[i * 3 * nx + c * nx + j];
        all_counts[i] = value;
        if (slot_survived[i]) surv_counts.push_back(value);
      }
      cell.empirical_pmf = stats::empirical_pmf(surv_counts);
      const analytics::LimitLaw cell_law = law.at(cls, cell.x);
      cell.predicted_pmf = analytics::pmf_table(cell_law, beta, m);
      cell.tv = stats::tv_distance(cell.empirical_pmf, cell.predicted_pmf);

      switch (cls) {
        case EdgeClass::pendant:
          cell.exact_mean = analytics::mean_pendant_count(beta, m, t, cell.threshold);
          break;
        case EdgeClass::interior:
          cell.exact_mean = analytics::mean_interior_count(beta, m, t, cell.threshold);
          break;
        default:
          cell.exact_mean = analytics::mean_all_count(beta, m, t, cell.threshold);
      }
      cell.mean_z = stats::mean_z_score_empirical(all_counts, cell.exact_mean);
      double sum = 0.0;
      for (double value : all_counts) sum += value;
      cell.empirical_mean = sum / static_cast<double>(n);

      if (cell.tv > config.tv_threshold || std::abs(cell.mean_z) > config.z_threshold)
        report.thresholds_ok = false;
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

// Reporting grid for length-law CDF tables.
inline std::vector<double> length_report_grid() {
  std::vector<double> grid;
  for (int i = -12; i <= 12; ++i) grid.push_back(i * 0.25);
  return grid;
}

inline LengthExperimentReport run_length_experiment(const ExperimentConfig& config) {
  config.validate(false, true);
  const ModelParams params = config.model.build();
  const double m = params.offspring.mean();
  const double beta = params.beta;
  const double alpha = analytics::alpha_star(m);
  const double t = config.horizon_t;
  const int top_k = config.ks.back();

  const std::uint64_t n = config.replicates;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> slot_top(n * 3 * static_cast<std::size_t>(top_k), nan);
  std::vector<std::uint8_t> slot_survived(n, 0);
  const std::vector<double> no_thresholds;

  detail::parallel_replicates(
      n, config.threads, detail::make_sim_worker(params),
      [&](std::uint64_t i, detail::SimWorker& w) {
        CounterRng rng(config.master_seed, StreamDomain::replicate, i);
        simulate_tree_into(w.scratch, params, w.sampler, t, rng, config.particle_cap);
        slot_survived[i] = w.scratch.survived() ? 1 : 0;
        if (!slot_survived[i]) return;
        const SnapshotStats stats = snapshot_stats(w.scratch, t, no_thresholds, top_k);
        double* dst = &slot_top[i * 3 * static_cast<std::size_t>(top_k)];
        for (int c = 0; c < 3; ++c)
          for (std::size_t r = 0; r < stats.top[c].size(); ++r)
            dst[c * top_k + r] = stats.top[c][r];
      });

  std::uint64_t survivors = 0;
  for (auto s : slot_survived) survivors += s;
  if (survivors < MIN_SURVIVORS) throw TooFewSurvivorsError(survivors, MIN_SURVIVORS);

  LengthExperimentReport report;
  report.config = config;
  report.survival = detail::summarize_survival(n, survivors);
  std::uint64_t mixture_used = 0;
  const detail::ResolvedLaw law = detail::resolve_law(config, params, mixture_used);
  report.law_used = law.kind;
  report.mixture_samples_used = mixture_used;

  const std::vector<double> grid = length_report_grid();
  for (EdgeClass cls : detail::ALL_CLASSES) {
    const int c = static_cast<int>(cls);
    for (int k : config.ks) {
      LengthCell cell;
      cell.edge_class = cls;
      cell.k = k;
      std::vector<double> samples;
      samples.reserve(survivors);
      for (std::uint64_t i = 0; i < n; ++i) {
        if (!slot_survived[i]) continue;
        const double value = slot_top[i * 3 * static_cast<std::size_t>(top_k) + c * top_k +
                                      (k - 1)];
        if (std::isnan(value))
          ++cell.undefined;
        else
          samples.push_back(value - alpha * t);
      }
      cell.defined = samples.size();
      cell.undefined_flagged =
          static_cast<double>(cell.undefined) > 0.01 * static_cast<double>(survivors);

      const analytics::LimitLaw cell_law = law.at(cls, 0.0);
      auto cdf = [&](double x) { return analytics::limit_cdf_kth(cell_law, k, x, beta, m); };
      cell.grid_x = grid;
      if (samples.empty()) {
        cell.ks = std::numeric_limits<double>::quiet_NaN();
        cell.undefined_flagged = true;
        for (double x : grid) {
          cell.empirical_cdf.push_back(0.0);
          cell.predicted_cdf.push_back(cdf(x));
        }
      } else {
        cell.ks = stats::ks_distance(samples, cdf);
        std::sort(samples.begin(), samples.end());
        for (double x : grid) {
          const auto below = std::upper_bound(samples.begin(), samples.end(), x);
          cell.empirical_cdf.push_back(static_cast<double>(below - samples.begin()) /
                                       static_cast<double>(samples.size()));
          cell.predicted_cdf.push_back(cdf(x));
        }
      }
      if (!(cell.ks <= config.ks_threshold) || cell.undefined_flagged)
        report.thresholds_ok = false;
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

struct ConvergenceCell {
  EdgeClass edge_class = EdgeClass::pendant;
  int k = 1;
  std::vector<std::uint64_t> defined;  // per grid time, among survivors
  std::vector<double> q50;             // quantiles of |L^(k)/s - alpha*|
  std::vector<double> q90;
  std::vector<double> max_dev;
  std::vector<double> frac_within;     // fraction of survivors within tolerance
  std::uint64_t monotonicity_violations = 0;   // interior/all: L must not decrease
  double max_pendant_increment_excess = 0.0;   // pendant: max (dL - ds) over steps
};

struct ConvergenceReport {
  ExperimentConfig config;
  std::vector<double> time_grid;
  double tolerance = 0.05;
  SurvivalSummary survival;
  std::vector<ConvergenceCell> cells;
};

inline ConvergenceReport run_convergence_diagnostic(const ExperimentConfig& config,
                                                    const std::vector<double>& time_grid,
                                                    double tolerance = 0.05) {
  config.validate(false, true);
  if (time_grid.empty()) throw std::invalid_argument("time grid must not be empty");
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    if (!(time_grid[i] > 0.0) || !std::isfinite(time_grid[i]))
      throw std::invalid_argument("grid times must be finite and > 0");
    if (i > 0 && !(time_grid[i] > time_grid[i - 1]))
      throw std::invalid_argument("grid times must be strictly ascending");
  }
  if (time_grid.back() > config.horizon_t)
    throw std::invalid_argument("grid times must not exceed the horizon");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");

  const ModelParams params = config.model.build();
  const double m = params.offspring.mean();
  const double alpha = analytics::alpha_star(m);
  const int top_k = config.ks.back();
  const std::size_t ng = time_grid.size();
  const std::uint64_t n = config.replicates;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // slot layout: [replicate][grid][class][k]
  std::vector<double> slot(n * ng * 3 * static_cast<std::size_t>(top_k), nan);
  std::vector<std::uint8_t> slot_survived(n, 0);
  const std::vector<double> no_thresholds;

  detail::parallel_replicates(
      n, config.threads, detail::make_sim_worker(params),
      [&](std::uint64_t i, detail::SimWorker& w) {
        CounterRng rng(config.master_seed, StreamDomain::replicate, i);
        simulate_tree_into(w.scratch, params, w.sampler, config.horizon_t, rng,
                           config.particle_cap);
        const bool full_horizon = time_grid.back() == config.horizon_t;
        const std::uint64_t alive_at_end =
            full_horizon ? w.scratch.n_alive
                         : snapshot_stats(w.scratch, time_grid.back(), no_thresholds, 0).alive;
        slot_survived[i] = alive_at_end > 0 ? 1 : 0;
        if (!slot_survived[i]) return;
        for (std::size_t g = 0; g < ng; ++g) {
          const SnapshotStats stats =
              snapshot_stats(w.scratch, time_grid[g], no_thresholds, top_k);
          double* dst = &slot[((i * ng + g) * 3) * top_k];
          for (int c = 0; c < 3; ++c)
            for (std::size_t r = 0; r < stats.top[c].size(); ++r)
              dst[c * top_k + r] = stats.top[c][r];
        }
      });

  std::uint64_t survivors = 0;
  for (auto s : slot_survived) survivors += s;
  if (survivors < MIN_SURVIVORS) throw TooFewSurvivorsError(survivors, MIN_SURVIVORS);

  ConvergenceReport report;
  report.config = config;
  report.time_grid = time_grid;
  report.tolerance = tolerance;
  report.survival = detail::summarize_survival(n, survivors);

  auto value_at = [&](std::uint64_t i, std::size_t g, int c, int k) {
    return slot[((i * ng + g) * 3 + c) * static_cast<std::size_t>(top_k) + (k - 1)];
  };

  for (EdgeClass cls : detail::ALL_CLASSES) {
    const int c = static_cast<int>(cls);
    for (int k : config.ks) {
      ConvergenceCell cell;
      cell.edge_class = cls;
      cell.k = k;
      for (std::size_t g = 0; g < ng; ++g) {
        std::vector<double> devs;
        devs.reserve(survivors);
        std::uint64_t within = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
          if (!slot_survived[i]) continue;
          const double value = value_at(i, g, c, k);
          if (std::isnan(value)) continue;
          const double dev = std::abs(value / time_grid[g] - alpha);
          devs.push_back(dev);
          if (dev <= tolerance) ++within;
        }
        cell.defined.push_back(devs.size());
        std::sort(devs.begin(), devs.end());
        auto quantile = [&](double p) {
          if (devs.empty()) return nan;
          const auto idx = static_cast<std::size_t>(
              std::min<double>(static_cast<double>(devs.size()) - 1.0,
                               std::floor(p * static_cast<double>(devs.size()))));
          return devs[idx];
        };
        cell.q50.push_back(quantile(0.5));
        cell.q90.push_back(quantile(0.9));
        cell.max_dev.push_back(devs.empty() ? nan : devs.back());
        cell.frac_within.push_back(static_cast<double>(within) /
                                   static_cast<double>(survivors));
      }
      // path checks over consecutive grid points
      for (std::uint64_t i = 0; i < n; ++i) {
        if (!slot_survived[i]) continue;
        for (std::size_t g = 1; g < ng; ++g) {
          const double prev = value_at(i, g - 1, c, k);
          const double cur = value_at(i, g, c, k);
          if (std::isnan(prev) || std::isnan(cur)) continue;
          if (cls == EdgeClass::pendant) {
            const double excess = (cur - prev) - (time_grid[g] - time_grid[g - 1]);
            cell.max_pendant_increment_excess =
                std::max(cell.max_pendant_increment_excess, excess);
          } else if (cur < prev - 1e-12) {
            ++cell.monotonicity_violations;
          }
        }
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

}  // namespace gwedge::harness
