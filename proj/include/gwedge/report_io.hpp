#pragma once

// Report and tree serialization.
//
// JSON reports use insertion-ordered objects and contain only values that are
// pure functions of (config, master_seed): no wall-clock times, hostnames, or
// worker counts. Re-running an experiment with the same config must produce
// byte-identical output regardless of scheduling, which is part of the
// harness determinism contract and is what lets reports be diffed in CI.
//
// CSV output prints doubles with 17 significant digits so values round-trip
// exactly; tree dumps follow the column layout
// id,parent_id,birth_time,end_time,censored,offspring_count with an empty
// parent_id marking the root.

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwedge/census.hpp"
#include "gwedge/config.hpp"
#include "gwedge/harness.hpp"
#include "gwedge/limit_law.hpp"
#include "gwedge/tree.hpp"

namespace gwedge::io {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline const char* law_kind_name(analytics::LimitLawKind kind) {
  return kind == analytics::LimitLawKind::closed_form_birth_death
             ? "closed_form_birth_death"
             : "empirical_mixture";
}

inline const char* law_choice_name(harness::LawChoice law) {
  switch (law) {
    case harness::LawChoice::automatic: return "auto";
    case harness::LawChoice::closed_form: return "closed_form";
    default: return "mixture";
  }
}

}  // namespace detail

inline ordered_json config_json(const harness::ExperimentConfig& config) {
  ordered_json model;
  switch (config.model.kind) {
    case harness::ModelSpec::Kind::birth_death:
      model["kind"] = "birth_death";
      model["lambda"] = config.model.lambda;
      model["mu"] = config.model.mu;
      break;
    case harness::ModelSpec::Kind::table: {
      model["kind"] = "table";
      model["beta"] = config.model.beta;
      ordered_json probs;
      for (const auto& [k, p] : config.model.table) probs[std::to_string(k)] = p;
      model["probs"] = probs;
      break;
    }
    case harness::ModelSpec::Kind::zeta3:
      model["kind"] = "zeta3";
      model["beta"] = config.model.beta;
      model["cutoff"] = config.model.cutoff;
      break;
  }
  const ModelParams params = config.model.build();
  ordered_json j;
  j["model"] = model;
  j["beta"] = params.beta;
  j["offspring_mean"] = params.offspring.mean();
  j["offspring_second_moment"] = params.offspring.second_moment();
  j["horizon"] = config.horizon_t;
  j["offsets_x"] = config.offsets_x;
  j["ks"] = config.ks;
  j["replicates"] = config.replicates;
  j["master_seed"] = config.master_seed;
  j["particle_cap"] = config.particle_cap;
  j["martingale_horizon"] = config.m_infty_horizon;
  j["martingale_samples"] = config.m_infty_samples;
  j["law"] = detail::law_choice_name(config.law);
  j["thresholds"] = ordered_json{{"tv", config.tv_threshold},
                                 {"ks", config.ks_threshold},
                                 {"z", config.z_threshold}};
  return j;
}

inline ordered_json survival_json(const harness::SurvivalSummary& s) {
  return ordered_json{
      {"replicates", s.replicates}, {"survivors", s.survivors}, {"fraction", s.fraction}};
}

inline ordered_json report_json(const harness::CountExperimentReport& report) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "count_experiment";
  j["config"] = config_json(report.config);
  j["survival"] = survival_json(report.survival);
  j["law_used"] = detail::law_kind_name(report.law_used);
  j["mixture_samples_used"] = report.mixture_samples_used;
  ordered_json cells = ordered_json::array();
  for (const auto& cell : report.cells) {
    ordered_json c;
    c["class"] = edge_class_name(cell.edge_class);
    c["x"] = cell.x;
    c["threshold"] = cell.threshold;
    c["empirical_pmf"] = cell.empirical_pmf;
    c["predicted_pmf"] = cell.predicted_pmf;
    c["tv"] = cell.tv;
    c["exact_mean"] = cell.exact_mean;
    c["empirical_mean"] = cell.empirical_mean;
    c["mean_z"] = cell.mean_z;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  j["thresholds_ok"] = report.thresholds_ok;
  return j;
}

inline ordered_json report_json(const harness::LengthExperimentReport& report) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "length_experiment";
  j["config"] = config_json(report.config);
  j["survival"] = survival_json(report.survival);
  j["law_used"] = detail::law_kind_name(report.law_used);
  j["mixture_samples_used"] = report.mixture_samples_used;
  ordered_json cells = ordered_json::array();
  for (const auto& cell : report.cells) {
    ordered_json c;
    c["class"] = edge_class_name(cell.edge_class);
    c["k"] = cell.k;
    c["defined"] = cell.defined;
    c["undefined"] = cell.undefined;
    c["undefined_flagged"] = cell.undefined_flagged;
    c["ks"] = cell.ks;
    c["grid_x"] = cell.grid_x;
    c["empirical_cdf"] = cell.empirical_cdf;
    c["predicted_cdf"] = cell.predicted_cdf;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  j["thresholds_ok"] = report.thresholds_ok;
  return j;
}

inline ordered_json report_json(const harness::ConvergenceReport& report) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "convergence_diagnostic";
  j["config"] = config_json(report.config);
  j["time_grid"] = report.time_grid;
  j["tolerance"] = report.tolerance;
  j["survival"] = survival_json(report.survival);
  ordered_json cells = ordered_json::array();
  for (const auto& cell : report.cells) {
    ordered_json c;
    c["class"] = edge_class_name(cell.edge_class);
    c["k"] = cell.k;
    c["defined"] = cell.defined;
    c["q50"] = cell.q50;
    c["q90"] = cell.q90;
    c["max_dev"] = cell.max_dev;
    c["frac_within"] = cell.frac_within;
    c["monotonicity_violations"] = cell.monotonicity_violations;
    c["max_pendant_increment_excess"] = cell.max_pendant_increment_excess;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline std::string count_report_csv(const harness::CountExperimentReport& report) {
  std::ostringstream out;
  out << "class,x,threshold,tv,mean_z,exact_mean,empirical_mean\n";
  for (const auto& cell : report.cells) {
    out << edge_class_name(cell.edge_class) << "," << detail::csv_double(cell.x) << ","
        << detail::csv_double(cell.threshold) << "," << detail::csv_double(cell.tv) << ","
        << detail::csv_double(cell.mean_z) << "," << detail::csv_double(cell.exact_mean) << ","
        << detail::csv_double(cell.empirical_mean) << "\n";
  }
  return out.str();
}

inline std::string length_report_csv(const harness::LengthExperimentReport& report) {
  std::ostringstream out;
  out << "class,k,defined,undefined,undefined_flagged,ks\n";
  for (const auto& cell : report.cells) {
    out << edge_class_name(cell.edge_class) << "," << cell.k << "," << cell.defined << ","
        << cell.undefined << "," << (cell.undefined_flagged ? 1 : 0) << ","
        << detail::csv_double(cell.ks) << "\n";
  }
  return out.str();
}

inline std::string convergence_report_csv(const harness::ConvergenceReport& report) {
  std::ostringstream out;
  out << "class,k,t,defined,q50,q90,max_dev,frac_within\n";
  for (const auto& cell : report.cells) {
    for (std::size_t g = 0; g < report.time_grid.size(); ++g) {
      out << edge_class_name(cell.edge_class) << "," << cell.k << ","
          << detail::csv_double(report.time_grid[g]) << "," << cell.defined[g] << ","
          << detail::csv_double(cell.q50[g]) << "," << detail::csv_double(cell.q90[g]) << ","
          << detail::csv_double(cell.max_dev[g]) << ","
          << detail::csv_double(cell.frac_within[g]) << "\n";
    }
  }
  return out.str();
}

// One edge per line in preorder; an empty parent_id marks the root.
inline void write_tree_csv(std::ostream& out, const SimTree& tree) {
  out << "id,parent_id,birth_time,end_time,censored,offspring_count\n";
  for (std::size_t i = 0; i < tree.edges.size(); ++i) {
    const EdgeRecord& e = tree.edges[i];
    out << i << ",";
    if (e.parent >= 0) out << e.parent;
    out << "," << detail::csv_double(e.birth_time) << "," << detail::csv_double(e.end_time)
        << "," << (e.censored ? 1 : 0) << "," << e.offspring << "\n";
  }
}

// Rebuilds a tree from its dump. Censored edges end exactly at the horizon
// and interior edges end strictly before it, so the latest end time recovers
// the horizon whenever the tree is alive (and is a lower bound for an extinct
// one). The martingale value needs the offspring mean, which a dump does not
// carry, and is left NaN.
inline SimTree read_tree_csv(std::istream& in) {
  SimTree tree;
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("tree dump: missing header line");
  std::size_t row = 0;
  double horizon = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 6)
      throw std::invalid_argument("tree dump: expected 6 columns at data row " +
                                  std::to_string(row));
    EdgeRecord e{};
    const auto id = static_cast<std::size_t>(std::stoull(fields[0]));
    if (id != row) throw std::invalid_argument("tree dump: ids must be consecutive from 0");
    e.parent = fields[1].empty() ? -1 : static_cast<std::int32_t>(std::stol(fields[1]));
    if (e.parent >= 0 && static_cast<std::size_t>(e.parent) >= row)
      throw std::invalid_argument("tree dump: parent id must precede the edge");
    e.birth_time = std::stod(fields[2]);
    e.end_time = std::stod(fields[3]);
    e.censored = fields[4] == "1";
    if (!e.censored && fields[4] != "0")
      throw std::invalid_argument("tree dump: censored flag must be 0 or 1");
    e.offspring = static_cast<std::int32_t>(std::stol(fields[5]));
    horizon = std::max(horizon, e.end_time);
    tree.edges.push_back(e);
    ++row;
  }
  if (tree.edges.empty()) throw std::invalid_argument("tree dump: no edges");
  tree.horizon = horizon;
  tree.n_alive = 0;
  for (const EdgeRecord& e : tree.edges) tree.n_alive += e.censored ? 1 : 0;
  tree.martingale_value = std::numeric_limits<double>::quiet_NaN();
  return tree;
}

}  // namespace gwedge::io
