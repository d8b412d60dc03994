// gwedge: longest-edge statistics for continuous-time Galton-Watson trees.
//
// Subcommands: simulate (dump one tree), census (count/rank edges of a dump),
// limits (tabulate limit-law pmf/CDF values), experiment (replicate farm with
// statistical comparison), convergence (L^(k)/t trajectory diagnostic).
//
// Exit codes: 0 success, 1 validation or usage error, 2 a statistical
// threshold in the config was violated, 3 particle-cap overflow.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gwedge/analytics.hpp"
#include "gwedge/census.hpp"
#include "gwedge/config.hpp"
#include "gwedge/harness.hpp"
#include "gwedge/limit_law.hpp"
#include "gwedge/report_io.hpp"
#include "gwedge/tree.hpp"

namespace {

using namespace gwedge;

constexpr int EXIT_VALIDATION = 1;
constexpr int EXIT_THRESHOLD = 2;
constexpr int EXIT_OVERFLOW = 3;

// Model flags shared by every subcommand that builds a process. Presence of
// --lambda selects birth-death, --offspring selects a table model and
// --zeta3-cutoff the truncated power law; the latter two need --beta.
struct ModelFlags {
  double lambda = 0.0;
  double mu = 0.0;
  double beta = 0.0;
  std::string offspring;
  int zeta3_cutoff = 0;
  bool lambda_set = false;
  bool beta_set = false;
  bool offspring_set = false;
  bool cutoff_set = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--lambda", lambda, "birth rate (selects the birth-death model)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--mu", mu, "death rate (birth-death model, default 0)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--beta", beta, "event rate (table and zeta3 models)");
    cmd->add_option("--offspring", offspring,
                    "offspring table as k:p,k:p,... (selects the table model)");
    cmd->add_option("--zeta3-cutoff", zeta3_cutoff,
                    "support cutoff for the k^-3 offspring tail (selects the zeta3 model)");
  }

  void capture(const CLI::App* cmd) {
    lambda_set = cmd->count("--lambda") > 0;
    beta_set = cmd->count("--beta") > 0;
    offspring_set = cmd->count("--offspring") > 0;
    cutoff_set = cmd->count("--zeta3-cutoff") > 0;
  }

  bool any() const { return lambda_set || offspring_set || cutoff_set; }

  // Applies the flags on top of `spec` (which may come from a config file).
  void apply(harness::ModelSpec& spec) const {
    if (lambda_set + offspring_set + cutoff_set > 1)
      throw std::invalid_argument(
          "--lambda, --offspring and --zeta3-cutoff select different models; pass one");
    if (lambda_set) {
      spec = harness::ModelSpec::birth_death(lambda, mu);
      return;
    }
    if (offspring_set) {
      if (!beta_set) throw std::invalid_argument("--offspring needs --beta");
      spec = harness::ModelSpec::offspring_table(beta, parse_offspring_table(offspring));
      return;
    }
    if (cutoff_set) {
      if (!beta_set) throw std::invalid_argument("--zeta3-cutoff needs --beta");
      spec = harness::ModelSpec::zeta3(beta, zeta3_cutoff);
      return;
    }
    if (beta_set) {
      if (spec.kind == harness::ModelSpec::Kind::birth_death)
        throw std::invalid_argument("--beta applies to table and zeta3 models");
      spec.beta = beta;
    }
  }

  static std::map<int, double> parse_offspring_table(const std::string& text) {
    std::map<int, double> probs;
    for (const std::string& part : io::detail::split(text, ',')) {
      const std::string entry = io::detail::trim(part);
      if (entry.empty()) continue;
      const auto colon = entry.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("offspring entries must look like k:p, got '" + entry + "'");
      const int k = io::detail::parse_int(io::detail::trim(entry.substr(0, colon)), "offspring");
      const double p =
          io::detail::parse_double(io::detail::trim(entry.substr(colon + 1)), "offspring");
      if (!probs.emplace(k, p).second)
        throw std::invalid_argument("offspring table repeats k=" + std::to_string(k));
    }
    if (probs.empty()) throw std::invalid_argument("offspring table is empty");
    return probs;
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << text;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  for (const std::string& part : io::detail::split(text, ',')) {
    const std::string entry = io::detail::trim(part);
    if (entry.empty()) continue;
    values.push_back(io::detail::parse_double(entry, what));
  }
  if (values.empty()) throw std::invalid_argument(what + " list is empty");
  return values;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> values;
  for (const std::string& part : io::detail::split(text, ',')) {
    const std::string entry = io::detail::trim(part);
    if (entry.empty()) continue;
    values.push_back(io::detail::parse_int(entry, what));
  }
  if (values.empty()) throw std::invalid_argument(what + " list is empty");
  return values;
}

std::vector<EdgeClass> parse_classes(const std::vector<std::string>& names) {
  if (names.empty()) return {EdgeClass::pendant, EdgeClass::interior, EdgeClass::all};
  std::vector<EdgeClass> classes;
  for (const std::string& name : names) {
    if (name == "pendant") classes.push_back(EdgeClass::pendant);
    else if (name == "interior") classes.push_back(EdgeClass::interior);
    else if (name == "all") classes.push_back(EdgeClass::all);
    else throw std::invalid_argument("unknown edge class: " + name);
  }
  return classes;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  ModelFlags model;
  double t = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t replicate = 0;
  std::uint64_t cap = DEFAULT_PARTICLE_CAP;
  std::string dump;
};

int run_simulate(const SimulateArgs& args) {
  harness::ModelSpec spec;
  if (!args.model.any())
    throw std::invalid_argument("simulate needs a model (--lambda, --offspring or --zeta3-cutoff)");
  args.model.apply(spec);
  const ModelParams params = spec.build();
  const SimTree tree =
      simulate_tree(params, args.t, args.seed, args.replicate, args.cap);
  std::ostringstream out;
  io::write_tree_csv(out, tree);
  write_text(args.dump, out.str());
  return 0;
}

// --- census -----------------------------------------------------------------

struct CensusArgs {
  std::string input;
  double s = -1.0;  // < 0 means "at the horizon"
  std::string thresholds;
  std::string format = "csv";
  int top = 5;
  std::string output;
};

int run_census(const CensusArgs& args) {
  SimTree tree;
  if (args.input.empty() || args.input == "-") {
    tree = io::read_tree_csv(std::cin);
  } else {
    std::ifstream in(args.input, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open tree dump: " + args.input);
    tree = io::read_tree_csv(in);
  }
  const double s = args.s < 0.0 ? tree.horizon : args.s;
  const std::vector<double> thresholds = parse_double_list(args.thresholds, "thresholds");
  const EdgeCensus census = census_at(tree, s, thresholds);

  if (args.format == "csv") {
    std::ostringstream out;
    out << "class,threshold,count\n";
    for (EdgeClass cls : {EdgeClass::pendant, EdgeClass::interior, EdgeClass::all}) {
      const auto& counts = census.counts[static_cast<int>(cls)];
      for (std::size_t i = 0; i < thresholds.size(); ++i)
        out << edge_class_name(cls) << "," << io::detail::csv_double(thresholds[i]) << ","
            << counts[i] << "\n";
    }
    write_text(args.output, out.str());
    return 0;
  }
  if (args.format != "json") throw std::invalid_argument("--format must be csv or json");
  io::ordered_json j;
  j["snapshot_time"] = s;
  j["alive"] = census.alive();
  j["thresholds"] = thresholds;
  for (EdgeClass cls : {EdgeClass::pendant, EdgeClass::interior, EdgeClass::all}) {
    io::ordered_json c;
    c["counts"] = census.counts[static_cast<int>(cls)];
    const auto& lengths = census.lengths[static_cast<int>(cls)];
    const std::size_t n = std::min<std::size_t>(lengths.size(), static_cast<std::size_t>(args.top));
    c["longest"] = std::vector<double>(lengths.begin(), lengths.begin() + n);
    j[edge_class_name(cls)] = std::move(c);
  }
  write_text(args.output, j.dump(2) + "\n");
  return 0;
}

// --- limits -----------------------------------------------------------------

struct LimitsArgs {
  ModelFlags model;
  std::string xs = "0";
  std::string ks = "1";
  std::vector<std::string> classes;
  double mixture_horizon = 0.0;
  std::uint64_t mixture_samples = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output;
};

int run_limits(const LimitsArgs& args) {
  harness::ModelSpec spec;
  if (!args.model.any())
    throw std::invalid_argument("limits needs a model (--lambda, --offspring or --zeta3-cutoff)");
  args.model.apply(spec);
  const ModelParams params = spec.build();
  const double beta = params.beta;
  const double m = params.offspring.mean();
  if (!(m > 1.0)) throw std::invalid_argument("limit laws need a supercritical model (mean > 1)");

  const std::vector<double> xs = parse_double_list(args.xs, "x");
  const std::vector<int> ks = parse_int_list(args.ks, "k");
  for (int k : ks)
    if (k < 0) throw std::invalid_argument("k must be >= 0");
  const std::vector<EdgeClass> classes = parse_classes(args.classes);

  const std::optional<BirthDeathParams> bd = spec.birth_death_params();
  std::shared_ptr<const std::vector<double>> mixture;
  if (!bd) {
    if (!(args.mixture_horizon > 0.0))
      throw std::invalid_argument("non-birth-death models need --mixture-horizon");
    auto samples = harness::estimate_m_infty(params, args.mixture_horizon, args.mixture_samples,
                                             args.seed, args.threads);
    mixture = std::make_shared<const std::vector<double>>(std::move(samples));
  }

  // One row per (class, x, k): the limit count pmf P(V_x = k) and the kth
  // longest-edge CDF P(W^(k) <= x); k = 0 rows leave the CDF column empty.
  std::ostringstream out;
  out << "class,x,k,count_pmf,kth_cdf\n";
  for (EdgeClass cls : classes) {
    for (double x : xs) {
      const analytics::LimitLaw law = bd ? analytics::closed_form_law(*bd, cls, x)
                                         : analytics::mixture_law(*mixture, cls, x);
      for (int k : ks) {
        out << edge_class_name(cls) << "," << io::detail::csv_double(x) << "," << k << ","
            << io::detail::csv_double(analytics::limit_pmf(law, k, beta, m)) << ",";
        if (k >= 1)
          out << io::detail::csv_double(analytics::limit_cdf_kth(law, k, x, beta, m));
        out << "\n";
      }
    }
  }
  write_text(args.output, out.str());
  return 0;
}

// --- experiment / convergence ----------------------------------------------

struct ExperimentArgs {
  std::string config_path;
  ModelFlags model;
  std::uint64_t seed = 0;
  std::uint64_t replicates = 0;
  double t = 0.0;
  unsigned threads = 0;
  std::uint64_t cap = 0;
  std::string offsets;
  std::string ks;
  std::string law;
  std::string kind = "both";
  std::string output;
  std::string counts_csv;
  std::string lengths_csv;
  bool print_config = false;
  // convergence extras
  std::string grid;
  double tolerance = 0.05;
  std::string csv;
};

// Whether the option exists on this subcommand and was given; convergence
// registers only a subset of the experiment overrides.
bool flag_given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

harness::ExperimentConfig build_config(const ExperimentArgs& args, const CLI::App* cmd) {
  harness::ExperimentConfig config;
  if (!args.config_path.empty()) config = io::load_config_file(args.config_path);
  args.model.apply(config.model);
  if (flag_given(cmd, "--seed")) config.master_seed = args.seed;
  if (flag_given(cmd, "--replicates")) config.replicates = args.replicates;
  if (flag_given(cmd, "--t")) config.horizon_t = args.t;
  if (flag_given(cmd, "--threads")) config.threads = args.threads;
  if (flag_given(cmd, "--cap")) config.particle_cap = args.cap;
  if (flag_given(cmd, "--offsets")) config.offsets_x = parse_double_list(args.offsets, "offsets");
  if (flag_given(cmd, "--ks")) config.ks = parse_int_list(args.ks, "ks");
  if (flag_given(cmd, "--law")) {
    if (args.law == "auto") config.law = harness::LawChoice::automatic;
    else if (args.law == "closed_form") config.law = harness::LawChoice::closed_form;
    else if (args.law == "mixture") config.law = harness::LawChoice::mixture;
    else throw std::invalid_argument("--law must be auto, closed_form or mixture");
  }
  return config;
}

int run_experiment(const ExperimentArgs& args, const CLI::App* cmd) {
  const harness::ExperimentConfig config = build_config(args, cmd);
  if (args.print_config) {
    std::cout << io::format_config(config);
    return 0;
  }
  const bool want_counts = args.kind == "counts" || args.kind == "both";
  const bool want_lengths = args.kind == "lengths" || args.kind == "both";
  if (!want_counts && !want_lengths)
    throw std::invalid_argument("--kind must be counts, lengths or both");

  bool ok = true;
  io::ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "experiment";
  if (want_counts) {
    const harness::CountExperimentReport report = harness::run_count_experiment(config);
    j["counts"] = io::report_json(report);
    if (!args.counts_csv.empty()) write_text(args.counts_csv, io::count_report_csv(report));
    ok = ok && report.thresholds_ok;
  }
  if (want_lengths) {
    const harness::LengthExperimentReport report = harness::run_length_experiment(config);
    j["lengths"] = io::report_json(report);
    if (!args.lengths_csv.empty()) write_text(args.lengths_csv, io::length_report_csv(report));
    ok = ok && report.thresholds_ok;
  }
  write_text(args.output, j.dump(2) + "\n");
  return ok ? 0 : EXIT_THRESHOLD;
}

int run_convergence(const ExperimentArgs& args, const CLI::App* cmd) {
  const harness::ExperimentConfig config = build_config(args, cmd);
  if (args.print_config) {
    std::cout << io::format_config(config);
    return 0;
  }
  if (args.grid.empty()) throw std::invalid_argument("convergence needs --grid t1,t2,...");
  const std::vector<double> grid = parse_double_list(args.grid, "grid");
  const harness::ConvergenceReport report =
      harness::run_convergence_diagnostic(config, grid, args.tolerance);
  if (!args.csv.empty()) write_text(args.csv, io::convergence_report_csv(report));
  write_text(args.output, io::report_json(report).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"longest-edge statistics for continuous-time Galton-Watson trees"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "simulate one tree and dump its edges");
  sim.model.add_to(sim_cmd);
  sim_cmd->add_option("--t", sim.t, "time horizon")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "master seed");
  sim_cmd->add_option("--replicate", sim.replicate, "replicate index within the seed's stream");
  sim_cmd->add_option("--cap", sim.cap, "particle cap");
  sim_cmd->add_option("--dump", sim.dump, "output file for the edge dump (default stdout)");

  CensusArgs cen;
  CLI::App* cen_cmd =
      app.add_subcommand("census", "count and rank edges of a dumped tree at a snapshot time");
  cen_cmd->add_option("--input", cen.input, "tree dump file ('-' or empty reads stdin)");
  cen_cmd->add_option("--s", cen.s, "snapshot time (default: the dump's horizon)");
  cen_cmd->add_option("--thresholds", cen.thresholds, "length thresholds l1,l2,... (ascending)")
      ->required();
  cen_cmd->add_option("--format", cen.format, "csv or json (default csv)");
  cen_cmd->add_option("--top", cen.top, "longest lengths to list in json output")
      ->check(CLI::NonNegativeNumber);
  cen_cmd->add_option("--output", cen.output, "output file (default stdout)");

  LimitsArgs lim;
  CLI::App* lim_cmd =
      app.add_subcommand("limits", "tabulate limit-law pmf/CDF values on a (class, x, k) grid");
  lim.model.add_to(lim_cmd);
  lim_cmd->add_option("--x", lim.xs, "offsets x as x1,x2,...");
  lim_cmd->add_option("--k", lim.ks, "count values / order indices as k1,k2,...");
  lim_cmd->add_option("--class", lim.classes, "edge class (repeatable; default all three)");
  lim_cmd->add_option("--mixture-horizon", lim.mixture_horizon,
                      "martingale sampling horizon for non-birth-death models");
  lim_cmd->add_option("--mixture-samples", lim.mixture_samples, "martingale sample count");
  lim_cmd->add_option("--seed", lim.seed, "master seed for the mixture samples");
  lim_cmd->add_option("--threads", lim.threads, "worker threads for the mixture samples");
  lim_cmd->add_option("--output", lim.output, "output file (default stdout)");

  ExperimentArgs exp;
  CLI::App* exp_cmd = app.add_subcommand(
      "experiment", "run a replicate farm and compare counts/lengths against limit laws");
  exp_cmd->add_option("--config", exp.config_path, "experiment config file");
  exp.model.add_to(exp_cmd);
  exp_cmd->add_option("--seed", exp.seed, "master seed override");
  exp_cmd->add_option("--replicates", exp.replicates, "replicate count override");
  exp_cmd->add_option("--t", exp.t, "horizon override");
  exp_cmd->add_option("--threads", exp.threads, "worker thread override");
  exp_cmd->add_option("--cap", exp.cap, "particle cap override");
  exp_cmd->add_option("--offsets", exp.offsets, "offsets x1,x2,... override");
  exp_cmd->add_option("--ks", exp.ks, "order indices k1,k2,... override");
  exp_cmd->add_option("--law", exp.law, "limit law: auto, closed_form or mixture");
  exp_cmd->add_option("--kind", exp.kind, "counts, lengths or both (default both)");
  exp_cmd->add_option("--output", exp.output, "JSON report file (default stdout)");
  exp_cmd->add_option("--counts-csv", exp.counts_csv, "CSV file for the count cells");
  exp_cmd->add_option("--lengths-csv", exp.lengths_csv, "CSV file for the length cells");
  exp_cmd->add_flag("--print-config", exp.print_config,
                    "print the effective config and exit without running");

  ExperimentArgs con;
  CLI::App* con_cmd = app.add_subcommand(
      "convergence", "track L^(k)/t trajectories toward their linear growth rate");
  con_cmd->add_option("--config", con.config_path, "experiment config file");
  con.model.add_to(con_cmd);
  con_cmd->add_option("--seed", con.seed, "master seed override");
  con_cmd->add_option("--replicates", con.replicates, "replicate count override");
  con_cmd->add_option("--t", con.t, "horizon override");
  con_cmd->add_option("--threads", con.threads, "worker thread override");
  con_cmd->add_option("--cap", con.cap, "particle cap override");
  con_cmd->add_option("--ks", con.ks, "order indices k1,k2,... override");
  con_cmd->add_option("--grid", con.grid, "snapshot times t1,t2,... (ascending)");
  con_cmd->add_option("--tolerance", con.tolerance, "deviation tolerance (default 0.05)");
  con_cmd->add_option("--output", con.output, "JSON report file (default stdout)");
  con_cmd->add_option("--csv", con.csv, "CSV file for the trajectory table");
  con_cmd->add_flag("--print-config", con.print_config,
                    "print the effective config and exit without running");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : EXIT_VALIDATION;
  }

  try {
    if (sim_cmd->parsed()) {
      sim.model.capture(sim_cmd);
      return run_simulate(sim);
    }
    if (cen_cmd->parsed()) return run_census(cen);
    if (lim_cmd->parsed()) {
      lim.model.capture(lim_cmd);
      return run_limits(lim);
    }
    if (exp_cmd->parsed()) {
      exp.model.capture(exp_cmd);
      return run_experiment(exp, exp_cmd);
    }
    con.model.capture(con_cmd);
    return run_convergence(con, con_cmd);
  } catch (const OverflowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_OVERFLOW;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_VALIDATION;
  }
}
