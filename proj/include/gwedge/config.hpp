#pragma once

// Experiment config files: a flat sectioned text format.
//
//   [model]
//   kind = birth_death            # birth_death | table | zeta3
//   lambda = 1.0
//   mu = 0.5
//   # table models:  beta = 1.0   probs = 0:0.25, 2:0.75
//   # zeta3 models:  beta = 1.0   cutoff = 10000
//
//   [experiment]
//   horizon = 16.0
//   offsets = -0.5, 0.0, 0.5      # count experiment thresholds l = alpha* t + x
//   ks = 1, 2                     # length experiment order indices
//   replicates = 20000
//   seed = 1
//   particle_cap = 10000000
//   law = auto                    # auto | closed_form | mixture
//   threads = 1
//
//   [martingale]
//   horizon = 14.0                # martingale-limit sampling horizon
//   samples = 100000
//
//   [thresholds]
//   tv = 0.03
//   ks = 0.03
//   z = 3.0
//
// '#' starts a comment. Unknown sections or keys are rejected, as are
// duplicate keys. format_config prints a file that parses back to the exact
// same config (doubles are printed with 17 significant digits).

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwedge/harness.hpp"

namespace gwedge::io {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + s + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("");
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: '" + key + "' expects a nonnegative integer, got '" +
                                s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return static_cast<int>(v);
  } catch (...) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + s + "'");
  }
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline harness::ExperimentConfig parse_config_text(const std::string& text) {
  harness::ExperimentConfig config;
  bool model_kind_seen = false;
  bool horizon_seen = false;
  bool replicates_seen = false;
  bool seed_seen = false;
  std::set<std::string> seen;
  std::string section;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "experiment" && section != "martingale" &&
          section != "thresholds")
        throw std::invalid_argument("config: unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const std::string qualified = section + "." + key;
    if (!seen.insert(qualified).second)
      throw std::invalid_argument("config: duplicate key '" + qualified + "'");

    if (section == "model") {
      if (key == "kind") {
        model_kind_seen = true;
        if (value == "birth_death")
          config.model.kind = harness::ModelSpec::Kind::birth_death;
        else if (value == "table")
          config.model.kind = harness::ModelSpec::Kind::table;
        else if (value == "zeta3")
          config.model.kind = harness::ModelSpec::Kind::zeta3;
        else
          throw std::invalid_argument("config: unknown model kind '" + value + "'");
      } else if (key == "lambda") {
        config.model.lambda = detail::parse_double(value, qualified);
      } else if (key == "mu") {
        config.model.mu = detail::parse_double(value, qualified);
      } else if (key == "beta") {
        config.model.beta = detail::parse_double(value, qualified);
      } else if (key == "cutoff") {
        config.model.cutoff = detail::parse_int(value, qualified);
      } else if (key == "probs") {
        for (const std::string& entry : detail::split(value, ',')) {
          const std::size_t colon = entry.find(':');
          if (colon == std::string::npos)
            throw std::invalid_argument("config: probs entries look like 'k:p', got '" + entry +
                                        "'");
          const int k = detail::parse_int(detail::trim(entry.substr(0, colon)), qualified);
          const double p =
              detail::parse_double(detail::trim(entry.substr(colon + 1)), qualified);
          if (!config.model.table.emplace(k, p).second)
            throw std::invalid_argument("config: duplicate probs entry for k=" +
                                        std::to_string(k));
        }
      } else {
        throw std::invalid_argument("config: unknown key '" + qualified + "'");
      }
    } else if (section == "experiment") {
      if (key == "horizon") {
        horizon_seen = true;
        config.horizon_t = detail::parse_double(value, qualified);
      } else if (key == "offsets") {
        for (const std::string& entry : detail::split(value, ','))
          config.offsets_x.push_back(detail::parse_double(entry, qualified));
      } else if (key == "ks") {
        for (const std::string& entry : detail::split(value, ','))
          config.ks.push_back(detail::parse_int(entry, qualified));
      } else if (key == "replicates") {
        replicates_seen = true;
        config.replicates = detail::parse_u64(value, qualified);
      } else if (key == "seed") {
        seed_seen = true;
        config.master_seed = detail::parse_u64(value, qualified);
      } else if (key == "particle_cap") {
        config.particle_cap = detail::parse_u64(value, qualified);
      } else if (key == "law") {
        if (value == "auto")
          config.law = harness::LawChoice::automatic;
        else if (value == "closed_form")
          config.law = harness::LawChoice::closed_form;
        else if (value == "mixture")
          config.law = harness::LawChoice::mixture;
        else
          throw std::invalid_argument("config: unknown law '" + value + "'");
      } else if (key == "threads") {
        config.threads = static_cast<unsigned>(detail::parse_u64(value, qualified));
      } else {
        throw std::invalid_argument("config: unknown key '" + qualified + "'");
      }
    } else if (section == "martingale") {
      if (key == "horizon")
        config.m_infty_horizon = detail::parse_double(value, qualified);
      else if (key == "samples")
        config.m_infty_samples = detail::parse_u64(value, qualified);
      else
        throw std::invalid_argument("config: unknown key '" + qualified + "'");
    } else if (section == "thresholds") {
      if (key == "tv")
        config.tv_threshold = detail::parse_double(value, qualified);
      else if (key == "ks")
        config.ks_threshold = detail::parse_double(value, qualified);
      else if (key == "z")
        config.z_threshold = detail::parse_double(value, qualified);
      else
        throw std::invalid_argument("config: unknown key '" + qualified + "'");
    } else {
      throw std::invalid_argument("config: key '" + key + "' outside any section");
    }
  }

  if (!model_kind_seen) throw std::invalid_argument("config: [model] kind is required");
  if (!horizon_seen) throw std::invalid_argument("config: [experiment] horizon is required");
  if (!replicates_seen)
    throw std::invalid_argument("config: [experiment] replicates is required");
  if (!seed_seen) throw std::invalid_argument("config: [experiment] seed is required");
  return config;
}

inline harness::ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline std::string format_config(const harness::ExperimentConfig& config) {
  using detail::format_double;
  std::ostringstream out;
  out << "[model]\n";
  switch (config.model.kind) {
    case harness::ModelSpec::Kind::birth_death:
      out << "kind = birth_death\n";
      out << "lambda = " << format_double(config.model.lambda) << "\n";
      out << "mu = " << format_double(config.model.mu) << "\n";
      break;
    case harness::ModelSpec::Kind::table: {
      out << "kind = table\n";
      out << "beta = " << format_double(config.model.beta) << "\n";
      out << "probs = ";
      bool first = true;
      for (const auto& [k, p] : config.model.table) {
        if (!first) out << ", ";
        out << k << ":" << format_double(p);
        first = false;
      }
      out << "\n";
      break;
    }
    case harness::ModelSpec::Kind::zeta3:
      out << "kind = zeta3\n";
      out << "beta = " << format_double(config.model.beta) << "\n";
      out << "cutoff = " << config.model.cutoff << "\n";
      break;
  }
  out << "\n[experiment]\n";
  out << "horizon = " << format_double(config.horizon_t) << "\n";
  if (!config.offsets_x.empty()) {
    out << "offsets = ";
    for (std::size_t i = 0; i < config.offsets_x.size(); ++i) {
      if (i) out << ", ";
      out << format_double(config.offsets_x[i]);
    }
    out << "\n";
  }
  if (!config.ks.empty()) {
    out << "ks = ";
    for (std::size_t i = 0; i < config.ks.size(); ++i) {
      if (i) out << ", ";
      out << config.ks[i];
    }
    out << "\n";
  }
  out << "replicates = " << config.replicates << "\n";
  out << "seed = " << config.master_seed << "\n";
  out << "particle_cap = " << config.particle_cap << "\n";
  out << "law = "
      << (config.law == harness::LawChoice::automatic
              ? "auto"
              : config.law == harness::LawChoice::closed_form ? "closed_form" : "mixture")
      << "\n";
  out << "threads = " << config.threads << "\n";
  if (config.m_infty_horizon > 0.0 || config.m_infty_samples > 0) {
    out << "\n[martingale]\n";
    out << "horizon = " << format_double(config.m_infty_horizon) << "\n";
    out << "samples = " << config.m_infty_samples << "\n";
  }
  out << "\n[thresholds]\n";
  out << "tv = " << format_double(config.tv_threshold) << "\n";
  out << "ks = " << format_double(config.ks_threshold) << "\n";
  out << "z = " << format_double(config.z_threshold) << "\n";
  return out.str();
}

}  // namespace gwedge::io
