// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "acpinn/errors.hpp"

namespace acpinn {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& name, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(name + ": not a number: '" + s + "'");
  return v;
}

long parse_long(const std::string& name, const std::string& s) {
  long v = 0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(name + ": not an integer: '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& name, const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(name + ": not an unsigned integer: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& name, const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError(name + ": not a boolean: '" + s + "'");
}

std::vector<double> parse_list(const std::string& name, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(parse_double(name, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(v[i]);
  }
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string& name, const std::string&)> set;
};

#define ACPINN_INT_FIELD(sec, member)                                                                \
  Field {                                                                                            \
    sec, #member, [](const ExperimentConfig& c) { return std::to_string(c.member); },                \
        [](ExperimentConfig& c, const std::string& n, const std::string& v) {                        \
          c.member = static_cast<decltype(c.member)>(parse_long(n, v));                              \
        }                                                                                            \
  }
#define ACPINN_DOUBLE_FIELD(sec, key, member)                                                        \
  Field {                                                                                            \
    sec, key, [](const ExperimentConfig& c) { return fmt_double(c.member); },                        \
        [](ExperimentConfig& c, const std::string& n, const std::string& v) { c.member = parse_double(n, v); } \
  }
#define ACPINN_BOOL_FIELD(sec, member)                                                               \
  Field {                                                                                            \
    sec, #member, [](const ExperimentConfig& c) { return std::string(c.features.member ? "true" : "false"); }, \
        [](ExperimentConfig& c, const std::string& n, const std::string& v) {                        \
          c.features.member = parse_bool(n, v);                                                      \
        }                                                                                            \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      {"problem", "key", [](const ExperimentConfig& c) { return c.problem_key; },
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.problem_key = v; }},
      ACPINN_INT_FIELD("network", depth),
      ACPINN_INT_FIELD("network", width),
      ACPINN_INT_FIELD("samples", n_r),
      ACPINN_INT_FIELD("samples", n_b),
      ACPINN_INT_FIELD("samples", n_i),
      ACPINN_INT_FIELD("samples", n_e),
      ACPINN_DOUBLE_FIELD("weights", "lambda_r", weights.lambda_r),
      ACPINN_DOUBLE_FIELD("weights", "lambda_b", weights.lambda_b),
      ACPINN_DOUBLE_FIELD("weights", "lambda_i", weights.lambda_i),
      ACPINN_DOUBLE_FIELD("weights", "lambda_e", weights.lambda_e),
      ACPINN_DOUBLE_FIELD("sampler", "tau", tau),
      ACPINN_DOUBLE_FIELD("sampler", "tol_s", tol_s),
      ACPINN_DOUBLE_FIELD("time", "dt", dt),
      ACPINN_INT_FIELD("time", n_max),
      ACPINN_DOUBLE_FIELD("time", "horizon", horizon),
      ACPINN_INT_FIELD("budget", n_adam),
      ACPINN_INT_FIELD("budget", n_lbfgs),
      ACPINN_DOUBLE_FIELD("budget", "adam_lr", adam_lr),
      ACPINN_BOOL_FIELD("features", energy_penalty),
      ACPINN_BOOL_FIELD("features", adaptive_sampling),
      ACPINN_BOOL_FIELD("features", adaptive_time),
      ACPINN_BOOL_FIELD("features", transfer_weights),
      ACPINN_INT_FIELD("energy", quadrature_nodes),
      {"run", "seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
       [](ExperimentConfig& c, const std::string& n, const std::string& v) { c.seed = parse_u64(n, v); }},
      {"run", "ic_seed", [](const ExperimentConfig& c) { return std::to_string(c.ic_seed); },
       [](ExperimentConfig& c, const std::string& n, const std::string& v) { c.ic_seed = parse_u64(n, v); }},
      {"run", "output_dir", [](const ExperimentConfig& c) { return c.output_dir; },
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"run", "snapshot_times", [](const ExperimentConfig& c) { return fmt_list(c.snapshot_times); },
       [](ExperimentConfig& c, const std::string& n, const std::string& v) { c.snapshot_times = parse_list(n, v); }},
  };
  return f;
}

#undef ACPINN_INT_FIELD
#undef ACPINN_DOUBLE_FIELD
#undef ACPINN_BOOL_FIELD

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields())
    if (section == f.section && key == f.key) return &f;
  return nullptr;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  check(!problem_key.empty(), "problem.key: must be set");
  check(depth >= 1, "network.depth: must be >= 1");
  check(width >= 1, "network.width: must be >= 1");
  check(n_r >= 1, "samples.n_r: must be >= 1");
  check(n_b >= 1, "samples.n_b: must be >= 1");
  check(n_i >= 1, "samples.n_i: must be >= 1");
  check(n_e >= 1, "samples.n_e: must be >= 1");
  check(weights.lambda_r >= 0 && weights.lambda_b >= 0 && weights.lambda_i >= 0 && weights.lambda_e >= 0,
        "weights: lambdas must be >= 0");
  check(tau > 0.0 && tau < 1.0, "sampler.tau: must lie in (0, 1)");
  check(tol_s >= 0.0, "sampler.tol_s: must be >= 0");
  check(dt > 0.0, "time.dt: must be > 0");
  check(n_max >= 1, "time.n_max: must be >= 1");
  check(horizon > 0.0, "time.horizon: must be > 0");
  check(n_adam >= 0, "budget.n_adam: must be >= 0");
  check(n_lbfgs >= 0, "budget.n_lbfgs: must be >= 0");
  check(adam_lr > 0.0, "budget.adam_lr: must be > 0");
  check(quadrature_nodes >= 0 && quadrature_nodes != 1, "energy.quadrature_nodes: must be 0 or >= 2");
  check(!output_dir.empty(), "run.output_dir: must be set");
  for (double t : snapshot_times) check(t >= 0.0, "run.snapshot_times: must be >= 0");
}

int ExperimentConfig::segment_count() const {
  if (!features.adaptive_time) return 1;
  const long need = static_cast<long>(std::ceil(horizon / dt - 1e-9));
  return static_cast<int>(std::clamp<long>(need, 1, n_max));
}

double ExperimentConfig::end_time() const {
  if (!features.adaptive_time) return horizon;
  return segment_count() * dt;
}

ExperimentConfig default_config(const std::string& key) {
  const BenchmarkDefaults b = registry_lookup(key);
  ExperimentConfig c;
  c.problem_key = key;
  c.depth = b.depth;
  c.width = b.width;
  c.n_r = b.n_r, c.n_b = b.n_b, c.n_i = b.n_i, c.n_e = b.n_b;
  c.weights = {b.lambda_r, b.lambda_i, b.lambda_b, b.lambda_e};
  c.tau = b.tau;
  c.tol_s = b.tol_s;
  c.dt = b.dt;
  c.n_max = b.n_max;
  c.horizon = b.problem.horizon;
  c.n_adam = b.n_adam;
  c.n_lbfgs = b.n_lbfgs;
  c.features.transfer_weights = b.transfer_weights;
  c.snapshot_times = b.snapshot_times;
  return c;
}

void apply_desk_scale(ExperimentConfig& c) {
  const ProblemSpec p = registry_lookup(c.problem_key).problem;
  if (p.dim() == 1) {
    c.depth = 4;
    c.width = 64;
    c.n_adam = 2000;
    c.n_lbfgs = 2000;
    c.dt = 0.1;
    c.horizon = 1.0;
    c.n_e = 8;
    c.quadrature_nodes = 64;
    return;
  }
  c.depth = 4;
  c.width = 32;
  // More than n_ex Adam epochs so the adaptive trigger can fire.
  c.n_adam = 1200;
  c.n_lbfgs = 300;
  c.n_r = p.dim() == 2 ? 1000 : 1500;
  c.n_b = 100;
  c.n_i = p.dim() == 2 ? 441 : 729;
  c.n_e = 4;
  c.quadrature_nodes = p.dim() == 2 ? 24 : 12;
  // Published dt, first 5 segments only.
  c.n_max = std::min(c.n_max, 5);
  c.horizon = c.dt * c.n_max;
  c.snapshot_times.clear();
  for (int k = 0; k <= 4; ++k) c.snapshot_times.push_back(c.horizon * k / 4);
  c.weights.lambda_e = static_cast<double>(c.n_r + c.n_b);
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  if (const auto key = tree.get_optional<std::string>("problem.key")) c = default_config(*key);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key outside a section: " + section);
    for (const auto& [key, value] : body) {
      const Field* f = find_field(section, key);
      if (!f) throw ConfigError("unknown config key: " + section + "." + key);
      f->set(c, section + "." + key, value.data());
    }
  }
  c.validate();
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(c) + "\n";
  }
  return out;
}

void apply_override(ExperimentConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like key=value: " + assignment);
  std::string name = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  const Field* hit = nullptr;
  const auto dot = name.find('.');
  if (dot != std::string::npos) {
    hit = find_field(name.substr(0, dot), name.substr(dot + 1));
  } else {
    for (const Field& f : fields()) {
      if (name == f.key) {
        if (hit) throw ConfigError("ambiguous config key: " + name);
        hit = &f;
      }
    }
    if (hit) name = std::string(hit->section) + "." + name;
  }
  if (!hit) throw ConfigError("unknown config key: " + name);
  hit->set(c, name, value);
}

ProblemSpec resolve_problem(const ExperimentConfig& c) {
  ProblemSpec p = registry_lookup(c.problem_key, c.ic_seed).problem;
  p.horizon = c.horizon;
  return p;
}

}  // namespace acpinn
