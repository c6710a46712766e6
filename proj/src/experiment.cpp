// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "acpinn/errors.hpp"
#include "acpinn/reference.hpp"

#ifndef ACPINN_DATA_DIR
#define ACPINN_DATA_DIR "data"
#endif

namespace acpinn {

namespace fs = std::filesystem;

namespace {

std::FILE* open_csv(const fs::path& path, const char* header) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw FormatError("cannot write " + path.string());
  std::fputs(header, f);
  return f;
}

std::string coord_header(int d) {
  std::string h;
  for (int i = 1; i <= d; ++i) h += ",x" + std::to_string(i);
  return h;
}

void write_point(std::FILE* f, std::span<const double> p) {
  for (double v : p) std::fprintf(f, ",%.10g", v);
}

void write_losses(const fs::path& dir, const MarchResult& m) {
  std::FILE* f = open_csv(dir / "loss.csv", "segment,epoch,loss_r,loss_i,loss_b,loss_e,total\n");
  for (const LossRow& r : m.losses)
    std::fprintf(f, "%d,%ld,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.segment, r.epoch, r.report.loss_r, r.report.loss_i,
                 r.report.loss_b, r.report.loss_e, r.report.total);
  std::fclose(f);
}

void write_adapt(const fs::path& dir, const MarchResult& m, int d) {
  std::FILE* f = open_csv(dir / "adapt.csv",
                          "segment,epoch,candidates,marked,marked_interior,marked_boundary,new_total,all_zero\n");
  for (const AdaptRecord& a : m.adapt)
    std::fprintf(f, "%d,%ld,%zu,%zu,%zu,%zu,%zu,%d\n", a.segment, a.epoch, a.event.candidates, a.event.marked,
                 a.event.marked_interior.size(), a.event.marked_boundary.size(), a.event.new_total,
                 a.event.all_zero ? 1 : 0);
  std::fclose(f);
  const std::string header = "segment,epoch,kind" + coord_header(d) + ",t\n";
  f = open_csv(dir / "adapt_points.csv", header.c_str());
  for (const AdaptRecord& a : m.adapt) {
    for (std::size_t k = 0; k < a.event.marked_interior.size(); ++k) {
      std::fprintf(f, "%d,%ld,interior", a.segment, a.epoch);
      write_point(f, a.event.marked_interior[k]);
      std::fputc('\n', f);
    }
    for (std::size_t k = 0; k < a.event.marked_boundary.size(); ++k) {
      std::fprintf(f, "%d,%ld,boundary", a.segment, a.epoch);
      write_point(f, a.event.marked_boundary.points[k]);
      std::fputc('\n', f);
    }
  }
  std::fclose(f);
}

}  // namespace

std::vector<std::pair<std::string, double>> RunSummary::metrics() const {
  std::vector<std::pair<std::string, double>> m;
  if (relative_l2) m.emplace_back("relative_l2", *relative_l2);
  m.emplace_back("segments", segments);
  m.emplace_back("u_min", u_min);
  m.emplace_back("u_max", u_max);
  m.emplace_back("energy_start", energy_start);
  m.emplace_back("energy_end", energy_end);
  m.emplace_back("energy_max_increase", energy_max_increase);
  m.emplace_back("energy_monotone", energy_monotone ? 1.0 : 0.0);
  m.emplace_back("log_clamp_count", static_cast<double>(log_clamp_count));
  m.emplace_back("adaptive_events", static_cast<double>(adaptive_events));
  m.emplace_back("adaptive_points_added", static_cast<double>(adaptive_points_added));
  m.emplace_back("final_loss", final_loss);
  m.emplace_back("wall_time_s", wall_time_s);
  return m;
}

std::string data_dir() {
  if (const char* env = std::getenv("ACPINN_DATA_DIR"); env && *env) return env;
  return ACPINN_DATA_DIR;
}

std::string default_golden_path() { return (fs::path(data_dir()) / "reference" / "ac1d-poly.csv").string(); }

PointSet evaluation_grid(const ProblemSpec& prob) {
  return make_quadrature(prob.domain, prob.bc, default_quadrature_nodes(prob.dim())).nodes;
}

double relative_l2_against(const MarchResult& march, const ReferenceSolution& ref) {
  require(!march.segments.empty(), "relative_l2_against: empty march");
  const double t_end = march.segments.back().t1 + 1e-12;
  PointSet pts(2);
  std::vector<double> truth;
  for (std::size_t s = 0; s < ref.times.size(); ++s) {
    if (ref.times[s] > t_end) continue;
    for (std::size_t i = 0; i < ref.x.size(); ++i) {
      pts.coords.push_back(ref.x[i]);
      pts.coords.push_back(ref.times[s]);
      truth.push_back(ref.u[s][i]);
    }
  }
  require(!truth.empty(), "relative_l2_against: no reference snapshot inside the covered interval");
  return relative_l2(truth, march.predict(pts));
}

void write_summary(const std::string& path, const RunSummary& s) {
  nlohmann::ordered_json j;
  j["problem"] = s.problem;
  j["seed"] = s.seed;
  if (s.relative_l2) j["relative_l2"] = *s.relative_l2;
  j["segments"] = s.segments;
  j["u_min"] = s.u_min;
  j["u_max"] = s.u_max;
  j["energy_start"] = s.energy_start;
  j["energy_end"] = s.energy_end;
  j["energy_max_increase"] = s.energy_max_increase;
  j["energy_monotone"] = s.energy_monotone;
  j["log_clamp_count"] = s.log_clamp_count;
  j["adaptive_events"] = s.adaptive_events;
  j["adaptive_points_added"] = s.adaptive_points_added;
  j["final_loss"] = s.final_loss;
  j["wall_time_s"] = s.wall_time_s;
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write " + path);
  f << j.dump(2) << "\n";
}

RunSummary read_summary(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw NotFoundError("run summary not found: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
    RunSummary s;
    s.problem = j.at("problem").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("relative_l2")) s.relative_l2 = j["relative_l2"].get<double>();
    s.segments = j.at("segments").get<int>();
    s.u_min = j.at("u_min").get<double>();
    s.u_max = j.at("u_max").get<double>();
    s.energy_start = j.at("energy_start").get<double>();
    s.energy_end = j.at("energy_end").get<double>();
    s.energy_max_increase = j.at("energy_max_increase").get<double>();
    s.energy_monotone = j.at("energy_monotone").get<bool>();
    s.log_clamp_count = j.at("log_clamp_count").get<long>();
    s.adaptive_events = j.at("adaptive_events").get<long>();
    s.adaptive_points_added = j.at("adaptive_points_added").get<long>();
    s.final_loss = j.at("final_loss").get<double>();
    s.wall_time_s = j.at("wall_time_s").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("summary " + path + ": " + e.what());
  }
}

RunArtifacts run_experiment(const ExperimentConfig& cfg, const std::string& run_dir, const RunOptions& opt) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const ProblemSpec prob = resolve_problem(cfg);
  const int d = prob.dim();
  const fs::path dir(run_dir);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "config.ini");
    f << serialize_config(cfg);
  }

  // Load the reference first so a missing file fails before training.
  std::optional<ReferenceSolution> golden;
  if (cfg.problem_key == "ac1d-poly" || !opt.golden_path.empty())
    golden = read_golden(opt.golden_path.empty() ? default_golden_path() : opt.golden_path);

  MarchOptions mo;
  mo.checkpoint_dir = run_dir;
  mo.resume = opt.resume;
  mo.stop_after = opt.stop_after;
  if (!opt.quiet) {
    mo.on_segment = [](const SegmentModel& m) {
      std::fprintf(stderr, "segment %d [%g, %g] done\n", m.index, m.t0, m.t1);
    };
  }
  RunArtifacts out;
  out.run_dir = run_dir;
  out.march = march_segments(prob, cfg, mo);
  const MarchResult& m = out.march;
  RunSummary& s = out.summary;
  s.problem = cfg.problem_key;
  s.seed = cfg.seed;
  s.segments = static_cast<int>(m.segments.size());

  write_losses(dir, m);
  write_adapt(dir, m, d);
  {
    std::FILE* f = open_csv(dir / "energy.csv", "t,energy\n");
    for (std::size_t k = 0; k < m.energy.size(); ++k) std::fprintf(f, "%.10g,%.12g\n", m.energy_times[k], m.energy[k]);
    std::fclose(f);
  }

  const PointSet grid = evaluation_grid(prob);
  s.u_min = std::numeric_limits<double>::infinity();
  s.u_max = -std::numeric_limits<double>::infinity();
  {
    const std::string header = "t" + coord_header(d) + ",u\n";
    std::FILE* f = open_csv(dir / "snapshots.csv", header.c_str());
    std::vector<double> times = cfg.snapshot_times;
    if (times.empty()) times.push_back(0.0);
    for (double t : times) {
      if (m.segments.empty() || t > m.segments.back().t1 + 1e-12) continue;
      const std::vector<double> u = m.segment_for(t).predict_at(grid, t);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        std::fprintf(f, "%.10g", t);
        write_point(f, grid[k]);
        std::fprintf(f, ",%.10g\n", u[k]);
        s.u_min = std::min(s.u_min, u[k]);
        s.u_max = std::max(s.u_max, u[k]);
      }
    }
    std::fclose(f);
  }

  if (!m.energy.empty()) {
    s.energy_start = m.energy.front();
    s.energy_end = m.energy.back();
    s.energy_max_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < m.energy.size(); ++k)
      s.energy_max_increase = std::max(s.energy_max_increase, m.energy[k + 1] - m.energy[k]);
    if (m.energy.size() < 2) s.energy_max_increase = 0.0;
    s.energy_monotone = s.energy_max_increase <= 1e-3 * std::abs(m.energy.front());
  }
  s.log_clamp_count = m.log_clamp_count;
  s.adaptive_events = static_cast<long>(m.adapt.size());
  for (const AdaptRecord& a : m.adapt) s.adaptive_points_added += static_cast<long>(a.event.marked);
  if (!m.losses.empty()) s.final_loss = m.losses.back().report.total;
  if (golden) s.relative_l2 = relative_l2_against(m, *golden);
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_summary((dir / "summary.json").string(), s);
  return out;
}

std::vector<MetricDelta> compare_runs(const std::string& run_a, const std::string& run_b) {
  for (const std::string& r : {run_a, run_b})
    if (!fs::is_directory(r)) throw NotFoundError("run not found: " + r);
  const RunSummary a = read_summary((fs::path(run_a) / "summary.json").string());
  const RunSummary b = read_summary((fs::path(run_b) / "summary.json").string());
  const auto ma = a.metrics(), mb = b.metrics();
  std::vector<MetricDelta> out;
  for (const auto& [name, va] : ma) {
    for (const auto& [nb, vb] : mb) {
      if (nb != name) continue;
      out.push_back({name, va, vb, vb - va});
    }
  }
  return out;
}

}  // namespace acpinn
