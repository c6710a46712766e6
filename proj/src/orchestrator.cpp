// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/orchestrator.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "acpinn/errors.hpp"
#include "acpinn/optim.hpp"

namespace acpinn {

namespace {

enum Purpose : int {
  kInit = 1,
  kInterior = 2,
  kBoundary = 3,
  kInitial = 4,
  kEnergyTimes = 5,
  kAdapt = 100,  // + event number
};

constexpr char kSegMagic[6] = {'A', 'C', 'S', 'E', 'G', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("segment checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  put_u32(os, static_cast<std::uint32_t>(v));
  put_u32(os, static_cast<std::uint32_t>(v >> 32));
}

double get_f64(std::istream& is) {
  const std::uint64_t lo = get_u32(is);
  const std::uint64_t hi = get_u32(is);
  return std::bit_cast<double>(lo | (hi << 32));
}

PointSet spatial_part(const PointSet& st) {
  const int d = st.dim - 1;
  PointSet out(d);
  out.coords.reserve(st.size() * d);
  for (std::size_t k = 0; k < st.size(); ++k) {
    const auto p = st[k];
    out.coords.insert(out.coords.end(), p.begin(), p.begin() + d);
  }
  return out;
}

std::vector<double> eval_ic(const ProblemSpec& prob, const PointSet& pts) {
  const int d = prob.dim();
  std::vector<double> out(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) out[k] = prob.ic.eval(pts[k].subspan(0, d));
  return out;
}

double energy_of(const SegmentModel& m, const ProblemSpec& prob, const EnergyQuadrature& quad, double t,
                 ClampCounter* clamps) {
  const Network net(m.spec);
  return energy_at_time(net, m.params, prob, quad, t, clamps);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, int segment, int purpose) {
  // splitmix64 finalizer over the packed triple.
  std::uint64_t z = seed ^ (static_cast<std::uint64_t>(segment) * 0x9e3779b97f4a7c15ULL) ^
                    (static_cast<std::uint64_t>(purpose) << 48);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> SegmentModel::predict(const PointSet& space_time) const {
  const Network net(spec);
  return net.predict(params, space_time);
}

std::vector<double> SegmentModel::predict_at(const PointSet& space, double t) const {
  PointSet st(space.dim + 1);
  st.coords.reserve(space.size() * (space.dim + 1));
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto p = space[k];
    st.coords.insert(st.coords.end(), p.begin(), p.end());
    st.coords.push_back(t);
  }
  return predict(st);
}

const SegmentModel& MarchResult::segment_for(double t) const {
  require(!segments.empty(), "segment_for: no trained segments");
  const double slack = 1e-12 * std::max(1.0, segments.back().t1);
  require(t >= segments.front().t0 - slack && t <= segments.back().t1 + slack,
          "segment_for: time outside the covered interval");
  for (const SegmentModel& m : segments)
    if (t <= m.t1 + slack) return m;
  return segments.back();
}

std::vector<double> MarchResult::predict(const PointSet& space_time) const {
  const int tc = space_time.dim - 1;
  std::vector<double> out(space_time.size());
  for (const SegmentModel& m : segments) {
    PointSet mine(space_time.dim);
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < space_time.size(); ++k) {
      if (&segment_for(space_time[k][tc]) != &m) continue;
      mine.push_back(space_time[k]);
      idx.push_back(k);
    }
    if (idx.empty()) continue;
    const std::vector<double> v = m.predict(mine);
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = v[i];
  }
  return out;
}

LagProvider lagged_mobility_provider(const ProblemSpec& prob, const SegmentModel* previous) {
  if (!previous) {
    return [prob](const PointSet& pts) { return eval_ic(prob, pts); };
  }
  const SegmentModel prev = *previous;
  return [prev](const PointSet& pts) { return prev.predict_at(spatial_part(pts), prev.t1); };
}

std::string segment_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "segment_%03d.ckpt", index);
  return buf;
}

void write_segment(std::ostream& os, const SegmentModel& m) {
  os.write(kSegMagic, sizeof kSegMagic);
  put_u32(os, static_cast<std::uint32_t>(m.index));
  put_f64(os, m.t0);
  put_f64(os, m.t1);
  write_checkpoint(os, m.spec, m.params);
  if (!os) throw FormatError("write_segment: stream error");
}

SegmentModel read_segment(std::istream& is) {
  char magic[sizeof kSegMagic];
  if (!is.read(magic, sizeof magic)) throw FormatError("segment checkpoint truncated");
  if (std::memcmp(magic, kSegMagic, sizeof kSegMagic) != 0)
    throw FormatError("segment checkpoint: bad magic (expected ACSEG1)");
  SegmentModel m;
  m.index = static_cast<int>(get_u32(is));
  m.t0 = get_f64(is);
  m.t1 = get_f64(is);
  if (m.index < 1 || !(m.t1 > m.t0)) throw FormatError("segment checkpoint: corrupt header");
  m.params = read_checkpoint(is, m.spec).values;
  return m;
}

CollocationSet build_collocation(const ProblemSpec& prob, const ExperimentConfig& cfg, int j, double t0,
                                 double t1, const SegmentModel* previous, bool energy_times) {
  CollocationSet set;
  set.t0 = t0;
  set.t1 = t1;
  set.interior = latin_hypercube(cfg.n_r, space_time_box(prob.domain, t0, t1), derive_seed(cfg.seed, j, kInterior));
  set.boundary = sample_boundary(cfg.n_b, prob, t0, t1, derive_seed(cfg.seed, j, kBoundary));
  set.initial = sample_initial(cfg.n_i, prob.domain, t0, derive_seed(cfg.seed, j, kInitial));
  set.initial_targets = previous ? previous->predict(set.initial) : eval_ic(prob, set.initial);
  if (prob.mobility.lagged) set.interior_lag = lagged_mobility_provider(prob, previous)(set.interior);
  if (energy_times) set.energy_times = sample_times(cfg.n_e, t0, t1, derive_seed(cfg.seed, j, kEnergyTimes));
  return set;
}

MarchResult march_segments(const ProblemSpec& prob, const ExperimentConfig& cfg, const MarchOptions& opt) {
  cfg.validate();
  prob.validate();
  const int d = prob.dim();
  const int nseg = cfg.segment_count();
  const double seg_len = cfg.features.adaptive_time ? cfg.dt : cfg.horizon;
  LossWeights w = cfg.weights;
  if (!cfg.features.energy_penalty) w.lambda_e = 0.0;
  const int qnodes = cfg.quadrature_nodes > 0 ? cfg.quadrature_nodes : default_quadrature_nodes(d);
  const WarmStart warm = cfg.features.transfer_weights ? WarmStart::transfer : WarmStart::fresh;

  MarchResult res;
  namespace fs = std::filesystem;
  if (!opt.checkpoint_dir.empty()) fs::create_directories(opt.checkpoint_dir);
  if (opt.resume && !opt.checkpoint_dir.empty()) {
    for (int j = 1; j <= nseg; ++j) {
      const fs::path path = fs::path(opt.checkpoint_dir) / segment_filename(j);
      if (!fs::exists(path)) break;
      std::ifstream in(path, std::ios::binary);
      SegmentModel m = read_segment(in);
      if (m.index != j) throw FormatError("segment checkpoint " + path.string() + ": index mismatch");
      res.segments.push_back(std::move(m));
      ++res.resumed_segments;
    }
  }

  for (int j = static_cast<int>(res.segments.size()) + 1; j <= nseg; ++j) {
    if (opt.stop_after > 0 && j > opt.stop_after) break;
    const double t0 = (j - 1) * seg_len, t1 = j * seg_len;
    const SegmentModel* previous = res.segments.empty() ? nullptr : &res.segments.back();

    NetworkSpec spec;
    spec.depth = cfg.depth;
    spec.width = cfg.width;
    spec.input_dim = d + 1;
    // Keeps the logarithmic potential's argument inside (-1, 1).
    if (prob.potential.kind == PotentialKind::logarithmic) spec.output_activation = Activation::tanh;
    spec.normalize_to(space_time_box(prob.domain, t0, t1));
    const Network net(spec);
    std::vector<double> params;
    if (warm == WarmStart::transfer && previous)
      params = previous->params;
    else
      params = init_params(spec, derive_seed(cfg.seed, j, kInit)).values;

    CollocationSet set = build_collocation(prob, cfg, j, t0, t1, previous, w.lambda_e > 0.0);
    const LagProvider lag = lagged_mobility_provider(prob, previous);

    const TrainingObjective obj(net, prob, set, w, qnodes);
    LossReport last;
    const Objective f = [&](std::span<const double> x, std::span<double> g) { return obj(x, g, &last); };
    AdaptState ast;
    ast.tau = cfg.tau;
    ast.tol_s = cfg.tol_s;
    std::vector<double> history;
    int events = 0;
    const EpochCallback cb = [&](long epoch, double loss, std::span<const double> p) {
      res.losses.push_back({j, epoch, last});
      history.push_back(loss);
      if (!cfg.features.adaptive_sampling || epoch % ast.cadence != 0) return false;
      if (!adapt_trigger(history, ast.tol_s, epoch, ast.n_ex)) return false;
      AdaptEvent ev = adaptive_resample(ast, set, net, p, prob, lag, derive_seed(cfg.seed, j, kAdapt + events++));
      const bool changed = ev.marked > 0;
      res.adapt.push_back({j, epoch, std::move(ev)});
      return changed;
    };
    AdamState adam;
    adam.lr = cfg.adam_lr;
    try {
      train_hybrid(params, cfg.n_adam, cfg.n_lbfgs, f, cb, adam);
    } catch (const TrainingFault& e) {
      throw TrainingFault("segment " + std::to_string(j) + ", " + e.what());
    }
    res.log_clamp_count += obj.clamp_count();

    SegmentModel m{j, t0, t1, spec, std::move(params)};
    if (!opt.checkpoint_dir.empty()) {
      const fs::path path = fs::path(opt.checkpoint_dir) / segment_filename(j);
      std::ofstream out(path, std::ios::binary);
      write_segment(out, m);
    }
    if (opt.on_segment) opt.on_segment(m);
    res.segments.push_back(std::move(m));
  }

  if (!res.segments.empty()) {
    const EnergyQuadrature quad = make_quadrature(prob.domain, prob.bc, qnodes);
    ClampCounter clamps;
    res.energy_times.push_back(res.segments.front().t0);
    res.energy.push_back(energy_of(res.segments.front(), prob, quad, res.segments.front().t0, &clamps));
    for (const SegmentModel& m : res.segments) {
      res.energy_times.push_back(m.t1);
      res.energy.push_back(energy_of(m, prob, quad, m.t1, &clamps));
    }
  }
  return res;
}

}  // namespace acpinn
