// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "acpinn/errors.hpp"
#include "acpinn/kernels.hpp"
#include "acpinn/network.hpp"

using namespace acpinn;

namespace {

NetworkSpec small_spec(int d, int depth, int width, Activation out = Activation::linear) {
  NetworkSpec s;
  s.depth = depth;
  s.width = width;
  s.input_dim = d + 1;
  s.output_activation = out;
  Box box;
  for (int i = 0; i < d; ++i) {
    box.lo.push_back(-1.0 + 0.3 * i);
    box.hi.push_back(1.5 + 0.2 * i);
  }
  s.normalize_to(space_time_box(box, 0.0, 0.5));
  return s;
}

double channel_at(const Network& net, const std::vector<double>& p, const ChannelSet& cs, int c,
                  std::vector<double> pt) {
  PointSet ps(static_cast<int>(pt.size()));
  ps.push_back(pt);
  return net.forward(p, cs, ps).channel(c)[0];
}

bool close(double got, double want, double rel, double floor = 1e-10) {
  return std::abs(got - want) <= rel * std::abs(want) + floor;
}

}  // namespace

TEST_CASE("init_params is deterministic with zero biases") {
  NetworkSpec s = small_spec(2, 3, 3);
  auto a = init_params(s, 7), b = init_params(s, 7);
  CHECK(a.values == b.values);
  for (const auto& l : a.layout.layers)
    for (int r = 0; r < l.rows; ++r) CHECK(a.values[l.bias_offset + r] == 0.0);
  CHECK(init_params(s, 8).values != a.values);
}

TEST_CASE("layout is contiguous and matches the architecture") {
  NetworkSpec s = small_spec(2, 4, 6);
  ParameterLayout l = make_layout(s);
  CHECK(l.size == static_cast<std::size_t>(3 * 6 + 6 + 3 * (36 + 6) + 6 + 1));
  std::size_t off = 0;
  for (const auto& layer : l.layers) {
    CHECK(layer.weight_offset == off);
    CHECK(layer.bias_offset == off + static_cast<std::size_t>(layer.rows * layer.cols));
    off = layer.bias_offset + layer.rows;
  }
  CHECK(off == l.size);
}

TEST_CASE("Xavier variance within 20 percent for width 64") {
  NetworkSpec s = small_spec(1, 3, 64);
  auto p = init_params(s, 123);
  for (std::size_t i = 1; i + 1 < p.layout.layers.size(); ++i) {
    const auto& l = p.layout.layers[i];
    const std::size_t n = static_cast<std::size_t>(l.rows) * l.cols;
    double sum = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += p.values[l.weight_offset + j];
      sq += p.values[l.weight_offset + j] * p.values[l.weight_offset + j];
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    const double target = 2.0 / (l.rows + l.cols);
    CHECK(std::abs(var - target) < 0.2 * target);
  }
}

TEST_CASE("zero network gives a zero jet") {
  NetworkSpec s = small_spec(2, 2, 4);
  Network net(s);
  std::vector<double> p(net.num_params(), 0.0);
  std::vector<double> x{0.3, -0.2};
  Jet j = net.jet(p, x, 0.1);
  CHECK(j.u == 0.0);
  CHECK(j.du_dt == 0.0);
  for (double v : j.du_dx) CHECK(v == 0.0);
  for (double v : j.d2u_dx2) CHECK(v == 0.0);
}

TEST_CASE("single tanh unit with linear output has closed-form derivatives") {
  // u = v * tanh(w . z + b) + c with z = (input - center) / half_width
  NetworkSpec s;
  s.depth = 1;
  s.width = 1;
  s.input_dim = 2;
  s.input_center = {0.5, 1.0};
  s.input_half_width = {2.0, 4.0};
  Network net(s);
  const double w0 = 0.7, w1 = -0.4, b = 0.1, v = 1.3, c = -0.2;
  std::vector<double> p{w0, w1, b, v, c};
  const double x = 0.9, t = 2.5;
  const double a = w0 * (x - 0.5) / 2.0 + w1 * (t - 1.0) / 4.0 + b;
  const double th = std::tanh(a), d1 = 1 - th * th, d2 = -2 * th * d1;
  std::vector<double> xs{x};
  Jet j = net.jet(p, xs, t);
  CHECK(j.u == doctest::Approx(v * th + c).epsilon(1e-14));
  CHECK(j.du_dx[0] == doctest::Approx(v * d1 * w0 / 2.0).epsilon(1e-14));
  CHECK(j.du_dt == doctest::Approx(v * d1 * w1 / 4.0).epsilon(1e-14));
  CHECK(j.d2u_dx2[0] == doctest::Approx(v * d2 * (w0 / 2.0) * (w0 / 2.0)).epsilon(1e-14));
}

TEST_CASE("jet channels match central finite differences") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(-0.9, 0.9);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const Activation out = trial % 2 ? Activation::tanh : Activation::linear;
    NetworkSpec s = small_spec(d, 1 + trial % 4, 5, out);
    Network net(s);
    auto p = init_params(s, 1000 + trial).values;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += 0.1 * unif(rng);  // nonzero biases
    std::vector<double> pt(d + 1);
    for (int i = 0; i < d; ++i) pt[i] = unif(rng);
    pt[d] = 0.25 + 0.2 * unif(rng);

    const double h = 1e-5;
    const ChannelSet val = ChannelSet::value();
    for (const ChannelSet& cs : {ChannelSet::pde(d), ChannelSet::energy_rate(d)}) {
      PointSet ps(d + 1);
      ps.push_back(pt);
      JetBatch b = net.forward(p, cs, ps);
      CHECK(b.channel(0)[0] == net.predict(p, ps)[0]);
      for (std::size_t f = 0; f < cs.first.size(); ++f) {
        const int k = cs.first[f];
        auto lo = pt, hi = pt;
        lo[k] -= h;
        hi[k] += h;
        const double fd = (channel_at(net, p, val, 0, hi) - channel_at(net, p, val, 0, lo)) / (2 * h);
        CHECK(close(b.channel(1 + static_cast<int>(f))[0], fd, 1e-6));
        ++checked;
      }
      // Second-order channels: difference the first-derivative channel of
      // coordinate q[0] along q[1].
      const ChannelSet grad_all = ChannelSet::gradient(d + 1);
      for (std::size_t q = 0; q < cs.second.size(); ++q) {
        const int a = cs.second[q][0], c = cs.second[q][1];
        auto lo = pt, hi = pt;
        lo[c] -= h;
        hi[c] += h;
        const int ch = grad_all.first_index(a);
        const double fd =
            (channel_at(net, p, grad_all, ch, hi) - channel_at(net, p, grad_all, ch, lo)) / (2 * h);
        CHECK(close(b.channel(1 + static_cast<int>(cs.first.size() + q))[0], fd, 1e-6));
        ++checked;
      }
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("tanh output stays inside (-1, 1)") {
  NetworkSpec s = small_spec(2, 3, 8, Activation::tanh);
  Network net(s);
  auto p = init_params(s, 5).values;
  for (auto& v : p) v *= 30.0;
  PointSet ps(3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(-5, 5);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> q{unif(rng), unif(rng), unif(rng)};
    ps.push_back(q);
  }
  for (double u : net.predict(p, ps)) CHECK(std::abs(u) <= 1.0);
}

TEST_CASE("loss_gradient: constant loss has zero gradient") {
  NetworkSpec s = small_spec(1, 2, 4);
  Network net(s);
  auto p = init_params(s, 3).values;
  PointSet ps(2);
  ps.push_back(std::vector<double>{0.1, 0.2});
  JetTerm term{ChannelSet::value(), &ps, [](const JetBatch&, std::span<double>) { return 3.0; }};
  std::vector<double> g(p.size(), 9.0);
  CHECK(loss_gradient(net, p, std::span<const JetTerm>(&term, 1), g) == 3.0);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("loss_gradient: u^2 with a one-unit linear network") {
  // depth-1 network with linear hidden activation: u = v (w.z + b) + c.
  NetworkSpec s;
  s.depth = 1;
  s.width = 1;
  s.input_dim = 2;
  s.hidden_activation = Activation::linear;
  Network net(s);
  const double w0 = 0.5, w1 = -1.5, b = 0.25, v = 2.0, c = 0.1;
  std::vector<double> p{w0, w1, b, v, c};
  const double x = 0.3, t = 0.7;
  PointSet ps(2);
  ps.push_back(std::vector<double>{x, t});
  JetTerm term{ChannelSet::value(), &ps, [](const JetBatch& jb, std::span<double> adj) {
                 const double u = jb.channel(0)[0];
                 adj[0] = 2 * u;
                 return u * u;
               }};
  std::vector<double> g(p.size());
  loss_gradient(net, p, std::span<const JetTerm>(&term, 1), g);
  const double hidden = w0 * x + w1 * t + b;
  const double u = v * hidden + c;
  CHECK(g[0] == doctest::Approx(2 * u * v * x));
  CHECK(g[1] == doctest::Approx(2 * u * v * t));
  CHECK(g[2] == doctest::Approx(2 * u * v));
  CHECK(g[3] == doctest::Approx(2 * u * hidden));
  CHECK(g[4] == doctest::Approx(2 * u));
}

TEST_CASE("loss_gradient of a residual-like loss matches finite differences") {
  for (int d = 1; d <= 3; ++d) {
    for (Activation out : {Activation::linear, Activation::tanh}) {
      NetworkSpec s = small_spec(d, 3, 6, out);
      Network net(s);
      auto p = init_params(s, 77 + d).values;
      std::mt19937_64 rng(d);
      std::uniform_real_distribution<double> unif(-0.8, 0.8);
      for (auto& v : p) v += 0.05 * unif(rng);
      PointSet ps(d + 1);
      for (int i = 0; i < 16; ++i) {
        std::vector<double> q(d + 1);
        for (auto& c : q) c = unif(rng);
        ps.push_back(q);
      }
      // Mean of R^2 with R = u_t - (0.01 lap u - u^3 + u) + 0.3 u_x0, plus a
      // mixed-derivative term so every channel kind carries adjoint.
      auto pde_loss = [d](const JetBatch& jb, std::span<double> adj) {
        const ChannelSet& cs = jb.channels();
        const std::size_t n = jb.size();
        const auto u = jb.channel(0), ut = jb.channel(cs.first_index(d)), ux = jb.channel(cs.first_index(0));
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          double lap = 0.0;
          for (int i = 0; i < d; ++i) lap += jb.channel(cs.second_index(i, i))[k];
          const double r = ut[k] - (0.01 * lap - u[k] * u[k] * u[k] + u[k]) + 0.3 * ux[k];
          total += r * r / n;
          const double g = 2 * r / n;
          adj[cs.first_index(d) * n + k] += g;
          adj[k] += g * (3 * u[k] * u[k] - 1);
          adj[cs.first_index(0) * n + k] += 0.3 * g;
          for (int i = 0; i < d; ++i) adj[cs.second_index(i, i) * n + k] += -0.01 * g;
        }
        return total;
      };
      auto rate_loss = [d](const JetBatch& jb, std::span<double> adj) {
        const ChannelSet& cs = jb.channels();
        const std::size_t n = jb.size();
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          for (int i = 0; i < d; ++i) {
            const int ci = cs.first_index(i), cq = cs.second_index(i, d);
            const double a = jb.channel(ci)[k], m = jb.channel(cq)[k];
            total += a * m;
            adj[ci * n + k] += m;
            adj[cq * n + k] += a;
          }
        }
        return total;
      };
      std::vector<JetTerm> terms{{ChannelSet::pde(d), &ps, pde_loss},
                                 {ChannelSet::energy_rate(d), &ps, rate_loss}};
      std::vector<double> g(p.size());
      loss_gradient(net, p, terms, g);
      const double h = 1e-6;
      for (std::size_t i = 0; i < p.size(); ++i) {
        auto lo = p, hi = p;
        lo[i] -= h;
        hi[i] += h;
        const double fd = (loss_gradient(net, hi, terms, {}) - loss_gradient(net, lo, terms, {})) / (2 * h);
        CHECK(close(g[i], fd, 1e-5, 1e-8));
      }
    }
  }
}

TEST_CASE("non-finite loss is a training fault") {
  NetworkSpec s = small_spec(1, 1, 2);
  Network net(s);
  auto p = init_params(s, 1).values;
  PointSet ps(2);
  ps.push_back(std::vector<double>{0.0, 0.0});
  JetTerm term{ChannelSet::value(), &ps,
               [](const JetBatch&, std::span<double>) { return std::nan(""); }};
  std::vector<double> g(p.size());
  CHECK_THROWS_AS(loss_gradient(net, p, std::span<const JetTerm>(&term, 1), g), TrainingFault);
}

TEST_CASE("dimension mismatch is a contract violation") {
  NetworkSpec s = small_spec(2, 1, 2);
  Network net(s);
  auto p = init_params(s, 1).values;
  PointSet ps(2);
  ps.push_back(std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(net.predict(p, ps), ContractViolation);
  std::vector<double> x{0.1};
  CHECK_THROWS_AS(net.jet(p, x, 0.0), ContractViolation);
}

TEST_CASE("checkpoint round trip is bit exact and rejects bad magic") {
  NetworkSpec s = small_spec(2, 3, 5, Activation::tanh);
  auto p = init_params(s, 9);
  std::stringstream ss;
  write_checkpoint(ss, s, p.values);
  NetworkSpec s2;
  auto q = read_checkpoint(ss, s2);
  CHECK(q.values == p.values);
  CHECK(s2.depth == s.depth);
  CHECK(s2.width == s.width);
  CHECK(s2.output_activation == Activation::tanh);
  CHECK(s2.input_center == s.input_center);
  CHECK(s2.input_half_width == s.input_half_width);

  std::string blob = ss.str();
  blob[0] = 'X';
  std::stringstream bad(blob);
  CHECK_THROWS_AS(read_checkpoint(bad, s2), FormatError);
  std::stringstream cut(ss.str().substr(0, 40));
  CHECK_THROWS_AS(read_checkpoint(cut, s2), FormatError);
}

TEST_CASE("scalar and avx2 evaluation paths agree") {
  // Run the same forward/backward under both kernel tables.
  NetworkSpec s = small_spec(2, 4, 32);
  Network net(s);
  auto p = init_params(s, 4).values;
  PointSet ps(3);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(-1, 1);
  for (int i = 0; i < 37; ++i) ps.push_back(std::vector<double>{unif(rng), unif(rng), unif(rng)});
  auto run = [&] {
    JetBatch b = net.forward(p, ChannelSet::pde(2), ps);
    std::vector<double> adj(b.outputs().size(), 0.0);
    for (std::size_t i = 0; i < adj.size(); ++i) adj[i] = std::sin(0.1 * i);
    std::vector<double> g(p.size(), 0.0);
    b.backward(p, adj, g);
    std::vector<double> out(b.outputs().begin(), b.outputs().end());
    out.insert(out.end(), g.begin(), g.end());
    return out;
  };
  const auto before = acpinn::kernels::active().isa;
  acpinn::kernels::select(acpinn::kernels::Isa::scalar);
  auto a = run();
  if (acpinn::kernels::avx2_table()) {
    acpinn::kernels::select(acpinn::kernels::Isa::avx2);
    auto b = run();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(close(b[i], a[i], 1e-12, 1e-13));
  }
  acpinn::kernels::select(before);
}
