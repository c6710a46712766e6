// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include "acpinn/errors.hpp"
#include "acpinn/kernels.hpp"

namespace acpinn {

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "linear"; }

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  throw ConfigError("unknown activation '" + s + "'");
}

void NetworkSpec::normalize_to(const Box& space_time) {
  require(space_time.dim() == input_dim, "normalize_to: box dimension does not match input_dim");
  input_center.resize(input_dim);
  input_half_width.resize(input_dim);
  for (int k = 0; k < input_dim; ++k) {
    input_center[k] = 0.5 * (space_time.lo[k] + space_time.hi[k]);
    input_half_width[k] = 0.5 * space_time.extent(k);
  }
}

void NetworkSpec::validate() const {
  require(depth >= 1, "NetworkSpec: depth must be >= 1");
  require(width >= 1, "NetworkSpec: width must be >= 1");
  require(input_dim >= 2 && input_dim <= 4, "NetworkSpec: input_dim must be in {2,3,4}");
  require(input_center.empty() || static_cast<int>(input_center.size()) == input_dim,
          "NetworkSpec: input_center size");
  require(input_half_width.size() == input_center.size(), "NetworkSpec: input_half_width size");
  for (double h : input_half_width) require(h > 0.0, "NetworkSpec: input_half_width must be > 0");
}

ParameterLayout make_layout(const NetworkSpec& spec) {
  ParameterLayout layout;
  std::size_t offset = 0;
  auto add = [&](int rows, int cols) {
    LayerLayout l{rows, cols, offset, offset + static_cast<std::size_t>(rows) * cols};
    offset = l.bias_offset + rows;
    layout.layers.push_back(l);
  };
  add(spec.width, spec.input_dim);
  for (int l = 1; l < spec.depth; ++l) add(spec.width, spec.width);
  add(1, spec.width);
  layout.size = offset;
  return layout;
}

ParameterVector init_params(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParameterVector p{std::vector<double>(0), make_layout(spec)};
  p.values.assign(p.layout.size, 0.0);
  std::mt19937_64 rng(seed);
  for (const LayerLayout& l : p.layout.layers) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (l.rows + l.cols)));
    const std::size_t n = static_cast<std::size_t>(l.rows) * l.cols;
    for (std::size_t i = 0; i < n; ++i) p.values[l.weight_offset + i] = dist(rng);
  }
  return p;
}

int ChannelSet::first_index(int coord) const {
  for (std::size_t i = 0; i < first.size(); ++i)
    if (first[i] == coord) return 1 + static_cast<int>(i);
  return -1;
}

int ChannelSet::second_index(int a, int b) const {
  for (std::size_t i = 0; i < second.size(); ++i) {
    const auto& q = second[i];
    if ((q[0] == a && q[1] == b) || (q[0] == b && q[1] == a))
      return 1 + static_cast<int>(first.size() + i);
  }
  return -1;
}

ChannelSet ChannelSet::value() { return {}; }

ChannelSet ChannelSet::gradient(int d) {
  ChannelSet c;
  for (int i = 0; i < d; ++i) c.first.push_back(i);
  return c;
}

ChannelSet ChannelSet::pde(int d) {
  ChannelSet c = gradient(d);
  c.first.push_back(d);
  for (int i = 0; i < d; ++i) c.second.push_back({i, i});
  return c;
}

ChannelSet ChannelSet::energy_rate(int d) {
  ChannelSet c = gradient(d);
  c.first.push_back(d);
  for (int i = 0; i < d; ++i) c.second.push_back({i, d});
  return c;
}

namespace {

// Position in `first` of both coordinates of every second-order channel.
struct PairMap {
  int nf = 0;
  int nq = 0;
  std::vector<int> fa, fb;

  explicit PairMap(const ChannelSet& cs) : nf(static_cast<int>(cs.first.size())), nq(static_cast<int>(cs.second.size())) {
    for (const auto& q : cs.second) {
      const int a = cs.first_index(q[0]);
      const int b = cs.first_index(q[1]);
      require(a > 0 && b > 0, "ChannelSet: second-order pair needs both first-order channels");
      fa.push_back(a);
      fb.push_back(b);
    }
  }
};

// Propagates (value, tangents, second-order) through h = sigma(a) row by row.
void activation_forward(Activation act, std::size_t rows, std::size_t npts, const PairMap& pm,
                        const double* a, double* h, std::size_t ld) {
  const std::size_t nch = 1 + pm.nf + pm.nq;
  if (act == Activation::linear) {
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(a + r * ld, nch * npts, h + r * ld);
    return;
  }
  const auto& k = kernels::active();
  std::vector<double> d1(npts), d2(npts);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ar = a + r * ld;
    double* hr = h + r * ld;
    k.tanh(ar, hr, npts);
    for (std::size_t p = 0; p < npts; ++p) {
      const double s = hr[p];
      d1[p] = 1.0 - s * s;
      d2[p] = -2.0 * s * d1[p];
    }
    for (int f = 1; f <= pm.nf; ++f) {
      const double* af = ar + f * npts;
      double* hf = hr + f * npts;
      for (std::size_t p = 0; p < npts; ++p) hf[p] = d1[p] * af[p];
    }
    for (int q = 0; q < pm.nq; ++q) {
      const std::size_t c = 1 + pm.nf + q;
      const double* aq = ar + c * npts;
      const double* aa = ar + pm.fa[q] * npts;
      const double* ab = ar + pm.fb[q] * npts;
      double* hq = hr + c * npts;
      for (std::size_t p = 0; p < npts; ++p) hq[p] = d1[p] * aq[p] + d2[p] * aa[p] * ab[p];
    }
  }
}

// Reverse of activation_forward: abar from hbar.
void activation_backward(Activation act, std::size_t rows, std::size_t npts, const PairMap& pm,
                         const double* a, const double* h, const double* hbar, double* abar,
                         std::size_t ld) {
  const std::size_t nch = 1 + pm.nf + pm.nq;
  if (act == Activation::linear) {
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(hbar + r * ld, nch * npts, abar + r * ld);
    return;
  }
  std::vector<double> d1(npts), d2(npts), d3(npts);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ar = a + r * ld;
    const double* hr = h + r * ld;
    const double* gr = hbar + r * ld;
    double* br = abar + r * ld;
    for (std::size_t p = 0; p < npts; ++p) {
      const double s = hr[p];
      d1[p] = 1.0 - s * s;
      d2[p] = -2.0 * s * d1[p];
      d3[p] = -2.0 * d1[p] * d1[p] + 4.0 * s * s * d1[p];
    }
    for (std::size_t p = 0; p < npts; ++p) br[p] = d1[p] * gr[p];
    for (int f = 1; f <= pm.nf; ++f) {
      const double* af = ar + f * npts;
      const double* gf = gr + f * npts;
      double* bf = br + f * npts;
      for (std::size_t p = 0; p < npts; ++p) {
        br[p] += d2[p] * af[p] * gf[p];
        bf[p] = d1[p] * gf[p];
      }
    }
    for (int q = 0; q < pm.nq; ++q) {
      const std::size_t c = 1 + pm.nf + q;
      const double* aq = ar + c * npts;
      const double* aa = ar + pm.fa[q] * npts;
      const double* ab = ar + pm.fb[q] * npts;
      const double* gq = gr + c * npts;
      double* ba = br + pm.fa[q] * npts;
      double* bb = br + pm.fb[q] * npts;
      double* bq = br + c * npts;
      for (std::size_t p = 0; p < npts; ++p) {
        br[p] += (d2[p] * aq[p] + d3[p] * aa[p] * ab[p]) * gq[p];
        ba[p] += d2[p] * ab[p] * gq[p];
        bb[p] += d2[p] * aa[p] * gq[p];
        bq[p] = d1[p] * gq[p];
      }
    }
  }
}

void add_bias(std::size_t rows, std::size_t npts, const double* bias, double* a, std::size_t ld) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* ar = a + r * ld;
    const double b = bias[r];
    for (std::size_t p = 0; p < npts; ++p) ar[p] += b;
  }
}

void accumulate_bias_grad(std::size_t rows, std::size_t npts, const double* abar, double* gb,
                          std::size_t ld) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ar = abar + r * ld;
    double s = 0.0;
    for (std::size_t p = 0; p < npts; ++p) s += ar[p];
    gb[r] += s;
  }
}

}  // namespace

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.input_center.empty()) {
    spec_.input_center.assign(spec_.input_dim, 0.0);
    spec_.input_half_width.assign(spec_.input_dim, 1.0);
  }
  layout_ = make_layout(spec_);
}

JetBatch Network::forward(std::span<const double> params, const ChannelSet& channels,
                          const PointSet& points) const {
  require(params.size() == layout_.size, "forward: parameter vector length does not match layout");
  require(points.dim == spec_.input_dim, "forward: point dimension does not match input_dim");
  const PairMap pm(channels);
  const auto& k = kernels::active();

  JetBatch b;
  b.net_ = this;
  b.channels_ = channels;
  b.npts_ = points.size();
  const std::size_t np = b.npts_;
  const std::size_t nch = static_cast<std::size_t>(channels.count());
  const std::size_t ncols = np * nch;
  const std::size_t din = static_cast<std::size_t>(spec_.input_dim);
  const std::size_t w = static_cast<std::size_t>(spec_.width);
  if (np == 0) return b;

  b.input_.assign(din * ncols, 0.0);
  for (std::size_t c = 0; c < din; ++c) {
    double* row = b.input_.data() + c * ncols;
    const double center = spec_.input_center[c];
    const double inv_h = 1.0 / spec_.input_half_width[c];
    for (std::size_t p = 0; p < np; ++p) row[p] = (points.coords[p * din + c] - center) * inv_h;
    const int f = channels.first_index(static_cast<int>(c));
    if (f > 0) std::fill_n(row + f * np, np, inv_h);
  }

  const int depth = spec_.depth;
  b.pre_.resize(depth);
  b.post_.resize(depth);
  for (int l = 0; l < depth; ++l) {
    const LayerLayout& ll = layout_.layers[l];
    const double* in = l == 0 ? b.input_.data() : b.post_[l - 1].data();
    b.pre_[l].resize(w * ncols);
    b.post_[l].resize(w * ncols);
    k.gemm_nn(w, ncols, ll.cols, params.data() + ll.weight_offset, ll.cols, in, ncols,
              b.pre_[l].data(), ncols);
    add_bias(w, np, params.data() + ll.bias_offset, b.pre_[l].data(), ncols);
    if (spec_.has_skip() && l == depth - 1) k.axpy(1.0, b.post_[0].data(), b.pre_[l].data(), w * ncols);
    activation_forward(spec_.hidden_activation, w, np, pm, b.pre_[l].data(), b.post_[l].data(), ncols);
  }
  const LayerLayout& lo = layout_.layers.back();
  b.out_pre_.resize(ncols);
  b.out_post_.resize(ncols);
  k.gemm_nn(1, ncols, w, params.data() + lo.weight_offset, w, b.post_.back().data(), ncols,
            b.out_pre_.data(), ncols);
  add_bias(1, np, params.data() + lo.bias_offset, b.out_pre_.data(), ncols);
  activation_forward(spec_.output_activation, 1, np, pm, b.out_pre_.data(), b.out_post_.data(), ncols);
  return b;
}

std::vector<double> Network::predict(std::span<const double> params, const PointSet& points) const {
  JetBatch b = forward(params, ChannelSet::value(), points);
  return {b.outputs().begin(), b.outputs().end()};
}

Jet Network::jet(std::span<const double> params, std::span<const double> x, double t) const {
  const int d = spec_.spatial_dim();
  require(static_cast<int>(x.size()) == d, "jet: spatial dimension mismatch");
  PointSet pts(spec_.input_dim);
  std::vector<double> p(x.begin(), x.end());
  p.push_back(t);
  pts.push_back(p);
  const ChannelSet cs = ChannelSet::pde(d);
  JetBatch b = forward(params, cs, pts);
  Jet j;
  j.u = b.channel(0)[0];
  for (int i = 0; i < d; ++i) {
    j.du_dx.push_back(b.channel(cs.first_index(i))[0]);
    j.d2u_dx2.push_back(b.channel(cs.second_index(i, i))[0]);
  }
  j.du_dt = b.channel(cs.first_index(d))[0];
  return j;
}

std::span<const double> JetBatch::channel(int c) const {
  require(c >= 0 && c < channels_.count(), "JetBatch::channel: index out of range");
  return {out_post_.data() + static_cast<std::size_t>(c) * npts_, npts_};
}

void JetBatch::backward(std::span<const double> params, std::span<const double> output_adjoint,
                        std::span<double> grad) const {
  require(net_ != nullptr, "JetBatch::backward: empty batch");
  const NetworkSpec& spec = net_->spec();
  const ParameterLayout& layout = net_->layout();
  require(params.size() == layout.size && grad.size() == layout.size,
          "JetBatch::backward: parameter/gradient length mismatch");
  require(output_adjoint.size() == out_post_.size(), "JetBatch::backward: adjoint size mismatch");
  if (npts_ == 0) return;
  const auto& k = kernels::active();
  const PairMap pm(channels_);
  const std::size_t np = npts_;
  const std::size_t ncols = out_post_.size();
  const std::size_t w = static_cast<std::size_t>(spec.width);
  const int depth = spec.depth;

  std::vector<double> ybar(ncols);
  activation_backward(spec.output_activation, 1, np, pm, out_pre_.data(), out_post_.data(),
                      output_adjoint.data(), ybar.data(), ncols);
  const LayerLayout& lo = layout.layers.back();
  k.gemm_nt_acc(1, ncols, w, ybar.data(), ncols, post_.back().data(), ncols,
                grad.data() + lo.weight_offset, w);
  accumulate_bias_grad(1, np, ybar.data(), grad.data() + lo.bias_offset, ncols);

  std::vector<double> hbar(w * ncols), abar(w * ncols), skip_bar;
  k.gemm_tn(1, ncols, w, params.data() + lo.weight_offset, w, ybar.data(), ncols, hbar.data(), ncols);

  for (int l = depth - 1; l >= 0; --l) {
    const LayerLayout& ll = layout.layers[l];
    activation_backward(spec.hidden_activation, w, np, pm, pre_[l].data(), post_[l].data(),
                        hbar.data(), abar.data(), ncols);
    if (spec.has_skip() && l == depth - 1) skip_bar = abar;
    const double* in = l == 0 ? input_.data() : post_[l - 1].data();
    k.gemm_nt_acc(w, ncols, ll.cols, abar.data(), ncols, in, ncols, grad.data() + ll.weight_offset,
                  ll.cols);
    accumulate_bias_grad(w, np, abar.data(), grad.data() + ll.bias_offset, ncols);
    if (l > 0) {
      k.gemm_tn(w, ncols, ll.cols, params.data() + ll.weight_offset, ll.cols, abar.data(), ncols,
                hbar.data(), ncols);
      if (spec.has_skip() && l == 1) k.axpy(1.0, skip_bar.data(), hbar.data(), w * ncols);
    }
  }
}

double loss_gradient(const Network& net, std::span<const double> params,
                     std::span<const JetTerm> terms, std::span<double> grad) {
  const bool want_grad = !grad.empty();
  if (want_grad) {
    require(grad.size() == net.num_params(), "loss_gradient: gradient length mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  double total = 0.0;
  std::vector<double> adjoint;
  for (const JetTerm& term : terms) {
    require(term.points != nullptr, "loss_gradient: term without points");
    JetBatch batch = net.forward(params, term.channels, *term.points);
    adjoint.assign(batch.outputs().size(), 0.0);
    const double value = term.loss(batch, adjoint);
    if (!std::isfinite(value)) throw TrainingFault("loss_gradient: non-finite loss term");
    total += value;
    if (want_grad) batch.backward(params, adjoint, grad);
  }
  if (want_grad) {
    for (double g : grad)
      if (!std::isfinite(g)) throw TrainingFault("loss_gradient: non-finite gradient");
  }
  return total;
}

// ---------------------------------------------------------------------------
// Checkpoint container

namespace {

constexpr char kMagic[7] = {'A', 'C', 'P', 'I', 'N', 'N', '1'};

template <class U>
U to_le(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
    return r;
  }
  return v;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v = to_le(std::bit_cast<std::uint64_t>(d));
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("checkpoint truncated");
  return to_le(v);
}

double get_f64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("checkpoint truncated");
  return std::bit_cast<double>(to_le(v));
}

}  // namespace

void write_checkpoint(std::ostream& os, const NetworkSpec& spec, std::span<const double> params) {
  const NetworkSpec& s = spec;
  require(params.size() == make_layout(s).size, "write_checkpoint: parameter length mismatch");
  os.write(kMagic, sizeof kMagic);
  put_u32(os, static_cast<std::uint32_t>(s.depth));
  put_u32(os, static_cast<std::uint32_t>(s.width));
  put_u32(os, static_cast<std::uint32_t>(s.input_dim));
  put_u32(os, s.hidden_activation == Activation::tanh ? 1u : 0u);
  put_u32(os, s.output_activation == Activation::tanh ? 1u : 0u);
  put_u32(os, s.skip ? 1u : 0u);
  for (int c = 0; c < s.input_dim; ++c)
    put_f64(os, s.input_center.empty() ? 0.0 : s.input_center[c]);
  for (int c = 0; c < s.input_dim; ++c)
    put_f64(os, s.input_half_width.empty() ? 1.0 : s.input_half_width[c]);
  put_u32(os, static_cast<std::uint32_t>(params.size()));
  for (double v : params) put_f64(os, v);
  if (!os) throw FormatError("write_checkpoint: stream error");
}

ParameterVector read_checkpoint(std::istream& is, NetworkSpec& spec) {
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic)) throw FormatError("checkpoint truncated");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw FormatError("checkpoint: bad magic (expected ACPINN1)");
  NetworkSpec s;
  s.depth = static_cast<int>(get_u32(is));
  s.width = static_cast<int>(get_u32(is));
  s.input_dim = static_cast<int>(get_u32(is));
  const std::uint32_t ha = get_u32(is), oa = get_u32(is), sk = get_u32(is);
  if (ha > 1 || oa > 1 || sk > 1 || s.input_dim < 2 || s.input_dim > 4 || s.depth < 1 || s.width < 1)
    throw FormatError("checkpoint: corrupt header");
  s.hidden_activation = ha ? Activation::tanh : Activation::linear;
  s.output_activation = oa ? Activation::tanh : Activation::linear;
  s.skip = sk != 0;
  s.input_center.resize(s.input_dim);
  s.input_half_width.resize(s.input_dim);
  for (auto& v : s.input_center) v = get_f64(is);
  for (auto& v : s.input_half_width) v = get_f64(is);
  ParameterVector p;
  p.layout = make_layout(s);
  const std::uint32_t n = get_u32(is);
  if (n != p.layout.size) throw FormatError("checkpoint: parameter count does not match header");
  p.values.resize(n);
  for (auto& v : p.values) v = get_f64(is);
  spec = s;
  return p;
}

}  // namespace acpinn
