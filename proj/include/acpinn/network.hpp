// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "acpinn/geometry.hpp"

namespace acpinn {

enum class Activation { linear, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Fully connected network of `depth` hidden layers of equal `width`.
///
/// Inputs are (x_1, ..., x_d, t). They are mapped affinely to
/// z = (input - center) / half_width before the first layer; derivatives
/// reported by the evaluator are with respect to the physical inputs.
/// With `skip` set and depth >= 2 the first hidden layer's output is added
/// to the last hidden layer's pre-activation.
struct NetworkSpec {
  int depth = 1;
  int width = 1;
  int input_dim = 2;
  Activation hidden_activation = Activation::tanh;
  Activation output_activation = Activation::linear;
  bool skip = true;
  std::vector<double> input_center;
  std::vector<double> input_half_width;

  int spatial_dim() const { return input_dim - 1; }
  bool has_skip() const { return skip && depth >= 2; }

  /// Fills the normalization from a space-time box.
  void normalize_to(const Box& space_time);

  /// Throws ContractViolation when any invariant is broken.
  void validate() const;
};

struct LayerLayout {
  int rows = 0;
  int cols = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

/// Hidden layers first, output layer last; each layer stores its row-major
/// weight matrix followed by its bias.
struct ParameterLayout {
  std::vector<LayerLayout> layers;
  std::size_t size = 0;
};

ParameterLayout make_layout(const NetworkSpec& spec);

struct ParameterVector {
  std::vector<double> values;
  ParameterLayout layout;
};

/// Xavier-normal weights (variance 2 / (fan_in + fan_out)), zero biases.
ParameterVector init_params(const NetworkSpec& spec, std::uint64_t seed);

/// Network value and the input derivatives used by the PDE residual.
struct Jet {
  double u = 0.0;
  std::vector<double> du_dx;
  std::vector<double> d2u_dx2;  // diagonal only
  double du_dt = 0.0;
};

/// Derivative channels propagated alongside the value.
///
/// Channel 0 is the value, channels 1..first.size() are first derivatives
/// with respect to input coordinate first[i], the remaining ones are second
/// derivatives with respect to pairs of coordinates. Both coordinates of a
/// pair must appear in `first`.
struct ChannelSet {
  std::vector<int> first;
  std::vector<std::array<int, 2>> second;

  int count() const { return 1 + static_cast<int>(first.size() + second.size()); }
  int first_index(int coord) const;
  int second_index(int a, int b) const;

  static ChannelSet value();
  /// u and its spatial gradient.
  static ChannelSet gradient(int d);
  /// u, grad u, u_t and the diagonal spatial Hessian.
  static ChannelSet pde(int d);
  /// u, grad u, u_t and the mixed derivatives u_{x_i t}.
  static ChannelSet energy_rate(int d);
};

class JetBatch;

/// Architecture plus layout; evaluation is const and pure in the parameters.
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  const ParameterLayout& layout() const { return layout_; }
  std::size_t num_params() const { return layout_.size; }

  /// Forward sweep over `points` (input_dim coordinates each) keeping
  /// everything the reverse sweep needs.
  JetBatch forward(std::span<const double> params, const ChannelSet& channels,
                   const PointSet& points) const;

  /// Value only.
  std::vector<double> predict(std::span<const double> params, const PointSet& points) const;

  Jet jet(std::span<const double> params, std::span<const double> x, double t) const;

 private:
  NetworkSpec spec_;
  ParameterLayout layout_;
};

/// Outputs of one forward sweep, channel-major: channel c of point p is at
/// c * size() + p.
class JetBatch {
 public:
  std::size_t size() const { return npts_; }
  const ChannelSet& channels() const { return channels_; }
  std::span<const double> channel(int c) const;
  std::span<const double> outputs() const { return out_post_; }

  /// Accumulates d(loss)/d(params) into grad given d(loss)/d(outputs)
  /// laid out like outputs().
  void backward(std::span<const double> params, std::span<const double> output_adjoint,
                std::span<double> grad) const;

 private:
  friend class Network;
  const Network* net_ = nullptr;
  ChannelSet channels_;
  std::size_t npts_ = 0;
  std::vector<double> input_;               // input_dim x ncols
  std::vector<std::vector<double>> pre_;    // per hidden layer, width x ncols
  std::vector<std::vector<double>> post_;
  std::vector<double> out_pre_;             // 1 x ncols
  std::vector<double> out_post_;
};

/// One scalar loss contribution built from jet outputs at fixed points.
struct JetTerm {
  ChannelSet channels;
  const PointSet* points = nullptr;
  /// Returns the term value and writes d(term)/d(outputs) into `adjoint`
  /// (zero-initialized, same layout as JetBatch::outputs()).
  std::function<double(const JetBatch&, std::span<double>)> loss;
};

/// Sum of the terms and, when grad is non-empty, its exact parameter
/// gradient (overwritten). Throws TrainingFault on non-finite values.
double loss_gradient(const Network& net, std::span<const double> params,
                     std::span<const JetTerm> terms, std::span<double> grad);

/// "ACPINN1" container: magic, NetworkSpec fields, then parameters as
/// little-endian binary64 in layout order.
void write_checkpoint(std::ostream& os, const NetworkSpec& spec, std::span<const double> params);
ParameterVector read_checkpoint(std::istream& is, NetworkSpec& spec);

}  // namespace acpinn
