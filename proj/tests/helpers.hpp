// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "acpinn/network.hpp"

namespace acpinn::testing {

/// Depth-1, width-1 network with identity input scaling and linear
/// activations: u = v (w . (x, t) + b) + c.
inline NetworkSpec affine_spec(int input_dim) {
  NetworkSpec s;
  s.depth = 1;
  s.width = 1;
  s.input_dim = input_dim;
  s.hidden_activation = Activation::linear;
  s.input_center.assign(input_dim, 0.0);
  s.input_half_width.assign(input_dim, 1.0);
  return s;
}

/// Parameters of affine_spec giving u = sum_i w_i z_i + c.
inline std::vector<double> affine_params(const std::vector<double>& w, double c) {
  std::vector<double> p = w;
  p.push_back(0.0);  // hidden bias
  p.push_back(1.0);  // output weight
  p.push_back(c);    // output bias
  return p;
}

}  // namespace acpinn::testing
