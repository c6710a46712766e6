// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace acpinn {

/// Axis-aligned box [lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
  bool contains(std::span<const double> x, double slack = 0.0) const;
};

/// Row-major list of points with a fixed coordinate count.
struct PointSet {
  int dim = 0;
  std::vector<double> coords;

  PointSet() = default;
  explicit PointSet(int d) : dim(d) {}

  std::size_t size() const { return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0; }
  bool empty() const { return coords.empty(); }
  std::span<const double> operator[](std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<double> operator[](std::size_t i) {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void push_back(std::span<const double> p);
  void append(const PointSet& other);
};

/// Space-time box: the spatial box extended by [t0, t1] as the last axis.
Box space_time_box(const Box& space, double t0, double t1);

}  // namespace acpinn
