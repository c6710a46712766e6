// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/geometry.hpp"

#include "acpinn/errors.hpp"

namespace acpinn {

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= extent(a);
  return v;
}

bool Box::contains(std::span<const double> x, double slack) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (x[a] < lo[a] - slack || x[a] > hi[a] + slack) return false;
  }
  return true;
}

void PointSet::push_back(std::span<const double> p) {
  require(static_cast<int>(p.size()) == dim, "PointSet::push_back: dimension mismatch");
  coords.insert(coords.end(), p.begin(), p.end());
}

void PointSet::append(const PointSet& other) {
  if (other.empty()) return;
  require(other.dim == dim, "PointSet::append: dimension mismatch");
  coords.insert(coords.end(), other.coords.begin(), other.coords.end());
}

Box space_time_box(const Box& space, double t0, double t1) {
  Box b = space;
  b.lo.push_back(t0);
  b.hi.push_back(t1);
  return b;
}

}  // namespace acpinn
