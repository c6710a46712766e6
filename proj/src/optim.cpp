// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "acpinn/errors.hpp"
#include "acpinn/kernels.hpp"

namespace acpinn {

void adam_step(AdamState& s, std::span<double> params, std::span<const double> grad) {
  require(grad.size() == params.size(), "adam_step: gradient length mismatch");
  if (s.m.empty()) {
    s.m.assign(params.size(), 0.0);
    s.v.assign(params.size(), 0.0);
  }
  require(s.m.size() == params.size(), "adam_step: state length mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw TrainingFault("adam_step: non-finite gradient");
  ++s.step;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grad[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double mh = s.m[i] / bc1;
    const double vh = s.v[i] / bc2;
    params[i] -= s.lr * mh / (std::sqrt(vh) + s.eps);
  }
}

void LbfgsState::reset() {
  s.clear();
  y.clear();
  rho.clear();
  have_eval = false;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return kernels::active().dot(a.data(), b.data(), a.size());
}

struct Trial {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), kept inside
// the interval with a bisection fallback.
double cubic_min(const Trial& lo, const Trial& hi) {
  const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
  const double disc = d1 * d1 - lo.d * hi.d;
  const double left = std::min(lo.a, hi.a), right = std::max(lo.a, hi.a);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), hi.a - lo.a);
    const double den = hi.d - lo.d + 2.0 * d2;
    if (den != 0.0) {
      const double a = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) / den;
      const double margin = 0.1 * (right - left);
      if (std::isfinite(a) && a > left + margin && a < right - margin) return a;
    }
  }
  return 0.5 * (lo.a + hi.a);
}

class LineSearch {
 public:
  LineSearch(const Objective& f, std::span<const double> x0, std::span<const double> dir, double f0,
             double d0, const LbfgsOptions& opt)
      : f_(f), x0_(x0), dir_(dir), f0_(f0), d0_(d0), opt_(opt), x_(x0.size()), g_(x0.size()) {
    best_.f = f0;
  }

  // Returns true when a strong Wolfe point was found; x(), f() and g()
  // then describe the accepted trial.
  bool run(double a1) {
    Trial prev{0.0, f0_, d0_};
    double a = a1;
    for (int i = 0; i < opt_.max_trials; ++i) {
      Trial t = eval(a);
      if (!std::isfinite(t.f) || t.f > f0_ + opt_.c1 * a * d0_ || (i > 0 && t.f >= prev.f))
        return zoom(prev, t, opt_.max_trials - i - 1);
      if (std::abs(t.d) <= -opt_.c2 * d0_) return true;
      if (t.d >= 0.0) return zoom(t, prev, opt_.max_trials - i - 1);
      prev = t;
      a *= 2.0;
    }
    return false;
  }

  int evaluations() const { return evals_; }
  const Trial& best() const { return best_; }
  std::span<const double> x() const { return x_; }
  std::span<const double> g() const { return g_; }
  double f() const { return last_.f; }
  double a() const { return last_.a; }

  Trial eval(double a) {
    for (std::size_t i = 0; i < x_.size(); ++i) x_[i] = x0_[i] + a * dir_[i];
    ++evals_;
    double fv;
    try {
      fv = f_(x_, g_);
    } catch (const TrainingFault&) {
      fv = std::numeric_limits<double>::infinity();
    }
    Trial t{a, fv, std::isfinite(fv) ? dot(g_, dir_) : 0.0};
    if (std::isfinite(fv) && fv < best_.f) best_ = t;
    last_ = t;
    return t;
  }

 private:
  bool zoom(Trial lo, Trial hi, int budget) {
    for (int i = 0; i < budget; ++i) {
      double a;
      if (std::isfinite(hi.f))
        a = cubic_min(lo, hi);
      else
        a = 0.5 * (lo.a + hi.a);
      Trial t = eval(a);
      if (!std::isfinite(t.f) || t.f > f0_ + opt_.c1 * a * d0_ || t.f >= lo.f) {
        hi = t;
      } else {
        if (std::abs(t.d) <= -opt_.c2 * d0_) return true;
        if (t.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = t;
      }
      if (std::abs(hi.a - lo.a) <= 1e-16 * std::max(1.0, std::abs(lo.a))) break;
    }
    return false;
  }

  const Objective& f_;
  std::span<const double> x0_, dir_;
  double f0_, d0_;
  const LbfgsOptions& opt_;
  std::vector<double> x_, g_;
  Trial best_, last_;
  int evals_ = 0;
};

}  // namespace

LbfgsStepResult lbfgs_step(LbfgsState& st, std::span<double> params, const Objective& f) {
  const std::size_t n = params.size();
  LbfgsStepResult res;
  if (!st.have_eval || st.g.size() != n) {
    st.g.assign(n, 0.0);
    st.f = f(params, st.g);
    ++res.evaluations;
    if (!std::isfinite(st.f)) throw TrainingFault("lbfgs_step: non-finite loss at current point");
    st.have_eval = true;
  }
  const double gnorm = std::sqrt(dot(st.g, st.g));
  if (gnorm == 0.0) {
    res.outcome = LbfgsOutcome::converged;
    res.f = st.f;
    return res;
  }

  // Two-loop recursion.
  std::vector<double> q(st.g);
  const std::size_t k = st.s.size();
  std::vector<double> alpha(k);
  for (std::size_t i = k; i-- > 0;) {
    alpha[i] = st.rho[i] * dot(st.s[i], q);
    for (std::size_t j = 0; j < n; ++j) q[j] -= alpha[i] * st.y[i][j];
  }
  double gamma = 1.0;
  if (k > 0) gamma = dot(st.s.back(), st.y.back()) / dot(st.y.back(), st.y.back());
  for (double& v : q) v *= gamma;
  for (std::size_t i = 0; i < k; ++i) {
    const double beta = st.rho[i] * dot(st.y[i], q);
    for (std::size_t j = 0; j < n; ++j) q[j] += (alpha[i] - beta) * st.s[i][j];
  }
  std::vector<double> dir(n);
  for (std::size_t j = 0; j < n; ++j) dir[j] = -q[j];
  double d0 = dot(st.g, dir);
  if (!(d0 < 0.0)) {
    // Not a descent direction: restart from steepest descent.
    st.s.clear();
    st.y.clear();
    st.rho.clear();
    for (std::size_t j = 0; j < n; ++j) dir[j] = -st.g[j];
    d0 = -gnorm * gnorm;
  }
  const double a1 = st.s.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;

  const std::vector<double> x0(params.begin(), params.end());
  LineSearch ls(f, x0, dir, st.f, d0, st.opt);
  const bool wolfe = ls.run(a1);
  res.evaluations += ls.evaluations();

  double a_acc;
  if (wolfe) {
    res.outcome = LbfgsOutcome::wolfe;
    a_acc = ls.a();
  } else if (ls.best().a > 0.0 && ls.best().f < st.f) {
    res.outcome = LbfgsOutcome::fallback;
    a_acc = ls.best().a;
  } else {
    res.outcome = LbfgsOutcome::failed;
    ++st.consecutive_failures;
    // Leave params unchanged and make the last objective call match them.
    st.s.clear();
    st.y.clear();
    st.rho.clear();
    st.f = f(params, st.g);
    ++res.evaluations;
    res.f = st.f;
    return res;
  }
  st.consecutive_failures = 0;

  std::vector<double> g_new;
  double f_new;
  if (wolfe) {
    g_new.assign(ls.g().begin(), ls.g().end());
    f_new = ls.f();
  } else {
    ls.eval(a_acc);  // re-evaluate so the gradient and last call match
    ++res.evaluations;
    g_new.assign(ls.g().begin(), ls.g().end());
    f_new = ls.f();
  }
  std::vector<double> s(n), y(n);
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = a_acc * dir[j];
    y[j] = g_new[j] - st.g[j];
    params[j] = x0[j] + s[j];
  }
  const double sy = dot(s, y);
  if (sy > 0.0 && std::isfinite(sy)) {
    st.s.push_back(std::move(s));
    st.y.push_back(std::move(y));
    st.rho.push_back(1.0 / sy);
    if (static_cast<int>(st.s.size()) > st.opt.memory) {
      st.s.pop_front();
      st.y.pop_front();
      st.rho.pop_front();
    }
  }
  st.g = std::move(g_new);
  st.f = f_new;
  res.f = f_new;
  res.step = a_acc;
  return res;
}

HybridResult train_hybrid(std::span<double> params, long n_adam, long n_lbfgs, const Objective& f,
                          const EpochCallback& on_epoch, AdamState adam, LbfgsOptions lbfgs) {
  require(n_adam >= 0 && n_lbfgs >= 0, "train_hybrid: budgets must be >= 0");
  HybridResult out;
  std::vector<double> g(params.size());
  long epoch = 0;
  try {
    for (; epoch < n_adam; ++epoch) {
      const double v = f(params, g);
      if (!std::isfinite(v)) throw TrainingFault("non-finite loss");
      adam_step(adam, params, g);
      out.history.push_back(v);
      ++out.adam_epochs;
      if (on_epoch) on_epoch(epoch + 1, v, params);
    }
    LbfgsState st;
    st.opt = lbfgs;
    for (long i = 0; i < n_lbfgs; ++i, ++epoch) {
      const LbfgsStepResult r = lbfgs_step(st, params, f);
      out.history.push_back(r.f);
      ++out.lbfgs_steps;
      if (on_epoch && on_epoch(epoch + 1, r.f, params)) st.reset();
      if (r.outcome == LbfgsOutcome::converged) break;
      if (st.stagnated()) {
        out.stagnated = true;
        break;
      }
    }
  } catch (const TrainingFault& e) {
    throw TrainingFault("epoch " + std::to_string(epoch + 1) + ": " + e.what());
  }
  return out;
}

}  // namespace acpinn
