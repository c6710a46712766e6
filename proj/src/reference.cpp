// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include "acpinn/reference.hpp"

#include <fftw3.h>
#include <openssl/evp.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "acpinn/errors.hpp"

namespace acpinn {

using cplx = std::complex<double>;
using std::numbers::pi;

namespace {

// Owns one r2c/c2r plan pair of size n.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    real_ = fftw_alloc_real(n);
    spec_ = fftw_alloc_complex(n / 2 + 1);
    fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  void forward(std::span<const double> in, std::span<cplx> out) {
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(fwd_);
    for (int j = 0; j <= n_ / 2; ++j) out[j] = {spec_[j][0], spec_[j][1]};
  }

  // Normalized inverse.
  void inverse(std::span<const cplx> in, std::span<double> out) {
    for (int j = 0; j <= n_ / 2; ++j) {
      spec_[j][0] = in[j].real();
      spec_[j][1] = in[j].imag();
    }
    fftw_execute(inv_);
    for (int i = 0; i < n_; ++i) out[i] = real_[i] / n_;
  }

 private:
  int n_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

// Wavenumbers of the r2c half spectrum on a period of length L.
std::vector<double> wavenumbers(int n, double L) {
  std::vector<double> k(n / 2 + 1);
  for (int j = 0; j <= n / 2; ++j) k[j] = 2.0 * pi * j / L;
  // The Nyquist mode carries no derivative information.
  if (n % 2 == 0) k[n / 2] = 0.0;
  return k;
}

}  // namespace

double ReferenceSolution::interpolate(std::size_t s, double xq) const {
  require(periodic, "interpolate: periodic data only");
  require(s < u.size(), "interpolate: snapshot index out of range");
  RealFft fft(n);
  std::vector<cplx> c(n / 2 + 1);
  fft.forward(u[s], c);
  const double w = 2.0 * pi / length;
  double v = c[0].real();
  for (int j = 1; j <= n / 2; ++j) {
    const double scale = (n % 2 == 0 && j == n / 2) ? 1.0 : 2.0;
    const cplx e = std::polar(1.0, w * j * (xq - lo));
    v += scale * (c[j] * e).real();
  }
  return v / n;
}

ReferenceSolution solve_spectral_1d(const ProblemSpec& prob, const SpectralOptions& opt,
                                    std::span<const double> snapshot_times) {
  require(prob.dim() == 1, "solve_spectral_1d: one spatial dimension only");
  require(prob.bc == BoundaryKind::periodic, "solve_spectral_1d: periodic boundary only");
  require(opt.n >= 4 && opt.dt > 0.0, "solve_spectral_1d: need n >= 4 and dt > 0");
  const int n = opt.n;
  const int nh = n / 2 + 1;
  const double h = opt.dt;
  const double L = prob.domain.extent(0);
  const double lo = prob.domain.lo[0];
  const double D = prob.mobility.mu0 * prob.epsilon * prob.epsilon;
  require(prob.mobility.kind == MobilityKind::constant, "solve_spectral_1d: constant mobility only");

  ReferenceSolution sol;
  sol.n = n;
  sol.dt = h;
  sol.integrator = "etdrk4";
  sol.periodic = true;
  sol.lo = lo;
  sol.length = L;
  for (int i = 0; i < n; ++i) sol.x.push_back(lo + L * i / n);

  std::vector<long> snap_steps;
  for (double t : snapshot_times) {
    const double r = t / h;
    const long s = std::lround(r);
    require(t >= 0.0 && std::abs(r - s) <= 1e-8 * std::max(1.0, r),
            "solve_spectral_1d: snapshot times must be multiples of dt");
    require(snap_steps.empty() || s >= snap_steps.back(), "solve_spectral_1d: snapshot times must increase");
    snap_steps.push_back(s);
  }

  // ETDRK4 coefficients by contour integrals around each eigenvalue.
  const std::vector<double> k = wavenumbers(n, L);
  std::vector<double> E(nh), E2(nh), Q(nh), f1(nh), f2(nh), f3(nh);
  const int M = 32;
  for (int j = 0; j < nh; ++j) {
    const double Lk = -D * k[j] * k[j];
    const double z = h * Lk;
    E[j] = std::exp(z);
    E2[j] = std::exp(z / 2);
    cplx q = 0, a1 = 0, a2 = 0, a3 = 0;
    for (int m = 1; m <= M; ++m) {
      const cplx r = std::exp(cplx(0.0, pi * (m - 0.5) / M));
      const cplx lr = z + r;
      const cplx el = std::exp(lr);
      q += (std::exp(lr / 2.0) - 1.0) / lr;
      a1 += (-4.0 - lr + el * (4.0 - 3.0 * lr + lr * lr)) / (lr * lr * lr);
      a2 += (2.0 + lr + el * (-2.0 + lr)) / (lr * lr * lr);
      a3 += (-4.0 - 3.0 * lr - lr * lr + el * (4.0 - lr)) / (lr * lr * lr);
    }
    Q[j] = h * (q / double(M)).real();
    f1[j] = h * (a1 / double(M)).real();
    f2[j] = h * (a2 / double(M)).real();
    f3[j] = h * (a3 / double(M)).real();
  }

  RealFft fft(n);
  std::vector<double> u(n), work(n);
  for (int i = 0; i < n; ++i) {
    if (opt.initial) {
      u[i] = opt.initial(sol.x[i]);
    } else {
      const double xi[1] = {sol.x[i]};
      u[i] = prob.ic.eval(xi);
    }
  }
  std::vector<cplx> v(nh), Nv(nh), a(nh), Na(nh), b(nh), Nb(nh), c(nh), Nc(nh);
  fft.forward(u, v);

  const double mu = prob.mobility.mu0;
  auto nonlin = [&](std::span<const cplx> in, std::span<cplx> out) {
    if (!opt.nonlinear) {
      std::fill(out.begin(), out.end(), cplx(0.0));
      return;
    }
    fft.inverse(in, work);
    for (int i = 0; i < n; ++i) work[i] = -mu * potential_eval(prob.potential, work[i]).f;
    fft.forward(work, out);
  };

  std::size_t next = 0;
  auto take_snapshots = [&](long step) {
    while (next < snap_steps.size() && snap_steps[next] == step) {
      fft.inverse(v, u);
      for (double val : u)
        if (!std::isfinite(val)) throw TrainingFault("spectral solver: non-finite state at step " + std::to_string(step));
      sol.times.push_back(snapshot_times[next]);
      sol.u.push_back(u);
      ++next;
    }
  };
  take_snapshots(0);
  const long last = snap_steps.empty() ? 0 : snap_steps.back();
  for (long step = 1; step <= last; ++step) {
    nonlin(v, Nv);
    for (int j = 0; j < nh; ++j) a[j] = E2[j] * v[j] + Q[j] * Nv[j];
    nonlin(a, Na);
    for (int j = 0; j < nh; ++j) b[j] = E2[j] * v[j] + Q[j] * Na[j];
    nonlin(b, Nb);
    for (int j = 0; j < nh; ++j) c[j] = E2[j] * a[j] + Q[j] * (2.0 * Nb[j] - Nv[j]);
    nonlin(c, Nc);
    for (int j = 0; j < nh; ++j)
      v[j] = E[j] * v[j] + Nv[j] * f1[j] + 2.0 * (Na[j] + Nb[j]) * f2[j] + Nc[j] * f3[j];
    if (step % 256 == 0 && !std::isfinite(std::abs(v[0])))
      throw TrainingFault("spectral solver: non-finite state at step " + std::to_string(step));
    take_snapshots(step);
  }
  return sol;
}

double relative_l2(std::span<const double> ref, std::span<const double> pred) {
  require(ref.size() == pred.size(), "relative_l2: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    num += (ref[i] - pred[i]) * (ref[i] - pred[i]);
    den += ref[i] * ref[i];
  }
  require(den > 0.0, "relative_l2: reference has zero norm");
  return std::sqrt(num / den);
}

EnergySeries discrete_energy_series(const ReferenceSolution& sol, const ProblemSpec& prob, double slack) {
  const std::size_t n = sol.x.size();
  require(n >= 3, "discrete_energy_series: need at least three grid points");
  const double e2 = prob.epsilon * prob.epsilon;
  EnergySeries out;
  std::vector<double> grad(n);
  std::unique_ptr<RealFft> fft;
  std::vector<double> k;
  std::vector<cplx> spec;
  if (sol.periodic) {
    fft = std::make_unique<RealFft>(static_cast<int>(n));
    k = wavenumbers(static_cast<int>(n), sol.length);
    spec.resize(n / 2 + 1);
  }
  for (std::size_t s = 0; s < sol.u.size(); ++s) {
    const auto& u = sol.u[s];
    double e = 0.0;
    if (sol.periodic) {
      fft->forward(u, spec);
      for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= cplx(0.0, k[j]);
      fft->inverse(spec, grad);
      const double w = sol.length / n;
      for (std::size_t i = 0; i < n; ++i)
        e += w * (0.5 * e2 * grad[i] * grad[i] + potential_eval(prob.potential, u[i]).F);
    } else {
      const double dx = sol.x[1] - sol.x[0];
      grad[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
      grad[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
      for (std::size_t i = 1; i + 1 < n; ++i) grad[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 * dx : dx;
        e += w * (0.5 * e2 * grad[i] * grad[i] + potential_eval(prob.potential, u[i]).F);
      }
    }
    out.t.push_back(sol.times[s]);
    out.energy.push_back(e);
  }
  for (std::size_t s = 0; s + 1 < out.energy.size(); ++s)
    if (out.energy[s + 1] > out.energy[s] + slack) out.violations.push_back(s);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

void write_golden(const std::string& path, const ReferenceSolution& sol, const std::string& problem_key) {
  std::string csv = "t,x,u\n";
  char buf[96];
  for (std::size_t s = 0; s < sol.u.size(); ++s) {
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.6f,%.17g,%.17g\n", sol.times[s], sol.x[i], sol.u[s][i]);
      csv += buf;
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path);
  f << csv;
  nlohmann::json meta{{"format_version", 1},
                      {"problem", problem_key},
                      {"integrator", sol.integrator},
                      {"n", sol.n},
                      {"dt", sol.dt},
                      {"domain_lo", sol.lo},
                      {"domain_length", sol.length},
                      {"snapshots", sol.times.size()},
                      {"sha256", sha256_hex(csv)}};
  std::ofstream m(path + ".meta.json");
  if (!m) throw FormatError("cannot write " + path + ".meta.json");
  m << meta.dump(2) << "\n";
}

ReferenceSolution read_golden(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("golden reference not found: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string csv = ss.str();
  std::ifstream m(path + ".meta.json");
  if (!m) throw FormatError("golden reference metadata not found: " + path + ".meta.json");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(m);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("golden metadata: ") + e.what());
  }
  if (meta.value("format_version", 0) != 1) throw FormatError("golden metadata: unsupported format_version");
  if (meta.value("sha256", std::string()) != sha256_hex(csv))
    throw FormatError("golden reference hash mismatch: " + path);

  ReferenceSolution sol;
  sol.n = meta.at("n").get<int>();
  sol.dt = meta.at("dt").get<double>();
  sol.integrator = meta.at("integrator").get<std::string>();
  sol.lo = meta.at("domain_lo").get<double>();
  sol.length = meta.at("domain_length").get<double>();
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line != "t,x,u") throw FormatError("golden reference: bad header");
  double last_t = -1.0;
  while (std::getline(in, line)) {
    double t, x, u;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &u) != 3) throw FormatError("golden reference: bad row '" + line + "'");
    if (sol.times.empty() || t != last_t) {
      sol.times.push_back(t);
      sol.u.emplace_back();
      last_t = t;
    }
    if (sol.times.size() == 1) sol.x.push_back(x);
    sol.u.back().push_back(u);
  }
  for (const auto& row : sol.u)
    if (row.size() != sol.x.size()) throw FormatError("golden reference: ragged snapshot");
  return sol;
}

ReferenceSolution build_default_reference(const ProblemSpec& prob, int n, double dt) {
  std::vector<double> times;
  for (int i = 0; i <= 100; ++i) times.push_back(0.01 * i);
  SpectralOptions opt;
  opt.n = n;
  opt.dt = dt;
  return solve_spectral_1d(prob, opt, times);
}

}  // namespace acpinn
