// Copyright 2026 The qmemtest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "qmemtest/analysis.hpp"
#include "qmemtest/error.hpp"
#include "qmemtest/rng.hpp"

namespace qmemtest {

namespace {

constexpr double kTMax = 1e4;  // us; fits pinned here are non-identifiable
constexpr int kMaxIterations = 200;

using ResidualFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LmOutcome {
  Eigen::VectorXd params;
  double cost = 0.0;  // 1/2 sum r^2
  bool converged = false;
};

Eigen::VectorXd clamp_to(const Eigen::VectorXd& p, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi) {
  return p.cwiseMax(lo).cwiseMin(hi);
}

// Damped least squares with box projection and a central-difference Jacobian.
LmOutcome levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p,
                              const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi, int m_residuals) {
  const int n = static_cast<int>(p.size());
  Eigen::VectorXd r(m_residuals), r_trial(m_residuals);
  Eigen::MatrixXd jac(m_residuals, n);
  Eigen::VectorXd rp(m_residuals), rm(m_residuals);

  p = clamp_to(p, lo, hi);
  fn(p, r);
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    for (int k = 0; k < n; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(p(k)));
      Eigen::VectorXd pp = p, pm = p;
      pp(k) += h;
      pm(k) -= h;
      fn(pp, rp);
      fn(pm, rm);
      jac.col(k) = (rp - rm) / (2.0 * h);
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;

    bool accepted = false;
    for (int tries = 0; tries < 25 && !accepted; ++tries) {
      Eigen::MatrixXd damped = jtj;
      for (int k = 0; k < n; ++k) {
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      }
      const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
      const Eigen::VectorXd trial = clamp_to(p + delta, lo, hi);
      fn(trial, r_trial);
      const double trial_cost = 0.5 * r_trial.squaredNorm();
      if (trial_cost < cost) {
        const double step = (trial - p).cwiseAbs().maxCoeff();
        const double drop = cost - trial_cost;
        p = trial;
        r = r_trial;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (step < 1e-10 * (1.0 + p.cwiseAbs().maxCoeff()) ||
            drop < 1e-14 * (1.0 + cost)) {
          converged = true;
        }
      } else {
        lambda *= 4.0;
        if (lambda > 1e12) break;
      }
    }
    if (!accepted || converged) {
      converged = converged || accepted;
      break;
    }
  }
  return {p, cost, converged};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Log-linear regression of ln(y) = ln(A) - tau/T over points with y above a
// floor. Returns {A, T} or defaults when degenerate.
std::pair<double, double> log_linear_init(std::span<const double> taus,
                                          std::span<const double> ys,
                                          double tau_span) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  double ymax = 0;
  for (double y : ys) ymax = std::max(ymax, y);
  const double floor = std::max(1e-6, 1e-3 * ymax);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] <= floor) continue;
    const double ly = std::log(ys[i]);
    sx += taus[i];
    sy += ly;
    sxx += taus[i] * taus[i];
    sxy += taus[i] * ly;
    ++m;
  }
  if (m < 2) return {ymax, tau_span};
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return {ymax, tau_span};
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  double t = slope < -1e-12 ? -1.0 / slope : kTMax;
  t = std::clamp(t, 1e-3, kTMax);
  return {std::clamp(std::exp(intercept), 0.0, 1.5), t};
}

}  // namespace

FitResult fit_exponential(const FidelitySeries& series) {
  if (series.points.size() < 4) {
    throw DataError("fit_exponential: need at least 4 points, got " +
                    std::to_string(series.points.size()));
  }
  const int m = static_cast<int>(series.points.size());
  std::vector<double> taus(m), fs(m);
  for (int i = 0; i < m; ++i) {
    taus[i] = series.points[i].tau_us;
    fs[i] = series.points[i].fidelity;
  }
  const double fmin = *std::min_element(fs.begin(), fs.end());
  const double fmax = *std::max_element(fs.begin(), fs.end());
  const double tau_span = taus.back() - taus.front();

  FitResult result;
  result.model = "exponential";

  std::vector<double> stderrs;
  for (const auto& p : series.points) stderrs.push_back(p.stderr);
  const double noise_scale = median(stderrs);
  if (fmax - fmin < std::max(1e-12, 2.0 * noise_scale * 1e-9)) {
    // Flat series: T is unconstrained. Pin it at the bound and flag.
    result.params = {{"A", 0.0}, {"T", kTMax}, {"C", (fmin + fmax) / 2.0}};
    result.residual_rms = 0.0;
    result.converged = false;
    result.n_starts_used = 0;
    return result;
  }

  std::vector<double> shifted(m);
  for (int i = 0; i < m; ++i) shifted[i] = fs[i] - fmin;
  auto [a0, t0] = log_linear_init(taus, shifted, std::max(tau_span, 1.0));

  const ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (int i = 0; i < m; ++i) {
      r(i) = p(0) * std::exp(-taus[i] / p(1)) + p(2) - fs[i];
    }
  };
  Eigen::VectorXd p0(3), lo(3), hi(3);
  p0 << std::max(a0, 0.05), t0, std::clamp(fmin, -0.1, 1.0);
  lo << 0.0, 1e-6, -0.1;
  hi << 1.5, kTMax, 1.0;

  const LmOutcome out = levenberg_marquardt(fn, p0, lo, hi, m);
  result.params = {{"A", out.params(0)}, {"T", out.params(1)}, {"C", out.params(2)}};
  result.residual_rms = std::sqrt(2.0 * out.cost / m);
  result.converged = out.converged && out.params(1) < 0.999 * kTMax;
  result.n_starts_used = 1;
  return result;
}

namespace {

// Power of the non-uniform discrete Fourier transform at angular frequency w.
double dtft_power(std::span<const double> taus, std::span<const double> z,
                  double w) {
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    acc += z[i] * std::exp(std::complex<double>(0.0, -w * taus[i]));
  }
  return std::norm(acc);
}

std::vector<double> spectral_peaks(std::span<const double> taus,
                                   std::span<const double> z, double w_max,
                                   int want) {
  constexpr int kGrid = 4096;
  const double w_lo = w_max / kGrid;
  std::vector<double> power(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    power[i] = dtft_power(taus, z, w_lo + (w_max - w_lo) * i / (kGrid - 1));
  }
  std::vector<std::pair<double, double>> maxima;  // (power, w)
  for (int i = 1; i + 1 < kGrid; ++i) {
    if (power[i] > power[i - 1] && power[i] >= power[i + 1]) {
      maxima.emplace_back(power[i], w_lo + (w_max - w_lo) * i / (kGrid - 1));
    }
  }
  std::sort(maxima.begin(), maxima.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  // enforce a minimal separation so one broad peak is not counted twice
  const double sep = (w_max - w_lo) / kGrid * 8.0;
  std::vector<double> peaks;
  for (const auto& [pw, w] : maxima) {
    bool close = false;
    for (double seen : peaks) {
      if (std::abs(seen - w) < sep) close = true;
    }
    if (!close) peaks.push_back(w);
    if (static_cast<int>(peaks.size()) >= want) break;
  }
  return peaks;
}

}  // namespace

FitResult fit_zz_oscillation(const FidelitySeries& series, int n_neighbors,
                             const ZzFitOptions& options) {
  if (n_neighbors < 0) {
    throw DataError("fit_zz_oscillation: n_neighbors must be >= 0");
  }
  if (n_neighbors == 0) {
    // Pure decay: fit A exp(-tau/T) + C to 2F - 1.
    FidelitySeries transformed = series;
    for (auto& p : transformed.points) {
      p.fidelity = 2.0 * p.fidelity - 1.0;
      p.stderr *= 2.0;
    }
    FitResult base = fit_exponential(transformed);
    FitResult result;
    result.model = "zz-oscillation";
    result.params = {{"T2", base.params.at("T")}};
    result.residual_rms = base.residual_rms;
    result.converged = base.converged;
    result.n_starts_used = base.n_starts_used;
    return result;
  }

  const std::size_t min_points = 4u * (n_neighbors + 1);
  if (series.points.size() < min_points) {
    throw DataError("fit_zz_oscillation: need at least " +
                    std::to_string(min_points) + " points for " +
                    std::to_string(n_neighbors) + " neighbors");
  }

  const int m = static_cast<int>(series.points.size());
  const int n_params = 1 + n_neighbors;
  std::vector<double> taus(m), fs(m), y(m);
  for (int i = 0; i < m; ++i) {
    taus[i] = series.points[i].tau_us;
    fs[i] = series.points[i].fidelity;
    y[i] = 2.0 * fs[i] - 1.0;
  }

  // Envelope estimate for detrending and the T2 start value.
  std::vector<double> absy(m);
  for (int i = 0; i < m; ++i) absy[i] = std::abs(y[i]);
  auto [env_a, t2_init] =
      log_linear_init(taus, absy, std::max(taus[m - 1] - taus[0], 1.0));
  (void)env_a;

  double min_dt = std::numeric_limits<double>::infinity();
  for (int i = 1; i < m; ++i) min_dt = std::min(min_dt, taus[i] - taus[i - 1]);
  const double w_max = std::numbers::pi / std::max(min_dt, 1e-6);

  std::vector<double> detrended(m);
  double mean = 0.0;
  for (int i = 0; i < m; ++i) {
    detrended[i] = y[i] / std::max(std::exp(-taus[i] / t2_init), 0.05);
    mean += detrended[i];
  }
  mean /= m;
  for (double& v : detrended) v -= mean;

  const std::vector<double> peaks =
      spectral_peaks(taus, detrended, w_max, std::max(6, 2 * n_neighbors + 2));

  // Candidate starts: direct peak reads, combination-frequency
  // reconstructions (a product of cosines has peaks at sums/differences),
  // then seeded jitter around the strongest read.
  std::vector<std::vector<double>> starts;
  auto peak_or = [&](std::size_t i, double fallback) {
    return i < peaks.size() ? peaks[i] : fallback;
  };
  const double w_default = w_max / 8.0;
  {
    std::vector<double> s;
    for (int k = 0; k < n_neighbors; ++k) {
      s.push_back(peak_or(k, w_default * (k + 1)) / 2.0);
    }
    starts.push_back(s);
  }
  if (n_neighbors == 2 && peaks.size() >= 2) {
    for (std::size_t i = 0; i < peaks.size() && starts.size() < 8; ++i) {
      for (std::size_t j = i + 1; j < peaks.size() && starts.size() < 8; ++j) {
        const double s = std::max(peaks[i], peaks[j]);
        const double d = std::min(peaks[i], peaks[j]);
        starts.push_back({(s + d) / 4.0, (s - d) / 4.0});
      }
    }
  }
  if (n_neighbors == 3 && peaks.size() >= 2) {
    for (std::size_t i = 0; i < peaks.size() && starts.size() < 10; ++i) {
      for (std::size_t j = 0; j < peaks.size() && starts.size() < 10; ++j) {
        if (i == j || peaks[j] <= peaks[i]) continue;
        // strongest component at 2*Omega_1, outer peak at 2(Omega_1+2*Omega_23)
        starts.push_back(
            {peaks[i] / 2.0, (peaks[j] - peaks[i]) / 4.0, (peaks[j] - peaks[i]) / 4.0});
      }
    }
  }
  std::mt19937_64 jitter_rng(mix_seed(options.seed, 0x5a5aULL));
  while (static_cast<int>(starts.size()) < options.max_starts) {
    std::vector<double> s = starts.front();
    for (double& w : s) w *= 0.85 + 0.3 * next_double(jitter_rng);
    starts.push_back(s);
  }
  if (static_cast<int>(starts.size()) > options.max_starts) {
    starts.resize(options.max_starts);
  }

  const auto model = [&](const Eigen::VectorXd& p, double tau) {
    double envelope = std::exp(-tau / p(0));
    for (int k = 0; k < n_neighbors; ++k) {
      envelope *= std::cos(2.0 * p(1 + k) * tau);
    }
    return 0.5 * (1.0 + envelope);
  };
  const ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (int i = 0; i < m; ++i) r(i) = model(p, taus[i]) - fs[i];
  };

  Eigen::VectorXd lo(n_params), hi(n_params);
  lo(0) = 1e-3;
  hi(0) = kTMax;
  for (int k = 0; k < n_neighbors; ++k) {
    lo(1 + k) = 0.0;
    hi(1 + k) = 0.75 * w_max;  // oscillation at 2*Omega must stay resolvable
  }

  LmOutcome best;
  best.cost = std::numeric_limits<double>::infinity();
  int used = 0;
  for (const auto& s : starts) {
    Eigen::VectorXd p0(n_params);
    p0(0) = std::clamp(t2_init, 1.0, kTMax);
    for (int k = 0; k < n_neighbors; ++k) p0(1 + k) = s[k];
    const LmOutcome out = levenberg_marquardt(fn, p0, lo, hi, m);
    ++used;
    if (out.cost < best.cost) best = out;
  }

  std::vector<double> omegas;
  for (int k = 0; k < n_neighbors; ++k) omegas.push_back(best.params(1 + k));
  std::sort(omegas.rbegin(), omegas.rend());

  FitResult result;
  result.model = "zz-oscillation";
  result.params["T2"] = best.params(0);
  for (int k = 0; k < n_neighbors; ++k) {
    result.params["omega_" + std::to_string(k + 1)] =
        omegas[k] / (2.0 * std::numbers::pi);  // report in 2pi*MHz
  }
  result.residual_rms = std::sqrt(2.0 * best.cost / m);
  result.converged = best.converged;
  result.n_starts_used = used;

  if (options.use_master_equation) {
    // Parity mode: polish the closed-form solution against the integrated
    // master equation. The model surfaces agree to ~1e-4, so this is a
    // refinement step, not a separate search.
    const ResidualFn me_fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
      for (int i = 0; i < m; ++i) {
        const int k = n_neighbors + 1;
        std::vector<CollapseOp> ops;
        for (int q = 0; q < k; ++q) {
          ops.push_back({static_cast<std::uint32_t>(q), CollapseKind::Dephasing,
                         1.0 / (2.0 * p(0))});
        }
        std::vector<QubitId> cluster(k);
        std::map<QubitId, int> no_frozen;
        for (int q = 0; q < k; ++q) cluster[q] = q;
        DeviceModel star;
        star.qubits.resize(k);
        for (int nb = 0; nb < n_neighbors; ++nb) {
          star.coupling_rad_per_us[{0, static_cast<QubitId>(nb + 1)}] = p(1 + nb);
        }
        const Eigen::MatrixXcd h = build_zz_hamiltonian(star, cluster, no_frozen);

        ClusterState state;
        state.qubits = cluster;
        state.rho = Eigen::MatrixXcd::Zero(1 << k, 1 << k);
        state.rho(0, 0) = 1.0;
        for (int q = 0; q < k; ++q) {
          state.rho = apply_gate(state.rho, h_gate(q));
        }
        std::vector<ScheduleItem> schedule;
        schedule.push_back({taus[i] / 2.0, std::nullopt});
        for (int q = 0; q < k; ++q) {
          schedule.push_back({0.0, x_gate(q)});
        }
        schedule.push_back({taus[i] / 2.0, std::nullopt});
        for (int q = 0; q < k; ++q) {
          schedule.push_back({0.0, h_gate(q)});
        }
        state = evolve_delay(std::move(state), schedule, h, ops);
        double p0 = 0.0;
        for (int idx = 0; idx < (1 << k); ++idx) {
          if (!(idx & 1)) p0 += state.rho(idx, idx).real();
        }
        r(i) = p0 - fs[i];
      }
    };
    Eigen::VectorXd p0(n_params);
    p0(0) = best.params(0);
    for (int k = 0; k < n_neighbors; ++k) p0(1 + k) = omegas[k];
    const LmOutcome refined = levenberg_marquardt(me_fn, p0, lo, hi, m);
    result.params["T2"] = refined.params(0);
    std::vector<double> w2;
    for (int k = 0; k < n_neighbors; ++k) w2.push_back(refined.params(1 + k));
    std::sort(w2.rbegin(), w2.rend());
    for (int k = 0; k < n_neighbors; ++k) {
      result.params["omega_" + std::to_string(k + 1)] =
          w2[k] / (2.0 * std::numbers::pi);
    }
    result.residual_rms = std::sqrt(2.0 * refined.cost / m);
    result.converged = refined.converged;
    ++result.n_starts_used;
  }
  return result;
}

}  // namespace qmemtest
