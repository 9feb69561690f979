#include "walksense/arousal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace walksense {

namespace {

std::vector<double> gaussian_smooth(const std::vector<double>& x, double sigma_samples) {
  if (sigma_samples <= 1e-9 || x.size() < 2) return x;
  const int n = static_cast<int>(x.size());
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma_samples)));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k)
    kernel[k + radius] = std::exp(-0.5 * (k / sigma_samples) * (k / sigma_samples));
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0, wsum = 0.0;
    const int lo = std::max(-radius, -i);
    const int hi = std::min(radius, n - 1 - i);
    for (int k = lo; k <= hi; ++k) {
      acc += kernel[k + radius] * x[i + k];
      wsum += kernel[k + radius];
    }
    out[i] = acc / wsum;
  }
  return out;
}

// Exact inverse of convolve_bateman for sequences with steady pre-history:
// q[i] = (z[i+1] - (r1+r2) z[i] + r1 r2 z[i-1]) / ((r1-r2) dt).
std::vector<double> deconvolve(const std::vector<double>& z, double r1, double r2,
                               double dt) {
  const std::size_t n = z.size();
  std::vector<double> q(n, 0.0);
  if (n < 2) return q;
  const double denom = (r1 - r2) * dt;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double zm1 = i == 0 ? z[0] : z[i - 1];
    q[i] = (z[i + 1] - (r1 + r2) * z[i] + r1 * r2 * zm1) / denom;
  }
  q[n - 1] = q[n - 2];
  return q;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

// Baseline through local minima of the signal in driver-quiet stretches,
// then Gaussian-smoothed.
std::vector<double> estimate_tonic(const std::vector<double>& y, double dt,
                                   double tau1, double tau2, double sigma_s) {
  const int n = static_cast<int>(y.size());
  const double r1 = std::exp(-dt / tau1);
  const double r2 = std::exp(-dt / tau2);
  const std::vector<double> u = deconvolve(y, r1, r2, dt);
  const std::vector<double> us = gaussian_smooth(u, 0.5 / dt);
  const double m = median(us);
  std::vector<double> dev(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) dev[i] = std::abs(us[i] - m);
  const double quiet_thr = m + 3.0 * median(dev) + 1e-12;

  std::vector<std::pair<int, double>> knots;
  for (int i = 0; i < n; ++i) {
    if (us[i] > quiet_thr) continue;
    const bool left_ok = i == 0 || y[i] <= y[i - 1];
    const bool right_ok = i == n - 1 || y[i] <= y[i + 1];
    if (left_ok && right_ok) knots.emplace_back(i, y[i]);
  }
  if (knots.empty()) {
    const int i0 =
        static_cast<int>(std::min_element(y.begin(), y.end()) - y.begin());
    knots.emplace_back(i0, y[i0]);
  }

  std::vector<double> tonic(n);
  for (int i = 0; i <= knots.front().first; ++i) tonic[i] = knots.front().second;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const auto& [i0, v0] = knots[k];
    const auto& [i1, v1] = knots[k + 1];
    for (int i = i0; i <= i1; ++i)
      tonic[i] = i1 == i0 ? v1 : v0 + (v1 - v0) * (i - i0) / double(i1 - i0);
  }
  for (int i = knots.back().first; i < n; ++i) tonic[i] = knots.back().second;
  return gaussian_smooth(tonic, sigma_s / dt);
}

struct CdaFit {
  std::vector<double> tonic;
  std::vector<double> driver;
  std::vector<double> phasic;
  double rmse = 0.0;
  double negativity = 0.0;  // rms of the clipped-away negative driver part
};

CdaFit evaluate_cda(const std::vector<double>& y, double dt, double tau1, double tau2,
                    const CdaParams& params) {
  CdaFit fit;
  fit.tonic = estimate_tonic(y, dt, tau1, tau2, params.tonic_sigma_s);
  const std::size_t n = y.size();
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = y[i] - fit.tonic[i];
  const double r1 = std::exp(-dt / tau1);
  const double r2 = std::exp(-dt / tau2);
  std::vector<double> q = gaussian_smooth(deconvolve(z, r1, r2, dt),
                                          params.driver_sigma_s / dt);
  double neg2 = 0.0;
  for (double& qi : q) {
    if (qi < 0.0) {
      neg2 += qi * qi;
      qi = 0.0;
    }
  }
  fit.negativity = std::sqrt(neg2 / n);
  fit.driver = std::move(q);
  fit.phasic = convolve_bateman(fit.driver, tau1, tau2, dt);
  double r2sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = z[i] - fit.phasic[i];
    r2sum += r * r;
  }
  fit.rmse = std::sqrt(r2sum / n);
  return fit;
}

using Objective = std::function<double(const std::array<double, 2>&)>;

struct NmResult {
  std::array<double, 2> x{};
  double f = std::numeric_limits<double>::infinity();
};

NmResult nelder_mead(const Objective& f, std::array<double, 2> x0, double step,
                     int max_iter) {
  std::array<std::array<double, 2>, 3> v = {
      x0, {x0[0] + step, x0[1]}, {x0[0], x0[1] + step}};
  std::array<double, 3> fv = {f(v[0]), f(v[1]), f(v[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> ord = {0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int b = ord[0], s = ord[1], w = ord[2];
    if (fv[w] - fv[b] < 1e-12) break;
    std::array<double, 2> c = {0.5 * (v[b][0] + v[s][0]), 0.5 * (v[b][1] + v[s][1])};
    auto at = [&](double coef) {
      return std::array<double, 2>{c[0] + coef * (c[0] - v[w][0]),
                                   c[1] + coef * (c[1] - v[w][1])};
    };
    const std::array<double, 2> xr = at(1.0);
    const double fr = f(xr);
    if (fr < fv[b]) {
      const std::array<double, 2> xe = at(2.0);
      const double fe = f(xe);
      if (fe < fr) {
        v[w] = xe;
        fv[w] = fe;
      } else {
        v[w] = xr;
        fv[w] = fr;
      }
    } else if (fr < fv[s]) {
      v[w] = xr;
      fv[w] = fr;
    } else {
      const std::array<double, 2> xc = at(-0.5);
      const double fc = f(xc);
      if (fc < fv[w]) {
        v[w] = xc;
        fv[w] = fc;
      } else {
        for (int k : {s, w}) {
          v[k] = {0.5 * (v[k][0] + v[b][0]), 0.5 * (v[k][1] + v[b][1])};
          fv[k] = f(v[k]);
        }
      }
    }
  }
  NmResult best;
  for (int k = 0; k < 3; ++k) {
    if (fv[k] < best.f) {
      best.f = fv[k];
      best.x = v[k];
    }
  }
  return best;
}

}  // namespace

std::vector<double> convolve_bateman(const std::vector<double>& driver, double tau1,
                                     double tau2, double dt) {
  const std::size_t n = driver.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const double r1 = std::exp(-dt / tau1);
  const double r2 = std::exp(-dt / tau2);
  double a = driver[0] / (1.0 - r1);  // steady pre-history
  double b = driver[0] / (1.0 - r2);
  out[0] = dt * (a - b);
  for (std::size_t i = 1; i < n; ++i) {
    a = driver[i] + r1 * a;
    b = driver[i] + r2 * b;
    out[i] = dt * (a - b);
  }
  return out;
}

double bateman_peak_value(double tau1, double tau2) {
  const double t_peak = std::log(tau1 / tau2) * tau1 * tau2 / (tau1 - tau2);
  return std::exp(-t_peak / tau1) - std::exp(-t_peak / tau2);
}

Decomposition decompose(const SignalStream& eda, const CdaParams& params) {
  if (eda.size() < 2 || eda.duration() < params.min_duration_s)
    throw TooShort("decompose: need at least " + std::to_string(params.min_duration_s) +
                   " s of EDA signal");
  if (eda.nominal_hz <= 0.0) throw Error("decompose: stream has no sampling rate");
  const double dt = 1.0 / eda.nominal_hz;
  std::vector<double> y;
  y.reserve(eda.size());
  for (const Sample& s : eda.samples) y.push_back(s.value);

  const auto objective = [&](const std::array<double, 2>& p) -> double {
    const double tau1 = std::exp(p[0]);
    const double tau2 = std::exp(p[1]);
    if (!(tau1 > 1.05 * tau2) || tau1 > 30.0 || tau2 < 0.05)
      return 1e6 + std::abs(p[0]) + std::abs(p[1]);
    const CdaFit fit = evaluate_cda(y, dt, tau1, tau2, params);
    return fit.rmse + fit.negativity;
  };

  std::array<double, 2> start = {std::log(params.tau1_init), std::log(params.tau2_init)};
  NmResult best = nelder_mead(objective, start, 0.3, 80);
  for (int r = 0; r < params.optim_restarts; ++r) {
    const NmResult refined = nelder_mead(objective, best.x, 0.15, 60);
    if (refined.f < best.f) best = refined;
  }

  const double tau1 = std::exp(best.x[0]);
  const double tau2 = std::exp(best.x[1]);
  CdaFit fit = evaluate_cda(y, dt, tau1, tau2, params);
  if (fit.rmse > params.rmse_cap)
    throw DecompositionFailed("decompose: residual rmse " + std::to_string(fit.rmse) +
                              " above cap " + std::to_string(params.rmse_cap));

  Decomposition dec;
  dec.t.reserve(eda.size());
  for (const Sample& s : eda.samples) dec.t.push_back(s.t);
  dec.tonic = std::move(fit.tonic);
  dec.driver = std::move(fit.driver);
  dec.phasic = std::move(fit.phasic);
  dec.tau1 = tau1;
  dec.tau2 = tau2;
  dec.residual_rmse = fit.rmse;
  return dec;
}

std::vector<ScrEvent> detect_scr(const Decomposition& dec, const ScrParams& params) {
  const std::vector<double>& x = dec.phasic;
  const int n = static_cast<int>(x.size());
  std::vector<ScrEvent> events;
  if (n < 3) return events;
  const double dt = (dec.t.back() - dec.t.front()) / (n - 1);
  const double slack = 0.5 * dt;

  // Alternating extrema; plateaus resolve to their last point. A trailing
  // unfinished rise is not a confirmed peak and is dropped.
  struct Ext {
    int idx;
    bool is_max;
  };
  std::vector<Ext> exts;
  int dir = 0;
  int prev = 0;
  for (int i = 1; i < n; ++i) {
    if (x[i] > x[prev]) {
      if (dir < 0) exts.push_back({prev, false});
      dir = 1;
      prev = i;
    } else if (x[i] < x[prev]) {
      if (dir > 0) exts.push_back({prev, true});
      dir = -1;
      prev = i;
    } else {
      prev = i;
    }
  }
  if (!exts.empty() && exts.front().is_max) exts.insert(exts.begin(), {0, false});

  // Collapse adjacent extremum pairs with sub-noise amplitude, smallest
  // first, so detection sees the envelope rather than residual wiggles.
  while (exts.size() >= 2) {
    double best_amp = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k + 1 < exts.size(); ++k) {
      const double amp = std::abs(x[exts[k + 1].idx] - x[exts[k].idx]);
      if (amp < best_amp) {
        best_amp = amp;
        best_k = k;
      }
    }
    if (best_amp >= params.merge_eps) break;
    exts.erase(exts.begin() + best_k, exts.begin() + best_k + 2);
  }

  for (std::size_t k = 1; k < exts.size(); ++k) {
    if (!exts[k].is_max || exts[k - 1].is_max) continue;
    const int trough = exts[k - 1].idx;
    const int peak = exts[k].idx;
    const double amplitude = x[peak] - x[trough];
    if (amplitude < params.amp_threshold) continue;
    // Rise time measured from where the ascent leaves the trough level, so a
    // long flat run before the rise does not inflate it.
    const double level = x[trough] + 0.05 * amplitude;
    int onset = trough;
    for (int j = peak; j >= trough; --j) {
      if (x[j] <= level) {
        onset = j;
        break;
      }
    }
    const double rise = dec.t[peak] - dec.t[onset];
    if (rise < params.rise_min_s - slack || rise > params.rise_max_s + slack) continue;
    events.push_back({dec.t[onset], dec.t[peak], amplitude});
  }
  return events;
}

int count_nscr(const std::vector<ScrEvent>& events, const TimeWindow& window) {
  int count = 0;
  for (const ScrEvent& e : events)
    if (e.onset >= window.start && e.onset < window.end) ++count;
  return count;
}

std::pair<BinaryLabel, MulticlassLabel> label(int nscr, HaBoundary boundary) {
  if (nscr <= 0) return {BinaryLabel::N, MulticlassLabel::N};
  const int cut = boundary == HaBoundary::ge6 ? 6 : 7;
  return {BinaryLabel::A, nscr >= cut ? MulticlassLabel::HA : MulticlassLabel::LA};
}

}  // namespace walksense
