#include "walksense/eda_prep.hpp"

#include "walksense/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace walksense {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kZeroEps = 1e-6;
constexpr double kLevelBin = 0.01;   // uS, quantization for level counting
constexpr double kLevelGap = 0.02;   // uS, minimum separation of the two levels

}  // namespace

const char* verdict_name(ProfileVerdict v) {
  switch (v) {
    case ProfileVerdict::Clean: return "clean";
    case ProfileVerdict::Type1Error: return "type1";
    case ProfileVerdict::Type2Error: return "type2";
  }
  return "clean";
}

ProfileClass classify_profile(const SignalStream& eda, const QcThresholds& thr) {
  if (eda.empty()) throw EmptyStream("classify_profile: empty EDA stream");
  const auto& s = eda.samples;
  const double n = static_cast<double>(s.size());

  ProfileClass out;

  std::size_t zeros = 0;
  std::map<long long, std::size_t> levels;
  for (const Sample& smp : s) {
    if (std::abs(smp.value) <= kZeroEps) ++zeros;
    levels[llround(smp.value / kLevelBin)]++;
  }
  out.zero_fraction = zeros / n;

  // Mass within +-0.01 uS of two genuinely distinct plateaus: the dominant
  // quantized level plus the strongest level far enough away from it. A flat
  // or single-plateau signal scores 0 here.
  std::vector<std::pair<std::size_t, long long>> by_count;
  by_count.reserve(levels.size());
  for (const auto& [lvl, cnt] : levels) by_count.emplace_back(cnt, lvl);
  std::sort(by_count.rbegin(), by_count.rend());
  if (by_count.size() >= 2) {
    const long long top = by_count[0].second;
    long long second = 0;
    bool found = false;
    for (std::size_t i = 1; i < by_count.size(); ++i) {
      if (std::abs(by_count[i].second - top) * kLevelBin > kLevelGap) {
        second = by_count[i].second;
        found = true;
        break;
      }
    }
    if (found) {
      std::size_t near = 0;
      for (const auto& [lvl, cnt] : levels)
        if (std::abs(lvl - top) <= 1 || std::abs(lvl - second) <= 1) near += cnt;
      out.two_level_fraction = near / n;
    }
  }

  const double span = s.back().t - s.front().t;
  const double expected = std::round(span * eda.nominal_hz) + 1.0;
  out.loss_fraction = std::max(0.0, 1.0 - n / expected);

  if (out.two_level_fraction >= thr.two_level || out.loss_fraction >= thr.loss)
    out.verdict = ProfileVerdict::Type1Error;
  else if (out.zero_fraction >= thr.zero)
    out.verdict = ProfileVerdict::Type2Error;
  else
    out.verdict = ProfileVerdict::Clean;
  return out;
}

WaveletCoeffs swt_haar(const std::vector<double>& signal) {
  const std::size_t n = signal.size();
  if (n < 2) throw TooShort("swt_haar: need at least 2 samples");
  WaveletCoeffs c;
  c.approx.resize(n);
  c.detail.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = signal[i];
    const double x1 = signal[(i + 1) % n];  // periodic wrap
    c.approx[i] = (x0 + x1) / kSqrt2;
    c.detail[i] = (x0 - x1) / kSqrt2;
  }
  return c;
}

WaveletCoeffs clamp_detail(WaveletCoeffs coeffs, double theta, ThresholdMode mode) {
  for (double& d : coeffs.detail) {
    if (std::abs(d) <= theta) continue;
    if (mode == ThresholdMode::clamp)
      d = d > 0 ? theta : -theta;
    else
      d = 0.0;
  }
  return coeffs;
}

std::vector<double> inverse_swt(const WaveletCoeffs& coeffs) {
  const std::size_t n = coeffs.approx.size();
  if (n != coeffs.detail.size())
    throw LengthMismatch("inverse_swt: approx/detail length mismatch");
  if (n < 2) throw TooShort("inverse_swt: need at least 2 coefficients");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = (i + n - 1) % n;
    // Average of the reconstruction from pair (i, i+1) and pair (i-1, i).
    x[i] = (coeffs.approx[i] + coeffs.detail[i] + coeffs.approx[p] - coeffs.detail[p]) /
           (2.0 * kSqrt2);
  }
  return x;
}

SignalStream smooth_swt(const SignalStream& eda, double theta, ThresholdMode mode) {
  if (eda.empty()) throw EmptyStream("smooth_swt: empty EDA stream");
  std::vector<double> values;
  values.reserve(eda.size());
  for (const Sample& s : eda.samples) values.push_back(s.value);
  const std::vector<double> smoothed =
      inverse_swt(clamp_detail(swt_haar(values), theta, mode));
  SignalStream out = eda;
  for (std::size_t i = 0; i < smoothed.size(); ++i) out.samples[i].value = smoothed[i];
  return out;
}

SignalStream truncate(const SignalStream& signal, const TruncationMarks& marks) {
  SignalStream out;
  out.participant_id = signal.participant_id;
  out.channel = signal.channel;
  out.nominal_hz = signal.nominal_hz;
  for (const Sample& s : signal.samples) {
    for (const auto& [a, b] : marks.keep_intervals) {
      if (s.t >= a && s.t <= b) {
        out.samples.push_back(s);
        break;
      }
    }
  }
  if (out.samples.empty())
    throw EmptyResult("truncate: no samples inside the keep intervals");
  return out;
}

TruncationMarks read_marks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("read_marks: cannot open " + path);
  TruncationMarks marks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kind, a_s, b_s;
    if (!std::getline(ss, kind, ',') || !std::getline(ss, a_s, ',') ||
        !std::getline(ss, b_s, ','))
      throw MalformedRow("read_marks: " + path + ":" + std::to_string(lineno) +
                         ": expected keep,start_s,end_s");
    if (kind == "kind" || kind == "keep_kind") continue;  // header
    if (kind != "keep")
      throw MalformedRow("read_marks: " + path + ":" + std::to_string(lineno) +
                         ": unknown mark kind '" + kind + "'");
    try {
      const double a = std::stod(a_s);
      const double b = std::stod(b_s);
      if (!(a <= b)) throw std::invalid_argument("interval order");
      marks.keep_intervals.emplace_back(a, b);
    } catch (const std::exception&) {
      throw MalformedRow("read_marks: " + path + ":" + std::to_string(lineno) +
                         ": bad interval bounds");
    }
  }
  std::sort(marks.keep_intervals.begin(), marks.keep_intervals.end());
  return marks;
}

}  // namespace walksense
