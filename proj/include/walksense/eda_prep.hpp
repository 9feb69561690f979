#pragma once
// EDA quality control, one-level stationary Haar wavelet smoothing and
// truncation of unwanted signal fragments. The EDA stream stays at its
// native 4 Hz throughout.

#include <vector>

#include "walksense/types.hpp"

namespace walksense {

enum class ProfileVerdict { Clean, Type1Error, Type2Error };

const char* verdict_name(ProfileVerdict v);

struct ProfileClass {
  ProfileVerdict verdict = ProfileVerdict::Clean;
  // Evidence behind the verdict, all in [0,1].
  double two_level_fraction = 0.0;  // mass near the two dominant distinct levels
  double zero_fraction = 0.0;       // samples at <= 1e-6 uS
  double loss_fraction = 0.0;       // missing samples vs the nominal-rate grid
};

struct QcThresholds {
  double two_level = 0.95;
  double zero = 0.50;
  double loss = 0.30;
};

// Type-1: a step-like signal toggling between two levels, or heavy sensor
// loss. Type-2: majority-zero values with otherwise normal fluctuation.
ProfileClass classify_profile(const SignalStream& eda, const QcThresholds& thr = {});

struct WaveletCoeffs {
  std::vector<double> approx;
  std::vector<double> detail;
  int level = 1;
};

// Non-decimated one-level Haar transform with periodic wrap:
//   approx[i] = (x[i] + x[i+1]) / sqrt(2)
//   detail[i] = (x[i] - x[i+1]) / sqrt(2)
WaveletCoeffs swt_haar(const std::vector<double>& signal);

enum class ThresholdMode { clamp, zero_above };

// Suppresses large detail coefficients. `clamp` pins them to +-theta (the
// default reading of cutting off values beyond the threshold); `zero_above`
// zeroes them instead.
WaveletCoeffs clamp_detail(WaveletCoeffs coeffs, double theta = 0.001,
                           ThresholdMode mode = ThresholdMode::clamp);

// Exact inverse of swt_haar: averages the two shift reconstructions.
// inverse_swt(swt_haar(x)) == x for any length >= 2 signal.
std::vector<double> inverse_swt(const WaveletCoeffs& coeffs);

// swt -> clamp(theta) -> inverse, on the stream's values.
SignalStream smooth_swt(const SignalStream& eda, double theta = 0.001,
                        ThresholdMode mode = ThresholdMode::clamp);

struct TruncationMarks {
  std::vector<std::pair<double, double>> keep_intervals;  // disjoint, ordered
};

// Keeps samples whose timestamps fall inside any keep interval (closed
// bounds); original timestamps are preserved.
SignalStream truncate(const SignalStream& signal, const TruncationMarks& marks);

// Marks file: lines of `keep,start_s,end_s`.
TruncationMarks read_marks(const std::string& path);

}  // namespace walksense
