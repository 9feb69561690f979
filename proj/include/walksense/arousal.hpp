#pragma once
// Tonic/phasic decomposition of the smoothed EDA signal and per-window
// counting of significant skin-conductance responses.

#include <utility>
#include <vector>

#include "walksense/eda_prep.hpp"
#include "walksense/types.hpp"

namespace walksense {

struct DecompositionFailed : Error {
  using Error::Error;
};

struct Decomposition {
  std::vector<double> t;       // sample timestamps, seconds
  std::vector<double> tonic;   // SCL, uS
  std::vector<double> driver;  // phasic SCR driver, uS/s, nonnegative
  std::vector<double> phasic;  // driver convolved with the IRF, uS
  double tau1 = 0.0;           // slow IRF time constant, s (tau1 > tau2)
  double tau2 = 0.0;
  double residual_rmse = 0.0;  // rms of input - (tonic + phasic)
};

struct ScrEvent {
  double onset = 0.0;      // seconds, preceding trough
  double peak_time = 0.0;  // seconds, peak_time >= onset
  double amplitude = 0.0;  // trough-to-peak, uS
};

struct CdaParams {
  double tau1_init = 2.0;  // s
  double tau2_init = 0.75;
  int optim_restarts = 2;       // optimizer runs beyond the initial one
  double tonic_sigma_s = 0.2;   // Gaussian smoothing of the tonic estimate
  double driver_sigma_s = 0.2;  // Gaussian smoothing of the raw driver
  double rmse_cap = 0.3;        // uS; above this the decomposition failed
  double min_duration_s = 60.0;
};

struct ScrParams {
  double amp_threshold = 0.01;  // uS
  double rise_min_s = 1.0;      // admissible trough-to-peak rise-time band
  double rise_max_s = 3.7;
  double merge_eps = 0.003;  // uS; collapse smaller wiggles before detection
};

enum class HaBoundary { ge6, gt6 };

// Bateman impulse response h(t) = exp(-t/tau1) - exp(-t/tau2), discretized at
// dt and applied as driver (*) h * dt. Runs as a pair of first-order filters.
std::vector<double> convolve_bateman(const std::vector<double>& driver,
                                     double tau1, double tau2, double dt);

// Peak value of the continuous Bateman IRF; scales driver impulses to a
// desired skin-conductance amplitude.
double bateman_peak_value(double tau1, double tau2);

// Continuous decomposition: nonnegative deconvolution against the Bateman
// IRF with the tonic level interpolated through driver-quiet local minima.
// Time constants start from (tau1_init, tau2_init) and are refined by
// derivative-free minimization of residual rmse plus a negativity penalty.
Decomposition decompose(const SignalStream& eda, const CdaParams& params = {});

// Local maxima of the reconvolved phasic component with trough-to-peak
// amplitude >= amp_threshold and rise time inside the admissible band
// (widened by half a sample step to absorb grid quantization).
std::vector<ScrEvent> detect_scr(const Decomposition& dec, const ScrParams& params = {});

// Events whose onset lies in [window.start, window.end).
int count_nscr(const std::vector<ScrEvent>& events, const TimeWindow& window);

// nscr == 0 -> (N, N); otherwise A with LA/HA split at six responses.
// HaBoundary::ge6 puts nscr == 6 in HA, gt6 puts it in LA.
std::pair<BinaryLabel, MulticlassLabel> label(int nscr,
                                              HaBoundary boundary = HaBoundary::ge6);

}  // namespace walksense
