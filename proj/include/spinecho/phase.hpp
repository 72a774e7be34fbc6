#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spinecho/neural.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

/// 40 samples before + 40 after the echo maximum, per channel.
inline constexpr int kPhaseWindowSamples = 80;

struct EchoEdgeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoEchoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric I/Q slice around the I-channel echo maximum. Sample k sits at
/// absolute time center_time_ns + (k - 40) * dt.
struct PhaseWindow {
  Eigen::VectorXd i_window;
  Eigen::VectorXd q_window;
  double center_time_ns = 0.0;
};

/// Locates the echo on the moving-RMS envelope of the I channel (one carrier
/// period of smoothing, peak position refined by an above-half-height
/// centroid) and slices 40+40 samples around it.
///
/// Throws EchoEdgeError when the maximum is within 40 samples of either edge
/// and NoEchoError when no envelope peak rises above 3x the noise floor.
PhaseWindow extract_echo_window(const IQTrace& trace, double carrier_mhz = 90.0);

/// Reference phase from quadrature demodulation: both channels are mixed with
/// the carrier, averaged over an integer number of carrier periods, and the
/// averaged pair is folded into atan2. Returns degrees in [0, 360).
double oracle_phase(const PhaseWindow& window, double carrier_mhz, double dt_ns);

/// Network input: both channels divided by their joint maximum absolute value
/// (preserving the I/Q amplitude ratio) and concatenated.
Eigen::VectorXd phase_input_vector(const PhaseWindow& window);

/// Decodes the regressor's (cos, sin) output to degrees in [0, 360).
double predict_phase(const DenseNetwork& net, const PhaseWindow& window);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least squares on the greedily unwrapped response (wraps larger than 180
/// degrees corrected before fitting).
LinearFit circular_linear_fit(const std::vector<double>& x_deg, const std::vector<double>& y_deg);

struct SweepResult {
  std::vector<double> input_phases_deg;
  std::vector<double> predicted_deg;  ///< network output, in [0, 360)
  std::vector<double> oracle_deg;     ///< quadrature-derived expectation in the same convention
  double slope = 0.0;
  double period_deg = 0.0;
  double bias_deg = 0.0;  ///< circular mean of (predicted - nominal), in (-180, 180]
};

/// Sweeps the pi/2-pulse phase (pi-pulse phase fixed to zero), optionally with
/// an added initialization bias that the fit should recover.
SweepResult sweep_pi2(const DenseNetwork& net, const std::vector<double>& phases_deg,
                      double phi_bias_deg, const HahnTiming& timing, const SignalModel& model,
                      std::uint64_t rng_seed);

/// Sweeps the pi-pulse phase (pi/2-pulse phase fixed to zero). The fitted
/// slope has twice the magnitude and the opposite sign of the pi/2 sweep, so
/// the oscillation period is halved.
SweepResult sweep_pi(const DenseNetwork& net, const std::vector<double>& phases_deg,
                     const HahnTiming& timing, const SignalModel& model, std::uint64_t rng_seed);

/// Mean absolute angular error with wrap-aware distances, in [0, 180].
double mean_abs_angular_error_deg(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace spinecho
