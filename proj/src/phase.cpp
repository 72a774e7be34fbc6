#include "spinecho/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spinecho/dsp.hpp"
#include "spinecho/echo_sim.hpp"
#include "spinecho/rng.hpp"

namespace spinecho {

namespace {

double median(Eigen::VectorXd v) {
  std::nth_element(v.data(), v.data() + v.size() / 2, v.data() + v.size());
  return v[v.size() / 2];
}

constexpr double kHalfHeightLevel = 0.60653065971263342;  // exp(-1/2)

}  // namespace

PhaseWindow extract_echo_window(const IQTrace& trace, double carrier_mhz) {
  const auto n = trace.i_samples.size();
  if (n != trace.q_samples.size() || n == 0) {
    throw std::invalid_argument("extract_echo_window: malformed IQ trace");
  }
  if (!(carrier_mhz > 0.0)) throw std::invalid_argument("extract_echo_window: bad carrier");

  const int rms_window =
      std::max(3, static_cast<int>(std::lround(1.0 / (carrier_mhz * 1e-3 * trace.dt_ns))));
  const Eigen::VectorXd env = moving_rms(trace.i_samples, rms_window);

  Eigen::Index peak_idx = 0;
  const double peak = env.maxCoeff(&peak_idx);
  const double floor = median(env);
  if (!(peak > 3.0 * floor) || !(peak > 0.0)) {
    throw NoEchoError("extract_echo_window: no echo above 3x the noise floor");
  }

  // Centroid of the contiguous region above the half-height level; a raw
  // argmax on the smoothed envelope jitters by several samples at working SNR.
  const double level = floor + kHalfHeightLevel * (peak - floor);
  Eigen::Index lo = peak_idx;
  while (lo > 0 && env[lo - 1] >= level) --lo;
  Eigen::Index hi = peak_idx;
  while (hi + 1 < n && env[hi + 1] >= level) ++hi;
  double wsum = 0.0, wtsum = 0.0;
  for (Eigen::Index k = lo; k <= hi; ++k) {
    const double w = env[k] - level;
    wsum += w;
    wtsum += w * static_cast<double>(k);
  }
  const auto center =
      wsum > 0.0 ? static_cast<Eigen::Index>(std::llround(wtsum / wsum)) : peak_idx;

  const int half = kPhaseWindowSamples / 2;
  if (center < half || center > n - 1 - half) {
    throw EchoEdgeError("extract_echo_window: echo maximum within 40 samples of a trace edge");
  }

  PhaseWindow window;
  window.i_window = trace.i_samples.segment(center - half, kPhaseWindowSamples);
  window.q_window = trace.q_samples.segment(center - half, kPhaseWindowSamples);
  window.center_time_ns = trace.time_at(center);
  return window;
}

double oracle_phase(const PhaseWindow& window, double carrier_mhz, double dt_ns) {
  const auto n = window.i_window.size();
  if (n != window.q_window.size() || n < 2) {
    throw std::invalid_argument("oracle_phase: malformed window");
  }
  if (!(carrier_mhz > 0.0) || !(dt_ns > 0.0)) {
    throw std::invalid_argument("oracle_phase: carrier and dt must be positive");
  }
  const double cycles_per_sample = carrier_mhz * 1e-3 * dt_ns;
  const double samples_per_period = 1.0 / cycles_per_sample;
  if (samples_per_period < 2.0) {
    throw std::invalid_argument("oracle_phase: carrier period not resolvable at dt");
  }
  const auto n_periods = static_cast<Eigen::Index>(
      std::floor(static_cast<double>(n) * cycles_per_sample));
  if (n_periods < 1) {
    throw std::invalid_argument("oracle_phase: window shorter than one carrier period");
  }
  const auto len = std::min<Eigen::Index>(
      n, static_cast<Eigen::Index>(std::llround(static_cast<double>(n_periods) * samples_per_period)));
  const auto start = (n - len) / 2;

  const double omega = 2.0 * std::numbers::pi * carrier_mhz * 1e-3;
  const int half = kPhaseWindowSamples / 2;
  double x = 0.0, y = 0.0;
  for (Eigen::Index k = start; k < start + len; ++k) {
    // Reference runs on absolute time so the result does not depend on where
    // the window was cut.
    const double t = window.center_time_ns + static_cast<double>(k - half) * dt_ns;
    const double c = std::cos(omega * t);
    const double s = std::sin(omega * t);
    x += window.i_window[k] * c + window.q_window[k] * s;
    y += window.q_window[k] * c - window.i_window[k] * s;
  }
  return wrap_deg(rad_to_deg(std::atan2(y, x)));
}

Eigen::VectorXd phase_input_vector(const PhaseWindow& window) {
  const auto n = window.i_window.size();
  if (n != window.q_window.size() || n != kPhaseWindowSamples) {
    throw std::invalid_argument("phase_input_vector: window must hold 80 samples per channel");
  }
  const double scale =
      std::max(window.i_window.cwiseAbs().maxCoeff(), window.q_window.cwiseAbs().maxCoeff());
  Eigen::VectorXd input(2 * n);
  if (!(scale > 0.0)) {
    input.setZero();
    return input;
  }
  input.head(n) = window.i_window / scale;
  input.tail(n) = window.q_window / scale;
  return input;
}

double predict_phase(const DenseNetwork& net, const PhaseWindow& window) {
  if (net.layers.empty() || net.head != Head::regressor) {
    throw std::invalid_argument("predict_phase: regressor-head network required");
  }
  const Eigen::VectorXd out = forward(net, phase_input_vector(window));
  return wrap_deg(rad_to_deg(std::atan2(out[1], out[0])));
}

LinearFit circular_linear_fit(const std::vector<double>& x_deg, const std::vector<double>& y_deg) {
  if (x_deg.size() != y_deg.size() || x_deg.size() < 2) {
    throw std::invalid_argument("circular_linear_fit: need at least 2 points");
  }
  // Greedy unwrap: pull each point within 180 degrees of its predecessor.
  std::vector<double> y(y_deg.size());
  y[0] = y_deg[0];
  for (std::size_t k = 1; k < y_deg.size(); ++k) {
    const double d = y_deg[k] - y[k - 1];
    y[k] = y[k - 1] + d - 360.0 * std::round(d / 360.0);
  }
  const double n = static_cast<double>(x_deg.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x_deg.size(); ++k) {
    sx += x_deg[k];
    sy += y[k];
    sxx += x_deg[k] * x_deg[k];
    sxy += x_deg[k] * y[k];
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::fabs(denom) > 0.0)) {
    throw std::invalid_argument("circular_linear_fit: degenerate sweep values");
  }
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

namespace {

SweepResult run_sweep(const DenseNetwork& net, const std::vector<double>& phases_deg,
                      bool sweep_refocus_phase, double phi_bias_deg, const HahnTiming& timing,
                      const SignalModel& model, std::uint64_t rng_seed) {
  if (phases_deg.size() < 8) {
    throw std::invalid_argument("sweep: need at least 8 sweep points");
  }
  SweepResult result;
  result.input_phases_deg = phases_deg;
  auto rng = make_rng(rng_seed);
  std::vector<double> residuals;
  for (double phi : phases_deg) {
    const double phi_half = sweep_refocus_phase ? 0.0 : wrap_deg(phi + phi_bias_deg);
    const double phi_pi = sweep_refocus_phase ? wrap_deg(phi) : 0.0;
    const IQTrace trace = synth_hahn(phi_half, phi_pi, timing, model, rng());
    const PhaseWindow window = extract_echo_window(trace, model.carrier_mhz);
    const double predicted = predict_phase(net, window);
    // The network reports phases in the input-phase convention, which is the
    // negative of the echo carrier phase; map the oracle accordingly.
    const double oracle = wrap_deg(-oracle_phase(window, model.carrier_mhz, model.dt_ns));
    result.predicted_deg.push_back(predicted);
    result.oracle_deg.push_back(oracle);
    const double nominal = sweep_refocus_phase ? wrap_deg(-2.0 * phi) : phi;
    residuals.push_back(predicted - nominal);
  }
  const LinearFit fit = circular_linear_fit(phases_deg, result.predicted_deg);
  result.slope = fit.slope;
  result.period_deg = std::fabs(fit.slope) > 1e-9 ? 360.0 / std::fabs(fit.slope) : 0.0;
  result.bias_deg = circular_mean_deg(residuals);
  return result;
}

}  // namespace

SweepResult sweep_pi2(const DenseNetwork& net, const std::vector<double>& phases_deg,
                      double phi_bias_deg, const HahnTiming& timing, const SignalModel& model,
                      std::uint64_t rng_seed) {
  return run_sweep(net, phases_deg, false, phi_bias_deg, timing, model, rng_seed);
}

SweepResult sweep_pi(const DenseNetwork& net, const std::vector<double>& phases_deg,
                     const HahnTiming& timing, const SignalModel& model, std::uint64_t rng_seed) {
  return run_sweep(net, phases_deg, true, 0.0, timing, model, rng_seed);
}

double mean_abs_angular_error_deg(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("mean_abs_angular_error_deg: size mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) total += circular_distance_deg(a[k], b[k]);
  return total / static_cast<double>(a.size());
}

}  // namespace spinecho
