#include "spinecho/echo_sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spinecho/dsp.hpp"
#include "spinecho/phase.hpp"
#include "spinecho/rng.hpp"

namespace spinecho {

namespace {

constexpr double kEnvelopeSupportSigmas = 5.0;

// Adds one echo: decayed Gaussian envelope on the down-converted carrier.
// Contributions beyond +-5 sigma are dropped.
void add_echo(Eigen::VectorXd& v, const SignalModel& model, double center_ns,
              double precession_ns, double carrier_phase_rad, bool quadrature) {
  const double amp = model.amp0 * std::exp(-precession_ns / model.t_m_ns);
  const double sigma = model.env_sigma_ns;
  const double dt = model.dt_ns;
  const auto n = v.size();
  const auto lo = std::max<Eigen::Index>(
      0, static_cast<Eigen::Index>(std::ceil((center_ns - kEnvelopeSupportSigmas * sigma) / dt)));
  const auto hi = std::min<Eigen::Index>(
      n - 1,
      static_cast<Eigen::Index>(std::floor((center_ns + kEnvelopeSupportSigmas * sigma) / dt)));
  const double omega = 2.0 * std::numbers::pi * model.carrier_cycles_per_ns();
  for (Eigen::Index k = lo; k <= hi; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double u = (t - center_ns) / sigma;
    const double envelope = amp * std::exp(-0.5 * u * u);
    const double arg = omega * t + carrier_phase_rad;
    v[k] += envelope * (quadrature ? std::sin(arg) : std::cos(arg));
  }
}

void add_white_noise(Eigen::VectorXd& v, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> dist(0.0, sigma);
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] += dist(rng);
}

}  // namespace

std::vector<EchoEvent> echo_schedule(const BitSequence& seq, const SequenceTiming& timing) {
  timing.validate();
  if (timing.n_slots != BitSequence::kBits) {
    throw std::invalid_argument("echo_schedule: timing.n_slots must be 4 for 4-bit sequences");
  }
  std::vector<EchoEvent> events;
  const double mirror = timing.pi_center_ns();
  // Descending slot index yields ascending echo time: retrieval reverses storage.
  for (int i = timing.n_slots; i >= 1; --i) {
    if (seq.bit(i) == 0) continue;
    const double pulse_center = timing.pulse_center_ns(i);
    const double echo_center = 2.0 * mirror - pulse_center;
    events.push_back({echo_center, echo_center - pulse_center, i});
  }
  return events;
}

double storage_trace_span_ns(const SequenceTiming& timing, const SignalModel& model) {
  timing.validate();
  model.validate();
  const double last_echo = 2.0 * timing.pi_center_ns() - timing.pulse_center_ns(1);
  return last_echo + 4.0 * model.env_sigma_ns;
}

RawTrace synth_storage_retrieval(const BitSequence& seq, const SequenceTiming& timing,
                                 const SignalModel& model, std::uint64_t rng_seed) {
  timing.validate();
  model.validate();
  const double span = storage_trace_span_ns(timing, model);
  const auto n = static_cast<Eigen::Index>(std::floor(span / model.dt_ns)) + 1;

  RawTrace trace;
  trace.samples = Eigen::VectorXd::Zero(n);
  trace.dt_ns = model.dt_ns;
  trace.t0_ns = 0.0;
  trace.meta = seq.to_string();

  for (const EchoEvent& e : echo_schedule(seq, timing)) {
    add_echo(trace.samples, model, e.center_ns, e.precession_ns, 0.0, false);
  }
  auto rng = make_rng(rng_seed);
  add_white_noise(trace.samples, model.noise_sigma, rng);
  return trace;
}

IQTrace synth_hahn(double phi_half_deg, double phi_pi_deg, const HahnTiming& timing,
                   const SignalModel& model, std::uint64_t rng_seed) {
  timing.validate();
  model.validate();
  const double center = timing.echo_center_ns();
  const double span = center + 4.0 * model.env_sigma_ns;
  const auto n = static_cast<Eigen::Index>(std::floor(span / model.dt_ns)) + 1;

  IQTrace trace;
  trace.i_samples = Eigen::VectorXd::Zero(n);
  trace.q_samples = Eigen::VectorXd::Zero(n);
  trace.dt_ns = model.dt_ns;
  trace.t0_ns = 0.0;
  trace.phi_half_deg = phi_half_deg;
  trace.phi_pi_deg = phi_pi_deg;

  const double phi_echo_rad = deg_to_rad(wrap_deg(2.0 * phi_pi_deg - phi_half_deg));
  const double precession = 2.0 * timing.tau_ns;
  add_echo(trace.i_samples, model, center, precession, phi_echo_rad, false);
  add_echo(trace.q_samples, model, center, precession, phi_echo_rad, true);

  auto rng = make_rng(rng_seed);
  add_white_noise(trace.i_samples, model.noise_sigma, rng);
  add_white_noise(trace.q_samples, model.noise_sigma, rng);
  return trace;
}

LabeledWindows gen_classifier_dataset(int n_per_class, int window_len,
                                      const SequenceTiming& timing, const SignalModel& model,
                                      std::uint64_t rng_seed) {
  timing.validate();
  model.validate();
  if (n_per_class < 0) throw std::invalid_argument("gen_classifier_dataset: n_per_class < 0");
  if (window_len < 2 || static_cast<double>(window_len) * model.dt_ns < model.env_sigma_ns) {
    throw std::invalid_argument(
        "gen_classifier_dataset: window must span at least one envelope sigma");
  }

  LabeledWindows out;
  out.windows.resize(window_len, 2 * n_per_class);
  out.labels.resize(2 * n_per_class);
  if (n_per_class == 0) return out;

  // All windows are harvested from all-ones traces so every echo amplitude is
  // represented; noise windows come from the echo-free region before retrieval.
  const BitSequence all_on = BitSequence::from_decimal(15);
  const auto events = echo_schedule(all_on, timing);
  const double span = storage_trace_span_ns(timing, model);
  const auto n_samples = static_cast<Eigen::Index>(std::floor(span / model.dt_ns)) + 1;
  const auto max_start = n_samples - window_len;

  // Admissible noise-window start indices: the window must not intersect any
  // echo's +-4 sigma support.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> allowed;
  {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> forbidden;
    for (const EchoEvent& e : events) {
      const double lo_ns = e.center_ns - 4.0 * model.env_sigma_ns;
      const double hi_ns = e.center_ns + 4.0 * model.env_sigma_ns;
      const auto lo = static_cast<Eigen::Index>(std::ceil(lo_ns / model.dt_ns)) - (window_len - 1);
      const auto hi = static_cast<Eigen::Index>(std::floor(hi_ns / model.dt_ns));
      forbidden.emplace_back(std::max<Eigen::Index>(0, lo), std::min(max_start, hi));
    }
    std::sort(forbidden.begin(), forbidden.end());
    Eigen::Index cursor = 0;
    for (const auto& [lo, hi] : forbidden) {
      if (lo > cursor) allowed.emplace_back(cursor, lo - 1);
      cursor = std::max(cursor, hi + 1);
    }
    if (cursor <= max_start) allowed.emplace_back(cursor, max_start);
  }
  Eigen::Index n_allowed = 0;
  for (const auto& [lo, hi] : allowed) n_allowed += hi - lo + 1;
  if (n_allowed <= 0) {
    throw std::runtime_error("gen_classifier_dataset: no echo-free region for noise windows");
  }

  auto rng = make_rng(rng_seed);
  const auto sigma_samples =
      static_cast<Eigen::Index>(std::floor(model.env_sigma_ns / model.dt_ns));
  std::uniform_int_distribution<Eigen::Index> offset_dist(-sigma_samples, sigma_samples);
  std::uniform_int_distribution<Eigen::Index> noise_dist(0, n_allowed - 1);
  std::uniform_int_distribution<std::size_t> echo_pick(0, events.size() - 1);

  int n_echo = 0, n_noise = 0;
  while (n_echo < n_per_class || n_noise < n_per_class) {
    const RawTrace trace = synth_storage_retrieval(all_on, timing, model, rng());
    for (std::size_t rep = 0; rep < events.size() && n_echo < n_per_class; ++rep) {
      const EchoEvent& e = events[echo_pick(rng)];
      const auto center =
          static_cast<Eigen::Index>(std::llround(e.center_ns / model.dt_ns)) + offset_dist(rng);
      const auto start = std::clamp<Eigen::Index>(center - window_len / 2, 0, max_start);
      out.windows.col(n_echo) = minmax_normalize(trace.samples.segment(start, window_len));
      out.labels[n_echo] = 1;
      ++n_echo;
    }
    for (std::size_t rep = 0; rep < events.size() && n_noise < n_per_class; ++rep) {
      Eigen::Index pick = noise_dist(rng);
      Eigen::Index start = 0;
      for (const auto& [lo, hi] : allowed) {
        const Eigen::Index len = hi - lo + 1;
        if (pick < len) {
          start = lo + pick;
          break;
        }
        pick -= len;
      }
      out.windows.col(n_per_class + n_noise) =
          minmax_normalize(trace.samples.segment(start, window_len));
      out.labels[n_per_class + n_noise] = 0;
      ++n_noise;
    }
  }
  return out;
}

PhaseDataset gen_phase_dataset(const std::vector<double>& sweep_deg, const HahnTiming& timing,
                               const SignalModel& model, std::uint64_t rng_seed) {
  timing.validate();
  model.validate();
  for (double phi : sweep_deg) {
    if (phi < 0.0 || phi >= 360.0) {
      throw std::invalid_argument("gen_phase_dataset: sweep values must lie in [0, 360)");
    }
  }
  PhaseDataset out;
  out.inputs.resize(2 * kPhaseWindowSamples, static_cast<Eigen::Index>(sweep_deg.size()));
  out.targets_deg.resize(static_cast<Eigen::Index>(sweep_deg.size()));
  auto rng = make_rng(rng_seed);
  for (std::size_t k = 0; k < sweep_deg.size(); ++k) {
    const IQTrace trace = synth_hahn(sweep_deg[k], 0.0, timing, model, rng());
    const PhaseWindow window = extract_echo_window(trace, model.carrier_mhz);
    out.inputs.col(static_cast<Eigen::Index>(k)) = phase_input_vector(window);
    out.targets_deg[static_cast<Eigen::Index>(k)] = sweep_deg[k];
  }
  return out;
}

}  // namespace spinecho
