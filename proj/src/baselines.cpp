#include "spinecho/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spinecho/dsp.hpp"
#include "spinecho/rng.hpp"

namespace spinecho {

std::vector<int> find_peaks(const std::vector<double>& series, const PeakParams& params) {
  if (!(params.min_height >= 0.0) || !(params.min_prominence >= 0.0) ||
      params.min_distance < 0) {
    throw std::invalid_argument("find_peaks: parameters must be >= 0");
  }
  const auto n = static_cast<int>(series.size());
  std::vector<int> candidates;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(series[static_cast<std::size_t>(i)] > series[static_cast<std::size_t>(i - 1)])) continue;
    int j = i;
    while (j + 1 < n &&
           series[static_cast<std::size_t>(j + 1)] == series[static_cast<std::size_t>(i)]) {
      ++j;
    }
    if (j + 1 < n &&
        series[static_cast<std::size_t>(j + 1)] < series[static_cast<std::size_t>(i)]) {
      candidates.push_back(i);  // plateau counts once, at its first index
    }
    i = j;
  }

  std::vector<int> prominent;
  for (int p : candidates) {
    if (series[static_cast<std::size_t>(p)] < params.min_height) continue;
    const double h = series[static_cast<std::size_t>(p)];
    double left_min = h;
    for (int k = p - 1; k >= 0; --k) {
      if (series[static_cast<std::size_t>(k)] > h) break;
      left_min = std::min(left_min, series[static_cast<std::size_t>(k)]);
    }
    double right_min = h;
    for (int k = p + 1; k < n; ++k) {
      if (series[static_cast<std::size_t>(k)] > h) break;
      right_min = std::min(right_min, series[static_cast<std::size_t>(k)]);
    }
    const double prominence = h - std::max(left_min, right_min);
    if (prominence >= params.min_prominence) prominent.push_back(p);
  }

  if (params.min_distance <= 1) return prominent;

  // Keep the tallest peaks, suppressing any lower peak closer than min_distance.
  std::vector<int> by_height = prominent;
  std::sort(by_height.begin(), by_height.end(), [&](int a, int b) {
    const double ha = series[static_cast<std::size_t>(a)];
    const double hb = series[static_cast<std::size_t>(b)];
    return ha != hb ? ha > hb : a < b;
  });
  std::vector<int> kept;
  for (int p : by_height) {
    bool blocked = false;
    for (int q : kept) {
      if (std::abs(p - q) < params.min_distance) {
        blocked = true;
        break;
      }
    }
    if (!blocked) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

namespace {

int window_of_sample(const RetrievalWindows& windows, double t_ns) {
  return windows.index_of(t_ns);
}

std::array<std::vector<double>, 4> group_probabilities(const ProbabilityTrace& ptrace,
                                                       const RetrievalWindows& windows) {
  std::array<std::vector<double>, 4> grouped;
  for (std::size_t k = 0; k < ptrace.p_e.size(); ++k) {
    const int w = windows.index_of(ptrace.window_center_ns(k));
    if (w >= 0) grouped[static_cast<std::size_t>(w)].push_back(ptrace.p_e[k]);
  }
  for (std::size_t w = 0; w < 4; ++w) {
    if (grouped[w].empty()) {
      throw std::runtime_error("retrieval window " + std::to_string(w + 1) +
                               " holds no probability points");
    }
  }
  return grouped;
}

int envelope_window_samples(double carrier_mhz, double dt_ns) {
  return std::max(3, static_cast<int>(std::lround(1.0 / (carrier_mhz * 1e-3 * dt_ns))));
}

}  // namespace

std::array<double, 4> threshold_peak_search(const RawTrace& trace, double threshold,
                                            const RetrievalWindows& windows, double carrier_mhz) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold_peak_search: threshold must be > 0");
  const Eigen::VectorXd env =
      moving_rms(trace.samples, envelope_window_samples(carrier_mhz, trace.dt_ns));
  std::array<double, 4> bits{};
  for (Eigen::Index k = 0; k < env.size(); ++k) {
    const int w = window_of_sample(windows, trace.time_at(k));
    if (w >= 0 && env[k] > threshold) bits[static_cast<std::size_t>(w)] = 1.0;
  }
  return bits;
}

std::array<double, 4> window_average(const ProbabilityTrace& ptrace,
                                     const RetrievalWindows& windows) {
  const auto grouped = group_probabilities(ptrace, windows);
  std::array<double, 4> out{};
  for (std::size_t w = 0; w < 4; ++w) {
    double sum = 0.0;
    for (double p : grouped[w]) sum += p;
    out[w] = sum / static_cast<double>(grouped[w].size());
  }
  return out;
}

std::array<double, 4> window_max(const ProbabilityTrace& ptrace, const RetrievalWindows& windows) {
  const auto grouped = group_probabilities(ptrace, windows);
  std::array<double, 4> out{};
  for (std::size_t w = 0; w < 4; ++w) {
    out[w] = *std::max_element(grouped[w].begin(), grouped[w].end());
  }
  return out;
}

std::array<double, 4> prob_find_peaks(const ProbabilityTrace& ptrace,
                                      const RetrievalWindows& windows, const PeakParams& params) {
  const std::vector<int> peaks = find_peaks(ptrace.p_e, params);
  std::array<double, 4> out{};
  for (int p : peaks) {
    const int w = windows.index_of(ptrace.window_center_ns(static_cast<std::size_t>(p)));
    if (w >= 0) {
      out[static_cast<std::size_t>(w)] =
          std::max(out[static_cast<std::size_t>(w)], ptrace.p_e[static_cast<std::size_t>(p)]);
    }
  }
  return out;
}

std::array<double, 4> raw_find_peaks(const RawTrace& trace, const RetrievalWindows& windows,
                                     const PeakParams& params, double carrier_mhz) {
  const Eigen::VectorXd env =
      moving_rms(trace.samples, envelope_window_samples(carrier_mhz, trace.dt_ns));
  const std::vector<double> series(env.data(), env.data() + env.size());
  std::array<double, 4> out{};
  for (int p : find_peaks(series, params)) {
    const int w = window_of_sample(windows, trace.time_at(p));
    if (w >= 0) out[static_cast<std::size_t>(w)] = 1.0;
  }
  return out;
}

std::vector<MethodScore> scoreboard(const DenseNetwork& net,
                                    const std::array<RawTrace, 16>& traces,
                                    const SequenceTiming& timing, const SignalModel& model,
                                    int window_len, int stride, const BaselineParams& params,
                                    std::uint64_t seed) {
  const RetrievalWindows windows = retrieval_windows(timing);

  std::array<ProbabilityTrace, 16> ptraces;
  for (int j = 0; j < 16; ++j) {
    ptraces[static_cast<std::size_t>(j)] =
        slide_classify(net, traces[static_cast<std::size_t>(j)], window_len, stride);
  }

  PeakParams prob_params;
  prob_params.min_height = params.prob_peak_height;
  prob_params.min_distance = std::max(
      1, static_cast<int>(std::lround(0.5 * windows.width_ns /
                                      (static_cast<double>(stride) * model.dt_ns))));
  PeakParams raw_params;
  raw_params.min_height = params.peak_height_sigmas * model.noise_sigma;
  raw_params.min_distance =
      std::max(1, static_cast<int>(std::lround(0.5 * windows.width_ns / model.dt_ns)));

  std::array<std::array<double, 4>, 16> kmeans_probs{}, avg_probs{}, max_probs{}, ppeak_probs{},
      rpeak_probs{};
  for (int j = 0; j < 16; ++j) {
    const auto js = static_cast<std::size_t>(j);
    kmeans_probs[js] = post_select(ptraces[js], windows,
                                   derive_seed(seed, "scoreboard/j" + std::to_string(j)));
    avg_probs[js] = window_average(ptraces[js], windows);
    max_probs[js] = window_max(ptraces[js], windows);
    ppeak_probs[js] = prob_find_peaks(ptraces[js], windows, prob_params);
    rpeak_probs[js] = raw_find_peaks(traces[js], windows, raw_params, model.carrier_mhz);
  }

  std::vector<MethodScore> scores;
  const auto add = [&](const std::array<std::array<double, 4>, 16>& probs,
                       const std::string& name) {
    const FidelityReport report = make_fidelity_report(probs, name);
    MethodScore score;
    score.method = name;
    score.success_percent = success_percent(report);
    score.f_avg = report.f_avg;
    score.f_std = report.f_std;
    scores.push_back(std::move(score));
  };
  add(kmeans_probs, "ann+kmeans");
  add(avg_probs, "ann+average");
  add(max_probs, "ann+max-search");
  add(ppeak_probs, "ann+find-peaks");
  add(rpeak_probs, "find-peaks-raw");
  return scores;
}

}  // namespace spinecho
