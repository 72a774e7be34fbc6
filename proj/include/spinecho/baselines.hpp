#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spinecho/recognition.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

struct PeakParams {
  double min_height = 0.0;
  double min_prominence = 0.0;
  int min_distance = 0;
};

/// Local maxima filtered by height, prominence (height above the higher of
/// the two flanking valleys) and minimum index spacing. A flat plateau counts
/// once, at its first index. Returned indices are ascending.
std::vector<int> find_peaks(const std::vector<double>& series, const PeakParams& params);

/// User-threshold echo detection on the rectified moving-RMS envelope of a
/// raw trace: per retrieval window, bit = 1 iff the envelope maximum exceeds
/// the threshold. Returns hard 0/1 probabilities in time order.
std::array<double, 4> threshold_peak_search(const RawTrace& trace, double threshold,
                                            const RetrievalWindows& windows, double carrier_mhz);

/// Mean p_e per retrieval window.
std::array<double, 4> window_average(const ProbabilityTrace& ptrace,
                                     const RetrievalWindows& windows);

/// Max p_e per retrieval window.
std::array<double, 4> window_max(const ProbabilityTrace& ptrace, const RetrievalWindows& windows);

/// Peak detection on the probability trace; per window the value is the
/// highest accepted peak's p_e, or 0 when no peak lands in the window.
std::array<double, 4> prob_find_peaks(const ProbabilityTrace& ptrace,
                                      const RetrievalWindows& windows, const PeakParams& params);

/// Peak detection on the rectified moving-RMS envelope of the raw trace;
/// hard 0/1 per window.
std::array<double, 4> raw_find_peaks(const RawTrace& trace, const RetrievalWindows& windows,
                                     const PeakParams& params, double carrier_mhz);

struct MethodScore {
  std::string method;
  double success_percent = 0.0;
  std::array<double, 4> f_avg{};
  std::array<double, 4> f_std{};
};

struct BaselineParams {
  double peak_height_sigmas = 3.0;  ///< raw-trace peak height gate, in units of noise sigma
  double prob_peak_height = 0.5;    ///< p_e peak height gate
};

/// Scores every bit-inference method on one shared trace set. Rows appear in
/// a fixed order with the ANN + K-means pipeline first.
std::vector<MethodScore> scoreboard(const DenseNetwork& net,
                                    const std::array<RawTrace, 16>& traces,
                                    const SequenceTiming& timing, const SignalModel& model,
                                    int window_len, int stride, const BaselineParams& params,
                                    std::uint64_t seed);

}  // namespace spinecho
