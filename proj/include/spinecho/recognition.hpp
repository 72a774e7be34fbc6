#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spinecho/neural.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

/// Echo probability as a function of sliding-window position.
struct ProbabilityTrace {
  std::vector<double> times_ns;  ///< window-start times, strictly increasing
  std::vector<double> p_e;       ///< one echo probability per window position
  int window_len = 0;            ///< samples
  int stride = 0;                ///< samples
  double dt_ns = 1.0;

  double window_center_ns(std::size_t k) const {
    return times_ns[k] + 0.5 * static_cast<double>(window_len) * dt_ns;
  }
};

/// Slices the trace into overlapping windows, normalizes each exactly as the
/// training data, and records the classifier's p_e per position. A window
/// with zero dynamic range carries no signal and scores p_e = 0 directly.
ProbabilityTrace slide_classify(const DenseNetwork& net, const RawTrace& trace, int window_len,
                                int stride);

struct ClusterResult {
  std::vector<int> assignments;    ///< cluster id per point, ids follow centroid order
  std::vector<double> centroids;   ///< ascending
  double inertia = 0.0;
  bool degenerate = false;         ///< fewer distinct points than clusters
};

/// Seeded Lloyd clustering on the line with k-means++-style restarts. For
/// k = 2 an exact sorted-threshold partition seeds one extra restart, which
/// makes the small-input result globally optimal.
ClusterResult kmeans_1d(const std::vector<double>& points, int k, std::uint64_t seed);

/// Four equal windows anchored to the retrieval span of the full sequence.
struct RetrievalWindows {
  double start_ns = 0.0;
  double width_ns = 0.0;
  int count = 4;

  double end_ns() const { return start_ns + width_ns * count; }
  /// Window index in 0..count-1 holding time t, or -1 when outside the span.
  int index_of(double t_ns) const;
};

RetrievalWindows retrieval_windows(const SequenceTiming& timing);

/// Per retrieval window, clusters the p_e points into two groups and reports
/// the centroid of the majority cluster; ties break toward the lower centroid.
/// Values are returned in retrieval (time) order.
std::array<double, 4> post_select(const ProbabilityTrace& ptrace, const RetrievalWindows& windows,
                                  std::uint64_t seed);

struct BitInference {
  BitSequence bits;
  std::array<double, 4> p_rev;  ///< probabilities re-indexed by input position i (1..4)
};

/// Maps time-order window probabilities back to storage order (i = 5 - w,
/// undoing the pi-pulse reversal) and thresholds at 0.5.
BitInference infer_bits(const std::array<double, 4>& window_probs_time_order);

/// F = (1 - |a - p|) * 100, in percent.
double fidelity(int nominal_bit, double p_rev);

struct FidelityReport {
  Eigen::Matrix<double, 4, 16> f;  ///< F_i^j percent, row i-1, column j
  std::array<double, 4> f_avg{};   ///< mean over j per bit
  std::array<double, 4> f_std{};   ///< sample standard deviation over j
  std::string method;
};

/// Shared scoring path: every method's window probabilities are folded through
/// the same reversal and fidelity computation.
FidelityReport make_fidelity_report(
    const std::array<std::array<double, 4>, 16>& probs_time_order, std::string method);

/// Full pipeline over one trace per sequence j = 0..15.
FidelityReport full_protocol_report(const DenseNetwork& net,
                                    const std::array<RawTrace, 16>& traces,
                                    const SequenceTiming& timing, int window_len, int stride,
                                    std::uint64_t seed);

/// Fraction of the 64 bit scores with F >= 70%, in percent.
double success_percent(const FidelityReport& report);

}  // namespace spinecho
