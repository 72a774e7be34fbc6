#include "spinecho/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "spinecho/dsp.hpp"
#include "spinecho/echo_sim.hpp"
#include "spinecho/rng.hpp"

namespace spinecho {

ProbabilityTrace slide_classify(const DenseNetwork& net, const RawTrace& trace, int window_len,
                                int stride) {
  if (window_len < 1 || stride < 1) {
    throw std::invalid_argument("slide_classify: window_len and stride must be >= 1");
  }
  if (trace.samples.size() < window_len) {
    throw std::invalid_argument("slide_classify: trace shorter than one window");
  }
  if (net.head != Head::classifier || net.input_dim() != window_len) {
    throw std::invalid_argument("slide_classify: classifier with matching input width required");
  }

  const auto n_positions =
      static_cast<Eigen::Index>((trace.samples.size() - window_len) / stride) + 1;
  Eigen::MatrixXd windows(window_len, n_positions);
  std::vector<bool> constant(static_cast<std::size_t>(n_positions), false);
  ProbabilityTrace out;
  out.window_len = window_len;
  out.stride = stride;
  out.dt_ns = trace.dt_ns;
  for (Eigen::Index k = 0; k < n_positions; ++k) {
    const auto start = k * stride;
    const auto segment = trace.samples.segment(start, window_len);
    constant[static_cast<std::size_t>(k)] = !(segment.maxCoeff() - segment.minCoeff() > 0.0);
    windows.col(k) = minmax_normalize(segment);
    out.times_ns.push_back(trace.time_at(start));
  }
  const Eigen::MatrixXd probs = predict_batch(net, windows);
  for (Eigen::Index k = 0; k < n_positions; ++k) {
    out.p_e.push_back(constant[static_cast<std::size_t>(k)] ? 0.0 : probs(0, k));
  }
  return out;
}

namespace {

struct Partition {
  std::vector<int> assignments;
  std::vector<double> centroids;
  double inertia = std::numeric_limits<double>::infinity();
};

double partition_inertia(const std::vector<double>& points, const std::vector<int>& assignments,
                         const std::vector<double>& centroids) {
  double total = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double d = points[p] - centroids[static_cast<std::size_t>(assignments[p])];
    total += d * d;
  }
  return total;
}

void assign_nearest(const std::vector<double>& points, const std::vector<double>& centroids,
                    std::vector<int>& assignments) {
  for (std::size_t p = 0; p < points.size(); ++p) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = std::fabs(points[p] - centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    assignments[p] = best;
  }
}

Partition lloyd_from(const std::vector<double>& points, std::vector<double> centroids) {
  constexpr int kMaxIterations = 50;
  const auto k = centroids.size();
  Partition part;
  part.assignments.assign(points.size(), -1);
  std::vector<int> previous(points.size(), -2);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    assign_nearest(points, centroids, part.assignments);
    if (part.assignments == previous) break;
    previous = part.assignments;
    std::vector<double> sums(k, 0.0);
    std::vector<int> counts(k, 0);
    for (std::size_t p = 0; p < points.size(); ++p) {
      sums[static_cast<std::size_t>(part.assignments[p])] += points[p];
      ++counts[static_cast<std::size_t>(part.assignments[p])];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) centroids[c] = sums[c] / counts[c];  // empty cluster keeps its centroid
    }
  }
  part.centroids = std::move(centroids);
  part.inertia = partition_inertia(points, part.assignments, part.centroids);
  return part;
}

std::vector<double> kmeans_pp_init(const std::vector<double>& points, int k,
                                   std::mt19937_64& rng) {
  std::vector<double> centroids;
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  centroids.push_back(points[first(rng)]);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(centroids.size()) < k) {
    std::vector<double> d2(points.size());
    double total = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centroids) best = std::min(best, std::fabs(points[p] - c));
      d2[p] = best * best;
      total += d2[p];
    }
    if (!(total > 0.0)) {
      centroids.push_back(points[first(rng)]);
      continue;
    }
    double pick = unit(rng) * total;
    std::size_t chosen = points.size() - 1;
    for (std::size_t p = 0; p < points.size(); ++p) {
      pick -= d2[p];
      if (pick <= 0.0) {
        chosen = p;
        break;
      }
    }
    centroids.push_back(points[chosen]);
  }
  return centroids;
}

// Globally optimal 2-partition: clusters are contiguous in sorted order, so
// scan every threshold with prefix sums. The optimum satisfies the Voronoi
// condition, i.e. it is a Lloyd fixpoint.
Partition best_two_split(const std::vector<double>& points) {
  const auto n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<double> prefix(n + 1, 0.0), prefix2(n + 1, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    prefix[s + 1] = prefix[s] + points[order[s]];
    prefix2[s + 1] = prefix2[s] + points[order[s]] * points[order[s]];
  }
  Partition best;
  for (std::size_t split = 1; split < n; ++split) {
    const double left_sum = prefix[split];
    const double right_sum = prefix[n] - prefix[split];
    const auto left_n = static_cast<double>(split);
    const auto right_n = static_cast<double>(n - split);
    const double inertia =
        prefix2[n] - left_sum * left_sum / left_n - right_sum * right_sum / right_n;
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.centroids = {left_sum / left_n, right_sum / right_n};
      best.assignments.assign(n, 1);
      for (std::size_t s = 0; s < split; ++s) best.assignments[order[s]] = 0;
    }
  }
  // Recompute inertia in the same summation order as the Lloyd path so the
  // candidates compare consistently.
  best.inertia = partition_inertia(points, best.assignments, best.centroids);
  return best;
}

void canonicalize(Partition& part) {
  const auto k = part.centroids.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return part.centroids[a] < part.centroids[b];
  });
  std::vector<int> remap(k);
  std::vector<double> sorted(k);
  for (std::size_t rank = 0; rank < k; ++rank) {
    remap[order[rank]] = static_cast<int>(rank);
    sorted[rank] = part.centroids[order[rank]];
  }
  part.centroids = std::move(sorted);
  for (int& a : part.assignments) a = remap[static_cast<std::size_t>(a)];
}

}  // namespace

ClusterResult kmeans_1d(const std::vector<double>& points, int k, std::uint64_t seed) {
  if (points.empty()) throw std::invalid_argument("kmeans_1d: points must be non-empty");
  if (k < 1) throw std::invalid_argument("kmeans_1d: k must be >= 1");

  const std::set<double> distinct(points.begin(), points.end());

  Partition best;
  if (k == 1) {
    best.centroids = {std::accumulate(points.begin(), points.end(), 0.0) /
                      static_cast<double>(points.size())};
    best.assignments.assign(points.size(), 0);
    best.inertia = partition_inertia(points, best.assignments, best.centroids);
  } else {
    constexpr int kRestarts = 5;
    auto rng = make_rng(seed);
    for (int restart = 0; restart < kRestarts; ++restart) {
      Partition candidate = lloyd_from(points, kmeans_pp_init(points, k, rng));
      if (candidate.inertia < best.inertia) best = std::move(candidate);
    }
    if (k == 2 && points.size() >= 2 && distinct.size() >= 2) {
      Partition exact = best_two_split(points);
      if (exact.inertia < best.inertia) best = std::move(exact);
    }
  }
  canonicalize(best);

  ClusterResult result;
  result.assignments = std::move(best.assignments);
  result.centroids = std::move(best.centroids);
  result.inertia = best.inertia;
  result.degenerate = static_cast<int>(distinct.size()) < k;
  return result;
}

int RetrievalWindows::index_of(double t_ns) const {
  if (t_ns < start_ns || t_ns >= end_ns()) return -1;
  return static_cast<int>((t_ns - start_ns) / width_ns);
}

RetrievalWindows retrieval_windows(const SequenceTiming& timing) {
  const auto events = echo_schedule(BitSequence::from_decimal(15), timing);
  RetrievalWindows windows;
  windows.count = static_cast<int>(events.size());
  windows.width_ns = timing.slot_spacing_ns();
  windows.start_ns = events.front().center_ns - 0.5 * windows.width_ns;
  return windows;
}

std::array<double, 4> post_select(const ProbabilityTrace& ptrace, const RetrievalWindows& windows,
                                  std::uint64_t seed) {
  if (windows.count != 4) throw std::invalid_argument("post_select: four windows expected");
  std::array<std::vector<double>, 4> grouped;
  for (std::size_t k = 0; k < ptrace.p_e.size(); ++k) {
    const int w = windows.index_of(ptrace.window_center_ns(k));
    if (w >= 0) grouped[static_cast<std::size_t>(w)].push_back(ptrace.p_e[k]);
  }
  std::array<double, 4> probs{};
  for (std::size_t w = 0; w < 4; ++w) {
    if (grouped[w].size() < 2) {
      throw std::runtime_error("post_select: retrieval window " + std::to_string(w + 1) +
                               " holds fewer than 2 probability points");
    }
    const ClusterResult clusters =
        kmeans_1d(grouped[w], 2, derive_seed(seed, "post_select/window" + std::to_string(w)));
    std::array<int, 2> counts{0, 0};
    for (int a : clusters.assignments) ++counts[static_cast<std::size_t>(a)];
    // Majority cluster wins; a tie is broken toward the lower centroid.
    const int winner = counts[0] >= counts[1] ? 0 : 1;
    probs[w] = clusters.centroids[static_cast<std::size_t>(winner)];
  }
  return probs;
}

BitInference infer_bits(const std::array<double, 4>& window_probs_time_order) {
  BitInference inference;
  std::array<int, 4> bits{};
  for (int i = 1; i <= 4; ++i) {
    const double p = window_probs_time_order[static_cast<std::size_t>(4 - i)];
    inference.p_rev[static_cast<std::size_t>(i - 1)] = p;
    bits[static_cast<std::size_t>(i - 1)] = p > 0.5 ? 1 : 0;
  }
  inference.bits = BitSequence(bits);
  return inference;
}

double fidelity(int nominal_bit, double p_rev) {
  if (nominal_bit != 0 && nominal_bit != 1) {
    throw std::invalid_argument("fidelity: nominal bit must be 0 or 1");
  }
  if (!(p_rev >= 0.0 && p_rev <= 1.0)) {
    throw std::invalid_argument("fidelity: probability must lie in [0, 1]");
  }
  return (1.0 - std::fabs(static_cast<double>(nominal_bit) - p_rev)) * 100.0;
}

FidelityReport make_fidelity_report(
    const std::array<std::array<double, 4>, 16>& probs_time_order, std::string method) {
  FidelityReport report;
  report.method = std::move(method);
  for (int j = 0; j < 16; ++j) {
    const BitSequence seq = BitSequence::from_decimal(j);
    const BitInference inference = infer_bits(probs_time_order[static_cast<std::size_t>(j)]);
    for (int i = 1; i <= 4; ++i) {
      report.f(i - 1, j) = fidelity(seq.bit(i), inference.p_rev[static_cast<std::size_t>(i - 1)]);
    }
  }
  for (int i = 0; i < 4; ++i) {
    const double mean = report.f.row(i).mean();
    double var = 0.0;
    for (int j = 0; j < 16; ++j) var += (report.f(i, j) - mean) * (report.f(i, j) - mean);
    report.f_avg[static_cast<std::size_t>(i)] = mean;
    report.f_std[static_cast<std::size_t>(i)] = std::sqrt(var / 15.0);
  }
  return report;
}

FidelityReport full_protocol_report(const DenseNetwork& net,
                                    const std::array<RawTrace, 16>& traces,
                                    const SequenceTiming& timing, int window_len, int stride,
                                    std::uint64_t seed) {
  const RetrievalWindows windows = retrieval_windows(timing);
  std::array<std::array<double, 4>, 16> probs{};
  for (int j = 0; j < 16; ++j) {
    const RawTrace& trace = traces[static_cast<std::size_t>(j)];
    const std::string expected = BitSequence::from_decimal(j).to_string();
    if (!trace.meta.empty() && trace.meta != expected) {
      throw std::invalid_argument("full_protocol_report: trace " + std::to_string(j) +
                                  " labeled '" + trace.meta + "', expected '" + expected + "'");
    }
    const ProbabilityTrace ptrace = slide_classify(net, trace, window_len, stride);
    probs[static_cast<std::size_t>(j)] =
        post_select(ptrace, windows, derive_seed(seed, "report/j" + std::to_string(j)));
  }
  return make_fidelity_report(probs, "ann+kmeans");
}

double success_percent(const FidelityReport& report) {
  int successes = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 16; ++j) {
      if (report.f(i, j) >= 70.0) ++successes;
    }
  }
  return 100.0 * static_cast<double>(successes) / 64.0;
}

}  // namespace spinecho
