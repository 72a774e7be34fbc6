#pragma once

#include <cstdint>
#include <vector>

#include "spinecho/types.hpp"

namespace spinecho {

/// One scheduled output echo of a storage/retrieval run.
struct EchoEvent {
  double center_ns = 0.0;      ///< echo center time
  double precession_ns = 0.0;  ///< total precession time (echo center - pulse center)
  int source_index = 0;        ///< input slot i in 1..4 that produced the echo
};

/// Scheduled echoes for a bit sequence, sorted by echo time ascending. Echo
/// centers mirror the input pulse centers about the pi-pulse center, so the
/// retrieval order is the reverse of the storage order.
std::vector<EchoEvent> echo_schedule(const BitSequence& seq, const SequenceTiming& timing);

/// Common trace span for all 16 sequences: the latest possible echo plus a
/// 4-sigma envelope margin.
double storage_trace_span_ns(const SequenceTiming& timing, const SignalModel& model);

RawTrace synth_storage_retrieval(const BitSequence& seq, const SequenceTiming& timing,
                                 const SignalModel& model, std::uint64_t rng_seed);

/// Hahn echo with independently controlled pulse phases. The echo carrier
/// phase follows phi_echo = (2*phi_pi - phi_half) mod 360.
IQTrace synth_hahn(double phi_half_deg, double phi_pi_deg, const HahnTiming& timing,
                   const SignalModel& model, std::uint64_t rng_seed);

/// Balanced echo/noise training windows, min-max normalized to [0, 1].
struct LabeledWindows {
  Eigen::MatrixXd windows;  ///< window_len x n, one window per column
  Eigen::VectorXi labels;   ///< 1 = echo, 0 = noise
};

LabeledWindows gen_classifier_dataset(int n_per_class, int window_len,
                                      const SequenceTiming& timing, const SignalModel& model,
                                      std::uint64_t rng_seed);

/// Normalized 40+40-sample I/Q windows labeled with the pi/2-pulse phase used
/// for generation (pi-pulse phase fixed to zero).
struct PhaseDataset {
  Eigen::MatrixXd inputs;       ///< 160 x n, concatenated normalized I and Q windows
  Eigen::VectorXd targets_deg;  ///< one target per sweep value
};

PhaseDataset gen_phase_dataset(const std::vector<double>& sweep_deg, const HahnTiming& timing,
                               const SignalModel& model, std::uint64_t rng_seed);

}  // namespace spinecho
