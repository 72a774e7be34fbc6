#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

namespace spinecho {

/// Timing of the storage/retrieval pulse train. Time zero is the start of the
/// first input pulse slot; all values in nanoseconds.
struct SequenceTiming {
  double t_p_ns = 40.0;    ///< input pulse duration
  double t_d_ns = 300.0;   ///< delay between consecutive input pulses
  double tau_ns = 1200.0;  ///< delay between the end of the last slot and the refocusing pulse
  double t_pi_ns = 190.0;  ///< refocusing (pi) pulse duration
  int n_slots = 4;         ///< number of input pulse slots

  void validate() const;
  double slot_spacing_ns() const { return t_p_ns + t_d_ns; }
  /// Center time of input pulse slot `slot` (1-based, storage order).
  double pulse_center_ns(int slot) const;
  /// Center time of the refocusing pulse.
  double pi_center_ns() const;
};

/// Two-pulse echo timing. Time zero is the center of the first (pi/2) pulse,
/// so the refocused echo is centered at 2*tau.
struct HahnTiming {
  double t_pi2_ns = 145.0;
  double t_pi_ns = 180.0;
  double tau_ns = 750.0;

  void validate() const;
  double echo_center_ns() const { return 2.0 * tau_ns; }
};

/// Phenomenological echo signal model: Gaussian envelope on a down-converted
/// carrier, exponential decay with total precession time, additive white noise.
struct SignalModel {
  double amp0 = 1.0;          ///< echo peak amplitude at zero total precession (arb. V)
  double t_m_ns = 2500.0;     ///< phase memory time
  double env_sigma_ns = 60.0; ///< Gaussian echo envelope width
  double carrier_mhz = 90.0;  ///< down-converted carrier frequency
  double noise_sigma = 0.05;  ///< additive white Gaussian noise std (arb. V)
  double dt_ns = 1.0;         ///< sample interval

  void validate() const;
  double carrier_cycles_per_ns() const { return carrier_mhz * 1e-3; }
  double samples_per_period() const { return 1.0 / (carrier_cycles_per_ns() * dt_ns); }
};

/// Uniformly sampled single-channel voltage trace.
struct RawTrace {
  Eigen::VectorXd samples;
  double dt_ns = 1.0;
  double t0_ns = 0.0;
  std::string meta;  ///< originating sequence label, e.g. "1011"

  double time_at(Eigen::Index k) const { return t0_ns + static_cast<double>(k) * dt_ns; }
};

/// Paired I/Q channel traces from the simulated mixer output.
struct IQTrace {
  Eigen::VectorXd i_samples;
  Eigen::VectorXd q_samples;
  double dt_ns = 1.0;
  double t0_ns = 0.0;
  double phi_half_deg = 0.0;  ///< pi/2-pulse phase used for generation
  double phi_pi_deg = 0.0;    ///< pi-pulse phase used for generation

  double time_at(Eigen::Index k) const { return t0_ns + static_cast<double>(k) * dt_ns; }
};

/// Ordered 4-bit input sequence. Index i = 1..4 runs in storage order, most
/// significant bit first, so the decimal value is bits[0]*8 + ... + bits[3].
class BitSequence {
 public:
  static constexpr int kBits = 4;

  BitSequence() = default;
  explicit BitSequence(const std::array<int, kBits>& bits);
  static BitSequence from_decimal(int j);

  /// Bit at storage position i in 1..4 (i = 1 is the most significant).
  int bit(int i) const;
  int decimal() const;
  std::string to_string() const;

  bool operator==(const BitSequence& other) const { return bits_ == other.bits_; }

 private:
  std::array<int, kBits> bits_{0, 0, 0, 0};
};

}  // namespace spinecho
