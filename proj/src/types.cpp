#include "spinecho/types.hpp"

#include <cmath>
#include <stdexcept>

namespace spinecho {

void SequenceTiming::validate() const {
  if (!(t_p_ns > 0.0 && t_d_ns > 0.0 && tau_ns > 0.0 && t_pi_ns > 0.0)) {
    throw std::invalid_argument("SequenceTiming: all durations must be strictly positive");
  }
  if (n_slots < 1) {
    throw std::invalid_argument("SequenceTiming: n_slots must be >= 1");
  }
}

double SequenceTiming::pulse_center_ns(int slot) const {
  if (slot < 1 || slot > n_slots) {
    throw std::invalid_argument("SequenceTiming: slot index out of range");
  }
  return static_cast<double>(slot - 1) * slot_spacing_ns() + 0.5 * t_p_ns;
}

double SequenceTiming::pi_center_ns() const {
  const double last_slot_end = static_cast<double>(n_slots - 1) * slot_spacing_ns() + t_p_ns;
  return last_slot_end + tau_ns + 0.5 * t_pi_ns;
}

void HahnTiming::validate() const {
  if (!(t_pi2_ns > 0.0 && t_pi_ns > 0.0 && tau_ns > 0.0)) {
    throw std::invalid_argument("HahnTiming: all durations must be strictly positive");
  }
}

void SignalModel::validate() const {
  if (!(amp0 > 0.0)) throw std::invalid_argument("SignalModel: amp0 must be > 0");
  if (!(t_m_ns > 0.0)) throw std::invalid_argument("SignalModel: t_m_ns must be > 0");
  if (!(env_sigma_ns > 0.0)) throw std::invalid_argument("SignalModel: env_sigma_ns must be > 0");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("SignalModel: noise_sigma must be >= 0");
  if (!(dt_ns > 0.0)) throw std::invalid_argument("SignalModel: dt_ns must be > 0");
  if (!(carrier_mhz > 0.0)) throw std::invalid_argument("SignalModel: carrier_mhz must be > 0");
  if (samples_per_period() < 4.0) {
    throw std::invalid_argument(
        "SignalModel: carrier must be sampled with at least 4 samples per period");
  }
}

BitSequence::BitSequence(const std::array<int, kBits>& bits) : bits_(bits) {
  for (int b : bits_) {
    if (b != 0 && b != 1) throw std::invalid_argument("BitSequence: bits must be 0 or 1");
  }
}

BitSequence BitSequence::from_decimal(int j) {
  if (j < 0 || j > 15) throw std::invalid_argument("BitSequence: decimal must be in 0..15");
  std::array<int, kBits> bits{};
  for (int i = 1; i <= kBits; ++i) {
    bits[static_cast<std::size_t>(i - 1)] = (j >> (kBits - i)) & 1;
  }
  return BitSequence(bits);
}

int BitSequence::bit(int i) const {
  if (i < 1 || i > kBits) throw std::invalid_argument("BitSequence: bit index must be in 1..4");
  return bits_[static_cast<std::size_t>(i - 1)];
}

int BitSequence::decimal() const {
  int j = 0;
  for (int b : bits_) j = (j << 1) | b;
  return j;
}

std::string BitSequence::to_string() const {
  std::string s;
  for (int b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace spinecho
