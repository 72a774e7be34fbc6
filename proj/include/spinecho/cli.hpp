#pragma once

#include <optional>
#include <string>

#include "spinecho/config.hpp"

namespace spinecho {

struct SweepSpec {
  double start_deg = 0.0;
  double stop_deg = 360.0;
  double step_deg = 2.0;
};

/// Command implementations shared by the binary and the test harness. Each
/// echoes the fully resolved config, writes its declared outputs under
/// cfg.out_dir, re-reads them for validation and returns 0 only on success.
int run_simulate_storage(const RunConfig& cfg, std::optional<int> sequence);
int run_simulate_hahn_single(const RunConfig& cfg, double phi_half_deg, double phi_pi_deg);
int run_simulate_hahn_sweep(const RunConfig& cfg, const SweepSpec& sweep);
int run_train(const RunConfig& cfg, const std::string& head);
int run_recognize(const RunConfig& cfg, const std::string& model_path,
                  const std::string& manifest_path);
int run_benchmark(const RunConfig& cfg, const std::string& model_path);
int run_phase_sweep(const RunConfig& cfg, const std::string& model_path, bool sweep_pi_pulse,
                    double bias_deg, double step_deg);

}  // namespace spinecho
