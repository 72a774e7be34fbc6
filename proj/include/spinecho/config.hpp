#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spinecho/types.hpp"

namespace spinecho {

/// Flat run configuration. Every field has a documented default; files and
/// command-line overrides share one key set, and unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 12345;
  std::string out_dir = "out";

  SignalModel model;      ///< storage/retrieval signal defaults
  SequenceTiming timing;
  HahnTiming hahn;
  /// Hahn acquisitions are heavily averaged, so the phase pipeline runs at a
  /// lower noise level than the single-shot storage traces.
  double hahn_noise_sigma = 0.01;

  int window_len = 64;
  int stride = 16;

  int cls_n_per_class = 2500;
  int cls_epochs = 60;
  std::string cls_hidden = "32,16";

  double phase_step_deg = 2.0;
  int phase_reps = 12;
  int phase_epochs = 80;
  std::string phase_hidden = "64,32";

  double learning_rate = 1e-3;
  int batch_size = 32;
  std::string optimizer = "adam";
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double validation_fraction = 0.2;

  double peak_height_sigmas = 3.0;
  double prob_peak_height = 0.5;
  double stress_noise_sigma = 0.10;

  /// Signal model for Hahn-echo runs: same geometry, Hahn noise level.
  SignalModel hahn_model() const;
  void validate() const;
};

/// Applies `key=value` lines from a file; '#' starts a comment. Unknown keys
/// are rejected with the offending key named.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Applies a single key/value override (command line beats file beats default).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Effective config as `key=value` lines; loadable via apply_config_file.
std::string serialize_config(const RunConfig& cfg);

std::vector<std::string> config_keys();

/// Parses a comma-separated hidden layer width list such as "32,16".
std::vector<int> parse_hidden_layers(const std::string& spec);

}  // namespace spinecho
