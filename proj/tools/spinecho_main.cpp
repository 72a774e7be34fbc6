// Command-line front end: simulation, training, recognition, phase analysis
// and benchmarking driven by a flat key=value config with CLI overrides.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinecho/cli.hpp"
#include "spinecho/config.hpp"

namespace {

spinecho::SweepSpec parse_sweep_spec(const std::string& text) {
  spinecho::SweepSpec spec;
  const auto first = text.find(':');
  const auto second = text.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw CLI::ValidationError("sweep", "expected START:STOP:STEP, got '" + text + "'");
  }
  spec.start_deg = std::stod(text.substr(0, first));
  spec.stop_deg = std::stod(text.substr(first + 1, second - first - 1));
  spec.step_deg = std::stod(text.substr(second + 1));
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic spin-echo readout: simulation, ANN training, recognition, benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::string> out_flag;
  std::optional<double> noise_flag;
  app.add_option("--config", config_path, "config file (key=value lines)");
  app.add_option("--set", overrides, "override a config key, e.g. --set cls_epochs=10")
      ->take_all();
  app.add_option("--seed", seed_flag, "global seed");
  app.add_option("--out", out_flag, "output directory");
  app.add_option("--noise", noise_flag, "storage-trace noise sigma (arb. V)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "synthesize traces");
  simulate->require_subcommand(1);
  auto* sim_storage = simulate->add_subcommand("storage-retrieval", "4-bit echo trains");
  std::optional<int> seq_flag;
  bool all_flag = false;
  sim_storage->add_option("--seq", seq_flag, "single sequence number j in 0..15");
  sim_storage->add_flag("--all", all_flag, "all 16 sequences");
  auto* sim_hahn = simulate->add_subcommand("hahn", "phase-controlled I/Q echoes");
  double phi_half = 0.0, phi_pi = 0.0;
  std::string sweep_text;
  sim_hahn->add_option("--phi-half", phi_half, "pi/2-pulse phase (deg)");
  sim_hahn->add_option("--phi-pi", phi_pi, "pi-pulse phase (deg)");
  sim_hahn->add_option("--sweep-pi2", sweep_text, "pi/2 phase sweep START:STOP:STEP (deg)");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a network head");
  std::string head;
  train_cmd->add_option("head", head, "classifier | phase")->required();

  // recognize
  auto* recognize = app.add_subcommand("recognize", "echo recognition + bit inference");
  std::string model_path, manifest_path;
  recognize->add_option("--model", model_path, "classifier model file")->required();
  recognize->add_option("--traces", manifest_path, "storage trace manifest")->required();

  // benchmark
  auto* benchmark = app.add_subcommand("benchmark", "score all bit-inference methods");
  std::string bench_model;
  benchmark->add_option("--model", bench_model, "reuse an existing classifier model");

  // phase
  auto* phase_cmd = app.add_subcommand("phase", "phase sweeps through the regressor");
  std::string phase_mode, phase_model;
  double bias = 0.0, step = 2.0;
  phase_cmd->add_option("mode", phase_mode, "sweep-pi2 | sweep-pi")->required();
  phase_cmd->add_option("--model", phase_model, "phase model file")->required();
  phase_cmd->add_option("--bias", bias, "initial phase bias added to the pi/2 sweep (deg)");
  phase_cmd->add_option("--steps", step, "sweep step size (deg)");

  CLI11_PARSE(app, argc, argv);

  try {
    spinecho::RunConfig cfg;
    if (!config_path.empty()) spinecho::apply_config_file(cfg, config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "--set expects key=value, got '" << kv << "'\n";
        return 1;
      }
      spinecho::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_flag) cfg.seed = *seed_flag;
    if (out_flag) cfg.out_dir = *out_flag;
    if (noise_flag) cfg.model.noise_sigma = *noise_flag;

    if (sim_storage->parsed()) {
      if (!all_flag && !seq_flag) {
        std::cerr << "simulate storage-retrieval: pass --seq J or --all\n";
        return 1;
      }
      return spinecho::run_simulate_storage(cfg, all_flag ? std::nullopt : seq_flag);
    }
    if (sim_hahn->parsed()) {
      if (!sweep_text.empty()) {
        return spinecho::run_simulate_hahn_sweep(cfg, parse_sweep_spec(sweep_text));
      }
      return spinecho::run_simulate_hahn_single(cfg, phi_half, phi_pi);
    }
    if (train_cmd->parsed()) return spinecho::run_train(cfg, head);
    if (recognize->parsed()) return spinecho::run_recognize(cfg, model_path, manifest_path);
    if (benchmark->parsed()) return spinecho::run_benchmark(cfg, bench_model);
    if (phase_cmd->parsed()) {
      if (phase_mode != "sweep-pi2" && phase_mode != "sweep-pi") {
        std::cerr << "phase: mode must be sweep-pi2 or sweep-pi\n";
        return 1;
      }
      return spinecho::run_phase_sweep(cfg, phase_model, phase_mode == "sweep-pi", bias, step);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
