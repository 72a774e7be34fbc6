#include "spinecho/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "spinecho/baselines.hpp"
#include "spinecho/dsp.hpp"
#include "spinecho/echo_sim.hpp"
#include "spinecho/neural.hpp"
#include "spinecho/phase.hpp"
#include "spinecho/recognition.hpp"
#include "spinecho/rng.hpp"
#include "spinecho/trace_io.hpp"

namespace spinecho {

namespace {

namespace fs = std::filesystem;

void echo_config(const RunConfig& cfg) {
  const std::string text = serialize_config(cfg);
  std::cout << "# effective config\n" << text;
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / "effective_config.txt");
  if (!out) throw std::runtime_error("cannot write effective config");
  out << text;
}

std::string zero_pad(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

std::vector<LayerSpec> build_specs(int input_dim, const std::vector<int>& hidden,
                                   Activation hidden_act, Activation final_act) {
  std::vector<LayerSpec> specs;
  Eigen::Index fan_in = input_dim;
  for (int width : hidden) {
    specs.push_back({fan_in, width, hidden_act});
    fan_in = width;
  }
  specs.push_back({fan_in, 2, final_act});
  return specs;
}

TrainConfig train_config_from(const RunConfig& cfg, int epochs, std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.optimizer = cfg.optimizer == "sgd" ? OptimizerKind::sgd : OptimizerKind::adam;
  tc.adam_beta1 = cfg.adam_beta1;
  tc.adam_beta2 = cfg.adam_beta2;
  tc.adam_eps = cfg.adam_eps;
  tc.seed = seed;
  tc.validation_fraction = cfg.validation_fraction;
  return tc;
}

std::vector<double> sweep_phases(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("sweep step must be > 0");
  std::vector<double> phases;
  for (double phi = start; phi < stop - 1e-9; phi += step) phases.push_back(wrap_deg(phi));
  return phases;
}

// Trains the echo/noise classifier from the config's synthetic dataset.
std::pair<DenseNetwork, TrainReport> train_classifier(const RunConfig& cfg) {
  const LabeledWindows data =
      gen_classifier_dataset(cfg.cls_n_per_class, cfg.window_len, cfg.timing, cfg.model,
                             derive_seed(cfg.seed, "train/classifier/data"));
  DenseNetwork net =
      make_network(build_specs(cfg.window_len, parse_hidden_layers(cfg.cls_hidden),
                               Activation::relu, Activation::softmax),
                   Head::classifier, derive_seed(cfg.seed, "train/classifier/init"));
  const TrainConfig tc =
      train_config_from(cfg, cfg.cls_epochs, derive_seed(cfg.seed, "train/classifier"));
  return train(std::move(net), make_classifier_dataset(data.windows, data.labels), tc);
}

std::pair<DenseNetwork, TrainReport> train_phase_regressor(const RunConfig& cfg) {
  const std::vector<double> sweep = sweep_phases(0.0, 360.0, cfg.phase_step_deg);
  const SignalModel model = cfg.hahn_model();
  Eigen::MatrixXd inputs(2 * kPhaseWindowSamples,
                         static_cast<Eigen::Index>(sweep.size()) * cfg.phase_reps);
  Eigen::VectorXd targets(inputs.cols());
  Eigen::Index col = 0;
  for (int rep = 0; rep < cfg.phase_reps; ++rep) {
    const PhaseDataset part = gen_phase_dataset(
        sweep, cfg.hahn, model, derive_seed(cfg.seed, "train/phase/data/rep" + std::to_string(rep)));
    inputs.middleCols(col, part.inputs.cols()) = part.inputs;
    targets.segment(col, part.targets_deg.size()) = part.targets_deg;
    col += part.inputs.cols();
  }
  DenseNetwork net =
      make_network(build_specs(2 * kPhaseWindowSamples, parse_hidden_layers(cfg.phase_hidden),
                               Activation::tanh, Activation::linear),
                   Head::regressor, derive_seed(cfg.seed, "train/phase/init"));
  const TrainConfig tc =
      train_config_from(cfg, cfg.phase_epochs, derive_seed(cfg.seed, "train/phase"));
  return train(std::move(net), make_regression_dataset(inputs, targets), tc);
}

std::array<RawTrace, 16> synth_all_sequences(const RunConfig& cfg, const std::string& stream) {
  std::array<RawTrace, 16> traces;
  for (int j = 0; j < 16; ++j) {
    traces[static_cast<std::size_t>(j)] =
        synth_storage_retrieval(BitSequence::from_decimal(j), cfg.timing, cfg.model,
                                derive_seed(cfg.seed, stream + "/j" + std::to_string(j)));
  }
  return traces;
}

bool exactly_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

bool verify_trace_file(const fs::path& path, const RawTrace& expected) {
  const RawTrace back = read_raw_trace_csv(path);
  return exactly_equal(back.samples, expected.samples);
}

bool verify_iq_file(const fs::path& path, const IQTrace& expected) {
  const IQTrace back = read_iq_trace_csv(path);
  return exactly_equal(back.i_samples, expected.i_samples) &&
         exactly_equal(back.q_samples, expected.q_samples);
}

void write_train_report(const fs::path& path, const TrainReport& report, bool classifier,
                        double holdout_mae_deg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "final_test_loss " << format_g17(report.final_test_loss) << "\n";
  if (classifier) out << "accuracy " << format_g17(report.accuracy) << "\n";
  if (!classifier) out << "holdout_mae_deg " << format_g17(holdout_mae_deg) << "\n";
  out << "wall_time_s " << format_g17(report.wall_time_s) << "\n";
  out << "epochs " << report.loss_history.size() << "\n";
  for (std::size_t e = 0; e < report.loss_history.size(); ++e) {
    out << "epoch " << e + 1 << " val_loss " << format_g17(report.loss_history[e]) << "\n";
  }
}

}  // namespace

int run_simulate_storage(const RunConfig& cfg, std::optional<int> sequence) {
  cfg.validate();
  echo_config(cfg);
  std::vector<int> sequences;
  if (sequence) {
    if (*sequence < 0 || *sequence > 15) {
      std::cerr << "simulate: sequence must be in 0..15\n";
      return 1;
    }
    sequences.push_back(*sequence);
  } else {
    for (int j = 0; j < 16; ++j) sequences.push_back(j);
  }

  Manifest manifest;
  manifest.kind = "storage-retrieval";
  manifest.seed = cfg.seed;
  manifest.timing = cfg.timing;
  manifest.hahn = cfg.hahn;
  manifest.model = cfg.model;

  const fs::path out_dir(cfg.out_dir);
  std::vector<std::pair<fs::path, RawTrace>> written;
  for (int j : sequences) {
    const BitSequence seq = BitSequence::from_decimal(j);
    const std::uint64_t seed = derive_seed(cfg.seed, "simulate/storage/j" + std::to_string(j));
    const RawTrace trace = synth_storage_retrieval(seq, cfg.timing, cfg.model, seed);
    const std::string rel = "traces/storage_j" + zero_pad(j, 2) + ".csv";
    write_raw_trace_csv(trace, out_dir / rel);
    manifest.traces.push_back({rel, seq.to_string(), j, 0.0, 0.0, seed});
    written.emplace_back(out_dir / rel, trace);
  }
  const fs::path manifest_path = out_dir / "manifest_storage.json";
  write_manifest(manifest, manifest_path);

  for (const auto& [path, trace] : written) {
    if (!verify_trace_file(path, trace)) {
      std::cerr << "simulate: validation failed for " << path << "\n";
      return 1;
    }
  }
  read_manifest(manifest_path);
  std::cout << "wrote " << written.size() << " storage trace(s) and " << manifest_path << "\n";
  return 0;
}

int run_simulate_hahn_single(const RunConfig& cfg, double phi_half_deg, double phi_pi_deg) {
  cfg.validate();
  echo_config(cfg);
  const SignalModel model = cfg.hahn_model();
  const std::uint64_t seed = derive_seed(cfg.seed, "simulate/hahn/single");
  const IQTrace trace = synth_hahn(phi_half_deg, phi_pi_deg, cfg.hahn, model, seed);

  const fs::path out_dir(cfg.out_dir);
  const std::string rel = "traces/hahn_single.csv";
  write_iq_trace_csv(trace, out_dir / rel);

  Manifest manifest;
  manifest.kind = "hahn";
  manifest.seed = cfg.seed;
  manifest.timing = cfg.timing;
  manifest.hahn = cfg.hahn;
  manifest.model = model;
  manifest.traces.push_back({rel, "hahn", -1, phi_half_deg, phi_pi_deg, seed});
  const fs::path manifest_path = out_dir / "manifest_hahn.json";
  write_manifest(manifest, manifest_path);

  if (!verify_iq_file(out_dir / rel, trace)) {
    std::cerr << "simulate: validation failed for " << rel << "\n";
    return 1;
  }
  read_manifest(manifest_path);
  std::cout << "wrote " << rel << " and " << manifest_path << "\n";
  return 0;
}

int run_simulate_hahn_sweep(const RunConfig& cfg, const SweepSpec& sweep) {
  cfg.validate();
  echo_config(cfg);
  const SignalModel model = cfg.hahn_model();
  const std::vector<double> phases = sweep_phases(sweep.start_deg, sweep.stop_deg, sweep.step_deg);

  Manifest manifest;
  manifest.kind = "hahn";
  manifest.seed = cfg.seed;
  manifest.timing = cfg.timing;
  manifest.hahn = cfg.hahn;
  manifest.model = model;

  const fs::path out_dir(cfg.out_dir);
  std::vector<std::pair<fs::path, IQTrace>> written;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const std::uint64_t seed =
        derive_seed(cfg.seed, "simulate/hahn/sweep-pi2/" + std::to_string(k));
    const IQTrace trace = synth_hahn(phases[k], 0.0, cfg.hahn, model, seed);
    const std::string rel = "traces/hahn_pi2_" + zero_pad(static_cast<int>(k), 3) + ".csv";
    write_iq_trace_csv(trace, out_dir / rel);
    manifest.traces.push_back({rel, "pi2-sweep", -1, phases[k], 0.0, seed});
    written.emplace_back(out_dir / rel, trace);
  }
  const fs::path manifest_path = out_dir / "manifest_hahn.json";
  write_manifest(manifest, manifest_path);

  for (const auto& [path, trace] : written) {
    if (!verify_iq_file(path, trace)) {
      std::cerr << "simulate: validation failed for " << path << "\n";
      return 1;
    }
  }
  read_manifest(manifest_path);
  std::cout << "wrote " << written.size() << " hahn trace(s) and " << manifest_path << "\n";
  return 0;
}

int run_train(const RunConfig& cfg, const std::string& head) {
  cfg.validate();
  echo_config(cfg);
  const fs::path out_dir(cfg.out_dir);

  if (head == "classifier") {
    auto [net, report] = train_classifier(cfg);
    const fs::path model_path = out_dir / "classifier_model.txt";
    save_model(net, model_path);
    write_train_report(out_dir / "classifier_report.txt", report, true, 0.0);
    std::cout << "classifier: J=" << report.final_test_loss << " accuracy=" << report.accuracy
              << " wall_time_s=" << report.wall_time_s << "\n";

    const DenseNetwork back = load_model(model_path);
    const Eigen::VectorXd probe = Eigen::VectorXd::LinSpaced(cfg.window_len, 0.0, 1.0);
    if (!exactly_equal(forward(back, probe), forward(net, probe))) {
      std::cerr << "train: model file validation failed\n";
      return 1;
    }
    return 0;
  }
  if (head == "phase") {
    auto [net, report] = train_phase_regressor(cfg);
    const fs::path model_path = out_dir / "phase_model.txt";
    save_model(net, model_path);

    // Held-out angular error: one fresh sweep with unseen noise.
    const std::vector<double> sweep = sweep_phases(0.0, 360.0, cfg.phase_step_deg);
    const PhaseDataset holdout = gen_phase_dataset(sweep, cfg.hahn, cfg.hahn_model(),
                                                   derive_seed(cfg.seed, "train/phase/holdout"));
    double mae = 0.0;
    for (Eigen::Index k = 0; k < holdout.inputs.cols(); ++k) {
      const Eigen::VectorXd out = forward(net, holdout.inputs.col(k));
      const double predicted = wrap_deg(rad_to_deg(std::atan2(out[1], out[0])));
      mae += circular_distance_deg(predicted, holdout.targets_deg[k]);
    }
    mae /= static_cast<double>(holdout.inputs.cols());
    write_train_report(out_dir / "phase_report.txt", report, false, mae);
    std::cout << "phase: J=" << report.final_test_loss << " holdout_mae_deg=" << mae
              << " wall_time_s=" << report.wall_time_s << "\n";

    const DenseNetwork back = load_model(model_path);
    const Eigen::VectorXd probe = Eigen::VectorXd::LinSpaced(2 * kPhaseWindowSamples, -1.0, 1.0);
    if (!exactly_equal(forward(back, probe), forward(net, probe))) {
      std::cerr << "train: model file validation failed\n";
      return 1;
    }
    return 0;
  }
  std::cerr << "train: head must be 'classifier' or 'phase'\n";
  return 1;
}

int run_recognize(const RunConfig& cfg, const std::string& model_path,
                  const std::string& manifest_path) {
  cfg.validate();
  echo_config(cfg);
  const DenseNetwork net = load_model(model_path);
  const Manifest manifest = read_manifest(manifest_path);
  const std::array<RawTrace, 16> traces = load_storage_traces(manifest, manifest_path);

  const fs::path out_dir(cfg.out_dir);
  const RetrievalWindows windows = retrieval_windows(manifest.timing);
  std::array<std::array<double, 4>, 16> probs{};
  int correct_bits = 0;
  for (int j = 0; j < 16; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const ProbabilityTrace ptrace = slide_classify(net, traces[js], cfg.window_len, cfg.stride);
    write_probability_trace_csv(ptrace, out_dir / ("ptrace_j" + zero_pad(j, 2) + ".csv"));
    probs[js] = post_select(ptrace, windows,
                            derive_seed(cfg.seed, "recognize/j" + std::to_string(j)));
    const BitInference inference = infer_bits(probs[js]);
    const BitSequence truth = BitSequence::from_decimal(j);
    for (int i = 1; i <= 4; ++i) {
      if (inference.bits.bit(i) == truth.bit(i)) ++correct_bits;
    }
  }
  const FidelityReport report = make_fidelity_report(probs, "ann+kmeans");
  write_fidelity_report(report, out_dir / "fidelity_report.txt", out_dir / "fidelity.csv");

  std::cout << "bits correct: " << correct_bits << "/64\n";
  for (int i = 0; i < 4; ++i) {
    std::cout << "F_" << i + 1 << " = " << report.f_avg[static_cast<std::size_t>(i)] << " +- "
              << report.f_std[static_cast<std::size_t>(i)] << "\n";
  }

  for (int j = 0; j < 16; ++j) {
    const fs::path p = out_dir / ("ptrace_j" + zero_pad(j, 2) + ".csv");
    if (!fs::exists(p)) {
      std::cerr << "recognize: missing output " << p << "\n";
      return 1;
    }
  }
  return 0;
}

int run_benchmark(const RunConfig& cfg, const std::string& model_path) {
  cfg.validate();
  echo_config(cfg);
  const fs::path out_dir(cfg.out_dir);

  DenseNetwork net;
  if (model_path.empty()) {
    auto [trained, report] = train_classifier(cfg);
    net = std::move(trained);
    save_model(net, out_dir / "classifier_model.txt");
    std::cout << "trained classifier: accuracy=" << report.accuracy << "\n";
  } else {
    net = load_model(model_path);
  }

  const std::array<RawTrace, 16> traces = synth_all_sequences(cfg, "benchmark/trace");
  BaselineParams params;
  params.peak_height_sigmas = cfg.peak_height_sigmas;
  params.prob_peak_height = cfg.prob_peak_height;
  const std::vector<MethodScore> scores =
      scoreboard(net, traces, cfg.timing, cfg.model, cfg.window_len, cfg.stride, params,
                 derive_seed(cfg.seed, "benchmark/scoreboard"));
  write_scoreboard(scores, out_dir / "scoreboard.txt", out_dir / "scoreboard.csv");

  for (const MethodScore& s : scores) {
    std::cout << s.method << ": success " << s.success_percent << "%\n";
  }
  if (scores.size() != 5 || scores.front().method != "ann+kmeans") {
    std::cerr << "benchmark: malformed scoreboard\n";
    return 1;
  }
  return 0;
}

int run_phase_sweep(const RunConfig& cfg, const std::string& model_path, bool sweep_pi_pulse,
                    double bias_deg, double step_deg) {
  cfg.validate();
  echo_config(cfg);
  const DenseNetwork net = load_model(model_path);
  const SignalModel model = cfg.hahn_model();
  const std::vector<double> phases = sweep_phases(0.0, 360.0, step_deg);

  const std::string tag = sweep_pi_pulse ? "sweep_pi" : "sweep_pi2";
  const SweepResult result =
      sweep_pi_pulse
          ? sweep_pi(net, phases, cfg.hahn, model, derive_seed(cfg.seed, "phase/" + tag))
          : sweep_pi2(net, phases, bias_deg, cfg.hahn, model,
                      derive_seed(cfg.seed, "phase/" + tag + "/bias" + format_g17(bias_deg)));

  const fs::path out_dir(cfg.out_dir);
  write_sweep_result(result, out_dir / (tag + ".csv"), out_dir / (tag + "_summary.txt"));
  std::cout << tag << ": slope=" << result.slope << " period_deg=" << result.period_deg
            << " bias_deg=" << result.bias_deg << "\n";

  if (!fs::exists(out_dir / (tag + ".csv"))) {
    std::cerr << "phase: missing sweep output\n";
    return 1;
  }
  return 0;
}

}  // namespace spinecho
