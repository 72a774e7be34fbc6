#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace spinecho {

enum class Activation { relu, tanh, linear, softmax };
enum class Head { classifier, regressor };
enum class OptimizerKind { sgd, adam };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LayerSpec {
  Eigen::Index fan_in = 0;
  Eigen::Index fan_out = 0;
  Activation activation = Activation::linear;
};

struct Layer {
  Eigen::MatrixXd weights;  ///< fan_out x fan_in
  Eigen::VectorXd biases;   ///< fan_out
  Activation activation = Activation::linear;
};

/// Sequential fully connected network. A classifier ends in a width-2 softmax
/// producing (p_e, p_n); a regressor ends in a width-2 linear layer producing
/// a (cos, sin) phase encoding.
struct DenseNetwork {
  std::vector<Layer> layers;
  Head head = Head::classifier;

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
};

/// Builds a network with fan-in-scaled uniform weight init. Validates that
/// layer dimensions chain, softmax appears only on the final layer, and the
/// head contract (softmax-2 classifier, linear-2 regressor) holds.
DenseNetwork make_network(const std::vector<LayerSpec>& specs, Head head, std::uint64_t seed);

Eigen::MatrixXd forward_batch(const DenseNetwork& net,
                              const Eigen::Ref<const Eigen::MatrixXd>& inputs);
Eigen::VectorXd forward(const DenseNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& input);

/// Training data; one example per column.
struct Dataset {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;

  Eigen::Index size() const { return inputs.cols(); }
};

/// Mean cross-entropy for classifier heads, mean squared error over the
/// 2-vector targets for regressor heads.
double loss(const DenseNetwork& net, const Dataset& batch);

struct Gradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
};

Gradients backprop_gradients(const DenseNetwork& net, const Dataset& batch);

struct TrainConfig {
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;

  void validate() const;
};

struct TrainReport {
  double final_test_loss = 0.0;
  double accuracy = 0.0;  ///< classifier heads only
  std::vector<double> loss_history;  ///< validation loss after each epoch
  double wall_time_s = 0.0;
};

/// Deterministic minibatch training with a seeded train/validation split.
/// Aborts with a diagnostic if the loss turns non-finite.
std::pair<DenseNetwork, TrainReport> train(DenseNetwork net, const Dataset& data,
                                           const TrainConfig& cfg);

Eigen::MatrixXd predict_batch(const DenseNetwork& net,
                              const Eigen::Ref<const Eigen::MatrixXd>& inputs);

struct LatencyStats {
  double median_us = 0.0;
  double mean_us = 0.0;
  double max_us = 0.0;
};

/// Times one forward pass per input column.
LatencyStats measure_inference_latency(const DenseNetwork& net,
                                       const Eigen::Ref<const Eigen::MatrixXd>& inputs);

double classification_accuracy(const DenseNetwork& net, const Dataset& data);

/// Structured-text model file with explicit shapes and row-major weights.
/// Values are printed with 17 significant digits so save/load round-trips are
/// bit exact.
void save_model(const DenseNetwork& net, const std::filesystem::path& path);
DenseNetwork load_model(const std::filesystem::path& path);

/// One-hot targets for (p_e, p_n): label 1 (echo) maps to (1, 0).
Dataset make_classifier_dataset(const Eigen::MatrixXd& windows, const Eigen::VectorXi& labels);
/// Phase targets encoded as (cos, sin) to avoid the 0/360 wrap discontinuity.
Dataset make_regression_dataset(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets_deg);

}  // namespace spinecho
