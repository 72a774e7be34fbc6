#include "spinecho/neural.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spinecho/dsp.hpp"
#include "spinecho/rng.hpp"

namespace spinecho {

namespace {

constexpr double kLogFloor = 1e-12;

void apply_activation(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::relu:
      z = z.cwiseMax(0.0);
      return;
    case Activation::tanh:
      z = z.array().tanh();
      return;
    case Activation::linear:
      return;
    case Activation::softmax: {
      if (z.rows() == 2) {
        // Two-wide softmax via the logistic form keeps p0 + p1 == 1 exactly.
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
          const double p0 = 1.0 / (1.0 + std::exp(z(1, c) - z(0, c)));
          z(0, c) = p0;
          z(1, c) = 1.0 - p0;
        }
      } else {
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
          Eigen::VectorXd col = z.col(c);
          col.array() -= col.maxCoeff();
          col = col.array().exp();
          z.col(c) = col / col.sum();
        }
      }
      return;
    }
  }
  throw std::logic_error("apply_activation: unknown activation");
}

// Derivative of the activation given pre-activation z and activation a.
// Softmax is never requested here: its gradient is folded into the
// cross-entropy delta at the output layer.
Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                                      Activation act) {
  switch (act) {
    case Activation::relu:
      return (z.array() > 0.0).cast<double>();
    case Activation::tanh:
      return 1.0 - a.array().square();
    case Activation::linear:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::softmax:
      break;
  }
  throw std::logic_error("activation_derivative: unsupported activation");
}

struct ForwardTrace {
  std::vector<Eigen::MatrixXd> pre;   // z per layer
  std::vector<Eigen::MatrixXd> post;  // a per layer; post.back() is the output
};

ForwardTrace forward_with_trace(const DenseNetwork& net,
                                const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  if (net.layers.empty()) throw std::invalid_argument("forward: empty network");
  if (inputs.rows() != net.input_dim()) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  ForwardTrace trace;
  trace.pre.reserve(net.layers.size());
  trace.post.reserve(net.layers.size());
  Eigen::MatrixXd a = inputs;
  for (const Layer& layer : net.layers) {
    Eigen::MatrixXd z = (layer.weights * a).colwise() + layer.biases;
    trace.pre.push_back(z);
    apply_activation(z, layer.activation);
    trace.post.push_back(z);
    a = std::move(z);
  }
  return trace;
}

void validate_batch(const DenseNetwork& net, const Dataset& batch) {
  if (batch.size() == 0) throw std::invalid_argument("batch must be non-empty");
  if (batch.inputs.rows() != net.input_dim()) {
    throw std::invalid_argument("batch input dimension mismatch");
  }
  if (batch.targets.rows() != net.output_dim() || batch.targets.cols() != batch.inputs.cols()) {
    throw std::invalid_argument("batch target shape mismatch");
  }
}

double loss_from_output(const Eigen::MatrixXd& output, const Eigen::MatrixXd& targets, Head head) {
  const auto n = output.cols();
  if (head == Head::classifier) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index r = 0; r < output.rows(); ++r) {
        if (targets(r, c) != 0.0) {
          total -= targets(r, c) * std::log(std::max(output(r, c), kLogFloor));
        }
      }
    }
    return total / static_cast<double>(n);
  }
  return (output - targets).squaredNorm() /
         static_cast<double>(n * output.rows());
}

struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long step = 0;

  explicit AdamState(const DenseNetwork& net) {
    for (const Layer& l : net.layers) {
      m_w.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      v_w.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      m_b.push_back(Eigen::VectorXd::Zero(l.biases.size()));
      v_b.push_back(Eigen::VectorXd::Zero(l.biases.size()));
    }
  }
};

void apply_update(DenseNetwork& net, const Gradients& grads, const TrainConfig& cfg,
                  AdamState& adam) {
  if (cfg.optimizer == OptimizerKind::sgd) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      net.layers[l].weights -= cfg.learning_rate * grads.d_weights[l];
      net.layers[l].biases -= cfg.learning_rate * grads.d_biases[l];
    }
    return;
  }
  ++adam.step;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(adam.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(adam.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    adam.m_w[l] = b1 * adam.m_w[l] + (1.0 - b1) * grads.d_weights[l];
    adam.v_w[l] = b2 * adam.v_w[l] + (1.0 - b2) * grads.d_weights[l].array().square().matrix();
    adam.m_b[l] = b1 * adam.m_b[l] + (1.0 - b1) * grads.d_biases[l];
    adam.v_b[l] = b2 * adam.v_b[l] + (1.0 - b2) * grads.d_biases[l].array().square().matrix();
    layer.weights.array() -= cfg.learning_rate * (adam.m_w[l].array() / corr1) /
                             ((adam.v_w[l].array() / corr2).sqrt() + cfg.adam_eps);
    layer.biases.array() -= cfg.learning_rate * (adam.m_b[l].array() / corr1) /
                            ((adam.v_b[l].array() / corr2).sqrt() + cfg.adam_eps);
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
    case Activation::softmax: return "softmax";
  }
  throw std::logic_error("to_string: unknown activation");
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  if (s == "softmax") return Activation::softmax;
  throw std::invalid_argument("unknown activation: " + s);
}

Eigen::Index DenseNetwork::input_dim() const {
  if (layers.empty()) throw std::logic_error("DenseNetwork: no layers");
  return layers.front().weights.cols();
}

Eigen::Index DenseNetwork::output_dim() const {
  if (layers.empty()) throw std::logic_error("DenseNetwork: no layers");
  return layers.back().weights.rows();
}

DenseNetwork make_network(const std::vector<LayerSpec>& specs, Head head, std::uint64_t seed) {
  if (specs.empty()) throw std::invalid_argument("make_network: at least one layer required");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    if (specs[l].fan_in < 1 || specs[l].fan_out < 1) {
      throw std::invalid_argument("make_network: layer dimensions must be >= 1");
    }
    if (l + 1 < specs.size()) {
      if (specs[l].fan_out != specs[l + 1].fan_in) {
        throw std::invalid_argument("make_network: adjacent layer dimensions must chain");
      }
      if (specs[l].activation == Activation::softmax) {
        throw std::invalid_argument("make_network: softmax only permitted on the final layer");
      }
    }
  }
  const LayerSpec& last = specs.back();
  if (head == Head::classifier) {
    if (last.activation != Activation::softmax || last.fan_out != 2) {
      throw std::invalid_argument("make_network: classifier head must end in softmax of width 2");
    }
  } else {
    if (last.activation != Activation::linear || last.fan_out != 2) {
      throw std::invalid_argument("make_network: regressor head must end linear of width 2");
    }
  }

  DenseNetwork net;
  net.head = head;
  auto rng = make_rng(seed);
  for (const LayerSpec& spec : specs) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Layer layer;
    layer.activation = spec.activation;
    layer.weights.resize(spec.fan_out, spec.fan_in);
    for (Eigen::Index r = 0; r < spec.fan_out; ++r) {
      for (Eigen::Index c = 0; c < spec.fan_in; ++c) layer.weights(r, c) = dist(rng);
    }
    layer.biases = Eigen::VectorXd::Zero(spec.fan_out);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Eigen::MatrixXd forward_batch(const DenseNetwork& net,
                              const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  return forward_with_trace(net, inputs).post.back();
}

Eigen::VectorXd forward(const DenseNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& input) {
  return forward_batch(net, input).col(0);
}

double loss(const DenseNetwork& net, const Dataset& batch) {
  validate_batch(net, batch);
  return loss_from_output(forward_batch(net, batch.inputs), batch.targets, net.head);
}

Gradients backprop_gradients(const DenseNetwork& net, const Dataset& batch) {
  validate_batch(net, batch);
  const auto trace = forward_with_trace(net, batch.inputs);
  const auto n_layers = net.layers.size();
  const double batch_n = static_cast<double>(batch.size());

  Gradients grads;
  grads.d_weights.resize(n_layers);
  grads.d_biases.resize(n_layers);

  // Output delta: softmax + cross-entropy and linear + MSE both reduce to a
  // scaled (output - target).
  Eigen::MatrixXd delta;
  if (net.head == Head::classifier) {
    delta = (trace.post.back() - batch.targets) / batch_n;
  } else {
    delta = 2.0 * (trace.post.back() - batch.targets) /
            (batch_n * static_cast<double>(net.output_dim()));
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const Eigen::MatrixXd& below = l == 0 ? Eigen::MatrixXd(batch.inputs) : trace.post[l - 1];
    grads.d_weights[l] = delta * below.transpose();
    grads.d_biases[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (net.layers[l].weights.transpose() * delta).cwiseProduct(
          activation_derivative(trace.pre[l - 1], trace.post[l - 1],
                                net.layers[l - 1].activation));
    }
  }
  return grads;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("TrainConfig: validation_fraction must be in (0, 1)");
  }
}

std::pair<DenseNetwork, TrainReport> train(DenseNetwork net, const Dataset& data,
                                           const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() < 2) throw std::invalid_argument("train: need at least 2 examples");
  const auto t_start = std::chrono::steady_clock::now();

  // Seeded split; the validation block is the tail of one fixed shuffle.
  const auto n = data.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(derive_seed(cfg.seed, "train/split"));
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
      std::llround(cfg.validation_fraction * static_cast<double>(n))));
  n_val = std::min(n_val, n - 1);
  const auto n_train = n - n_val;

  auto gather = [&](Eigen::Index begin, Eigen::Index count) {
    Dataset subset;
    subset.inputs.resize(data.inputs.rows(), count);
    subset.targets.resize(data.targets.rows(), count);
    for (Eigen::Index k = 0; k < count; ++k) {
      subset.inputs.col(k) = data.inputs.col(order[static_cast<std::size_t>(begin + k)]);
      subset.targets.col(k) = data.targets.col(order[static_cast<std::size_t>(begin + k)]);
    }
    return subset;
  };
  const Dataset train_set = gather(0, n_train);
  const Dataset val_set = gather(n_train, n_val);

  TrainReport report;
  AdamState adam(net);
  auto epoch_rng = make_rng(derive_seed(cfg.seed, "train/epochs"));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_train));
  std::iota(idx.begin(), idx.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), epoch_rng);
    for (Eigen::Index begin = 0; begin < n_train; begin += cfg.batch_size) {
      const auto count = std::min<Eigen::Index>(cfg.batch_size, n_train - begin);
      Dataset batch;
      batch.inputs.resize(train_set.inputs.rows(), count);
      batch.targets.resize(train_set.targets.rows(), count);
      for (Eigen::Index k = 0; k < count; ++k) {
        batch.inputs.col(k) = train_set.inputs.col(idx[static_cast<std::size_t>(begin + k)]);
        batch.targets.col(k) = train_set.targets.col(idx[static_cast<std::size_t>(begin + k)]);
      }
      apply_update(net, backprop_gradients(net, batch), cfg, adam);
    }
    const double val_loss = loss(net, val_set);
    if (!std::isfinite(val_loss)) {
      std::ostringstream msg;
      msg << "train: non-finite validation loss " << val_loss << " after epoch " << epoch + 1
          << " (learning rate " << cfg.learning_rate << ")";
      throw std::runtime_error(msg.str());
    }
    report.loss_history.push_back(val_loss);
  }

  report.final_test_loss = report.loss_history.empty() ? loss(net, val_set)
                                                       : report.loss_history.back();
  if (net.head == Head::classifier) {
    report.accuracy = classification_accuracy(net, val_set);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(net), std::move(report)};
}

Eigen::MatrixXd predict_batch(const DenseNetwork& net,
                              const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  return forward_batch(net, inputs);
}

LatencyStats measure_inference_latency(const DenseNetwork& net,
                                       const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  if (inputs.cols() == 0) throw std::invalid_argument("measure_inference_latency: empty batch");
  std::vector<double> us(static_cast<std::size_t>(inputs.cols()));
  Eigen::VectorXd sink;
  for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
    const auto t0 = std::chrono::steady_clock::now();
    sink = forward(net, inputs.col(c));
    const auto t1 = std::chrono::steady_clock::now();
    us[static_cast<std::size_t>(c)] = std::chrono::duration<double, std::micro>(t1 - t0).count();
  }
  LatencyStats stats;
  stats.mean_us = std::accumulate(us.begin(), us.end(), 0.0) / static_cast<double>(us.size());
  stats.max_us = *std::max_element(us.begin(), us.end());
  std::nth_element(us.begin(), us.begin() + static_cast<std::ptrdiff_t>(us.size() / 2), us.end());
  stats.median_us = us[us.size() / 2];
  return stats;
}

double classification_accuracy(const DenseNetwork& net, const Dataset& data) {
  if (net.head != Head::classifier) {
    throw std::invalid_argument("classification_accuracy: classifier head required");
  }
  validate_batch(net, data);
  const Eigen::MatrixXd output = forward_batch(net, data.inputs);
  Eigen::Index correct = 0;
  for (Eigen::Index c = 0; c < output.cols(); ++c) {
    Eigen::Index pred, truth;
    output.col(c).maxCoeff(&pred);
    data.targets.col(c).maxCoeff(&truth);
    if (pred == truth) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(output.cols());
}

void save_model(const DenseNetwork& net, const std::filesystem::path& path) {
  if (net.layers.empty()) throw std::invalid_argument("save_model: empty network");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  out << "spinecho-model 1\n";
  out << (net.head == Head::classifier ? "classifier" : "regressor") << " " << net.layers.size()
      << "\n";
  for (const Layer& layer : net.layers) {
    out << to_string(layer.activation) << " " << layer.weights.cols() << " "
        << layer.weights.rows() << "\n";
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        out << (c == 0 ? "" : " ") << format_double(layer.weights(r, c));
      }
      out << "\n";
    }
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r) {
      out << (r == 0 ? "" : " ") << format_double(layer.biases[r]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_model: write failed for " + path.string());
}

DenseNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "spinecho-model" || version != 1) {
    throw std::runtime_error("load_model: unrecognized model file " + path.string());
  }
  std::string head_str;
  std::size_t n_layers = 0;
  in >> head_str >> n_layers;
  DenseNetwork net;
  if (head_str == "classifier") {
    net.head = Head::classifier;
  } else if (head_str == "regressor") {
    net.head = Head::regressor;
  } else {
    throw std::runtime_error("load_model: unknown head kind " + head_str);
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::string act;
    Eigen::Index fan_in = 0, fan_out = 0;
    in >> act >> fan_in >> fan_out;
    if (!in || fan_in < 1 || fan_out < 1) {
      throw std::runtime_error("load_model: malformed layer header");
    }
    Layer layer;
    layer.activation = activation_from_string(act);
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) in >> layer.weights(r, c);
    }
    layer.biases.resize(fan_out);
    for (Eigen::Index r = 0; r < fan_out; ++r) in >> layer.biases[r];
    if (!in) throw std::runtime_error("load_model: truncated weights");
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Dataset make_classifier_dataset(const Eigen::MatrixXd& windows, const Eigen::VectorXi& labels) {
  if (windows.cols() != labels.size()) {
    throw std::invalid_argument("make_classifier_dataset: label count mismatch");
  }
  Dataset data;
  data.inputs = windows;
  data.targets = Eigen::MatrixXd::Zero(2, labels.size());
  for (Eigen::Index k = 0; k < labels.size(); ++k) {
    if (labels[k] != 0 && labels[k] != 1) {
      throw std::invalid_argument("make_classifier_dataset: labels must be 0 or 1");
    }
    data.targets(labels[k] == 1 ? 0 : 1, k) = 1.0;
  }
  return data;
}

Dataset make_regression_dataset(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets_deg) {
  if (inputs.cols() != targets_deg.size()) {
    throw std::invalid_argument("make_regression_dataset: target count mismatch");
  }
  Dataset data;
  data.inputs = inputs;
  data.targets.resize(2, targets_deg.size());
  for (Eigen::Index k = 0; k < targets_deg.size(); ++k) {
    data.targets(0, k) = std::cos(deg_to_rad(targets_deg[k]));
    data.targets(1, k) = std::sin(deg_to_rad(targets_deg[k]));
  }
  return data;
}

}  // namespace spinecho
