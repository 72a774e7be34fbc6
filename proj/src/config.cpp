#include "spinecho/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace spinecho {

namespace {

struct KeyEntry {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw std::invalid_argument("config: bad numeric value for " + key + ": '" + value + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw std::invalid_argument("config: bad integer value for " + key + ": '" + value + "'");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw std::invalid_argument("config: bad seed value for " + key + ": '" + value + "'");
  }
  return v;
}

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = [] {
    std::vector<KeyEntry> t;
    auto add_u64 = [&t](const std::string& name, std::uint64_t RunConfig::* member) {
      t.push_back({name,
                   [member](const RunConfig& c) { return std::to_string(c.*member); },
                   [member, name](RunConfig& c, const std::string& v) {
                     c.*member = parse_u64(name, v);
                   }});
    };
    auto add_int = [&t](const std::string& name, int RunConfig::* member) {
      t.push_back({name,
                   [member](const RunConfig& c) { return std::to_string(c.*member); },
                   [member, name](RunConfig& c, const std::string& v) {
                     c.*member = parse_int(name, v);
                   }});
    };
    auto add_str = [&t](const std::string& name, std::string RunConfig::* member) {
      t.push_back({name, [member](const RunConfig& c) { return c.*member; },
                   [member](RunConfig& c, const std::string& v) { c.*member = v; }});
    };
    auto add_dbl = [&t](const std::string& name, std::function<double&(RunConfig&)> ref) {
      t.push_back({name,
                   [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); },
                   [ref, name](RunConfig& c, const std::string& v) {
                     ref(c) = parse_double(name, v);
                   }});
    };
    auto add_int_ref = [&t](const std::string& name, std::function<int&(RunConfig&)> ref) {
      t.push_back({name,
                   [ref](const RunConfig& c) {
                     return std::to_string(ref(const_cast<RunConfig&>(c)));
                   },
                   [ref, name](RunConfig& c, const std::string& v) {
                     ref(c) = parse_int(name, v);
                   }});
    };

    add_u64("seed", &RunConfig::seed);
    add_str("out", &RunConfig::out_dir);

    add_dbl("amp0", [](RunConfig& c) -> double& { return c.model.amp0; });
    add_dbl("t_m_ns", [](RunConfig& c) -> double& { return c.model.t_m_ns; });
    add_dbl("env_sigma_ns", [](RunConfig& c) -> double& { return c.model.env_sigma_ns; });
    add_dbl("carrier_mhz", [](RunConfig& c) -> double& { return c.model.carrier_mhz; });
    add_dbl("noise_sigma", [](RunConfig& c) -> double& { return c.model.noise_sigma; });
    add_dbl("dt_ns", [](RunConfig& c) -> double& { return c.model.dt_ns; });

    add_dbl("t_p_ns", [](RunConfig& c) -> double& { return c.timing.t_p_ns; });
    add_dbl("t_d_ns", [](RunConfig& c) -> double& { return c.timing.t_d_ns; });
    add_dbl("tau_ns", [](RunConfig& c) -> double& { return c.timing.tau_ns; });
    add_dbl("t_pi_ns", [](RunConfig& c) -> double& { return c.timing.t_pi_ns; });
    add_int_ref("n_slots", [](RunConfig& c) -> int& { return c.timing.n_slots; });

    add_dbl("hahn_t_pi2_ns", [](RunConfig& c) -> double& { return c.hahn.t_pi2_ns; });
    add_dbl("hahn_t_pi_ns", [](RunConfig& c) -> double& { return c.hahn.t_pi_ns; });
    add_dbl("hahn_tau_ns", [](RunConfig& c) -> double& { return c.hahn.tau_ns; });
    add_dbl("hahn_noise_sigma", [](RunConfig& c) -> double& { return c.hahn_noise_sigma; });

    add_int("window_len", &RunConfig::window_len);
    add_int("stride", &RunConfig::stride);

    add_int("cls_n_per_class", &RunConfig::cls_n_per_class);
    add_int("cls_epochs", &RunConfig::cls_epochs);
    add_str("cls_hidden", &RunConfig::cls_hidden);

    add_dbl("phase_step_deg", [](RunConfig& c) -> double& { return c.phase_step_deg; });
    add_int("phase_reps", &RunConfig::phase_reps);
    add_int("phase_epochs", &RunConfig::phase_epochs);
    add_str("phase_hidden", &RunConfig::phase_hidden);

    add_dbl("learning_rate", [](RunConfig& c) -> double& { return c.learning_rate; });
    add_int("batch_size", &RunConfig::batch_size);
    add_str("optimizer", &RunConfig::optimizer);
    add_dbl("adam_beta1", [](RunConfig& c) -> double& { return c.adam_beta1; });
    add_dbl("adam_beta2", [](RunConfig& c) -> double& { return c.adam_beta2; });
    add_dbl("adam_eps", [](RunConfig& c) -> double& { return c.adam_eps; });
    add_dbl("validation_fraction",
            [](RunConfig& c) -> double& { return c.validation_fraction; });

    add_dbl("peak_height_sigmas", [](RunConfig& c) -> double& { return c.peak_height_sigmas; });
    add_dbl("prob_peak_height", [](RunConfig& c) -> double& { return c.prob_peak_height; });
    add_dbl("stress_noise_sigma", [](RunConfig& c) -> double& { return c.stress_noise_sigma; });
    return t;
  }();
  return table;
}

}  // namespace

SignalModel RunConfig::hahn_model() const {
  SignalModel m = model;
  m.noise_sigma = hahn_noise_sigma;
  return m;
}

void RunConfig::validate() const {
  model.validate();
  timing.validate();
  hahn.validate();
  if (hahn_noise_sigma < 0.0) throw std::invalid_argument("config: hahn_noise_sigma must be >= 0");
  if (window_len < 2) throw std::invalid_argument("config: window_len must be >= 2");
  if (stride < 1) throw std::invalid_argument("config: stride must be >= 1");
  if (cls_n_per_class < 1) throw std::invalid_argument("config: cls_n_per_class must be >= 1");
  if (cls_epochs < 0 || phase_epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
  if (phase_reps < 1) throw std::invalid_argument("config: phase_reps must be >= 1");
  if (!(phase_step_deg > 0.0 && phase_step_deg < 360.0)) {
    throw std::invalid_argument("config: phase_step_deg must be in (0, 360)");
  }
  if (optimizer != "adam" && optimizer != "sgd") {
    throw std::invalid_argument("config: optimizer must be adam or sgd");
  }
  parse_hidden_layers(cls_hidden);
  parse_hidden_layers(phase_hidden);
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const KeyEntry& entry : key_table()) {
    if (entry.name == key) {
      entry.set(cfg, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key=value: '" + line + "'");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  for (const KeyEntry& entry : key_table()) {
    out << entry.name << "=" << entry.get(cfg) << "\n";
  }
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const KeyEntry& entry : key_table()) keys.push_back(entry.name);
  return keys;
}

std::vector<int> parse_hidden_layers(const std::string& spec) {
  std::vector<int> widths;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const int w = parse_int("hidden layers", token);
    if (w < 1) throw std::invalid_argument("config: hidden layer widths must be >= 1");
    widths.push_back(w);
  }
  if (widths.empty()) throw std::invalid_argument("config: empty hidden layer list");
  return widths;
}

}  // namespace spinecho
