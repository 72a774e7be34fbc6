#include "spinecho/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "spinecho/dsp.hpp"

namespace spinecho {

namespace {

using ordered_json = nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

std::vector<double> parse_csv_row(const std::string& line, std::size_t expected,
                                  const std::filesystem::path& path) {
  std::vector<double> values;
  const char* cursor = line.c_str();
  while (*cursor != '\0') {
    char* end = nullptr;
    values.push_back(std::strtod(cursor, &end));
    if (end == cursor) throw std::runtime_error("malformed CSV row in " + path.string());
    cursor = end;
    if (*cursor == ',') ++cursor;
  }
  if (values.size() != expected) {
    throw std::runtime_error("unexpected column count in " + path.string());
  }
  return values;
}

void expect_header(std::ifstream& in, const std::string& header,
                   const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error("expected header '" + header + "' in " + path.string());
  }
}

ordered_json timing_to_json(const SequenceTiming& t) {
  return {{"t_p_ns", t.t_p_ns},
          {"t_d_ns", t.t_d_ns},
          {"tau_ns", t.tau_ns},
          {"t_pi_ns", t.t_pi_ns},
          {"n_slots", t.n_slots}};
}

SequenceTiming timing_from_json(const ordered_json& j) {
  SequenceTiming t;
  t.t_p_ns = j.at("t_p_ns");
  t.t_d_ns = j.at("t_d_ns");
  t.tau_ns = j.at("tau_ns");
  t.t_pi_ns = j.at("t_pi_ns");
  t.n_slots = j.at("n_slots");
  return t;
}

ordered_json hahn_to_json(const HahnTiming& t) {
  return {{"t_pi2_ns", t.t_pi2_ns}, {"t_pi_ns", t.t_pi_ns}, {"tau_ns", t.tau_ns}};
}

HahnTiming hahn_from_json(const ordered_json& j) {
  HahnTiming t;
  t.t_pi2_ns = j.at("t_pi2_ns");
  t.t_pi_ns = j.at("t_pi_ns");
  t.tau_ns = j.at("tau_ns");
  return t;
}

ordered_json model_to_json(const SignalModel& m) {
  return {{"amp0", m.amp0},
          {"t_m_ns", m.t_m_ns},
          {"env_sigma_ns", m.env_sigma_ns},
          {"carrier_mhz", m.carrier_mhz},
          {"noise_sigma", m.noise_sigma},
          {"dt_ns", m.dt_ns}};
}

SignalModel model_from_json(const ordered_json& j) {
  SignalModel m;
  m.amp0 = j.at("amp0");
  m.t_m_ns = j.at("t_m_ns");
  m.env_sigma_ns = j.at("env_sigma_ns");
  m.carrier_mhz = j.at("carrier_mhz");
  m.noise_sigma = j.at("noise_sigma");
  m.dt_ns = j.at("dt_ns");
  return m;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_raw_trace_csv(const RawTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t_ns,v\n";
  for (Eigen::Index k = 0; k < trace.samples.size(); ++k) {
    out << format_g17(trace.time_at(k)) << "," << format_g17(trace.samples[k]) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RawTrace read_raw_trace_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_header(in, "t_ns,v", path);
  std::vector<double> times, values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = parse_csv_row(line, 2, path);
    times.push_back(row[0]);
    values.push_back(row[1]);
  }
  if (values.empty()) throw std::runtime_error("empty trace file: " + path.string());
  RawTrace trace;
  trace.samples = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                    static_cast<Eigen::Index>(values.size()));
  trace.t0_ns = times.front();
  trace.dt_ns = times.size() > 1 ? times[1] - times[0] : 1.0;
  return trace;
}

void write_iq_trace_csv(const IQTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t_ns,i,q\n";
  for (Eigen::Index k = 0; k < trace.i_samples.size(); ++k) {
    out << format_g17(trace.time_at(k)) << "," << format_g17(trace.i_samples[k]) << ","
        << format_g17(trace.q_samples[k]) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

IQTrace read_iq_trace_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_header(in, "t_ns,i,q", path);
  std::vector<double> times, i_values, q_values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = parse_csv_row(line, 3, path);
    times.push_back(row[0]);
    i_values.push_back(row[1]);
    q_values.push_back(row[2]);
  }
  if (i_values.empty()) throw std::runtime_error("empty trace file: " + path.string());
  IQTrace trace;
  trace.i_samples = Eigen::Map<const Eigen::VectorXd>(
      i_values.data(), static_cast<Eigen::Index>(i_values.size()));
  trace.q_samples = Eigen::Map<const Eigen::VectorXd>(
      q_values.data(), static_cast<Eigen::Index>(q_values.size()));
  trace.t0_ns = times.front();
  trace.dt_ns = times.size() > 1 ? times[1] - times[0] : 1.0;
  return trace;
}

void write_probability_trace_csv(const ProbabilityTrace& ptrace,
                                 const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t_ns,p_e\n";
  for (std::size_t k = 0; k < ptrace.p_e.size(); ++k) {
    out << format_g17(ptrace.times_ns[k]) << "," << format_g17(ptrace.p_e[k]) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  ordered_json j;
  j["kind"] = manifest.kind;
  j["seed"] = manifest.seed;
  j["timing"] = timing_to_json(manifest.timing);
  j["hahn_timing"] = hahn_to_json(manifest.hahn);
  j["model"] = model_to_json(manifest.model);
  j["traces"] = ordered_json::array();
  for (const ManifestEntry& e : manifest.traces) {
    j["traces"].push_back({{"path", e.path},
                           {"label", e.label},
                           {"sequence", e.sequence},
                           {"phi_half_deg", e.phi_half_deg},
                           {"phi_pi_deg", e.phi_pi_deg},
                           {"seed", e.seed}});
  }
  auto out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  auto in = open_in(path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed manifest " + path.string() + ": " + e.what());
  }
  Manifest manifest;
  manifest.kind = j.at("kind");
  manifest.seed = j.at("seed");
  manifest.timing = timing_from_json(j.at("timing"));
  manifest.hahn = hahn_from_json(j.at("hahn_timing"));
  manifest.model = model_from_json(j.at("model"));
  for (const auto& t : j.at("traces")) {
    ManifestEntry e;
    e.path = t.at("path");
    e.label = t.at("label");
    e.sequence = t.at("sequence");
    e.phi_half_deg = t.at("phi_half_deg");
    e.phi_pi_deg = t.at("phi_pi_deg");
    e.seed = t.at("seed");
    manifest.traces.push_back(std::move(e));
  }
  return manifest;
}

std::array<RawTrace, 16> load_storage_traces(const Manifest& manifest,
                                             const std::filesystem::path& manifest_path) {
  if (manifest.kind != "storage-retrieval") {
    throw std::runtime_error("manifest is not a storage-retrieval set: " + manifest.kind);
  }
  const auto base = manifest_path.parent_path();
  std::array<RawTrace, 16> traces;
  std::array<bool, 16> seen{};
  for (const ManifestEntry& e : manifest.traces) {
    if (e.sequence < 0 || e.sequence > 15) continue;
    RawTrace trace = read_raw_trace_csv(base / e.path);
    trace.meta = e.label;
    traces[static_cast<std::size_t>(e.sequence)] = std::move(trace);
    seen[static_cast<std::size_t>(e.sequence)] = true;
  }
  for (int j = 0; j < 16; ++j) {
    if (!seen[static_cast<std::size_t>(j)]) {
      throw std::runtime_error("manifest is missing the trace for sequence j=" +
                               std::to_string(j) + " (" +
                               BitSequence::from_decimal(j).to_string() + ")");
    }
  }
  return traces;
}

void write_fidelity_report(const FidelityReport& report, const std::filesystem::path& txt_path,
                           const std::filesystem::path& csv_path) {
  {
    auto csv = open_out(csv_path);
    csv << "i,j,F_percent\n";
    for (int i = 1; i <= 4; ++i) {
      for (int j = 0; j < 16; ++j) {
        csv << i << "," << j << "," << format_g17(report.f(i - 1, j)) << "\n";
      }
    }
    if (!csv) throw std::runtime_error("write failed: " + csv_path.string());
  }
  auto txt = open_out(txt_path);
  txt << "method: " << report.method << "\n";
  txt << "fidelity F_i^j (percent); rows i = 1..4 (input order), columns j = 0..15\n";
  txt << std::fixed << std::setprecision(2);
  for (int i = 0; i < 4; ++i) {
    txt << "i=" << i + 1 << ":";
    for (int j = 0; j < 16; ++j) txt << " " << std::setw(6) << report.f(i, j);
    txt << "\n";
  }
  txt << "average fidelity per bit (mean +- std over the 16 sequences):\n";
  for (int i = 0; i < 4; ++i) {
    txt << "F_" << i + 1 << " = " << report.f_avg[static_cast<std::size_t>(i)] << " +- "
        << report.f_std[static_cast<std::size_t>(i)] << "\n";
  }
  if (!txt) throw std::runtime_error("write failed: " + txt_path.string());
}

void write_scoreboard(const std::vector<MethodScore>& scores,
                      const std::filesystem::path& txt_path,
                      const std::filesystem::path& csv_path) {
  {
    auto csv = open_out(csv_path);
    csv << "method,success_percent,f1_avg,f1_std,f2_avg,f2_std,f3_avg,f3_std,f4_avg,f4_std\n";
    for (const MethodScore& s : scores) {
      csv << s.method << "," << format_g17(s.success_percent);
      for (std::size_t i = 0; i < 4; ++i) {
        csv << "," << format_g17(s.f_avg[i]) << "," << format_g17(s.f_std[i]);
      }
      csv << "\n";
    }
    if (!csv) throw std::runtime_error("write failed: " + csv_path.string());
  }
  auto txt = open_out(txt_path);
  txt << std::left << std::setw(18) << "method" << std::right << std::setw(10) << "%success";
  for (int i = 1; i <= 4; ++i) {
    txt << std::setw(16) << ("F" + std::to_string(i) + " (avg+-std)");
  }
  txt << "\n";
  txt << std::fixed << std::setprecision(1);
  for (const MethodScore& s : scores) {
    txt << std::left << std::setw(18) << s.method << std::right << std::setw(10)
        << s.success_percent;
    for (std::size_t i = 0; i < 4; ++i) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(1) << s.f_avg[i] << "+-" << s.f_std[i];
      txt << std::setw(16) << cell.str();
    }
    txt << "\n";
  }
  if (!txt) throw std::runtime_error("write failed: " + txt_path.string());
}

void write_sweep_result(const SweepResult& result, const std::filesystem::path& csv_path,
                        const std::filesystem::path& summary_path) {
  {
    auto csv = open_out(csv_path);
    csv << "phi_in_deg,phi_pred_deg,phi_oracle_deg\n";
    for (std::size_t k = 0; k < result.input_phases_deg.size(); ++k) {
      csv << format_g17(result.input_phases_deg[k]) << "," << format_g17(result.predicted_deg[k])
          << "," << format_g17(result.oracle_deg[k]) << "\n";
    }
    if (!csv) throw std::runtime_error("write failed: " + csv_path.string());
  }
  auto txt = open_out(summary_path);
  txt << "points " << result.input_phases_deg.size() << "\n";
  txt << "slope " << format_g17(result.slope) << "\n";
  txt << "period_deg " << format_g17(result.period_deg) << "\n";
  txt << "bias_deg " << format_g17(result.bias_deg) << "\n";
  txt << "mae_vs_oracle_deg "
      << format_g17(mean_abs_angular_error_deg(result.predicted_deg, result.oracle_deg)) << "\n";
  if (!txt) throw std::runtime_error("write failed: " + summary_path.string());
}

}  // namespace spinecho
