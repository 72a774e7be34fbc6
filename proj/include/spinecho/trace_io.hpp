#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spinecho/baselines.hpp"
#include "spinecho/phase.hpp"
#include "spinecho/recognition.hpp"
#include "spinecho/types.hpp"

namespace spinecho {

/// 17 significant digits: enough for exact double round-trips.
std::string format_g17(double v);

void write_raw_trace_csv(const RawTrace& trace, const std::filesystem::path& path);
RawTrace read_raw_trace_csv(const std::filesystem::path& path);

void write_iq_trace_csv(const IQTrace& trace, const std::filesystem::path& path);
IQTrace read_iq_trace_csv(const std::filesystem::path& path);

void write_probability_trace_csv(const ProbabilityTrace& ptrace,
                                 const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;  ///< relative to the manifest's directory
  std::string label;
  int sequence = -1;  ///< j for storage traces, -1 otherwise
  double phi_half_deg = 0.0;
  double phi_pi_deg = 0.0;
  std::uint64_t seed = 0;
};

/// Dataset manifest: trace paths, labels and the generation parameters.
struct Manifest {
  std::string kind;  ///< "storage-retrieval" or "hahn"
  std::uint64_t seed = 0;
  SequenceTiming timing;
  HahnTiming hahn;
  SignalModel model;
  std::vector<ManifestEntry> traces;
};

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

/// Loads the 16 storage traces listed in a manifest, indexed by sequence
/// number. Throws with the missing sequence named when one is absent.
std::array<RawTrace, 16> load_storage_traces(const Manifest& manifest,
                                             const std::filesystem::path& manifest_path);

void write_fidelity_report(const FidelityReport& report, const std::filesystem::path& txt_path,
                           const std::filesystem::path& csv_path);

void write_scoreboard(const std::vector<MethodScore>& scores,
                      const std::filesystem::path& txt_path,
                      const std::filesystem::path& csv_path);

void write_sweep_result(const SweepResult& result, const std::filesystem::path& csv_path,
                        const std::filesystem::path& summary_path);

}  // namespace spinecho
