#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "micropolar/integrator.hpp"
#include "micropolar/verification.hpp"

namespace micropolar::cli {

struct GridConfig {
  int n = 128;
  double length = 32.0 * kPi;
};

/// Output paths are relative to the --out-dir directory unless absolute.
struct OutputConfig {
  std::string csv = "series.csv";
  std::string json = "report.json";
  /// Empty disables snapshots.
  std::string snapshot_dir;
  /// Every snapshot_stride-th sample is stored; 0 stores only the final state.
  int snapshot_stride = 0;
};

struct AnalysisConfig {
  int n = 128;
  double length = 2.0 * kPi;
};

/// Settings of the verify-* subcommands not covered by the run sections.
struct VerifyConfig {
  AnalysisConfig analysis;
  verify::GreenPreset green;
  std::vector<double> exponents{2.0, 4.0};
  double decay_from = 1.0;
  double flat_from = 10.0;
  int oscillation_n = 256;
  double oscillation_length = 2.0 * kPi;
};

/// Every field has a documented default; an empty document is valid and
/// reproduces the default small-data run.
struct RunConfig {
  std::uint64_t seed = 0;
  GridConfig grid;
  PhysicalParams params;
  IntegratorConfig integrator{0.2, Scheme::ETDRK2, 50.0, 5, true, true, {}};
  DataFamily data{DataKind::GAUSSIAN, 1.0, 0.0, 0, 0, 0.01};
  /// False when [data] has no seed; the run seed is used instead.
  bool data_seed_set = false;
  /// Empty means the single default probe ||(u, omega)||_{B^{1/2}_{2,inf}}.
  std::vector<Probe> probes;
  double continuation_window = 0.0;
  OutputConfig outputs;
  VerifyConfig verify;
  /// Snapshot read by the norms subcommand, relative to the config file.
  std::string norms_snapshot;
  /// Directory of the config file; empty for in-memory documents.
  std::string base_dir;

  GridSpec grid_spec() const { return GridSpec(grid.n, grid.length); }
  /// Data family with the seed resolved.
  DataFamily data_family() const;
  /// Probes actually evaluated.
  std::vector<Probe> effective_probes() const;
  verify::DynamicsPreset dynamics_preset() const;
};

/// Parses a TOML document and validates it. Throws ParseError (with line and
/// column) on malformed input and ValidationError listing every violation.
RunConfig parse_config(std::string_view text, std::string_view source = "config");
/// Reads the file and parses it; base_dir is set to the file's directory.
RunConfig load_config(const std::string& path);
/// Every violated cross-field rule of an assembled config.
std::vector<std::string> config_violations(const RunConfig& cfg);

enum class Subcommand { SIMULATE, VERIFY_ANALYSIS, VERIFY_GREEN, VERIFY_DYNAMICS, NORMS };
Subcommand parse_subcommand(const std::string& name);
const char* subcommand_name(Subcommand s) noexcept;

struct ExecOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

/// Runs the subcommand and writes its artifacts. Returns 0 when every verdict
/// passed, 1 on a failed verdict; errors propagate as exceptions.
int execute(const RunConfig& cfg, Subcommand cmd, const ExecOptions& opts, std::ostream& log);

/// Full command line entry point: maps exceptions to exit status 2.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------- formats

/// Writes to a temporary sibling and renames it over path. IoError on failure.
void atomic_write(const std::string& path, std::string_view bytes);

/// Header line of series.columns, then one row per sample, numbers in %.17g.
std::string series_csv(const TimeSeries& series);
/// One header line and one row.
std::string row_csv(const std::vector<std::string>& columns, const std::vector<double>& values);

/// Fields stored in a snapshot; all on one grid.
struct Snapshot {
  GridSpec grid;
  bool real = true;
  std::vector<ScalarField> fields;
};

/// Little-endian "MPSF" header {magic, version u32 = 1, n u32, L f64,
/// field count u32, reality u8} followed by interleaved complex f64
/// coefficients of each field in storage order.
std::string encode_snapshot(const std::vector<ScalarField>& fields);
/// Inverse of encode_snapshot; DomainError on a malformed buffer.
Snapshot decode_snapshot(std::string_view bytes);
void write_snapshot(const std::string& path, const State& s);
Snapshot read_snapshot(const std::string& path);
/// (u1, u2, u3, omega1, omega2, omega3) from a six-field snapshot.
State snapshot_state(const Snapshot& snap);

}  // namespace micropolar::cli
