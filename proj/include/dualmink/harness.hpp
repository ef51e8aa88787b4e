// Run configuration, sweeps, result files and the command implementations
// behind the command-line tool.
#ifndef DUALMINK_HARNESS_HPP
#define DUALMINK_HARNESS_HPP

#include "dualmink/fspec.hpp"
#include "dualmink/solver.hpp"
#include "dualmink/verifier.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dualmink {

struct RunConfig {
  int dim = 1;
  Resolution resolution{256, 0};
  DiffScheme scheme = DiffScheme::spectral;
  std::string f = "1";
  SolverConfig solver;
  std::string output = "out";
  std::uint64_t seed = 1;

  GridPtr grid() const { return SphereGrid::build(dim, resolution, scheme); }
  /// Throws ParseError for an odd or malformed f.
  FSpec density() const { return parse_fspec(f, dim); }
  bool operator==(const RunConfig&) const = default;
};

/// [run] plus [solver]. Missing keys keep their defaults; the f text is
/// parsed so that odd modes fail here.
RunConfig read_run_config(const Document& doc);
void write_run_config(Document& doc, const RunConfig& cfg);

struct SweepSpec {
  int dim = 1;
  Resolution resolution{256, 0};
  DiffScheme scheme = DiffScheme::spectral;
  std::vector<double> q;
  std::vector<double> epsilon;
  std::vector<std::string> modes;  // e.g. "cos(2θ)" or "Yc(2,0)"
  int repetitions = 1;
  std::uint64_t seed = 1;
  int max_runs = 1000;
  SolverConfig solver;

  bool operator==(const SweepSpec&) const = default;
};

struct SweepRow {
  int index = 0;
  int repetition = 0;
  double q = 0.0;
  double epsilon = 0.0;
  std::string mode;
  std::uint64_t seed = 0;
};

SweepSpec read_sweep_spec(const Document& doc);
void write_sweep_spec(Document& doc, const SweepSpec& spec);

/// Cartesian product q x epsilon x mode x repetition. Throws
/// std::invalid_argument when empty or larger than max_runs.
std::vector<SweepRow> run_matrix(const SweepSpec& spec);

/// Full verification of a solved body.
struct VerifyReport {
  StabilityReport stability;
  BoundsSummary bounds;
  DualDensity density;
  double density_error = 0.0;  // max |g/f - 1|
  int spectral_trials = 0;
  int spectral_failures = 0;
  double spectral_min_margin = 0.0;  // min (rhs - lhs) / rhs
  InequalityCheck x_alpha;
  bool stability_range = true;
  bool pass = false;
};

VerifyReport verify_body(const SupportFunction& h, const Field& f, double q, std::uint64_t seed,
                         int spectral_trials = 100);
void write_verify_report(Document& doc, const VerifyReport& r);

/// Everything the commands need besides paths.
struct CommandOptions {
  std::uint64_t seed = 1;
  bool seed_set = false;
  int workers = 1;
  bool override_q_range = false;
};

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitUsage = 2 };

int cmd_solve(const std::filesystem::path& config, const std::filesystem::path& out, const CommandOptions& opt,
              std::ostream& log);
int cmd_verify(const std::filesystem::path& result, const std::filesystem::path& out, const CommandOptions& opt,
               std::ostream& log);
int cmd_sweep(const std::filesystem::path& spec, const std::filesystem::path& out_dir, const CommandOptions& opt,
              std::ostream& log);
int cmd_plot(const std::filesystem::path& result, const std::filesystem::path& out, std::ostream& log);
int cmd_manufacture(const std::filesystem::path& config, const std::filesystem::path& out, const CommandOptions& opt,
                    std::ostream& log);

/// Column order of the sweep summary.
extern const char* const kSweepColumns;

}  // namespace dualmink

#endif  // DUALMINK_HARNESS_HPP
