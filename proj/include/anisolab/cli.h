#ifndef ANISOLAB_CLI_H_
#define ANISOLAB_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisolab/exponents.h"
#include "anisolab/lattice.h"
#include "json.hpp"

namespace anisolab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitBadConfig = 2,
  kExitNotConverged = 3,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  Box box{{0.0}, {1.0}};
  std::vector<std::size_t> nodes;
  ExponentVector exponents{2.0};
  std::string boundary_expression;  // used when boundary_file is unset
  std::optional<std::filesystem::path> boundary_file;
  std::optional<double> epsilon;
  double tol = 1e-9;
  std::size_t max_iter = 100000;
};

struct GeometrySweep {
  Point center;  // box center when absent from the config
  std::vector<double> rho{0.25};
  std::vector<std::optional<double>> alpha{std::nullopt};
  std::vector<int> q{1};
  std::vector<double> sigma{0.5};
  std::optional<std::pair<double, double>> levels;
};

struct DecaySpec {
  Point center;
  std::size_t levels = 10;
  double rho0 = 0.45;
  int q = 0;
  std::size_t min_nodes = 4;
  double residual_limit = 0.1;
  std::size_t pairs = 10000;
  double required_fraction = 0.99;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  std::vector<std::string> checks;
  GeometrySweep geometry;
  DecaySpec decay;
  std::uint64_t seed = 20240601;
  std::size_t weak_trials = 200;
  // Multiplier on the solver tolerance for the weak residual check.
  double weak_factor = 10.0;
  std::size_t structure_samples = 2000;
  double poincare_tolerance = 0.05;
  std::optional<std::string> output;
};

const std::vector<std::string>& known_checks();

// Throws ConfigError on any schema problem, unknown check names included
// (all offending names are listed). Relative boundary files resolve
// against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

GridFunction boundary_data(const ProblemSpec& problem,
                           const std::filesystem::path& base_dir = {});

struct RunOptions {
  std::string verb;  // solve, check, sweep, report
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::size_t jobs = 1;
};

// Output directory: --out when given, else <root>/<config output or name>
// with root from ANISOLAB_OUTPUT_ROOT (default "anisolab-out").
std::filesystem::path output_directory(const RunOptions& options,
                                       const ExperimentConfig& config);

int run(const RunOptions& options, std::ostream& out, std::ostream& err);

// Table of every report JSON in dir: fail rows first, then by file name.
int report(const std::filesystem::path& dir, std::ostream& out,
           std::ostream& err);

// Parses argv with CLI11 and dispatches.
int main(int argc, char** argv);

}  // namespace anisolab::cli

#endif  // ANISOLAB_CLI_H_
