#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kslab/construction.hpp"
#include "kslab/evolution.hpp"
#include "kslab/verification.hpp"

namespace kslab::cli {

struct GridBlock {
  int d = 2;
  int points_per_axis = 0;  // 0: sized from the construction
  double box_length = 0.0;  // 0: sized from the construction
};

struct ConstructionBlock {
  double r = 1.0;
  int m = 4;
  std::vector<int> m_sweep;
  std::vector<double> K{0.0};
  std::vector<int> count_sweep{1, 2, 3, 4};
  double beta = 0.4;
  std::optional<std::vector<double>> offsets;  // unset: automatic spacing
  double count_factor = -1.0;
  double separation_gap = 8.0;
  std::optional<double> separation_units;  // unset: calibrate when needed
};

struct SolverBlock {
  evolution::Integrator integrator = evolution::Integrator::if_rk4;
  int steps = 0;
  double dealias_fraction = 2.0 / 3.0;
  int quadrature_nodes = 64;
  int time_steps = 8;
  std::vector<double> epsilon{0.0625};
  std::vector<double> epsilon_sweep{0.125, 0.0625, 0.03125};
};

struct ChecksBlock {
  std::vector<std::string> enabled;  // empty: every check
  int corpus_size = 0;  // 0: each check's own default
  std::uint64_t seed = 12;
};

struct OutputBlock {
  std::string directory = "kslab-out";
  std::vector<std::string> formats{"csv"};
};

struct ExperimentConfig {
  GridBlock grid;
  ConstructionBlock construction;
  SolverBlock solver;
  ChecksBlock checks;
  OutputBlock output;
};

// Parses and validates; throws ParseError or ValidationError carrying every
// violation with the line of the offending key when it can be located.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
std::vector<std::string> validate(const ExperimentConfig& cfg);
// Canonical JSON with every default spelled out.
std::string dump_config(const ExperimentConfig& cfg);

// Construction parameters and grid derived from a config.
struct Setup {
  construction::ConstructionParams params;
  construction::AtomSpec spec;
  spectral::GridSpec grid;
};
// Parameters only; the grid is left empty.
Setup setup_from(const ExperimentConfig& cfg);
// Parameters plus a grid: the configured one (box snapped onto the carrier
// lattice) or, when points or box length are 0, one sized from the construction.
Setup setup_with_grid(const ExperimentConfig& cfg);

std::uint64_t fnv1a(const std::string& bytes);

// Deterministic report writers. CSV fields are printed with 17 significant digits.
std::string report_csv(const verification::CheckReport& rep);
std::string report_json(const verification::CheckReport& rep);
std::string report_summary(const verification::CheckReport& rep);

struct Series {
  std::string name;
  std::string x_label, y_label;
  std::vector<double> x, y;
};
std::vector<Series> experiment_series(const verification::ExperimentReport& rep);
std::string series_csv(const Series& s);
std::string experiment_records_csv(const verification::ExperimentReport& rep);

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<std::string> out;
  std::string format = "csv";
};

// Collects the files of one run and writes them with a manifest.
class Artifacts {
 public:
  Artifacts(std::string directory, std::string command, const ExperimentConfig& cfg, std::uint64_t seed);
  void add(const std::string& name, const std::string& bytes);
  void add_binary_file(const std::string& name);  // already written under dir()
  const std::string& dir() const { return dir_; }
  // Writes manifest.json; returns its path.
  std::string finish();

 private:
  std::string dir_, command_, config_dump_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::uint64_t>> files_;
};

enum ExitCode { kPass = 0, kCheckFailure = 1, kConfigError = 2, kRuntimeError = 3 };

// Entry point shared by the executable and the tests.
int run(int argc, char** argv);

}  // namespace kslab::cli
