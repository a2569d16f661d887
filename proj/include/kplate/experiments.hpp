#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kplate/estimator.hpp"

namespace kplate {

/// Malformed or out-of-range configuration input.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Preset { rigid, elastic, custom };
enum class RefinementMode { uniform, adaptive };

/// One run on the unit square. Defaults are the rigid obstacle experiment.
struct ExperimentConfig {
  Preset preset = Preset::rigid;
  int initial_subdivision = 4;
  RefinementMode mode = RefinementMode::adaptive;
  int steps = 5;  ///< solves; M refinements in adaptive mode
  double eps = 0.0;
  double alpha = 1e-5;
  double tol = 1e-10;
  double theta = 0.5;
  int max_iterations = 50;
  MeshSize mesh_size = MeshSize::longest_edge;
  double young = 1.0;
  double poisson = 0.0;
  double thickness = 1.0;
  std::string load = "-10";
  std::string obstacle = "-100*((x-0.5)^2+(y-0.5)^2)";  ///< "none" disables contact
  std::string output = "out";
  int resolution = 256;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig preset_defaults(Preset preset);

/// `key = value` lines, `#` comments. The preset line is applied first,
/// the remaining keys override its defaults.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError on a violated range. `where` prefixes the message.
void validate(const ExperimentConfig& config, const std::string& where = "config");

/// Canonical text: every key in fixed order, numbers with 17 significant digits.
std::string serialise(const ExperimentConfig& config);
/// serialise(parse_config_text(text))
std::string normalise(const std::string& text);

std::string to_string(Preset preset);
std::string to_string(RefinementMode mode);
Preset parse_preset(const std::string& text);
RefinementMode parse_mode(const std::string& text);
std::string to_string(MeshSize size);
MeshSize parse_mesh_size(const std::string& text);

ObstacleProblem make_problem(const ExperimentConfig& config);

struct HistoryRow {
  int step = 0;
  int n = 0;  ///< total DOFs
  double eta = 0.0;
  double s = 0.0;
  int iterations = 0;
  double contact_area_fraction = 0.0;
  bool converged = true;

  double eta_plus_s() const { return eta + s; }
};

void write_history_header(std::ostream& out);
void write_history_row(std::ostream& out, const HistoryRow& row);

/// Contact indicator lambda_h > 0 on the sampling grid; points outside the mesh are 0.
struct ContactRaster {
  int width = 0;
  int height = 0;
  std::vector<char> cells;  ///< row-major, y index outer

  char at(int i, int j) const { return cells[static_cast<std::size_t>(j) * width + i]; }
};

ContactRaster contact_raster(const FieldSamples& samples);

/// 4-connected components of the cells equal to `value`.
int count_components(const ContactRaster& raster, char value);

struct RunResult {
  std::vector<HistoryRow> history;
  std::vector<int> contact_components;     ///< per step
  std::vector<int> noncontact_components;  ///< per step
  std::optional<std::string> failure;      ///< linear solver breakdown
};

/// Solve the configured problem and write history.csv plus per-step
/// mesh_<k>.txt, solution_<k>.txt, field_<k>.csv and contact_<k>.csv.
RunResult run_experiment(const ExperimentConfig& config);
RunResult run_rigid(const ExperimentConfig& config);
RunResult run_elastic(const ExperimentConfig& config);

/// Log-log slope of eta + S against N over the last max(3, M - 2) rows.
double history_slope(std::span<const HistoryRow> history);

}  // namespace kplate
