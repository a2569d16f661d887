#include "kplate/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "kplate/expression.hpp"

namespace kplate {

namespace {

constexpr const char* kRigidObstacle = "-100*((x-0.5)^2+(y-0.5)^2)";
constexpr const char* kElasticObstacle = "rect(0.3,0.7,0.3,0.7)-1";
constexpr const char* kPresetLoad = "-10";

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError(where + ": '" + text + "' is not a finite number");
  return v;
}

template <class Int>
Int parse_integer(const std::string& text, const std::string& where) {
  Int v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw ConfigError(where + ": '" + text + "' is not an integer");
  return v;
}

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) throw ConfigError(where + ": " + what);
}

using Setter = void (*)(ExperimentConfig&, const std::string&, const std::string&);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"n", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
         c.initial_subdivision = parse_integer<int>(v, w);
       }},
      {"mode", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
         try {
           c.mode = parse_mode(v);
         } catch (const InvalidArgument& e) {
           throw ConfigError(w + ": " + e.what());
         }
       }},
      {"steps", [](ExperimentConfig& c, const std::string& v, const std::string& w) { c.steps = parse_integer<int>(v, w); }},
      {"eps", [](ExperimentConfig& c, const std::string& v, const std::string& w) { c.eps = parse_double(v, w); }},
      {"alpha", [](ExperimentConfig& c, const std::string& v, const std::string& w) { c.alpha = parse_double(v, w); }},
      {"tol", [](ExperimentConfig& c, const std::string& v, const std::string& w) { c.tol = parse_double(v, w); }},
      {"theta", [](ExperimentConfig& c, const std::string& v, const std::string& w) { c.theta = parse_double(v, w); }},
      {"max_iterations", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
         c.max_iterations = parse_integer<int>(v, w);
       }},
      {"mesh_size", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
         try {
           c.mesh_size = parse_mesh_size(v);
         } catch (const InvalidArgument& e) {
           throw ConfigError(w + ": " + e.what());
         }
       }},
      {"E", [](ExperimentConfig& c, const std::string& v, const std::string& w) { c.young = parse_double(v, w); }},
      {"nu", [](ExperimentConfig& c, const std::string& v, const std::string& w) { c.poisson = parse_double(v, w); }},
      {"d", [](ExperimentConfig& c, const std::string& v, const std::string& w) { c.thickness = parse_double(v, w); }},
      {"load", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.load = v; }},
      {"obstacle", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.obstacle = v; }},
      {"out", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.output = v; }},
      {"resolution", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
         c.resolution = parse_integer<int>(v, w);
       }},
      {"seed", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
         c.seed = parse_integer<std::uint64_t>(v, w);
       }},
  };
  return table;
}

void check_expression(const std::string& text, const std::string& where) {
  try {
    (void)Expression::parse(text);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

std::string to_string(Preset preset) {
  switch (preset) {
    case Preset::rigid: return "rigid";
    case Preset::elastic: return "elastic";
    case Preset::custom: return "custom";
  }
  return "custom";
}

std::string to_string(RefinementMode mode) { return mode == RefinementMode::uniform ? "uniform" : "adaptive"; }

Preset parse_preset(const std::string& text) {
  if (text == "rigid") return Preset::rigid;
  if (text == "elastic") return Preset::elastic;
  if (text == "custom") return Preset::custom;
  throw InvalidArgument("unknown preset '" + text + "' (expected rigid, elastic or custom)");
}

RefinementMode parse_mode(const std::string& text) {
  if (text == "uniform") return RefinementMode::uniform;
  if (text == "adaptive") return RefinementMode::adaptive;
  throw InvalidArgument("unknown mode '" + text + "' (expected uniform or adaptive)");
}

std::string to_string(MeshSize size) { return size == MeshSize::area ? "area" : "longest_edge"; }

MeshSize parse_mesh_size(const std::string& text) {
  if (text == "longest_edge") return MeshSize::longest_edge;
  if (text == "area") return MeshSize::area;
  throw InvalidArgument("unknown mesh_size '" + text + "' (expected longest_edge or area)");
}

ExperimentConfig preset_defaults(Preset preset) {
  ExperimentConfig c;
  c.preset = preset;
  c.load = kPresetLoad;
  switch (preset) {
    case Preset::rigid:
      c.obstacle = kRigidObstacle;
      c.eps = 0.0;
      break;
    case Preset::elastic:
      c.obstacle = kElasticObstacle;
      c.eps = 1e-3;
      break;
    case Preset::custom:
      c.obstacle = kRigidObstacle;
      break;
  }
  return c;
}

namespace {

void validate_ranges(const ExperimentConfig& c, const std::string& where) {
  require(c.initial_subdivision >= 1, where, "n must be at least 1");
  require(c.steps >= 1, where, "steps must be at least 1");
  require(c.eps >= 0.0, where, "eps must be non-negative");
  require(c.alpha > 0.0, where, "alpha must be positive");
  require(c.tol > 0.0, where, "tol must be positive");
  require(c.theta > 0.0 && c.theta < 1.0, where, "theta must lie in (0, 1)");
  require(c.max_iterations >= 1, where, "max_iterations must be at least 1");
  require(c.young > 0.0, where, "E must be positive");
  require(c.poisson >= 0.0 && c.poisson < 0.5, where, "nu must lie in [0, 0.5)");
  require(c.thickness > 0.0, where, "d must be positive");
  require(c.resolution >= 1, where, "resolution must be at least 1");
  require(!c.output.empty(), where, "out must not be empty");
  check_expression(c.load, where);
  if (c.obstacle != "none") check_expression(c.obstacle, where);
}

void validate_preset(const ExperimentConfig& c, const std::string& where) {
  if (c.preset == Preset::rigid) require(c.eps == 0.0, where, "the rigid preset requires eps = 0");
  if (c.preset == Preset::elastic) require(c.eps > 0.0, where, "the elastic preset requires eps > 0");
  if (c.preset != Preset::custom) {
    const ExperimentConfig d = preset_defaults(c.preset);
    require(c.load == d.load && c.obstacle == d.obstacle, where, "load and obstacle are fixed by the preset");
  }
}

}  // namespace

void validate(const ExperimentConfig& c, const std::string& where) {
  validate_ranges(c, where);
  validate_preset(c, where);
}

ExperimentConfig parse_config(std::istream& in) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (value.empty()) throw ConfigError(where + ": missing value for '" + key + "'");
    if (key != "preset" && !setters().contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (entries.contains(key))
      throw ConfigError(where + ": duplicate key '" + key + "' (first set on line " +
                        std::to_string(entries[key].line) + ")");
    entries[key] = {value, line_no};
    order.push_back(key);
  }

  Preset preset = Preset::rigid;
  if (auto it = entries.find("preset"); it != entries.end()) {
    try {
      preset = parse_preset(it->second.value);
    } catch (const InvalidArgument& e) {
      throw ConfigError("line " + std::to_string(it->second.line) + ": " + e.what());
    }
  }
  ExperimentConfig c = preset_defaults(preset);
  for (const std::string& key : order) {
    if (key == "preset") continue;
    const Entry& e = entries[key];
    const std::string where = "line " + std::to_string(e.line);
    if ((key == "load" || key == "obstacle") && preset != Preset::custom)
      throw ConfigError(where + ": '" + key + "' may only be set with preset = custom");
    setters().at(key)(c, e.value, where);
    // Earlier keys already passed, so a range error belongs to this line.
    validate_ranges(c, where);
  }
  validate_preset(c, entries.contains("eps") ? "line " + std::to_string(entries["eps"].line) : "config");
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ", " + e.what());
  }
}

std::string serialise(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "preset = " << to_string(c.preset) << '\n'
      << "n = " << c.initial_subdivision << '\n'
      << "mode = " << to_string(c.mode) << '\n'
      << "steps = " << c.steps << '\n'
      << "eps = " << format_double(c.eps) << '\n'
      << "alpha = " << format_double(c.alpha) << '\n'
      << "tol = " << format_double(c.tol) << '\n'
      << "theta = " << format_double(c.theta) << '\n'
      << "max_iterations = " << c.max_iterations << '\n'
      << "mesh_size = " << to_string(c.mesh_size) << '\n'
      << "E = " << format_double(c.young) << '\n'
      << "nu = " << format_double(c.poisson) << '\n'
      << "d = " << format_double(c.thickness) << '\n';
  if (c.preset == Preset::custom) {
    out << "load = " << c.load << '\n' << "obstacle = " << c.obstacle << '\n';
  }
  out << "out = " << c.output << '\n' << "resolution = " << c.resolution << '\n' << "seed = " << c.seed << '\n';
  return out.str();
}

std::string normalise(const std::string& text) { return serialise(parse_config_text(text)); }

ObstacleProblem make_problem(const ExperimentConfig& c) {
  validate(c);
  ObstacleProblem p;
  p.plate = PlateModel(c.young, c.poisson, c.thickness);
  const Expression load = Expression::parse(c.load);
  p.load = [load](Point x) { return load(x); };
  if (c.obstacle != "none") {
    const Expression obstacle = Expression::parse(c.obstacle);
    p.obstacle = [obstacle](Point x) { return obstacle(x); };
  }
  p.compliance = c.eps;
  p.stabilisation = c.alpha;
  p.tolerance = c.tol;
  p.max_iterations = c.max_iterations;
  p.mesh_size = c.mesh_size;
  return p;
}

void write_history_header(std::ostream& out) {
  out << "step,N,eta,S,eta_plus_S,solver_iterations,contact_area_fraction,converged\n";
}

void write_history_row(std::ostream& out, const HistoryRow& r) {
  out << r.step << ',' << r.n << ',' << format_double(r.eta) << ',' << format_double(r.s) << ','
      << format_double(r.eta_plus_s()) << ',' << r.iterations << ',' << format_double(r.contact_area_fraction) << ','
      << (r.converged ? 1 : 0) << '\n';
}

ContactRaster contact_raster(const FieldSamples& samples) {
  ContactRaster r;
  r.width = samples.resolution + 1;
  r.height = samples.resolution + 1;
  r.cells.resize(samples.points.size());
  for (std::size_t i = 0; i < samples.points.size(); ++i)
    r.cells[i] = samples.inside[i] && samples.reaction[i] > 0.0 ? 1 : 0;
  return r;
}

int count_components(const ContactRaster& raster, char value) {
  std::vector<char> seen(raster.cells.size(), 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int j = 0; j < raster.height; ++j) {
    for (int i = 0; i < raster.width; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * raster.width + i;
      if (seen[idx] || raster.cells[idx] != value) continue;
      ++components;
      seen[idx] = 1;
      stack.push_back({i, j});
      while (!stack.empty()) {
        const auto [ci, cj] = stack.back();
        stack.pop_back();
        constexpr int di[] = {1, -1, 0, 0};
        constexpr int dj[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int ni = ci + di[k];
          const int nj = cj + dj[k];
          if (ni < 0 || nj < 0 || ni >= raster.width || nj >= raster.height) continue;
          const std::size_t n = static_cast<std::size_t>(nj) * raster.width + ni;
          if (seen[n] || raster.cells[n] != value) continue;
          seen[n] = 1;
          stack.push_back({ni, nj});
        }
      }
    }
  }
  return components;
}

namespace {

void write_step_files(const std::filesystem::path& dir, int k, const RefinementStep& step, const FieldSamples& samples,
                      const ContactRaster& raster) {
  const std::string suffix = std::to_string(k);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
    return f;
  };
  {
    auto f = open("mesh_" + suffix + ".txt");
    write_mesh(f, *step.mesh);
  }
  {
    auto f = open("solution_" + suffix + ".txt");
    write_solution(f, step.solution);
  }
  {
    auto f = open("field_" + suffix + ".csv");
    f << "x,y,u,lambda\n";
    for (std::size_t i = 0; i < samples.points.size(); ++i)
      f << format_double(samples.points[i].x) << ',' << format_double(samples.points[i].y) << ','
        << format_double(samples.displacement[i]) << ',' << format_double(samples.reaction[i]) << '\n';
  }
  {
    auto f = open("contact_" + suffix + ".csv");
    f << "x,y,contact\n";
    for (std::size_t i = 0; i < samples.points.size(); ++i)
      f << format_double(samples.points[i].x) << ',' << format_double(samples.points[i].y) << ','
        << static_cast<int>(raster.cells[i]) << '\n';
  }
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  const ObstacleProblem problem = make_problem(config);
  const std::filesystem::path dir(config.output);
  std::filesystem::create_directories(dir);
  std::ofstream history(dir / "history.csv");
  if (!history) throw std::runtime_error("cannot write '" + (dir / "history.csv").string() + "'");
  write_history_header(history);
  history.flush();

  RunResult result;
  int k = 0;
  auto on_step = [&](const RefinementStep& step) {
    HistoryRow row;
    row.step = k;
    row.n = step.num_dofs;
    row.eta = step.errors.eta;
    row.s = step.errors.s;
    row.iterations = step.solution.iterations;
    row.converged = step.solution.converged;
    row.contact_area_fraction = reaction_field(step.solution).contact_area / step.mesh->area();
    write_history_row(history, row);
    history.flush();

    const FieldSamples samples = sample_field(step.solution, config.resolution);
    const ContactRaster raster = contact_raster(samples);
    result.contact_components.push_back(count_components(raster, 1));
    result.noncontact_components.push_back(count_components(raster, 0));
    write_step_files(dir, k, step, samples, raster);
    result.history.push_back(row);
    ++k;
  };

  auto mesh = std::make_shared<const Mesh>(build_structured_unit_square(config.initial_subdivision));
  const RefinementHistory h = config.mode == RefinementMode::adaptive
                                  ? adaptive_solve(problem, mesh, config.steps, config.theta, on_step)
                                  : uniform_solve(problem, mesh, config.steps, on_step);
  result.failure = h.failure;
  return result;
}

RunResult run_rigid(const ExperimentConfig& config) {
  if (config.preset != Preset::rigid) throw ConfigError("run_rigid needs preset = rigid");
  return run_experiment(config);
}

RunResult run_elastic(const ExperimentConfig& config) {
  if (config.preset != Preset::elastic) throw ConfigError("run_elastic needs preset = elastic");
  return run_experiment(config);
}

double history_slope(std::span<const HistoryRow> history) {
  const std::size_t m = history.size();
  const std::size_t count = std::min(m, std::max<std::size_t>(3, m >= 2 ? m - 2 : 0));
  std::vector<double> n;
  std::vector<double> err;
  for (std::size_t i = m - count; i < m; ++i) {
    n.push_back(history[i].n);
    err.push_back(history[i].eta_plus_s());
  }
  return convergence_slope(n, err);
}

}  // namespace kplate
