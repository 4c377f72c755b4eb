#include "saapde/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "saapde/errors.hpp"
#include "saapde/mesh.hpp"

namespace saapde {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("config field '" + path + "': " + message);
}

const json* find(const json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <class T>
T get_as(const json& j, const std::string& path);

template <>
double get_as<double>(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

template <>
int get_as<int>(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

template <>
std::uint64_t get_as<std::uint64_t>(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer()) {
    fail(path, "expected a non-negative integer");
  }
  if (j.is_number_integer() && j.get<long long>() < 0) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

template <>
std::string get_as<std::string>(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

template <class T>
void read(const json& parent, const std::string& base, const std::string& key,
          T& out) {
  if (const json* j = find(parent, key)) out = get_as<T>(*j, base + key);
}

void read_int_list(const json& parent, const std::string& base,
                   const std::string& key, std::vector<int>& out) {
  const json* j = find(parent, key);
  if (!j) return;
  if (!j->is_array()) fail(base + key, "expected an array of integers");
  out.clear();
  for (std::size_t i = 0; i < j->size(); ++i) {
    out.push_back(get_as<int>((*j)[i], base + key + "[" + std::to_string(i) + "]"));
  }
}

void read_scalar_or_list(const json& parent, const std::string& base,
                         const std::string& key, std::vector<double>& out) {
  const json* j = find(parent, key);
  if (!j) return;
  out.clear();
  if (j->is_number()) {
    out.push_back(j->get<double>());
    return;
  }
  if (!j->is_array()) fail(base + key, "expected a number or array");
  for (std::size_t i = 0; i < j->size(); ++i) {
    out.push_back(get_as<double>((*j)[i], base + key + "[" + std::to_string(i) + "]"));
  }
}

std::vector<ModeConfig> read_modes(const json& parent, const std::string& base) {
  std::vector<ModeConfig> modes;
  const json* j = find(parent, "modes");
  if (!j) return modes;
  if (!j->is_array()) fail(base + "modes", "expected an array");
  for (std::size_t i = 0; i < j->size(); ++i) {
    const std::string path = base + "modes[" + std::to_string(i) + "].";
    const json& jm = (*j)[i];
    if (!jm.is_object()) fail(path, "expected an object");
    ModeConfig mode;
    read(jm, path, "shape", mode.shape);
    read(jm, path, "frequency", mode.frequency);
    read(jm, path, "amplitude", mode.amplitude);
    read(jm, path, "parameter", mode.parameter);
    parse_shape(mode.shape);  // validates
    if (mode.frequency < 0) fail(path + "frequency", "must be >= 0");
    modes.push_back(mode);
  }
  return modes;
}

FieldMode to_field_mode(const ModeConfig& mode) {
  FieldMode out;
  out.shape = parse_shape(mode.shape);
  out.frequency = mode.frequency;
  out.amplitude = mode.amplitude;
  out.parameter = mode.parameter - 1;  // to 0-based, -1 = deterministic
  return out;
}

void check_modes(const std::vector<ModeConfig>& modes, int dimension,
                 const std::string& base) {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].parameter < 0 || modes[i].parameter > dimension) {
      fail(base + "modes[" + std::to_string(i) + "].parameter",
           "must be 0 (deterministic) or a 1-based index <= dimension");
    }
  }
}

json modes_to_json(const std::vector<ModeConfig>& modes) {
  json out = json::array();
  for (const auto& mode : modes) {
    out.push_back({{"shape", mode.shape},
                   {"frequency", mode.frequency},
                   {"amplitude", mode.amplitude},
                   {"parameter", mode.parameter}});
  }
  return out;
}

Eigen::VectorXd broadcast(const std::vector<double>& values, int size,
                          const std::string& what) {
  if (values.size() == 1) return Eigen::VectorXd::Constant(size, values[0]);
  if (static_cast<int>(values.size()) != size) {
    throw ConfigError("config field '" + what + "': expected 1 or " +
                      std::to_string(size) + " entries, got " +
                      std::to_string(values.size()));
  }
  Eigen::VectorXd out(size);
  for (int i = 0; i < size; ++i) out[i] = values[i];
  return out;
}

}  // namespace

int ExperimentConfig::subsample_b() const {
  if (subsampling.b > 0) return subsampling.b;
  return static_cast<int>(
      std::ceil(std::pow(static_cast<double>(subsampling.n), 2.0 / 3.0) - 1e-9));
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  ExperimentConfig c;

  if (const json* jd = find(j, "domain")) {
    read(*jd, "domain.", "kind", c.domain);
    read(*jd, "domain.", "resolution", c.resolution);
  }
  if (const json* jp = find(j, "parameters")) {
    read(*jp, "parameters.", "dimension", c.dimension);
    read_scalar_or_list(*jp, "parameters.", "lower", c.xi_lower);
    read_scalar_or_list(*jp, "parameters.", "upper", c.xi_upper);
  }
  if (const json* jc = find(j, "coefficient")) {
    read(*jc, "coefficient.", "kind", c.coefficient.kind);
    read(*jc, "coefficient.", "b0", c.coefficient.b0);
    read(*jc, "coefficient.", "gamma", c.coefficient.gamma);
    read(*jc, "coefficient.", "L", c.coefficient.L);
    read(*jc, "coefficient.", "variance", c.coefficient.variance);
    read(*jc, "coefficient.", "correlation_length", c.coefficient.correlation_length);
    c.coefficient.modes = read_modes(*jc, "coefficient.");
  }
  if (const json* js = find(j, "source")) {
    read(*js, "source.", "g0", c.source.g0);
    c.source.modes = read_modes(*js, "source.");
  }
  if (const json* jt = find(j, "target")) {
    read(*jt, "target.", "kind", c.target.kind);
    read(*jt, "target.", "value", c.target.value);
    read(*jt, "target.", "path", c.target.path);
  }
  read(j, "", "alpha", c.alpha);
  if (const json* jb = find(j, "control_bounds")) {
    read_scalar_or_list(*jb, "control_bounds.", "lower", c.control_lower);
    read_scalar_or_list(*jb, "control_bounds.", "upper", c.control_upper);
  }
  if (const json* jq = find(j, "quadrature")) {
    read(*jq, "quadrature.", "nodes", c.quadrature_nodes);
  }
  if (const json* jsv = find(j, "solver")) {
    read(*jsv, "solver.", "saa_tol", c.solver.saa_tol);
    read(*jsv, "solver.", "oracle_tol", c.solver.oracle_tol);
    read(*jsv, "solver.", "max_iters", c.solver.max_iters);
  }
  if (const json* je = find(j, "experiments")) {
    if (const json* jr = find(*je, "rate")) {
      read_int_list(*jr, "experiments.rate.", "n_list", c.rate.n_list);
      read(*jr, "experiments.rate.", "replications", c.rate.replications);
    }
    if (const json* jl = find(*je, "clt")) {
      read_int_list(*jl, "experiments.clt.", "n_list", c.clt.n_list);
      read(*jl, "experiments.clt.", "replications", c.clt.replications);
    }
    if (const json* ju = find(*je, "subsampling")) {
      read(*ju, "experiments.subsampling.", "n", c.subsampling.n);
      read(*ju, "experiments.subsampling.", "b", c.subsampling.b);
      read(*ju, "experiments.subsampling.", "m", c.subsampling.m);
      read(*ju, "experiments.subsampling.", "kappa", c.subsampling.kappa);
      read(*ju, "experiments.subsampling.", "outer_replications",
           c.subsampling.outer_replications);
    }
    if (const json* jst = find(*je, "stability")) {
      read_int_list(*jst, "experiments.stability.", "n_list", c.stability.n_list);
      read(*jst, "experiments.stability.", "seeds", c.stability.seeds);
    }
    if (const json* jsl = find(*je, "solve")) {
      read(*jsl, "experiments.solve.", "n", c.solve_n);
    }
    read(*je, "experiments.", "ellipticity_grid", c.ellipticity_grid);
  }
  read(j, "", "seed", c.seed);
  read(j, "", "output_dir", c.output_dir);
  read(j, "", "threads", c.threads);

  // Downstream preconditions, checked here with field diagnostics.
  parse_domain(c.domain);
  if (c.resolution < 2) fail("domain.resolution", "must be >= 2");
  if (c.dimension < 1) fail("parameters.dimension", "must be >= 1");
  const Eigen::VectorXd xlo = broadcast(c.xi_lower, c.dimension, "parameters.lower");
  const Eigen::VectorXd xhi = broadcast(c.xi_upper, c.dimension, "parameters.upper");
  if ((xlo.array() >= xhi.array()).any()) {
    fail("parameters", "needs lower < upper in every coordinate");
  }
  if (c.coefficient.kind != "modes" && c.coefficient.kind != "kl") {
    fail("coefficient.kind", "expected modes|kl");
  }
  if (!(c.coefficient.gamma > 0.0) || c.coefficient.L < c.coefficient.gamma) {
    fail("coefficient", "needs 0 < gamma <= L");
  }
  check_modes(c.coefficient.modes, c.dimension, "coefficient.");
  check_modes(c.source.modes, c.dimension, "source.");
  if (c.target.kind != "sinpi" && c.target.kind != "zero" &&
      c.target.kind != "constant" && c.target.kind != "file") {
    fail("target.kind", "expected sinpi|zero|constant|file");
  }
  if (c.target.kind == "file" && c.target.path.empty()) {
    fail("target.path", "required for target.kind = file");
  }
  if (!(c.alpha > 0.0)) fail("alpha", "must be positive");
  broadcast(c.control_lower, 2, "control_bounds.lower");  // size check only
  if (c.quadrature_nodes != 0 && c.quadrature_nodes < 2) {
    fail("quadrature.nodes", "must be 0 (auto) or >= 2");
  }
  if (!(c.solver.saa_tol > 0.0) || !(c.solver.oracle_tol > 0.0)) {
    fail("solver", "tolerances must be positive");
  }
  if (c.solver.max_iters < 1) fail("solver.max_iters", "must be >= 1");
  if (c.rate.replications < 20) {
    fail("experiments.rate.replications", "must be >= 20");
  }
  if (c.rate.n_list.size() < 3) {
    fail("experiments.rate.n_list", "needs at least 3 sample sizes");
  }
  if (c.clt.replications < 20) {
    fail("experiments.clt.replications", "must be >= 20");
  }
  if (c.clt.n_list.size() < 3) {
    fail("experiments.clt.n_list", "needs at least 3 sample sizes");
  }
  if (c.clt.n_list.back() < 16 * c.clt.n_list.front()) {
    fail("experiments.clt.n_list", "must span a factor >= 16");
  }
  if (c.subsampling.n < 4) fail("experiments.subsampling.n", "must be >= 4");
  if (c.subsampling.b != 0 &&
      (c.subsampling.b < 2 || c.subsampling.b >= c.subsampling.n)) {
    fail("experiments.subsampling.b", "must be 0 (auto) or in [2, n)");
  }
  if (c.subsampling.m < 50) fail("experiments.subsampling.m", "must be >= 50");
  if (!(c.subsampling.kappa > 0.0) || !(c.subsampling.kappa < 1.0)) {
    fail("experiments.subsampling.kappa", "must lie in (0, 1)");
  }
  if (c.subsampling.outer_replications < 100) {
    fail("experiments.subsampling.outer_replications", "must be >= 100");
  }
  if (c.stability.seeds < 1) fail("experiments.stability.seeds", "must be >= 1");
  if (c.stability.n_list.empty()) {
    fail("experiments.stability.n_list", "must be nonempty");
  }
  if (c.solve_n < 1) fail("experiments.solve.n", "must be >= 1");
  if (c.ellipticity_grid < 2) fail("experiments.ellipticity_grid", "must be >= 2");
  if (c.threads < 0) fail("threads", "must be >= 0");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  // Artifacts embed their config; accept them directly.
  if (j.is_object() && j.contains("config") && j["config"].is_object()) {
    return parse_config(j["config"]);
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["domain"] = {{"kind", c.domain}, {"resolution", c.resolution}};
  j["parameters"] = {{"dimension", c.dimension},
                     {"lower", c.xi_lower},
                     {"upper", c.xi_upper}};
  j["coefficient"] = {{"kind", c.coefficient.kind},
                      {"b0", c.coefficient.b0},
                      {"gamma", c.coefficient.gamma},
                      {"L", c.coefficient.L},
                      {"variance", c.coefficient.variance},
                      {"correlation_length", c.coefficient.correlation_length},
                      {"modes", modes_to_json(c.coefficient.modes)}};
  j["source"] = {{"g0", c.source.g0}, {"modes", modes_to_json(c.source.modes)}};
  j["target"] = {{"kind", c.target.kind},
                 {"value", c.target.value},
                 {"path", c.target.path}};
  j["alpha"] = c.alpha;
  j["control_bounds"] = {{"lower", c.control_lower}, {"upper", c.control_upper}};
  j["quadrature"] = {{"nodes", c.quadrature_nodes}};
  j["solver"] = {{"saa_tol", c.solver.saa_tol},
                 {"oracle_tol", c.solver.oracle_tol},
                 {"max_iters", c.solver.max_iters}};
  j["experiments"] = {
      {"rate",
       {{"n_list", c.rate.n_list}, {"replications", c.rate.replications}}},
      {"clt", {{"n_list", c.clt.n_list}, {"replications", c.clt.replications}}},
      {"subsampling",
       {{"n", c.subsampling.n},
        {"b", c.subsampling.b},
        {"m", c.subsampling.m},
        {"kappa", c.subsampling.kappa},
        {"outer_replications", c.subsampling.outer_replications}}},
      {"stability",
       {{"n_list", c.stability.n_list}, {"seeds", c.stability.seeds}}},
      {"solve", {{"n", c.solve_n}}},
      {"ellipticity_grid", c.ellipticity_grid}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string dump = config_to_json(config).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

Box build_box(const ExperimentConfig& c) {
  Box box;
  box.lower = broadcast(c.xi_lower, c.dimension, "parameters.lower");
  box.upper = broadcast(c.xi_upper, c.dimension, "parameters.upper");
  return box;
}

CoefficientModel build_coefficient(const ExperimentConfig& c) {
  if (c.coefficient.kind == "kl") {
    KlSpec spec;
    spec.b0 = c.coefficient.b0;
    spec.variance = c.coefficient.variance;
    spec.correlation_length = c.coefficient.correlation_length;
    spec.gamma = c.coefficient.gamma;
    spec.L = c.coefficient.L;
    return kl_coefficient_model(spec, c.dimension);
  }
  CoefficientModel model;
  model.b0 = c.coefficient.b0;
  model.gamma = c.coefficient.gamma;
  model.L = c.coefficient.L;
  for (const auto& mode : c.coefficient.modes) {
    model.modes.push_back(to_field_mode(mode));
  }
  return model;
}

SourceModel build_source(const ExperimentConfig& c) {
  SourceModel model;
  model.g0 = c.source.g0;
  for (const auto& mode : c.source.modes) {
    model.modes.push_back(to_field_mode(mode));
  }
  return model;
}

namespace {

Eigen::VectorXd build_target(const ExperimentConfig& c, const Mesh& mesh) {
  Eigen::VectorXd target(mesh.vertex_count());
  if (c.target.kind == "zero") {
    target.setZero();
  } else if (c.target.kind == "constant") {
    target.setConstant(c.target.value);
  } else if (c.target.kind == "sinpi") {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const double x = mesh.vertices(v, 0);
      double t = std::sin(std::numbers::pi * x);
      if (mesh.dim == 2) t *= std::sin(std::numbers::pi * mesh.vertices(v, 1));
      target[v] = t;
    }
  } else {  // file: whitespace-separated nodal values
    std::ifstream in(c.target.path);
    if (!in) throw ConfigError("cannot open target file '" + c.target.path + "'");
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (!(in >> target[v])) {
        throw ConfigError("target file '" + c.target.path + "' has fewer than " +
                          std::to_string(mesh.vertex_count()) + " values");
      }
    }
  }
  return target;
}

}  // namespace

ProblemInstance build_problem(const ExperimentConfig& c) {
  Mesh mesh = build_mesh(parse_domain(c.domain), c.resolution);
  const int nv = mesh.vertex_count();
  Eigen::VectorXd target = build_target(c, mesh);
  Eigen::VectorXd lower = broadcast(c.control_lower, nv, "control_bounds.lower");
  Eigen::VectorXd upper = broadcast(c.control_upper, nv, "control_bounds.upper");
  return make_problem(std::move(mesh), build_coefficient(c), build_source(c),
                      std::move(target), c.alpha, std::move(lower),
                      std::move(upper), build_box(c));
}

}  // namespace saapde
