#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "saapde/models.hpp"
#include "saapde/problem.hpp"

namespace saapde {

struct ModeConfig {
  std::string shape = "const";
  int frequency = 0;
  double amplitude = 0.0;
  int parameter = 0;  // 1-based xi index, 0 = deterministic term
};

struct CoefficientConfig {
  std::string kind = "modes";  // modes | kl
  double b0 = 2.0;
  double gamma = 1.0;
  double L = 3.0;
  std::vector<ModeConfig> modes;
  // kl surrogate parameters
  double variance = 0.5;
  double correlation_length = 0.2;
};

struct SourceConfig {
  double g0 = 0.0;
  std::vector<ModeConfig> modes;
};

struct TargetConfig {
  std::string kind = "sinpi";  // sinpi | zero | constant | file
  double value = 0.0;
  std::string path;
};

struct SolverConfig {
  double saa_tol = 1e-7;
  double oracle_tol = 1e-9;
  int max_iters = 200000;
};

struct RateConfig {
  std::vector<int> n_list{128, 256, 512, 1024, 2048, 4096, 8192};
  int replications = 40;
};

struct CltConfig {
  std::vector<int> n_list{512, 2048, 8192};
  int replications = 200;
};

struct SubsamplingConfig {
  int n = 4096;
  int b = 0;  // 0: ceil(n^(2/3))
  int m = 200;
  double kappa = 0.1;
  int outer_replications = 200;
};

struct StabilityConfig {
  std::vector<int> n_list{64, 256, 1024};
  int seeds = 4;
};

struct ExperimentConfig {
  std::string domain = "interval";
  int resolution = 32;
  int dimension = 2;
  std::vector<double> xi_lower{-1.0};  // broadcast when size 1
  std::vector<double> xi_upper{1.0};
  CoefficientConfig coefficient;
  SourceConfig source;
  TargetConfig target;
  double alpha = 0.1;
  std::vector<double> control_lower{-2.0};  // broadcast when size 1
  std::vector<double> control_upper{2.0};
  int quadrature_nodes = 0;  // 0 = auto refinement
  SolverConfig solver;
  RateConfig rate;
  CltConfig clt;
  SubsamplingConfig subsampling;
  StabilityConfig stability;
  int solve_n = 512;
  int ellipticity_grid = 512;
  std::uint64_t seed = 7;
  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  int subsample_b() const;  // resolves the b = 0 default
};

/// Parses and fully validates a config object; every downstream numeric
/// precondition is checked here with a field-path diagnostic.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Reads a config file. A JSON artifact with an embedded "config" object is
/// accepted and unwrapped so experiments can be reproduced from outputs.
ExperimentConfig load_config(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& config);

/// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

Box build_box(const ExperimentConfig& config);
CoefficientModel build_coefficient(const ExperimentConfig& config);
SourceModel build_source(const ExperimentConfig& config);
ProblemInstance build_problem(const ExperimentConfig& config);

}  // namespace saapde
