#pragma once

#include <string>

#include "json.hpp"
#include "saapde/config.hpp"
#include "saapde/measure.hpp"
#include "saapde/solver.hpp"

namespace saapde {

/// Quadrature stand-in for the true measure P together with its solution.
/// With nodes = 0 the per-dimension node count doubles from 4 until the
/// optimal value moves by less than 1e-8, which makes it a valid reference
/// for the Monte Carlo deviation experiments.
struct OracleSolution {
  DiscreteMeasure measure;
  SaaSolution solution;
  int nodes_per_dim = 0;
};

OracleSolution compute_oracle(const ProblemInstance& prob, const Box& box,
                              int nodes_per_dim, const SolveOptions& opts);

struct CommandResult {
  bool pass = true;
  nlohmann::json summary;
};

/// Runs one CLI command end to end: executes the experiment, writes the CSV
/// raw tables and the JSON summary into the config's output directory, and
/// reports whether all asserted criteria passed. Raw CSV output is a pure
/// function of (config, seed), independent of the thread count.
CommandResult run_command(const std::string& command,
                          const ExperimentConfig& config);

}  // namespace saapde
