#include "saapde/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "saapde/errors.hpp"
#include "saapde/reporting.hpp"
#include "saapde/stability.hpp"

namespace saapde {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kQuadratureStart = 4;
constexpr double kQuadratureValueTol = 1e-8;

struct RunContext {
  const ExperimentConfig* config;
  std::string hash;
  fs::path out;
  int threads;

  SolveOptions saa_opts() const {
    SolveOptions opts;
    opts.tol = config->solver.saa_tol;
    opts.max_iters = config->solver.max_iters;
    opts.threads = threads;
    return opts;
  }
  SolveOptions oracle_opts() const {
    SolveOptions opts = saa_opts();
    opts.tol = config->solver.oracle_tol;
    return opts;
  }
};

json base_summary(const RunContext& ctx, const std::string& command) {
  json j;
  j["command"] = command;
  j["config_hash"] = ctx.hash;
  j["seed"] = ctx.config->seed;
  j["threads"] = ctx.threads;
  j["config"] = config_to_json(*ctx.config);
  return j;
}

// Extremes of the (affine in xi) source field over grid x box, plus a
// finiteness check of the L2 surrogate.
std::pair<double, double> source_range(const SourceModel& source, const Box& box,
                                       int spatial_dim, int grid) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const int nx = grid + 1;
  const int ny = spatial_dim == 2 ? grid + 1 : 1;
  for (int jy = 0; jy < ny; ++jy) {
    for (int jx = 0; jx < nx; ++jx) {
      const Eigen::Vector2d x(static_cast<double>(jx) / grid,
                              static_cast<double>(jy) / grid);
      double base = source.g0;
      Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(box.dim());
      for (const auto& mode : source.modes) {
        const double v = mode.spatial(x, spatial_dim);
        if (mode.parameter < 0) {
          base += v;
        } else {
          coeffs[mode.parameter] += v;
        }
      }
      double cell_lo = base, cell_hi = base;
      for (int j = 0; j < box.dim(); ++j) {
        const double a = coeffs[j] * box.lower[j];
        const double b = coeffs[j] * box.upper[j];
        cell_lo += std::min(a, b);
        cell_hi += std::max(a, b);
      }
      lo = std::min(lo, cell_lo);
      hi = std::max(hi, cell_hi);
    }
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw NumericError("source field is not bounded on the verification grid");
  }
  return {lo, hi};
}

CommandResult run_validate(const RunContext& ctx) {
  const ExperimentConfig& cfg = *ctx.config;
  const Box box = build_box(cfg);
  const CoefficientModel coeff = build_coefficient(cfg);
  const Mesh mesh = build_mesh(parse_domain(cfg.domain), cfg.resolution);
  const EllipticityReport report =
      validate_ellipticity(coeff, box, mesh.dim, cfg.ellipticity_grid);
  const auto [g_lo, g_hi] =
      source_range(build_source(cfg), box, mesh.dim, cfg.ellipticity_grid);
  build_problem(cfg);  // bound/target checks

  CsvWriter csv(ctx.out / "validate.csv");
  csv.header({"config_hash", "seed", "gamma_declared", "L_declared",
              "gamma_observed", "L_observed", "grid_points", "source_min",
              "source_max"});
  csv.row({ctx.hash, cfg.seed, coeff.gamma, coeff.L, report.gamma_observed,
           report.L_observed, static_cast<std::int64_t>(report.grid_points),
           g_lo, g_hi});

  CommandResult result;
  result.summary = base_summary(ctx, "validate");
  result.summary["results"] = {{"gamma_declared", coeff.gamma},
                               {"L_declared", coeff.L},
                               {"gamma_observed", report.gamma_observed},
                               {"L_observed", report.L_observed},
                               {"grid_points", report.grid_points},
                               {"source_min", g_lo},
                               {"source_max", g_hi}};
  return result;
}

CommandResult run_solve(const RunContext& ctx) {
  const ExperimentConfig& cfg = *ctx.config;
  const ProblemInstance prob = build_problem(cfg);
  const Box box = build_box(cfg);
  const OracleSolution oracle =
      compute_oracle(prob, box, cfg.quadrature_nodes, ctx.oracle_opts());

  const DiscreteMeasure sample = sample_uniform(box, cfg.solve_n, cfg.seed);
  const SaaSolution saa = solve_saa(prob, sample, ctx.saa_opts());

  CsvWriter csv(ctx.out / "solves.csv");
  csv.header({"config_hash", "seed", "kind", "atoms", "value", "iterations",
              "residual", "restarts"});
  csv.row({ctx.hash, cfg.seed, std::string("oracle"),
           static_cast<std::int64_t>(oracle.measure.size()),
           oracle.solution.value,
           static_cast<std::int64_t>(oracle.solution.iterations),
           oracle.solution.residual,
           static_cast<std::int64_t>(oracle.solution.restarts)});
  csv.row({ctx.hash, cfg.seed, std::string("saa"),
           static_cast<std::int64_t>(sample.size()), saa.value,
           static_cast<std::int64_t>(saa.iterations), saa.residual,
           static_cast<std::int64_t>(saa.restarts)});

  CsvWriter sol_csv(ctx.out / "solution.csv");
  sol_csv.header({"config_hash", "seed", "vertex", "x", "y", "z_oracle", "z_saa"});
  for (int v = 0; v < prob.mesh.vertex_count(); ++v) {
    sol_csv.row({ctx.hash, cfg.seed, static_cast<std::int64_t>(v),
                 prob.mesh.vertices(v, 0), prob.mesh.vertices(v, 1),
                 oracle.solution.minimizer[v], saa.minimizer[v]});
  }

  CommandResult result;
  result.summary = base_summary(ctx, "solve");
  result.summary["results"] = {
      {"quadrature_nodes_per_dim", oracle.nodes_per_dim},
      {"v_oracle", oracle.solution.value},
      {"v_saa", saa.value},
      {"value_gap", std::abs(oracle.solution.value - saa.value)},
      {"solution_dist",
       prob.norm(oracle.solution.minimizer - saa.minimizer)},
      {"oracle_iterations", oracle.solution.iterations},
      {"saa_iterations", saa.iterations}};
  return result;
}

struct FemCase {
  int dim;
  int resolution;
  double l2_error;
  double order;  // vs previous resolution, NaN on the first row
};

double manufactured_error(Domain domain, int resolution) {
  const Mesh mesh = build_mesh(domain, resolution);
  CoefficientModel unit;
  unit.b0 = 1.0;
  unit.gamma = 1.0;
  unit.L = 1.0;
  const ParameterPoint xi(0);
  FactorizedOperator op(assemble_stiffness(mesh, unit, xi));
  constexpr double pi = std::numbers::pi;
  Eigen::VectorXd load;
  Eigen::VectorXd exact(mesh.vertex_count());
  if (domain == Domain::interval) {
    load = assemble_load(mesh, [&](const Eigen::Vector2d& x) {
      return pi * pi * std::sin(pi * x[0]);
    });
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      exact[v] = std::sin(pi * mesh.vertices(v, 0));
    }
  } else {
    load = assemble_load(mesh, [&](const Eigen::Vector2d& x) {
      return 2.0 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
    });
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      exact[v] = std::sin(pi * mesh.vertices(v, 0)) *
                 std::sin(pi * mesh.vertices(v, 1));
    }
  }
  const Eigen::VectorXd u = extend_interior(mesh, op.solve(load));
  const Eigen::VectorXd error = u - exact;
  const SparseMatrix mass = assemble_mass(mesh);
  return std::sqrt(std::max(0.0, error.dot(mass * error)));
}

CommandResult run_fem_verify(const RunContext& ctx) {
  std::vector<FemCase> cases;
  const std::vector<int> res_1d{16, 32, 64, 128};
  const std::vector<int> res_2d{8, 16, 32};
  for (int dim = 1; dim <= 2; ++dim) {
    const auto& resolutions = dim == 1 ? res_1d : res_2d;
    double previous = 0.0;
    for (std::size_t k = 0; k < resolutions.size(); ++k) {
      FemCase c;
      c.dim = dim;
      c.resolution = resolutions[k];
      c.l2_error = manufactured_error(
          dim == 1 ? Domain::interval : Domain::square, resolutions[k]);
      c.order = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : std::log2(previous / c.l2_error);
      previous = c.l2_error;
      cases.push_back(c);
    }
  }

  CsvWriter csv(ctx.out / "fem_convergence.csv");
  csv.header({"config_hash", "seed", "dim", "resolution", "l2_error", "order"});
  bool pass = true;
  double min_order = std::numeric_limits<double>::infinity();
  for (const FemCase& c : cases) {
    csv.row({ctx.hash, ctx.config->seed, static_cast<std::int64_t>(c.dim),
             static_cast<std::int64_t>(c.resolution), c.l2_error, c.order});
    if (!std::isnan(c.order)) {
      min_order = std::min(min_order, c.order);
      if (c.order < 1.9) pass = false;
    }
  }

  CommandResult result;
  result.pass = pass;
  result.summary = base_summary(ctx, "fem-verify");
  result.summary["results"] = {{"min_observed_order", min_order},
                               {"order_threshold", 1.9},
                               {"pass", pass}};
  return result;
}

CommandResult run_rate(const RunContext& ctx) {
  const ExperimentConfig& cfg = *ctx.config;
  const ProblemInstance prob = build_problem(cfg);
  const Box box = build_box(cfg);
  const OracleSolution oracle =
      compute_oracle(prob, box, cfg.quadrature_nodes, ctx.oracle_opts());
  const RateReport report =
      rate_experiment(prob, oracle.solution, box, cfg.rate.n_list,
                      cfg.rate.replications, cfg.seed, ctx.saa_opts(),
                      ctx.threads);

  CsvWriter raw(ctx.out / "rate_raw.csv");
  raw.header({"config_hash", "seed", "n", "replication", "v", "value_dev",
              "solution_dist", "iterations"});
  for (const RateRow& row : report.rows) {
    raw.row({ctx.hash, cfg.seed, static_cast<std::int64_t>(row.n),
             static_cast<std::int64_t>(row.replication), row.v, row.value_dev,
             row.solution_dist, static_cast<std::int64_t>(row.iterations)});
  }
  CsvWriter means(ctx.out / "rate_means.csv");
  means.header({"config_hash", "seed", "n", "mean_value_dev",
                "mean_solution_dist"});
  for (std::size_t j = 0; j < report.n_list.size(); ++j) {
    means.row({ctx.hash, cfg.seed, static_cast<std::int64_t>(report.n_list[j]),
               report.mean_value_dev[j], report.mean_solution_dist[j]});
  }

  const bool pass =
      report.degenerate ||
      (report.value_slope >= -0.65 && report.value_slope <= -0.35 &&
       report.solution_slope >= -0.65 && report.solution_slope <= -0.35);

  CommandResult result;
  result.pass = pass;
  result.summary = base_summary(ctx, "rate");
  result.summary["results"] = {
      {"v_oracle", oracle.solution.value},
      {"quadrature_nodes_per_dim", oracle.nodes_per_dim},
      {"degenerate", report.degenerate},
      {"value_slope", report.value_slope},
      {"value_slope_stderr", report.value_slope_stderr},
      {"solution_slope", report.solution_slope},
      {"solution_slope_stderr", report.solution_slope_stderr},
      {"slope_band", {-0.65, -0.35}},
      {"pass", pass}};
  return result;
}

CommandResult run_clt(const RunContext& ctx) {
  const ExperimentConfig& cfg = *ctx.config;
  const ProblemInstance prob = build_problem(cfg);
  const Box box = build_box(cfg);
  const OracleSolution oracle =
      compute_oracle(prob, box, cfg.quadrature_nodes, ctx.oracle_opts());
  const CltReport report =
      clt_probe(prob, oracle.solution, box, cfg.clt.n_list,
                cfg.clt.replications, cfg.seed, ctx.saa_opts(), ctx.threads,
                /*enforce=*/false);

  CsvWriter raw(ctx.out / "clt_raw.csv");
  raw.header({"config_hash", "seed", "n", "replication", "v", "scaled_dev"});
  for (const CltRow& row : report.rows) {
    raw.row({ctx.hash, cfg.seed, static_cast<std::int64_t>(row.n),
             static_cast<std::int64_t>(row.replication), row.v,
             row.scaled_dev});
  }

  const bool pass = report.degenerate || report.ratio <= 2.0;
  CommandResult result;
  result.pass = pass;
  result.summary = base_summary(ctx, "clt");
  result.summary["results"] = {{"v_oracle", oracle.solution.value},
                               {"degenerate", report.degenerate},
                               {"scaled_stddev", report.scaled_stddev},
                               {"ratio", report.ratio},
                               {"ratio_threshold", 2.0},
                               {"pass", pass}};
  return result;
}

CommandResult run_ci(const RunContext& ctx) {
  const ExperimentConfig& cfg = *ctx.config;
  const ProblemInstance prob = build_problem(cfg);
  const Box box = build_box(cfg);
  const int n = cfg.subsampling.n;
  const int b = cfg.subsample_b();
  RngStream stream(cfg.seed, RngStream::stream_id("ci-sample", n));
  const DiscreteMeasure sample = sample_uniform(box, n, stream);
  const SubsampleReport report =
      subsample_ci(prob, sample, b, cfg.subsampling.m, cfg.subsampling.kappa,
                   cfg.seed, ctx.saa_opts(), ctx.threads);
  const OracleSolution oracle =
      compute_oracle(prob, box, cfg.quadrature_nodes, ctx.oracle_opts());

  CsvWriter raw(ctx.out / "ci_roots.csv");
  raw.header({"config_hash", "seed", "subset", "subsample_value", "root"});
  for (int j = 0; j < report.m; ++j) {
    raw.row({ctx.hash, cfg.seed, static_cast<std::int64_t>(j),
             report.subsample_values[j], report.roots[j]});
  }

  CommandResult result;
  result.summary = base_summary(ctx, "ci");
  result.summary["results"] = {
      {"n", report.n},
      {"b", report.b},
      {"m", report.m},
      {"kappa", report.kappa},
      {"v_n", report.v_n},
      {"v_oracle", oracle.solution.value},
      {"quantile_one_sided", report.quantile_one_sided},
      {"quantile_lower", report.quantile_lower},
      {"quantile_upper", report.quantile_upper},
      {"one_sided_lower", report.one_sided_lower},
      {"two_sided", {report.two_sided_lower, report.two_sided_upper}},
      {"one_sided_covers_oracle",
       report.one_sided_lower <= oracle.solution.value},
      {"b_ratio_warning", report.b_ratio_warning}};
  if (report.b_ratio_warning) {
    result.summary["warnings"] = {"b >= n/2: the subsampling regime b/n -> 0 is violated"};
  }
  return result;
}

CommandResult run_coverage(const RunContext& ctx) {
  const ExperimentConfig& cfg = *ctx.config;
  const ProblemInstance prob = build_problem(cfg);
  const Box box = build_box(cfg);
  const OracleSolution oracle =
      compute_oracle(prob, box, cfg.quadrature_nodes, ctx.oracle_opts());
  const CoverageReport report = coverage_experiment(
      prob, oracle.solution, box, cfg.subsampling.n, cfg.subsample_b(),
      cfg.subsampling.m, cfg.subsampling.kappa,
      cfg.subsampling.outer_replications, cfg.seed, ctx.saa_opts(),
      ctx.threads);

  CsvWriter raw(ctx.out / "coverage_raw.csv");
  raw.header({"config_hash", "seed", "replication", "v_n",
              "quantile_one_sided", "one_sided_lower", "two_sided_lower",
              "two_sided_upper", "covered_one_sided", "covered_two_sided",
              "width"});
  for (const CoverageRow& row : report.rows) {
    raw.row({ctx.hash, cfg.seed, static_cast<std::int64_t>(row.replication),
             row.v_n, row.quantile_one_sided, row.one_sided_lower,
             row.two_sided_lower, row.two_sided_upper, row.covered_one_sided,
             row.covered_two_sided, row.width});
  }

  const double threshold = 1.0 - report.kappa - 0.05;
  const bool pass = report.coverage_one_sided >= threshold;
  CommandResult result;
  result.pass = pass;
  result.summary = base_summary(ctx, "coverage");
  result.summary["results"] = {{"v_oracle", report.v_oracle},
                               {"n", report.n},
                               {"b", report.b},
                               {"m", report.m},
                               {"kappa", report.kappa},
                               {"outer_replications", report.outer_replications},
                               {"coverage_one_sided", report.coverage_one_sided},
                               {"coverage_two_sided", report.coverage_two_sided},
                               {"mean_width", report.mean_width},
                               {"coverage_threshold", threshold},
                               {"pass", pass}};
  return result;
}

CommandResult run_stability(const RunContext& ctx) {
  const ExperimentConfig& cfg = *ctx.config;
  const ProblemInstance prob = build_problem(cfg);
  const Box box = build_box(cfg);
  const OracleSolution oracle =
      compute_oracle(prob, box, cfg.quadrature_nodes, ctx.oracle_opts());

  SolveOptions opts = ctx.oracle_opts();
  CsvWriter csv(ctx.out / "stability_pairs.csv");
  csv.header({"config_hash", "seed", "pair_seed", "n", "v_oracle", "v_empirical",
              "value_gap", "d_mi_endpoints", "value_bound_holds",
              "solution_dist", "grad_gap_z1", "grad_gap_z2",
              "lipschitz_bound", "lipschitz_holds", "d_mi_grid",
              "holder_bound", "holder_holds"});
  bool pass = true;
  int pair_count = 0;
  json pairs = json::array();
  for (int s = 1; s <= cfg.stability.seeds; ++s) {
    for (int n : cfg.stability.n_list) {
      RngStream stream(cfg.seed,
                       RngStream::stream_id("stability", n, static_cast<std::uint64_t>(s)));
      const DiscreteMeasure sample = sample_uniform(box, n, stream);
      const StabilityReport report =
          verify_stability(prob, oracle.measure, sample, opts,
                           cfg.seed ^ RngStream::stream_id("stability-grid", n, s),
                           50, /*enforce=*/false);
      ++pair_count;
      pass = pass && report.value_bound_holds && report.lipschitz_holds;
      csv.row({ctx.hash, cfg.seed, static_cast<std::int64_t>(s),
               static_cast<std::int64_t>(n), report.v1, report.v2,
               report.value_gap, report.d_mi_endpoints,
               report.value_bound_holds, report.solution_dist,
               report.grad_gap_z1, report.grad_gap_z2, report.lipschitz_bound,
               report.lipschitz_holds, report.d_mi_grid, report.holder_bound,
               report.holder_holds});
      pairs.push_back({{"pair_seed", s},
                       {"n", n},
                       {"value_bound_holds", report.value_bound_holds},
                       {"lipschitz_holds", report.lipschitz_holds},
                       {"holder_holds", report.holder_holds}});
    }
  }

  CommandResult result;
  result.pass = pass;
  result.summary = base_summary(ctx, "stability");
  result.summary["results"] = {{"pairs", pairs},
                               {"pair_count", pair_count},
                               {"pass", pass}};
  return result;
}

}  // namespace

OracleSolution compute_oracle(const ProblemInstance& prob, const Box& box,
                              int nodes_per_dim, const SolveOptions& opts) {
  if (nodes_per_dim != 0) {
    OracleSolution oracle;
    oracle.nodes_per_dim = nodes_per_dim;
    oracle.measure = quadrature_measure(box, nodes_per_dim);
    oracle.solution = solve_saa(prob, oracle.measure, opts);
    return oracle;
  }
  int q = kQuadratureStart;
  DiscreteMeasure measure = quadrature_measure(box, q);
  SaaSolution solution = solve_saa(prob, measure, opts);
  for (;;) {
    const int q_next = 2 * q;
    if (std::pow(static_cast<double>(q_next), box.dim()) > 1e5) {
      throw NumericError(
          "quadrature refinement hit the node cap before the optimal value "
          "settled");
    }
    DiscreteMeasure refined = quadrature_measure(box, q_next);
    SaaSolution refined_solution = solve_saa(prob, refined, opts);
    const bool settled =
        std::abs(refined_solution.value - solution.value) < kQuadratureValueTol;
    q = q_next;
    measure = std::move(refined);
    solution = std::move(refined_solution);
    if (settled) break;
  }
  OracleSolution oracle;
  oracle.measure = std::move(measure);
  oracle.solution = std::move(solution);
  oracle.nodes_per_dim = q;
  return oracle;
}

CommandResult run_command(const std::string& command,
                          const ExperimentConfig& config) {
  RunContext ctx;
  ctx.config = &config;
  ctx.hash = config_hash(config);
  ctx.out = config.output_dir;
  ctx.threads = config.threads;

  const auto t0 = Clock::now();
  CommandResult result;
  if (command == "validate") {
    result = run_validate(ctx);
  } else if (command == "solve") {
    result = run_solve(ctx);
  } else if (command == "fem-verify") {
    result = run_fem_verify(ctx);
  } else if (command == "rate") {
    result = run_rate(ctx);
  } else if (command == "clt") {
    result = run_clt(ctx);
  } else if (command == "ci") {
    result = run_ci(ctx);
  } else if (command == "coverage") {
    result = run_coverage(ctx);
  } else if (command == "stability") {
    result = run_stability(ctx);
  } else {
    throw ConfigError(
        "unknown command '" + command +
        "' (expected validate|solve|fem-verify|rate|clt|ci|coverage|stability)");
  }
  result.summary["pass"] = result.pass;
  result.summary["timings"] = {
      {"wall_seconds", std::chrono::duration<double>(Clock::now() - t0).count()}};
  write_json_file(ctx.out / (command == "fem-verify" ? std::string("fem_verify_summary.json")
                                                     : command + "_summary.json"),
                  result.summary);
  return result;
}

}  // namespace saapde
