#include "saapde/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "saapde/errors.hpp"
#include "saapde/parallel.hpp"

namespace saapde {

namespace {

ControlVector random_feasible(const ProblemInstance& prob, RngStream& stream) {
  ControlVector z(prob.control_dim());
  for (int i = 0; i < z.size(); ++i) {
    z[i] = stream.uniform(prob.lower[i], prob.upper[i]);
  }
  return z;
}

struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
};

SlopeFit fit_loglog(const std::vector<int>& n_list,
                    const std::vector<double>& means) {
  const int count = static_cast<int>(n_list.size());
  double sx = 0, sy = 0;
  std::vector<double> xs(count), ys(count);
  for (int j = 0; j < count; ++j) {
    xs[j] = std::log(static_cast<double>(n_list[j]));
    ys[j] = std::log(means[j]);
    sx += xs[j];
    sy += ys[j];
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0, sxy = 0;
  for (int j = 0; j < count; ++j) {
    sxx += (xs[j] - mx) * (xs[j] - mx);
    sxy += (xs[j] - mx) * (ys[j] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  if (count > 2) {
    double ssr = 0;
    for (int j = 0; j < count; ++j) {
      const double pred = my + fit.slope * (xs[j] - mx);
      ssr += (ys[j] - pred) * (ys[j] - pred);
    }
    fit.stderr_slope = std::sqrt(ssr / (count - 2) / sxx);
  }
  return fit;
}

void check_n_list(const std::vector<int>& n_list, int replications,
                  int min_span) {
  if (n_list.size() < 3) throw ConfigError("experiment needs >= 3 sample sizes");
  for (std::size_t j = 0; j + 1 < n_list.size(); ++j) {
    if (n_list[j + 1] <= n_list[j]) {
      throw ConfigError("sample sizes must be strictly increasing");
    }
  }
  if (n_list.front() < 1) throw ConfigError("sample sizes must be positive");
  if (n_list.back() < min_span * n_list.front()) {
    throw ConfigError("sample sizes must span a factor >= " +
                      std::to_string(min_span));
  }
  if (replications < 20) {
    throw ConfigError("experiment needs >= 20 replications, got " +
                      std::to_string(replications));
  }
}

}  // namespace

DistanceEstimate distance_lower_bound(
    const ProblemInstance& prob, const DiscreteMeasure& Q1,
    const DiscreteMeasure& Q2, const std::vector<ControlVector>& witnesses,
    DistanceEstimate::FunctionClass function_class, int threads) {
  if (witnesses.empty()) {
    throw ConfigError("distance estimate needs a nonempty witness set");
  }
  Q1.validate();
  Q2.validate();
  MeasureEvaluator eval1(prob, Q1.atoms, threads);
  MeasureEvaluator eval2(prob, Q2.atoms, threads);

  DistanceEstimate estimate;
  estimate.function_class = function_class;
  estimate.witness_count = static_cast<int>(witnesses.size());
  estimate.value = -1.0;
  for (std::size_t w = 0; w < witnesses.size(); ++w) {
    double candidate;
    if (function_class == DistanceEstimate::FunctionClass::minimal_information) {
      candidate = std::abs(eval1.value(Q1.weights, witnesses[w], threads) -
                           eval2.value(Q2.weights, witnesses[w], threads));
    } else {
      // The sup over |h|_M <= 1 of the derivative pairing is attained at the
      // normalized gradient difference, so its M-norm is the class value.
      const ControlVector diff =
          eval1.gradient(Q1.weights, witnesses[w], threads) -
          eval2.gradient(Q2.weights, witnesses[w], threads);
      candidate = prob.norm(diff);
    }
    if (candidate > estimate.value) {
      estimate.value = candidate;
      estimate.argmax_witness = static_cast<int>(w);
    }
  }
  return estimate;
}

StabilityReport verify_stability(const ProblemInstance& prob,
                                 const DiscreteMeasure& Q1,
                                 const DiscreteMeasure& Q2, SolveOptions opts,
                                 std::uint64_t grid_seed, int grid_points,
                                 bool enforce) {
  const SaaSolution sol1 = solve_saa(prob, Q1, opts);
  const SaaSolution sol2 = solve_saa(prob, Q2, opts);

  StabilityReport report;
  report.v1 = sol1.value;
  report.v2 = sol2.value;
  report.value_gap = std::abs(sol1.value - sol2.value);
  report.iterations1 = sol1.iterations;
  report.iterations2 = sol2.iterations;
  report.solution_dist = prob.norm(sol1.minimizer - sol2.minimizer);

  const std::vector<ControlVector> endpoints{sol1.minimizer, sol2.minimizer};
  report.d_mi_endpoints =
      distance_lower_bound(prob, Q1, Q2, endpoints,
                           DistanceEstimate::FunctionClass::minimal_information,
                           opts.threads)
          .value;
  report.value_bound_holds = report.value_gap <= report.d_mi_endpoints + 1e-7;

  MeasureEvaluator eval1(prob, Q1.atoms, opts.threads);
  MeasureEvaluator eval2(prob, Q2.atoms, opts.threads);
  report.grad_gap_z1 =
      prob.norm(eval1.gradient(Q1.weights, sol1.minimizer, opts.threads) -
                eval2.gradient(Q2.weights, sol1.minimizer, opts.threads));
  report.grad_gap_z2 =
      prob.norm(eval1.gradient(Q1.weights, sol2.minimizer, opts.threads) -
                eval2.gradient(Q2.weights, sol2.minimizer, opts.threads));
  report.lipschitz_bound = (8.0 / prob.alpha) *
                           std::max(report.grad_gap_z1, report.grad_gap_z2);
  report.lipschitz_holds =
      report.solution_dist <= report.lipschitz_bound + 1e-7;

  // Advisory Hoelder bound over a wider grid.
  std::vector<ControlVector> grid = endpoints;
  RngStream stream(grid_seed, RngStream::stream_id("stability-grid"));
  for (int k = 0; k < grid_points; ++k) grid.push_back(random_feasible(prob, stream));
  report.d_mi_grid =
      distance_lower_bound(prob, Q1, Q2, grid,
                           DistanceEstimate::FunctionClass::minimal_information,
                           opts.threads)
          .value;
  report.holder_bound =
      2.0 * std::sqrt(2.0 / prob.alpha) * std::sqrt(report.d_mi_grid);
  report.holder_holds = report.solution_dist <= report.holder_bound + 1e-7;

  if (enforce && (!report.value_bound_holds || !report.lipschitz_holds)) {
    std::ostringstream msg;
    msg << "stability inequality violated:"
        << " |v1-v2| = " << report.value_gap
        << ", d_mi = " << report.d_mi_endpoints
        << ", |z1-z2|_M = " << report.solution_dist
        << ", (8/alpha) max grad gap = " << report.lipschitz_bound;
    throw InequalityViolation(msg.str());
  }
  return report;
}

RateReport rate_experiment(const ProblemInstance& prob,
                           const SaaSolution& oracle, const Box& box,
                           const std::vector<int>& n_list, int replications,
                           std::uint64_t seed, const SolveOptions& opts,
                           int threads) {
  check_n_list(n_list, replications, 8);

  RateReport report;
  report.n_list = n_list;
  report.replications = replications;
  report.seed = seed;
  const int jn = static_cast<int>(n_list.size());
  report.rows.resize(static_cast<std::size_t>(jn) * replications);

  SolveOptions inner = opts;
  inner.threads = 1;
  parallel_for(report.rows.size(), threads, [&](std::size_t task) {
    const int j = static_cast<int>(task) / replications;
    const int r = static_cast<int>(task) % replications;
    const int n = n_list[j];
    RngStream stream(seed, RngStream::stream_id("rate", n, r));
    const DiscreteMeasure sample = sample_uniform(box, n, stream);
    const SaaSolution sol = solve_saa(prob, sample, inner);
    RateRow row;
    row.n = n;
    row.replication = r;
    row.v = sol.value;
    row.value_dev = std::abs(sol.value - oracle.value);
    row.solution_dist = prob.norm(sol.minimizer - oracle.minimizer);
    row.iterations = sol.iterations;
    report.rows[task] = row;
  });

  report.mean_value_dev.assign(jn, 0.0);
  report.mean_solution_dist.assign(jn, 0.0);
  double max_dev = 0.0;
  for (int j = 0; j < jn; ++j) {
    for (int r = 0; r < replications; ++r) {
      const RateRow& row = report.rows[j * replications + r];
      report.mean_value_dev[j] += row.value_dev;
      report.mean_solution_dist[j] += row.solution_dist;
      max_dev = std::max(max_dev, row.value_dev);
    }
    report.mean_value_dev[j] /= replications;
    report.mean_solution_dist[j] /= replications;
  }

  report.degenerate = max_dev <= 2.0 * opts.tol;
  if (report.degenerate || *std::min_element(report.mean_value_dev.begin(),
                                             report.mean_value_dev.end()) <= 0.0 ||
      *std::min_element(report.mean_solution_dist.begin(),
                        report.mean_solution_dist.end()) <= 0.0) {
    report.degenerate = true;
    report.value_slope = report.solution_slope =
        std::numeric_limits<double>::quiet_NaN();
    report.value_slope_stderr = report.solution_slope_stderr =
        std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  const SlopeFit value_fit = fit_loglog(n_list, report.mean_value_dev);
  const SlopeFit solution_fit = fit_loglog(n_list, report.mean_solution_dist);
  report.value_slope = value_fit.slope;
  report.value_slope_stderr = value_fit.stderr_slope;
  report.solution_slope = solution_fit.slope;
  report.solution_slope_stderr = solution_fit.stderr_slope;
  return report;
}

CltReport clt_probe(const ProblemInstance& prob, const SaaSolution& oracle,
                    const Box& box, const std::vector<int>& n_list,
                    int replications, std::uint64_t seed,
                    const SolveOptions& opts, int threads, bool enforce) {
  check_n_list(n_list, replications, 16);

  CltReport report;
  report.n_list = n_list;
  report.replications = replications;
  report.seed = seed;
  const int jn = static_cast<int>(n_list.size());
  report.rows.resize(static_cast<std::size_t>(jn) * replications);

  SolveOptions inner = opts;
  inner.threads = 1;
  parallel_for(report.rows.size(), threads, [&](std::size_t task) {
    const int j = static_cast<int>(task) / replications;
    const int r = static_cast<int>(task) % replications;
    const int n = n_list[j];
    RngStream stream(seed, RngStream::stream_id("clt", n, r));
    const DiscreteMeasure sample = sample_uniform(box, n, stream);
    const SaaSolution sol = solve_saa(prob, sample, inner);
    CltRow row;
    row.n = n;
    row.replication = r;
    row.v = sol.value;
    row.scaled_dev = std::sqrt(static_cast<double>(n)) * (sol.value - oracle.value);
    report.rows[task] = row;
  });

  report.scaled_stddev.assign(jn, 0.0);
  bool degenerate = true;
  for (int j = 0; j < jn; ++j) {
    double mean = 0.0;
    for (int r = 0; r < replications; ++r) {
      mean += report.rows[j * replications + r].scaled_dev;
    }
    mean /= replications;
    double var = 0.0;
    for (int r = 0; r < replications; ++r) {
      const double d = report.rows[j * replications + r].scaled_dev - mean;
      var += d * d;
    }
    report.scaled_stddev[j] = std::sqrt(var / (replications - 1));
    if (report.scaled_stddev[j] >
        2.0 * std::sqrt(static_cast<double>(n_list[j])) * opts.tol) {
      degenerate = false;
    }
  }
  report.degenerate = degenerate;
  if (degenerate) {
    report.ratio = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  const auto [lo, hi] = std::minmax_element(report.scaled_stddev.begin(),
                                            report.scaled_stddev.end());
  report.ratio = *hi / *lo;
  if (enforce && report.ratio > 2.0) {
    std::ostringstream msg;
    msg << "scaled-deviation spread " << report.ratio
        << " exceeds 2 across sample sizes";
    throw InequalityViolation(msg.str());
  }
  return report;
}

double empirical_inf_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  if (!(p > 0.0) || p > 1.0) throw ConfigError("quantile level must be in (0, 1]");
  std::sort(values.begin(), values.end());
  const int m = static_cast<int>(values.size());
  // inf{t : #(values <= t)/m >= p} is the k-th order statistic with
  // k = ceil(m p); the epsilon guards against ties like 200 * 0.9.
  int k = static_cast<int>(std::ceil(m * p - 1e-9));
  k = std::max(1, std::min(m, k));
  return values[k - 1];
}

std::vector<int> draw_subset(RngStream& stream, int n, int b) {
  if (b < 1 || b > n) throw ConfigError("subset size must satisfy 1 <= b <= n");
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  for (int i = 0; i < b; ++i) {
    const int j = i + static_cast<int>(stream.below(n - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(b);
  std::sort(indices.begin(), indices.end());
  return indices;
}

SubsampleReport subsample_ci(const ProblemInstance& prob,
                             const DiscreteMeasure& sample, int b, int m,
                             double kappa, std::uint64_t seed,
                             const SolveOptions& opts, int threads) {
  sample.validate();
  const int n = sample.size();
  if (b < 2 || b >= n) throw ConfigError("subsampling needs 2 <= b < n");
  if (m < 50) throw ConfigError("subsampling needs m >= 50 subsets");
  if (!(kappa > 0.0) || !(kappa < 1.0)) {
    throw ConfigError("kappa must lie in (0, 1)");
  }

  SubsampleReport report;
  report.n = n;
  report.b = b;
  report.m = m;
  report.kappa = kappa;
  report.seed = seed;
  report.b_ratio_warning = 2 * b >= n;

  MeasureEvaluator evaluator(prob, sample.atoms, threads);
  const SaaSolution full = solve_saa(evaluator, sample.weights, opts);
  report.v_n = full.value;

  const bool compact = !opts.force_matrix_free &&
                       prob.control_dim() <= opts.compact_dim_limit;
  if (compact) evaluator.precompute_atom_quadratics(threads);

  report.subsample_values.assign(m, 0.0);
  SolveOptions inner = opts;
  inner.threads = 1;
  parallel_for(m, threads, [&](std::size_t j) {
    RngStream stream(seed, RngStream::stream_id("subset", j));
    const std::vector<int> subset = draw_subset(stream, n, b);
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(n);
    for (int i : subset) weights[i] = 1.0 / b;
    report.subsample_values[j] = solve_saa(evaluator, weights, inner).value;
  });

  report.roots.resize(m);
  const double sqrt_b = std::sqrt(static_cast<double>(b));
  for (int j = 0; j < m; ++j) {
    report.roots[j] = sqrt_b * (report.subsample_values[j] - report.v_n);
  }
  report.quantile_one_sided = empirical_inf_quantile(report.roots, 1.0 - kappa);
  report.quantile_lower = empirical_inf_quantile(report.roots, kappa / 2.0);
  report.quantile_upper = empirical_inf_quantile(report.roots, 1.0 - kappa / 2.0);

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  report.one_sided_lower = report.v_n - report.quantile_one_sided / sqrt_n;
  report.two_sided_lower = report.v_n - report.quantile_upper / sqrt_n;
  report.two_sided_upper = report.v_n - report.quantile_lower / sqrt_n;
  return report;
}

CoverageReport coverage_experiment(const ProblemInstance& prob,
                                   const SaaSolution& oracle, const Box& box,
                                   int n, int b, int m, double kappa,
                                   int outer_replications, std::uint64_t seed,
                                   const SolveOptions& opts, int threads) {
  if (outer_replications < 100) {
    throw ConfigError("coverage experiment needs R >= 100 replications, got " +
                      std::to_string(outer_replications));
  }

  CoverageReport report;
  report.n = n;
  report.b = b;
  report.m = m;
  report.kappa = kappa;
  report.outer_replications = outer_replications;
  report.seed = seed;
  report.v_oracle = oracle.value;
  report.rows.resize(outer_replications);

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  SolveOptions inner = opts;
  inner.threads = 1;
  parallel_for(outer_replications, threads, [&](std::size_t r) {
    RngStream stream(seed, RngStream::stream_id("coverage", n, r));
    const DiscreteMeasure sample = sample_uniform(box, n, stream);
    const std::uint64_t sub_seed =
        seed ^ RngStream::stream_id("coverage-subsets", r);
    const SubsampleReport ci =
        subsample_ci(prob, sample, b, m, kappa, sub_seed, inner, 1);
    CoverageRow row;
    row.replication = static_cast<int>(r);
    row.v_n = ci.v_n;
    row.quantile_one_sided = ci.quantile_one_sided;
    row.one_sided_lower = ci.one_sided_lower;
    row.two_sided_lower = ci.two_sided_lower;
    row.two_sided_upper = ci.two_sided_upper;
    row.covered_one_sided =
        sqrt_n * (ci.v_n - oracle.value) <= ci.quantile_one_sided;
    row.covered_two_sided = ci.two_sided_lower <= oracle.value &&
                            oracle.value <= ci.two_sided_upper;
    row.width = ci.two_sided_upper - ci.two_sided_lower;
    report.rows[r] = row;
  });

  for (const CoverageRow& row : report.rows) {
    report.coverage_one_sided += row.covered_one_sided ? 1.0 : 0.0;
    report.coverage_two_sided += row.covered_two_sided ? 1.0 : 0.0;
    report.mean_width += row.width;
  }
  report.coverage_one_sided /= outer_replications;
  report.coverage_two_sided /= outer_replications;
  report.mean_width /= outer_replications;
  return report;
}

}  // namespace saapde
