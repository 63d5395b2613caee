#include "backheat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "backheat/errors.hpp"
#include "backheat/random.hpp"

namespace backheat {

double log_convexity_tolerance(double dt) { return 1e-6 + kLogConvexitySlackC * dt * dt; }

StabilityReport log_convexity_check(const Trajectory& traj, const InnerProductWeights& weights,
                                    std::optional<double> prior_bound) {
  if (traj.states.size() < 3) throw ConfigError("log-convexity check needs Nt >= 2");
  const double n0 = norm(traj.states.front(), weights);
  const double nt = norm(traj.states.back(), weights);
  if (n0 == 0.0 || nt == 0.0) {
    throw ConfigError("log-convexity bound is vacuous for a zero trajectory");
  }
  if (prior_bound && !(*prior_bound > 0.0)) throw ConfigError("prior bound M must be positive");

  StabilityReport report;
  report.prior_bound = prior_bound;
  report.tolerance = log_convexity_tolerance(traj.dt);
  report.max_violation = -std::numeric_limits<double>::infinity();
  const double final_time = traj.time(traj.states.size() - 1);
  const double log0 = std::log(n0);
  const double logt = std::log(nt);
  for (std::size_t m = 0; m < traj.states.size(); ++m) {
    StabilitySample s;
    s.t = traj.time(m);
    const double frac = s.t / final_time;
    s.norm = norm(traj.states[m], weights);
    s.bound = std::exp((1.0 - frac) * log0 + frac * logt);
    if (prior_bound) s.conditional_bound = std::exp((1.0 - frac) * std::log(*prior_bound) + frac * logt);
    const double rel = (s.norm - s.bound) / s.bound;
    report.max_violation = std::max(report.max_violation, rel);
    report.max_deviation = std::max(report.max_deviation, std::abs(rel));
    report.samples.push_back(s);
  }
  return report;
}

double calibrate_log_convexity_slack(const TimeStepper& stepper, const EigenSystem& eig,
                                     std::size_t k) {
  if (k >= eig.size()) throw DimensionError("mode index out of range");
  const StateField phi = eig.mode(k);
  const Trajectory traj = solve_forward_trajectory(stepper, phi);
  const auto& w = stepper.grid().weights();
  const double lambda = eig.eigenvalues[static_cast<Eigen::Index>(k)];
  const double n0 = norm(phi, w);
  double worst = 0.0;
  for (std::size_t m = 0; m < traj.states.size(); ++m) {
    const double exact = std::exp(-lambda * traj.time(m));
    worst = std::max(worst, std::abs(norm(traj.states[m], w) / n0 - exact));
  }
  return worst / (traj.dt * traj.dt);
}

double lipschitz_constant(double potential_bound, double final_time) {
  const double e = std::exp(2.0 * potential_bound * final_time);
  return std::sqrt(e * (1.0 + 2.0 * final_time * potential_bound * e));
}

double lipschitz_ratio(const TimeStepper& stepper, const StateField& g, const StateField& dg,
                       const StateField& data) {
  const auto& w = stepper.grid().weights();
  const double dn = norm(dg, w);
  if (dn == 0.0) return 0.0;
  const StateField diff = gradient(g + dg, data, 0.0, stepper) - gradient(g, data, 0.0, stepper);
  return norm(diff, w) / dn;
}

LipschitzReport lipschitz_check(const TimeStepper& stepper, int trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("lipschitz_check needs at least one trial");
  const Grid& grid = stepper.grid();
  std::mt19937_64 engine(seed);
  const StateField data = random_field(grid, engine);
  LipschitzReport report;
  report.constant = lipschitz_constant(stepper.generator().potential_bound(), stepper.final_time());
  report.bound = std::sqrt(2.0) * report.constant;
  for (int i = 0; i < trials; ++i) {
    const StateField g = random_field(grid, engine);
    const StateField dg = random_field(grid, engine);
    if (norm(dg, grid.weights()) == 0.0) {
      ++report.skipped;
      continue;
    }
    report.max_ratio = std::max(report.max_ratio, lipschitz_ratio(stepper, g, dg, data));
    ++report.trials;
  }
  return report;
}

std::vector<IllPosednessRow> ill_posedness_report(const EigenSystem& eig, double final_time) {
  std::vector<IllPosednessRow> rows;
  const auto sv = singular_value_report(eig, final_time);
  rows.reserve(sv.size());
  const double lambda1 = sv.empty() ? 0.0 : sv.front().lambda;
  for (const auto& s : sv) {
    rows.push_back({s.k, s.lambda, s.sigma, std::exp((s.lambda - lambda1) * final_time)});
  }
  return rows;
}

std::vector<IllPosednessRow> ill_posedness_report(const ProblemConfig& cfg) {
  cfg.validate();
  const Grid grid = cfg.make_grid();
  return ill_posedness_report(eigensystem(assemble(grid, cfg.make_coefficients(grid))),
                              cfg.final_time);
}

}  // namespace backheat
