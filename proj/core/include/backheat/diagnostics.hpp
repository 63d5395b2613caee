#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "backheat/grids.hpp"
#include "backheat/inversion.hpp"
#include "backheat/operators.hpp"
#include "backheat/spectral.hpp"

namespace backheat {

/// C in the log-convexity slack C * dt^2, calibrated on the single-mode bias
/// of the second interval eigenmode (nx = 25, T = 0.03, Nt = 100), which
/// measures 0.012412; see calibrate_log_convexity_slack.
inline constexpr double kLogConvexitySlackC = 1.25e-2;

/// 1e-6 + C dt^2, the default tolerance of log_convexity_check.
double log_convexity_tolerance(double dt);

struct StabilitySample {
  double t = 0.0;
  double norm = 0.0;
  double bound = 0.0;  // |Y(0)|^{1-t/T} |Y(T)|^{t/T}
  std::optional<double> conditional_bound;  // M^{1-t/T} |Y(T)|^{t/T}
};

struct StabilityReport {
  std::vector<StabilitySample> samples;
  double max_violation = 0.0;  // max (norm - bound) / bound, may be negative
  double max_deviation = 0.0;  // max |norm - bound| / bound
  double tolerance = 0.0;
  std::optional<double> prior_bound;

  bool holds() const { return max_violation <= tolerance; }
};

/// Compares |Y(t_m)| with the log-convex interpolant of its end norms at
/// every stored time. Rejects trajectories with fewer than three states or a
/// zero initial/final state.
StabilityReport log_convexity_check(const Trajectory& traj, const InnerProductWeights& weights,
                                    std::optional<double> prior_bound = std::nullopt);

/// max_m | |Y(t_m)| / |Y(0)| - exp(-lambda t_m) | / dt^2 for initial data phi_k.
double calibrate_log_convexity_slack(const TimeStepper& stepper, const EigenSystem& eig,
                                     std::size_t k);

/// L = sqrt(exp(2DT) (1 + 2TD exp(2TD))).
double lipschitz_constant(double potential_bound, double final_time);

struct LipschitzReport {
  double max_ratio = 0.0;
  double constant = 0.0;  // L
  double bound = 0.0;     // sqrt(2) L
  int trials = 0;
  int skipped = 0;  // pairs with delta G = 0

  bool holds() const { return max_ratio <= bound + 1e-8; }
};

/// |J'(G + dG) - J'(G)| / |dG| with eps = 0; zero when dG = 0.
double lipschitz_ratio(const TimeStepper& stepper, const StateField& g, const StateField& dg,
                       const StateField& data);

LipschitzReport lipschitz_check(const TimeStepper& stepper, int trials, std::uint64_t seed);

struct IllPosednessRow {
  std::size_t k = 0;
  double lambda = 0.0;
  double sigma = 0.0;
  double amplification = 0.0;  // sigma_1 / sigma_k
};

std::vector<IllPosednessRow> ill_posedness_report(const EigenSystem& eig, double final_time);
std::vector<IllPosednessRow> ill_posedness_report(const ProblemConfig& cfg);

}  // namespace backheat
