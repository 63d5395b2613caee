#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "backheat/grids.hpp"
#include "backheat/operators.hpp"

namespace backheat {

/// How the uniform draws r in Y + p |Y| r are laid out.
enum class NoiseModel {
  kPerNode,       // one independent draw per degree of freedom
  kUniformShift,  // a single draw shared by every degree of freedom
};

/// Closed-form initial temperature sampled at grid nodes.
struct InitialProfile {
  std::string name;
  std::function<double(const NodePosition&)> value;

  explicit operator bool() const { return static_cast<bool>(value); }
};

/// Every scalar of a synthetic reconstruction experiment.
struct ProblemConfig {
  Geometry geometry = Geometry::kInterval;
  double length = 1.0;
  int nx = 25;
  int nr = 25;
  int ntheta = 25;
  double final_time = 0.03;
  int time_steps = 100;
  double diffusivity = 1.0;
  double surface_diffusivity = 1.0;
  std::vector<double> bulk_potential;      // empty = 0; one value = constant
  std::vector<double> boundary_potential;  // empty = 0; one value = constant
  double epsilon = 1e-8;
  double threshold = 1e-6;  // e_J
  double noise_level = 0.0;  // p, a fraction (0.01 = 1%)
  NoiseModel noise_model = NoiseModel::kPerNode;
  std::uint64_t seed = 42;
  int max_iter = 500;
  InitialProfile exact;
  std::optional<Eigen::VectorXd> initial_guess;  // default: zero field

  /// Throws ConfigError on the first violated constraint.
  void validate() const;

  Grid make_grid() const;
  Coefficients make_coefficients(const Grid& grid) const;
  TimeStepper make_stepper() const;
};

/// Y + p |Y| r with r uniform on [0, 1) from std::mt19937_64(seed), converted
/// as (u >> 11) * 2^-53. Identical inputs give bit-identical output.
StateField add_noise(const StateField& data, const InnerProductWeights& weights, double level,
                     std::uint64_t seed, NoiseModel model = NoiseModel::kPerNode);

/// J_eps(G) = 1/2 |Psi G - Y|^2 + eps/2 |G|^2.
double cost(const StateField& g, const StateField& data, double epsilon,
            const TimeStepper& stepper);

/// Adjoint-state gradient Psi*(Psi G - Y) + eps G; exact for `cost`.
StateField gradient(const StateField& g, const StateField& data, double epsilon,
                    const TimeStepper& stepper);

/// e = |Psi(G with boundary entries zeroed) - Y_T|^2, full bulk+boundary norm.
double convergence_error(const StateField& g, const StateField& exact_data,
                         const TimeStepper& stepper);

/// E = |g_exact - g|, L2(Omega) part of the norm only.
double accuracy_error(const StateField& exact, const StateField& g, const Grid& grid);

struct IterationRecord {
  int n = 0;
  double cost = 0.0;
  std::optional<double> convergence_error;  // needs noise-free data
  std::optional<double> accuracy_error;     // needs the exact initial state
  double alpha = 0.0;  // step that produced G_n (0 for n = 0)
  double gamma = 0.0;  // conjugation weight of the direction used for that step
};

enum class StopReason { kThresholdMet, kMaxIter, kStagnation };

std::string to_string(StopReason reason);

struct CgSettings {
  double epsilon = 1e-8;
  double threshold = 1e-6;
  int max_iter = 500;
};

/// Optional ground truth used only to fill e and E in the ledger.
struct ReferenceSolution {
  StateField exact_initial;
  StateField exact_data;
};

struct Reconstruction {
  StateField estimate;
  std::vector<IterationRecord> ledger;
  StopReason stop_reason = StopReason::kMaxIter;

  /// Number of updates performed, i.e. the index of the last ledger row.
  int iterations() const { return ledger.empty() ? 0 : ledger.back().n; }
};

/// Fletcher-Reeves conjugate gradient on J_eps with the exact line step
/// alpha_n = |J'(G_n)|^2 / (|Psi p_n|^2 + eps |p_n|^2), stopping as soon as
/// J_eps(G_{n+1}) < threshold.
Reconstruction conjugate_gradient(const TimeStepper& stepper, const StateField& data,
                                  const CgSettings& settings, const StateField& initial_guess,
                                  const ReferenceSolution* reference = nullptr);

/// Runs conjugate_gradient with the stepper, settings and start from `cfg`;
/// e and E are recorded when `cfg.exact` is set.
Reconstruction cg_reconstruct(const ProblemConfig& cfg, const StateField& data);

/// Synthetic experiment: exact state, its noise-free and noisy final data,
/// and the reconstruction from the noisy data.
struct Experiment {
  StateField exact_initial;
  StateField exact_data;
  StateField noisy_data;
  Reconstruction result;
};

Experiment run_experiment(const ProblemConfig& cfg);

}  // namespace backheat
