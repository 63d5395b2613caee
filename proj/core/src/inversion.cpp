#include "backheat/inversion.hpp"

#include <cmath>
#include <random>

#include "backheat/errors.hpp"

namespace backheat {

namespace {

Eigen::VectorXd expand(const std::vector<double>& values, std::size_t n, const char* what) {
  if (values.empty()) return {};
  if (values.size() == 1) {
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), values.front());
  }
  if (values.size() != n) {
    throw ConfigError(std::string(what) + " needs 1 or " + std::to_string(n) + " values, got " +
                      std::to_string(values.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(n));
}

double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

void require_finite(double v, const char* what, int n) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string("non-finite ") + what + " at CG iteration " +
                         std::to_string(n));
  }
}

}  // namespace

void ProblemConfig::validate() const {
  if (!(final_time > 0.0) || !std::isfinite(final_time)) {
    throw ConfigError("final_time must be positive");
  }
  if (time_steps < 1) throw ConfigError("time_steps must be >= 1");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (!(threshold > 0.0)) throw ConfigError("threshold (e_J) must be positive");
  if (!(noise_level >= 0.0 && noise_level < 1.0)) {
    throw ConfigError("noise_level must lie in [0, 1)");
  }
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(diffusivity > 0.0)) throw ConfigError("diffusivity must be positive");
  if (surface_diffusivity < 0.0) throw ConfigError("surface_diffusivity must be >= 0");
  const Grid grid = make_grid();
  (void)make_coefficients(grid);
  if (initial_guess && static_cast<std::size_t>(initial_guess->size()) != grid.size()) {
    throw ConfigError("initial guess has the wrong number of entries");
  }
}

Grid ProblemConfig::make_grid() const {
  if (geometry == Geometry::kInterval) return Grid(Grid1D::build(length, nx));
  return Grid(PolarGrid::build(nr, ntheta));
}

Coefficients ProblemConfig::make_coefficients(const Grid& grid) const {
  Coefficients c;
  c.diffusivity = diffusivity;
  c.surface_diffusivity = surface_diffusivity;
  c.bulk_potential = expand(bulk_potential, grid.bulk_size(), "bulk_potential");
  c.boundary_potential = expand(boundary_potential, grid.boundary_size(), "boundary_potential");
  return c;
}

TimeStepper ProblemConfig::make_stepper() const {
  const Grid grid = make_grid();
  return TimeStepper(assemble(grid, make_coefficients(grid)), final_time, time_steps);
}

StateField add_noise(const StateField& data, const InnerProductWeights& weights, double level,
                     std::uint64_t seed, NoiseModel model) {
  if (!(level >= 0.0)) throw ConfigError("noise level must be >= 0");
  StateField out = data;
  if (level == 0.0) return out;
  const double scale = level * norm(data, weights);
  std::mt19937_64 engine(seed);
  if (model == NoiseModel::kUniformShift) {
    out.values().array() += scale * uniform01(engine);
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * uniform01(engine);
  return out;
}

double cost(const StateField& g, const StateField& data, double epsilon,
            const TimeStepper& stepper) {
  const auto& w = stepper.grid().weights();
  const StateField residual = solve_forward(stepper, g) - data;
  const double misfit = inner_product(residual, residual, w);
  return 0.5 * misfit + 0.5 * epsilon * inner_product(g, g, w);
}

StateField gradient(const StateField& g, const StateField& data, double epsilon,
                    const TimeStepper& stepper) {
  StateField grad = solve_adjoint(stepper, solve_forward(stepper, g) - data);
  if (epsilon != 0.0) grad += epsilon * g;
  return grad;
}

double convergence_error(const StateField& g, const StateField& exact_data,
                         const TimeStepper& stepper) {
  StateField bulk_only = g;
  bulk_only.boundary().setZero();
  const StateField residual = solve_forward(stepper, bulk_only) - exact_data;
  return inner_product(residual, residual, stepper.grid().weights());
}

double accuracy_error(const StateField& exact, const StateField& g, const Grid& grid) {
  return domain_norm(exact - g, grid.weights());
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kThresholdMet: return "threshold_met";
    case StopReason::kMaxIter: return "max_iter";
    case StopReason::kStagnation: return "stagnation";
  }
  return "unknown";
}

Reconstruction conjugate_gradient(const TimeStepper& stepper, const StateField& data,
                                  const CgSettings& settings, const StateField& initial_guess,
                                  const ReferenceSolution* reference) {
  const Grid& grid = stepper.grid();
  const auto& w = grid.weights();
  if (!matches(data, grid) || !matches(initial_guess, grid)) {
    throw DimensionError("CG inputs do not match the stepper grid");
  }
  if (settings.epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  if (!(settings.threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (settings.max_iter < 1) throw ConfigError("max_iter must be >= 1");

  const double eps = settings.epsilon;
  const double stagnation_tol = 1e-14 * (1.0 + norm(data, w));

  Reconstruction out;
  StateField g = initial_guess;
  StateField psi_g = solve_forward(stepper, g);
  StateField residual = psi_g - data;

  auto objective = [&] {
    return 0.5 * inner_product(residual, residual, w) + 0.5 * eps * inner_product(g, g, w);
  };
  auto record = [&](int n, double j, double alpha, double gamma) {
    require_finite(j, "cost", n);
    IterationRecord rec{n, j, std::nullopt, std::nullopt, alpha, gamma};
    if (reference) {
      rec.convergence_error = convergence_error(g, reference->exact_data, stepper);
      rec.accuracy_error = accuracy_error(reference->exact_initial, g, grid);
    }
    out.ledger.push_back(rec);
    return j;
  };

  if (record(0, objective(), 0.0, 0.0) < settings.threshold) {
    out.stop_reason = StopReason::kThresholdMet;
    out.estimate = std::move(g);
    return out;
  }

  StateField grad = solve_adjoint(stepper, residual);
  if (eps != 0.0) grad += eps * g;
  double grad_sq = inner_product(grad, grad, w);
  if (std::sqrt(grad_sq) < stagnation_tol) {
    out.stop_reason = StopReason::kStagnation;
    out.estimate = std::move(g);
    return out;
  }
  StateField direction = grad;
  double gamma = 0.0;

  for (int n = 0; n < settings.max_iter; ++n) {
    const StateField psi_p = solve_forward(stepper, direction);
    const double denom =
        inner_product(psi_p, psi_p, w) + eps * inner_product(direction, direction, w);
    require_finite(denom, "step denominator", n);
    if (denom <= 0.0) {
      out.stop_reason = StopReason::kStagnation;
      break;
    }
    const double alpha = grad_sq / denom;
    require_finite(alpha, "step length", n);

    g -= alpha * direction;
    psi_g -= alpha * psi_p;
    residual = psi_g - data;
    if (!g.all_finite()) throw NumericalError("non-finite iterate at CG iteration " + std::to_string(n + 1));

    if (record(n + 1, objective(), alpha, gamma) < settings.threshold) {
      out.stop_reason = StopReason::kThresholdMet;
      break;
    }
    if (n + 1 == settings.max_iter) {
      out.stop_reason = StopReason::kMaxIter;
      break;
    }

    grad = solve_adjoint(stepper, residual);
    if (eps != 0.0) grad += eps * g;
    const double next_sq = inner_product(grad, grad, w);
    require_finite(next_sq, "gradient norm", n + 1);
    if (std::sqrt(next_sq) < stagnation_tol) {
      out.stop_reason = StopReason::kStagnation;
      break;
    }
    gamma = next_sq / grad_sq;
    grad_sq = next_sq;
    direction = grad + gamma * direction;
  }
  out.estimate = std::move(g);
  return out;
}

namespace {

StateField start_of(const ProblemConfig& cfg, const Grid& grid) {
  if (cfg.initial_guess) return StateField(*cfg.initial_guess, grid.bulk_size());
  return StateField::zeros(grid);
}

}  // namespace

Reconstruction cg_reconstruct(const ProblemConfig& cfg, const StateField& data) {
  cfg.validate();
  const TimeStepper stepper = cfg.make_stepper();
  const Grid& grid = stepper.grid();
  const CgSettings settings{cfg.epsilon, cfg.threshold, cfg.max_iter};
  if (!cfg.exact) return conjugate_gradient(stepper, data, settings, start_of(cfg, grid));
  ReferenceSolution ref;
  ref.exact_initial = StateField::sample(grid, cfg.exact.value);
  ref.exact_data = solve_forward(stepper, ref.exact_initial);
  return conjugate_gradient(stepper, data, settings, start_of(cfg, grid), &ref);
}

Experiment run_experiment(const ProblemConfig& cfg) {
  cfg.validate();
  if (!cfg.exact) throw ConfigError("experiment needs an exact initial temperature");
  const TimeStepper stepper = cfg.make_stepper();
  const Grid& grid = stepper.grid();
  Experiment ex;
  ex.exact_initial = StateField::sample(grid, cfg.exact.value);
  ex.exact_data = solve_forward(stepper, ex.exact_initial);
  ex.noisy_data =
      add_noise(ex.exact_data, grid.weights(), cfg.noise_level, cfg.seed, cfg.noise_model);
  const ReferenceSolution ref{ex.exact_initial, ex.exact_data};
  ex.result = conjugate_gradient(stepper, ex.noisy_data, {cfg.epsilon, cfg.threshold, cfg.max_iter},
                                 start_of(cfg, grid), &ref);
  return ex;
}

}  // namespace backheat
