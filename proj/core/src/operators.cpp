#include "backheat/operators.hpp"

#include <cmath>
#include <string>

#include "backheat/errors.hpp"

namespace backheat {

namespace {

Eigen::VectorXd potential_or_zero(const Eigen::VectorXd& v, std::size_t n, const char* what) {
  if (v.size() == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (static_cast<std::size_t>(v.size()) != n) {
    throw DimensionError(std::string(what) + " has " + std::to_string(v.size()) +
                         " entries, grid expects " + std::to_string(n));
  }
  return v;
}

Coefficients normalized(const Grid& grid, const Coefficients& c) {
  if (!(c.diffusivity > 0.0)) throw ConfigError("bulk diffusivity must be positive");
  if (c.surface_diffusivity < 0.0) throw ConfigError("surface diffusivity must be >= 0");
  Coefficients out = c;
  out.bulk_potential = potential_or_zero(c.bulk_potential, grid.bulk_size(), "bulk potential");
  out.boundary_potential =
      potential_or_zero(c.boundary_potential, grid.boundary_size(), "boundary potential");
  return out;
}

}  // namespace

Generator::Generator(Grid grid, Eigen::MatrixXd matrix, Coefficients coefficients)
    : grid_(std::move(grid)), matrix_(std::move(matrix)), coefficients_(std::move(coefficients)) {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw DimensionError("generator matrix does not match grid size");
  }
}

double Generator::potential_bound() const {
  double d = 0.0;
  if (coefficients_.bulk_potential.size() > 0) {
    d = coefficients_.bulk_potential.cwiseAbs().maxCoeff();
  }
  if (coefficients_.boundary_potential.size() > 0) {
    d = std::max(d, coefficients_.boundary_potential.cwiseAbs().maxCoeff());
  }
  return d;
}

StateField Generator::apply(const StateField& y) const {
  if (!matches(y, grid_)) throw DimensionError("field does not match generator grid");
  return StateField(matrix_ * y.values(), y.bulk_size());
}

Eigen::MatrixXd Generator::adjoint_matrix() const {
  const auto& w = grid_.weights().total;
  return w.cwiseInverse().asDiagonal() * matrix_.transpose() * w.asDiagonal();
}

double Generator::symmetry_defect() const {
  const Eigen::MatrixXd wa = grid_.weights().total.asDiagonal() * matrix_;
  const double scale = wa.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (wa - wa.transpose()).cwiseAbs().maxCoeff() / scale;
}

Generator assemble_1d(const Grid& grid, const Coefficients& coefficients) {
  const Grid1D& g = grid.interval();
  Coefficients c = normalized(grid, coefficients);
  c.surface_diffusivity = 0.0;  // no surface diffusion on two points
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double d = c.diffusivity;
  const double inv_dx = 1.0 / g.dx;
  const double inv_dx2 = inv_dx * inv_dx;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  auto at = [&](int row, int col) -> double& {
    return a(static_cast<Eigen::Index>(g.dof(row)), static_cast<Eigen::Index>(g.dof(col)));
  };
  for (int j = 1; j < g.nx; ++j) {
    at(j, j - 1) += d * inv_dx2;
    at(j, j) += -2.0 * d * inv_dx2 - c.bulk_potential[j - 1];
    at(j, j + 1) += d * inv_dx2;
  }
  // y_t(0) - d y_x(0) = -b y, y_t(l) + d y_x(l) = -b y
  at(0, 0) += -d * inv_dx - c.boundary_potential[0];
  at(0, 1) += d * inv_dx;
  at(g.nx, g.nx) += -d * inv_dx - c.boundary_potential[1];
  at(g.nx, g.nx - 1) += d * inv_dx;
  return Generator(grid, std::move(a), c);
}

Generator assemble_2d(const Grid& grid, const Coefficients& coefficients) {
  const PolarGrid& g = grid.disk();
  const Coefficients c = normalized(grid, coefficients);
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double d = c.diffusivity;
  const double inv_dr2 = 1.0 / (g.dr * g.dr);
  const double inv_dt2 = 1.0 / (g.dtheta * g.dtheta);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  auto idx = [&](int j, int t) { return static_cast<Eigen::Index>(g.dof(j, t)); };

  // Origin: limit of the Laplacian, 4 (mean of first ring - y_0) / dr^2.
  a(0, 0) += -4.0 * d * inv_dr2 - c.bulk_potential[0];
  for (int t = 0; t < g.ntheta; ++t) a(0, idx(1, t)) += 4.0 * d * inv_dr2 / g.ntheta;

  for (int j = 1; j < g.nr; ++j) {
    const double r = g.radius(j);
    const double outward = d * (inv_dr2 + 0.5 / (r * g.dr));
    const double inward = d * (inv_dr2 - 0.5 / (r * g.dr));
    const double angular = d * inv_dt2 / (r * r);
    for (int t = 0; t < g.ntheta; ++t) {
      const Eigen::Index row = idx(j, t);
      a(row, row) += -2.0 * d * inv_dr2 - 2.0 * angular - c.bulk_potential[row];
      a(row, idx(j + 1, t)) += outward;
      a(row, idx(j - 1, t)) += inward;
      a(row, idx(j, t + 1)) += angular;
      a(row, idx(j, t - 1)) += angular;
    }
  }

  const double gamma = c.surface_diffusivity;
  for (int t = 0; t < g.ntheta; ++t) {
    const Eigen::Index row = idx(g.nr, t);
    a(row, row) += -2.0 * gamma * inv_dt2 - d / g.dr - c.boundary_potential[t];
    a(row, idx(g.nr, t + 1)) += gamma * inv_dt2;
    a(row, idx(g.nr, t - 1)) += gamma * inv_dt2;
    a(row, idx(g.nr - 1, t)) += d / g.dr;
  }
  return Generator(grid, std::move(a), c);
}

Generator assemble(const Grid& grid, const Coefficients& coefficients) {
  return grid.geometry() == Geometry::kInterval ? assemble_1d(grid, coefficients)
                                                : assemble_2d(grid, coefficients);
}

TimeStepper::TimeStepper(Generator generator, double final_time, int steps)
    : generator_(std::move(generator)), final_time_(final_time), steps_(steps) {
  if (!(final_time_ > 0.0) || !std::isfinite(final_time_)) {
    throw ConfigError("final time must be positive");
  }
  if (steps_ < 1) throw ConfigError("number of time steps must be >= 1");
  const auto n = generator_.matrix().rows();
  const double h = 0.5 * dt();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  explicit_part_ = id + h * generator_.matrix();
  implicit_part_.compute(id - h * generator_.matrix());
  const double rcond = implicit_part_.rcond();
  if (!(rcond > 1e-14)) {
    throw NumericalError("Crank-Nicolson step matrix is singular (rcond " +
                         std::to_string(rcond) + ")");
  }
}

void TimeStepper::step(Eigen::VectorXd& y) const { y = implicit_part_.solve(explicit_part_ * y); }

void TimeStepper::adjoint_step(Eigen::VectorXd& y) const {
  const auto& w = generator_.grid().weights().total;
  const Eigen::VectorXd z = w.cwiseProduct(y);
  const Eigen::VectorXd u = implicit_part_.transpose().solve(z);
  y = (explicit_part_.transpose() * u).cwiseQuotient(w);
}

double TimeStepper::stability(double lambda) const {
  const double h = 0.5 * dt() * lambda;
  return (1.0 - h) / (1.0 + h);
}

namespace {

void check_initial(const TimeStepper& stepper, const StateField& field) {
  if (!matches(field, stepper.grid())) throw DimensionError("field does not match stepper grid");
  if (!field.all_finite()) throw NumericalError("initial state contains non-finite values");
}

void check_step(const Eigen::VectorXd& y, int m) {
  if (!y.allFinite()) {
    throw NumericalError("non-finite state after time step " + std::to_string(m));
  }
}

}  // namespace

StateField solve_forward(const TimeStepper& stepper, const StateField& initial) {
  check_initial(stepper, initial);
  Eigen::VectorXd y = initial.values();
  for (int m = 1; m <= stepper.steps(); ++m) {
    stepper.step(y);
    check_step(y, m);
  }
  return StateField(std::move(y), initial.bulk_size());
}

Trajectory solve_forward_trajectory(const TimeStepper& stepper, const StateField& initial) {
  check_initial(stepper, initial);
  Trajectory traj;
  traj.dt = stepper.dt();
  traj.states.reserve(static_cast<std::size_t>(stepper.steps()) + 1);
  traj.states.push_back(initial);
  Eigen::VectorXd y = initial.values();
  for (int m = 1; m <= stepper.steps(); ++m) {
    stepper.step(y);
    check_step(y, m);
    traj.states.emplace_back(y, initial.bulk_size());
  }
  return traj;
}

StateField solve_adjoint(const TimeStepper& stepper, const StateField& terminal) {
  check_initial(stepper, terminal);
  Eigen::VectorXd phi = terminal.values();
  for (int m = stepper.steps(); m >= 1; --m) {
    stepper.adjoint_step(phi);
    check_step(phi, m);
  }
  return StateField(std::move(phi), terminal.bulk_size());
}

}  // namespace backheat
