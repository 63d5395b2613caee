#pragma once

#include <vector>

#include <Eigen/Dense>

#include "backheat/grids.hpp"

namespace backheat {

/// Physical coefficients of the bulk/boundary system. Empty potentials mean zero.
struct Coefficients {
  double diffusivity = 1.0;          // d > 0
  double surface_diffusivity = 0.0;  // gamma >= 0; ignored on the interval
  Eigen::VectorXd bulk_potential;      // a, one entry per bulk unknown
  Eigen::VectorXd boundary_potential;  // b, one entry per boundary unknown
};

/// Semi-discrete generator A of dY/dt = A Y (method of lines).
class Generator {
 public:
  Generator(Grid grid, Eigen::MatrixXd matrix, Coefficients coefficients);

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Coefficients& coefficients() const { return coefficients_; }
  double diffusivity() const { return coefficients_.diffusivity; }
  double surface_diffusivity() const { return coefficients_.surface_diffusivity; }

  /// D = max(|a|_inf, |b|_inf).
  double potential_bound() const;

  StateField apply(const StateField& y) const;

  /// Matrix of the weighted adjoint W^{-1} A^T W.
  Eigen::MatrixXd adjoint_matrix() const;

  /// max |(W A - (W A)^T)_{ij}| / max |(W A)_{ij}|; zero for an exactly
  /// weight-symmetric discretization.
  double symmetry_defect() const;

 private:
  Grid grid_;
  Eigen::MatrixXd matrix_;
  Coefficients coefficients_;
};

/// Interval generator: centered second difference in the bulk, one-sided
/// inward differences in the dynamic boundary rows
///   (A y)_0  =  d (y_1 - y_0)/dx - b_0 y_0
///   (A y)_N  = -d (y_N - y_{N-1})/dx - b_l y_N.
Generator assemble_1d(const Grid& grid, const Coefficients& coefficients = {});

/// Disk generator in polar coordinates. Interior rows discretize
/// d (y_rr + y_r / r + y_thth / r^2) - a y with centered differences and
/// periodic theta; the origin uses 4 d (mean(ring 1) - y_0)/dr^2; circle rows
/// are gamma y_thth - d (y_N - y_{N-1})/dr - b y.
Generator assemble_2d(const Grid& grid, const Coefficients& coefficients = {});

/// Assembles the generator matching the grid's geometry.
Generator assemble(const Grid& grid, const Coefficients& coefficients = {});

/// Crank-Nicolson stepper with the step matrix factorized once.
///
/// Forward step:  (I - dt/2 A) y_{m+1} = (I + dt/2 A) y_m.
/// Adjoint step is the exact weighted transpose of the forward step, so
/// <M u, v> = <u, M* v> holds to rounding for every u, v.
class TimeStepper {
 public:
  TimeStepper(Generator generator, double final_time, int steps = 100);

  const Generator& generator() const { return generator_; }
  const Grid& grid() const { return generator_.grid(); }
  double final_time() const { return final_time_; }
  int steps() const { return steps_; }
  double dt() const { return final_time_ / steps_; }

  void step(Eigen::VectorXd& y) const;
  void adjoint_step(Eigen::VectorXd& y) const;

  /// Amplification factor of one step for the mode with -A phi = lambda phi.
  double stability(double lambda) const;

 private:
  Generator generator_;
  double final_time_;
  int steps_;
  Eigen::MatrixXd explicit_part_;  // I + dt/2 A
  Eigen::PartialPivLU<Eigen::MatrixXd> implicit_part_;  // I - dt/2 A
};

struct Trajectory {
  double dt = 0.0;
  std::vector<StateField> states;  // states[m] at t = m dt

  double time(std::size_t m) const { return dt * static_cast<double>(m); }
};

/// Y(T) for Y' = A Y, Y(0) = initial.
StateField solve_forward(const TimeStepper& stepper, const StateField& initial);

/// All Nt + 1 states of the forward solve.
Trajectory solve_forward_trajectory(const TimeStepper& stepper, const StateField& initial);

/// Phi(0) for -Phi' = A* Phi, Phi(T) = terminal, using the discrete adjoint
/// of the forward stepper.
StateField solve_adjoint(const TimeStepper& stepper, const StateField& terminal);

}  // namespace backheat
