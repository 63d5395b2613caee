#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "backheat/grids.hpp"
#include "backheat/operators.hpp"

namespace backheat {

/// Eigenpairs of -A, ascending, with weighted-orthonormal eigenvectors.
///
/// Solved as the ordinary symmetric problem for W^{1/2} (-A) W^{-1/2}
/// (symmetrized); `symmetry_defect` records how far that matrix was from
/// symmetric before symmetrization, relative to its largest entry.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd modes;  // column k is phi_k
  InnerProductWeights weights;
  double symmetry_defect = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  StateField mode(std::size_t k) const;
  /// <u, phi_k> for every k.
  Eigen::VectorXd coefficients(const StateField& u) const;
  /// sum_k c_k phi_k.
  StateField synthesize(const Eigen::VectorXd& c) const;
};

EigenSystem eigensystem(const Generator& gen);

/// Input-output operator Psi G = Y(T).
StateField apply_io(const TimeStepper& stepper, const StateField& initial);

struct SingularValue {
  std::size_t k = 0;  // 1-based mode index
  double lambda = 0.0;
  double sigma = 0.0;  // exp(-lambda T)
};

/// (k, exp(-lambda_k T)) for every mode; nonincreasing in k.
std::vector<SingularValue> singular_value_report(const EigenSystem& eig, double final_time);

/// Spectral solvability diagnostics for final-time data.
struct PicardReport {
  Eigen::VectorXd coefficients;    // Y_{T,k} = <Y_T, phi_k>
  Eigen::VectorXd amplified;       // exp(lambda_k T) Y_{T,k}^2
  Eigen::VectorXd partial_sums;    // running sums of `amplified`
  Eigen::VectorXd reconstruction;  // exp(lambda_k T) Y_{T,k}
  std::optional<std::size_t> overflow_index;  // first 1-based k above threshold
  double threshold = 1e12;

  /// True when no amplified term exceeds the threshold, i.e. the naive
  /// series inversion is numerically representable.
  bool representable() const { return !overflow_index.has_value(); }
};

PicardReport picard_report(const StateField& data, const EigenSystem& eig, double final_time,
                           double threshold = 1e12);

/// Naive series inversion sum_k exp(lambda_k T) Y_{T,k} phi_k.
StateField picard_reconstruction(const PicardReport& report, const EigenSystem& eig);

struct TikhonovSolution {
  StateField field;
  /// 1-based modes whose filter gain sigma/(sigma^2 + eps) exceeds the Picard
  /// threshold; reported rather than clamped.
  std::vector<std::size_t> unstable_modes;
};

/// Closed-form minimizer of 1/2 |Psi G - Y|^2 + eps/2 |G|^2 in the eigenbasis,
/// with sigma_k = exp(-lambda_k T).
TikhonovSolution spectral_tikhonov(const StateField& data, const EigenSystem& eig,
                                   double final_time, double epsilon, double threshold = 1e12);

}  // namespace backheat
