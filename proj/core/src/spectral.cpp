#include "backheat/spectral.hpp"

#include <cmath>
#include <string>

#include "backheat/errors.hpp"

namespace backheat {

StateField EigenSystem::mode(std::size_t k) const {
  return StateField(modes.col(static_cast<Eigen::Index>(k)), weights.bulk_size);
}

Eigen::VectorXd EigenSystem::coefficients(const StateField& u) const {
  if (u.size() != weights.size()) throw DimensionError("field does not match eigensystem");
  return modes.transpose() * weights.total.cwiseProduct(u.values());
}

StateField EigenSystem::synthesize(const Eigen::VectorXd& c) const {
  if (c.size() != modes.cols()) throw DimensionError("coefficient count mismatch");
  return StateField(modes * c, weights.bulk_size);
}

EigenSystem eigensystem(const Generator& gen) {
  const auto& w = gen.grid().weights();
  const Eigen::VectorXd sqrt_w = w.total.cwiseSqrt();
  const Eigen::MatrixXd b =
      -(sqrt_w.asDiagonal() * gen.matrix() * sqrt_w.cwiseInverse().asDiagonal());
  const double scale = b.cwiseAbs().maxCoeff();

  EigenSystem out;
  out.weights = w;
  out.symmetry_defect = scale > 0.0 ? (b - b.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;

  const Eigen::MatrixXd sym = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigensolver failed on a " + std::to_string(sym.rows()) +
                         "x" + std::to_string(sym.cols()) + " generator");
  }
  out.eigenvalues = solver.eigenvalues();
  out.modes = sqrt_w.cwiseInverse().asDiagonal() * solver.eigenvectors();
  // Fix the sign so the largest-magnitude entry of each mode is positive.
  for (Eigen::Index k = 0; k < out.modes.cols(); ++k) {
    Eigen::Index imax = 0;
    out.modes.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.modes(imax, k) < 0.0) out.modes.col(k) *= -1.0;
  }
  return out;
}

StateField apply_io(const TimeStepper& stepper, const StateField& initial) {
  return solve_forward(stepper, initial);
}

std::vector<SingularValue> singular_value_report(const EigenSystem& eig, double final_time) {
  std::vector<SingularValue> out;
  out.reserve(eig.size());
  for (std::size_t k = 0; k < eig.size(); ++k) {
    const double lambda = eig.eigenvalues[static_cast<Eigen::Index>(k)];
    out.push_back({k + 1, lambda, std::exp(-lambda * final_time)});
  }
  return out;
}

PicardReport picard_report(const StateField& data, const EigenSystem& eig, double final_time,
                           double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("Picard threshold must be positive");
  PicardReport r;
  r.threshold = threshold;
  r.coefficients = eig.coefficients(data);
  const auto n = r.coefficients.size();
  r.amplified.resize(n);
  r.partial_sums.resize(n);
  r.reconstruction.resize(n);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double gain = std::exp(eig.eigenvalues[k] * final_time);
    const double c = r.coefficients[k];
    r.reconstruction[k] = gain * c;
    r.amplified[k] = gain * c * c;
    sum += r.amplified[k];
    r.partial_sums[k] = sum;
    if (!r.overflow_index && !(r.amplified[k] <= threshold)) {
      r.overflow_index = static_cast<std::size_t>(k) + 1;
    }
  }
  return r;
}

StateField picard_reconstruction(const PicardReport& report, const EigenSystem& eig) {
  return eig.synthesize(report.reconstruction);
}

TikhonovSolution spectral_tikhonov(const StateField& data, const EigenSystem& eig,
                                   double final_time, double epsilon, double threshold) {
  if (epsilon < 0.0) throw ConfigError("regularization weight must be >= 0");
  const Eigen::VectorXd c = eig.coefficients(data);
  Eigen::VectorXd filtered(c.size());
  TikhonovSolution out;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    const double sigma = std::exp(-eig.eigenvalues[k] * final_time);
    const double gain = sigma / (sigma * sigma + epsilon);
    if (!(gain <= threshold)) out.unstable_modes.push_back(static_cast<std::size_t>(k) + 1);
    filtered[k] = gain * c[k];
  }
  out.field = eig.synthesize(filtered);
  return out;
}

}  // namespace backheat
