#pragma once

#include <cstddef>
#include <variant>

#include <Eigen/Dense>

namespace backheat {

/// Uniform grid x_j = j*dx, j = 0..nx, on the interval [0, length].
///
/// Degrees of freedom are ordered bulk first (nodes 1..nx-1), then the two
/// dynamic boundary nodes (x = 0, x = length).
struct Grid1D {
  double length = 1.0;
  int nx = 0;
  double dx = 0.0;

  static Grid1D build(double length, int nx);

  double node(int j) const { return j * dx; }
  std::size_t bulk_count() const { return static_cast<std::size_t>(nx - 1); }
  std::size_t boundary_count() const { return 2; }

  /// Degree-of-freedom index of grid node j (0..nx).
  std::size_t dof(int j) const;
};

/// Uniform polar grid (r_j, theta_n) on the unit disk, theta periodic.
///
/// Degrees of freedom: the origin (one unknown shared by every theta), then
/// rings j = 1..nr-1 with theta fastest, then the circle r = 1.
struct PolarGrid {
  int nr = 0;
  int ntheta = 0;
  double dr = 0.0;
  double dtheta = 0.0;

  static PolarGrid build(int nr, int ntheta);

  double radius(int j) const { return j * dr; }
  double angle(int n) const { return n * dtheta; }
  std::size_t bulk_count() const {
    return 1 + static_cast<std::size_t>(nr - 1) * static_cast<std::size_t>(ntheta);
  }
  std::size_t boundary_count() const { return static_cast<std::size_t>(ntheta); }

  /// Wraps n periodically into [0, ntheta).
  int wrap(int n) const;
  /// Degree-of-freedom index of node (j, n); j = 0 maps to the origin for all n.
  std::size_t dof(int j, int n) const;
};

enum class Geometry { kInterval, kDisk };

/// Quadrature weights realizing the discrete L2(Omega) x L2(Gamma) product.
///
/// `domain` holds the L2(Omega) part for every degree of freedom and `surface`
/// the boundary part (zero on bulk unknowns). `total` is their sum.
struct InnerProductWeights {
  Eigen::VectorXd domain;
  Eigen::VectorXd surface;
  Eigen::VectorXd total;
  std::size_t bulk_size = 0;

  std::size_t size() const { return static_cast<std::size_t>(total.size()); }
};

/// Position of a degree of freedom: x for the interval, (r, theta) for the disk.
struct NodePosition {
  double x = 0.0;
  double r = 0.0;
  double theta = 0.0;
  bool boundary = false;
  bool origin = false;
  int i = 0;  // node index (interval) or radial index (disk)
  int j = 0;  // angular index (disk); 0 otherwise
};

/// A discretization together with its inner-product weights. Immutable.
class Grid {
 public:
  explicit Grid(Grid1D interval);
  explicit Grid(PolarGrid disk);

  Geometry geometry() const;
  const Grid1D& interval() const;
  const PolarGrid& disk() const;

  std::size_t size() const { return weights_.size(); }
  std::size_t bulk_size() const { return weights_.bulk_size; }
  std::size_t boundary_size() const { return size() - bulk_size(); }

  const InnerProductWeights& weights() const { return weights_; }
  NodePosition position(std::size_t dof) const;

  friend bool operator==(const Grid& a, const Grid& b);

 private:
  std::variant<Grid1D, PolarGrid> shape_;
  InnerProductWeights weights_;
};

/// Bulk-plus-boundary field sampled on a grid.
///
/// Boundary entries are the field's values at boundary nodes; the trace
/// coupling y_Gamma = y|_Gamma holds by construction.
class StateField {
 public:
  StateField() = default;
  StateField(std::size_t bulk_size, std::size_t boundary_size);
  StateField(Eigen::VectorXd values, std::size_t bulk_size);

  static StateField zeros(const Grid& grid);
  static StateField constant(const Grid& grid, double value);
  template <typename F>
  static StateField sample(const Grid& grid, F&& f) {
    StateField out = zeros(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.values_[static_cast<Eigen::Index>(i)] = f(grid.position(i));
    }
    return out;
  }

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  std::size_t bulk_size() const { return bulk_size_; }
  std::size_t boundary_size() const { return size() - bulk_size_; }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  auto bulk() const { return values_.head(static_cast<Eigen::Index>(bulk_size_)); }
  auto bulk() { return values_.head(static_cast<Eigen::Index>(bulk_size_)); }
  auto boundary() const { return values_.tail(static_cast<Eigen::Index>(boundary_size())); }
  auto boundary() { return values_.tail(static_cast<Eigen::Index>(boundary_size())); }

  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

  bool same_shape(const StateField& other) const {
    return size() == other.size() && bulk_size_ == other.bulk_size_;
  }
  bool all_finite() const { return values_.allFinite(); }

  StateField& operator+=(const StateField& other);
  StateField& operator-=(const StateField& other);
  StateField& operator*=(double s);

  friend StateField operator+(StateField a, const StateField& b) { return a += b; }
  friend StateField operator-(StateField a, const StateField& b) { return a -= b; }
  friend StateField operator*(double s, StateField a) { return a *= s; }
  friend StateField operator*(StateField a, double s) { return a *= s; }

 private:
  Eigen::VectorXd values_;
  std::size_t bulk_size_ = 0;
};

bool matches(const StateField& u, const Grid& grid);

/// Weighted inner product sum_i w_i u_i v_i.
double inner_product(const StateField& u, const StateField& v, const InnerProductWeights& w);
double norm(const StateField& u, const InnerProductWeights& w);

/// L2(Omega) part only; the accuracy error of a reconstruction uses this.
double domain_inner_product(const StateField& u, const StateField& v,
                            const InnerProductWeights& w);
double domain_norm(const StateField& u, const InnerProductWeights& w);

}  // namespace backheat
