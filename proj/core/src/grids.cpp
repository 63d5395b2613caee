#include "backheat/grids.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "backheat/errors.hpp"

namespace backheat {

Grid1D Grid1D::build(double length, int nx) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ConfigError("interval length must be positive, got " + std::to_string(length));
  }
  if (nx < 2) {
    throw ConfigError("interval grid needs nx >= 2, got " + std::to_string(nx));
  }
  return Grid1D{length, nx, length / nx};
}

std::size_t Grid1D::dof(int j) const {
  if (j == 0) return static_cast<std::size_t>(nx - 1);
  if (j == nx) return static_cast<std::size_t>(nx);
  return static_cast<std::size_t>(j - 1);
}

PolarGrid PolarGrid::build(int nr, int ntheta) {
  if (nr < 2) throw ConfigError("polar grid needs nr >= 2, got " + std::to_string(nr));
  if (ntheta < 3) {
    throw ConfigError("polar grid needs ntheta >= 3, got " + std::to_string(ntheta));
  }
  return PolarGrid{nr, ntheta, 1.0 / nr, 2.0 * std::numbers::pi / ntheta};
}

int PolarGrid::wrap(int n) const {
  const int m = n % ntheta;
  return m < 0 ? m + ntheta : m;
}

std::size_t PolarGrid::dof(int j, int n) const {
  if (j == 0) return 0;
  const auto theta = static_cast<std::size_t>(wrap(n));
  const auto nt = static_cast<std::size_t>(ntheta);
  if (j == nr) return bulk_count() + theta;
  return 1 + static_cast<std::size_t>(j - 1) * nt + theta;
}

namespace {

// Interior nodes carry dx; the two dynamic nodes carry the unit point mass of
// the R^2 component only. With these weights the boundary rows
// d(y1 - y0)/dx and the interior second difference form an exactly
// weight-symmetric pair.
InnerProductWeights interval_weights(const Grid1D& g) {
  const auto n = static_cast<Eigen::Index>(g.nx + 1);
  InnerProductWeights w;
  w.bulk_size = g.bulk_count();
  w.domain = Eigen::VectorXd::Zero(n);
  w.surface = Eigen::VectorXd::Zero(n);
  w.domain.head(g.nx - 1).setConstant(g.dx);
  w.surface.tail(2).setConstant(1.0);
  w.total = w.domain + w.surface;
  return w;
}

// Trapezoid in r with the area factor r_j, rectangle (periodic trapezoid) in
// theta. The origin owns the disk of radius dr/2; circle nodes get the outer
// half cell dr/2 * dtheta plus the arc length dtheta.
InnerProductWeights disk_weights(const PolarGrid& g) {
  const auto n = static_cast<Eigen::Index>(g.bulk_count() + g.boundary_count());
  InnerProductWeights w;
  w.bulk_size = g.bulk_count();
  w.domain = Eigen::VectorXd::Zero(n);
  w.surface = Eigen::VectorXd::Zero(n);
  w.domain[0] = std::numbers::pi * 0.25 * g.dr * g.dr;
  for (int j = 1; j < g.nr; ++j) {
    for (int t = 0; t < g.ntheta; ++t) {
      w.domain[static_cast<Eigen::Index>(g.dof(j, t))] = g.radius(j) * g.dr * g.dtheta;
    }
  }
  for (int t = 0; t < g.ntheta; ++t) {
    const auto i = static_cast<Eigen::Index>(g.dof(g.nr, t));
    w.domain[i] = 0.5 * g.dr * g.dtheta;
    w.surface[i] = g.dtheta;
  }
  w.total = w.domain + w.surface;
  return w;
}

}  // namespace

Grid::Grid(Grid1D interval) : shape_(interval), weights_(interval_weights(interval)) {}

Grid::Grid(PolarGrid disk) : shape_(disk), weights_(disk_weights(disk)) {}

Geometry Grid::geometry() const {
  return std::holds_alternative<Grid1D>(shape_) ? Geometry::kInterval : Geometry::kDisk;
}

const Grid1D& Grid::interval() const {
  if (const auto* g = std::get_if<Grid1D>(&shape_)) return *g;
  throw ConfigError("grid is not an interval");
}

const PolarGrid& Grid::disk() const {
  if (const auto* g = std::get_if<PolarGrid>(&shape_)) return *g;
  throw ConfigError("grid is not a disk");
}

NodePosition Grid::position(std::size_t dof) const {
  if (dof >= size()) throw DimensionError("degree of freedom out of range");
  NodePosition p;
  if (const auto* g = std::get_if<Grid1D>(&shape_)) {
    const int n = static_cast<int>(dof);
    if (n < g->nx - 1) {
      p.i = n + 1;
    } else {
      p.i = n == g->nx - 1 ? 0 : g->nx;
      p.boundary = true;
    }
    p.x = g->node(p.i);
    return p;
  }
  const auto& g = std::get<PolarGrid>(shape_);
  if (dof == 0) {
    p.origin = true;
    return p;
  }
  const std::size_t nt = static_cast<std::size_t>(g.ntheta);
  if (dof >= g.bulk_count()) {
    p.i = g.nr;
    p.j = static_cast<int>(dof - g.bulk_count());
    p.boundary = true;
  } else {
    p.i = 1 + static_cast<int>((dof - 1) / nt);
    p.j = static_cast<int>((dof - 1) % nt);
  }
  p.r = g.radius(p.i);
  p.theta = g.angle(p.j);
  return p;
}

bool operator==(const Grid& a, const Grid& b) {
  if (a.geometry() != b.geometry()) return false;
  if (a.geometry() == Geometry::kInterval) {
    const auto& x = a.interval();
    const auto& y = b.interval();
    return x.nx == y.nx && x.length == y.length;
  }
  return a.disk().nr == b.disk().nr && a.disk().ntheta == b.disk().ntheta;
}

StateField::StateField(std::size_t bulk_size, std::size_t boundary_size)
    : values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bulk_size + boundary_size))),
      bulk_size_(bulk_size) {}

StateField::StateField(Eigen::VectorXd values, std::size_t bulk_size)
    : values_(std::move(values)), bulk_size_(bulk_size) {
  if (bulk_size_ > size()) throw DimensionError("bulk size exceeds field length");
}

StateField StateField::zeros(const Grid& grid) {
  return StateField(grid.bulk_size(), grid.boundary_size());
}

StateField StateField::constant(const Grid& grid, double value) {
  StateField out = zeros(grid);
  out.values_.setConstant(value);
  return out;
}

StateField& StateField::operator+=(const StateField& other) {
  if (!same_shape(other)) throw DimensionError("field shapes differ");
  values_ += other.values_;
  return *this;
}

StateField& StateField::operator-=(const StateField& other) {
  if (!same_shape(other)) throw DimensionError("field shapes differ");
  values_ -= other.values_;
  return *this;
}

StateField& StateField::operator*=(double s) {
  values_ *= s;
  return *this;
}

bool matches(const StateField& u, const Grid& grid) {
  return u.size() == grid.size() && u.bulk_size() == grid.bulk_size();
}

namespace {

void check_shapes(const StateField& u, const StateField& v, const InnerProductWeights& w) {
  if (!u.same_shape(v) || u.size() != w.size() || u.bulk_size() != w.bulk_size) {
    throw DimensionError("inner product operands do not share a grid");
  }
}

double weighted_sum(const Eigen::VectorXd& w, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  // Fixed left-to-right order keeps <u,v> == <v,u> bit for bit.
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) s += w[i] * (u[i] * v[i]);
  return s;
}

}  // namespace

double inner_product(const StateField& u, const StateField& v, const InnerProductWeights& w) {
  check_shapes(u, v, w);
  return weighted_sum(w.total, u.values(), v.values());
}

double norm(const StateField& u, const InnerProductWeights& w) {
  return std::sqrt(inner_product(u, u, w));
}

double domain_inner_product(const StateField& u, const StateField& v,
                            const InnerProductWeights& w) {
  check_shapes(u, v, w);
  return weighted_sum(w.domain, u.values(), v.values());
}

double domain_norm(const StateField& u, const InnerProductWeights& w) {
  return std::sqrt(domain_inner_product(u, u, w));
}

}  // namespace backheat
