#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "backheat/errors.hpp"
#include "backheat/operators.hpp"
#include "backheat/random.hpp"
#include "test_support.hpp"

using namespace backheat;
using namespace backheat::testing;

namespace {

// Eigenvalues of -A from the general (nonsymmetric) dense eigensolver,
// independent of the weighted symmetric route used by the spectral module.
Eigen::VectorXd general_spectrum(const Generator& gen) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(-gen.matrix());
  Eigen::VectorXd re = es.eigenvalues().real();
  std::sort(re.data(), re.data() + re.size());
  return re;
}

}  // namespace

TEST_CASE("interval stencil transcription for nx = 2") {
  const Grid g = interval(2);
  const auto gen = assemble_1d(g);
  const auto& a = gen.matrix();
  const auto& s = g.interval();
  auto at = [&](int r, int c) { return a(static_cast<Eigen::Index>(s.dof(r)), static_cast<Eigen::Index>(s.dof(c))); };
  const double dx = 0.5;
  CHECK(at(1, 0) == doctest::Approx(1.0 / (dx * dx)));
  CHECK(at(1, 1) == doctest::Approx(-2.0 / (dx * dx)));
  CHECK(at(1, 2) == doctest::Approx(1.0 / (dx * dx)));
  CHECK(at(0, 0) == doctest::Approx(-1.0 / dx));
  CHECK(at(0, 1) == doctest::Approx(1.0 / dx));
  CHECK(at(0, 2) == 0.0);
  CHECK(at(2, 0) == 0.0);
  CHECK(at(2, 1) == doctest::Approx(1.0 / dx));
  CHECK(at(2, 2) == doctest::Approx(-1.0 / dx));
  CHECK(gen.surface_diffusivity() == 0.0);
}

TEST_CASE("constants are in the kernel without potentials") {
  for (const Grid& g : {interval(25), disk(8, 8), disk(25, 25)}) {
    const auto gen = assemble(g, {1.0, 1.0, {}, {}});
    const auto y = StateField::constant(g, 3.7);
    CHECK(gen.apply(y).values().cwiseAbs().maxCoeff() < 1e-9 * gen.matrix().cwiseAbs().maxCoeff());
  }
}

TEST_CASE("axisymmetric field sees no angular terms on the circle") {
  const Grid g = disk(6, 10);
  const auto gen = assemble_2d(g, {1.3, 0.7, {}, {}});
  const auto y = StateField::sample(g, [](const NodePosition& p) { return p.r * p.r + 0.5 * p.r; });
  const auto ay = gen.apply(y);
  const auto& d = g.disk();
  const double expected = -1.3 * (y[d.dof(6, 0)] - y[d.dof(5, 0)]) / d.dr;
  for (int t = 0; t < d.ntheta; ++t) {
    CHECK(ay[d.dof(6, t)] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("origin row is the ring-average limit stencil") {
  const Grid g = disk(5, 7);
  const auto gen = assemble_2d(g);
  std::mt19937_64 rng(3);
  const auto y = random_field(g, rng);
  const auto& d = g.disk();
  double mean = 0.0;
  for (int t = 0; t < d.ntheta; ++t) mean += y[d.dof(1, t)];
  mean /= d.ntheta;
  CHECK(gen.apply(y)[0] == doctest::Approx(4.0 * (mean - y[0]) / (d.dr * d.dr)).epsilon(1e-12));
}

TEST_CASE("interval generator is weight-self-adjoint, with potentials") {
  const Grid g = interval(25);
  const auto gen = assemble_1d(g, random_potentials(g, 0.5, 11));
  CHECK(gen.symmetry_defect() < 1e-14);
  std::mt19937_64 rng(5);
  const double a_norm = gen.matrix().norm();
  for (int i = 0; i < 20; ++i) {
    const auto u = random_field(g, rng);
    const auto v = random_field(g, rng);
    const auto& w = g.weights();
    const double lhs = inner_product(gen.apply(u), v, w);
    const double rhs = inner_product(u, gen.apply(v), w);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * a_norm * norm(u, w) * norm(v, w));
  }
}

TEST_CASE("polar self-adjointness defect is confined to the circle coupling") {
  const Grid g = disk(8, 8);
  const auto gen = assemble_2d(g);
  const Eigen::MatrixXd wa = g.weights().total.asDiagonal() * gen.matrix();
  const Eigen::MatrixXd asym = wa - wa.transpose();
  const auto& d = g.disk();
  // Rows of the origin and rings 1..nr-2 pair up exactly with their neighbours.
  const auto last_interior = static_cast<Eigen::Index>(d.dof(d.nr - 1, 0));
  CHECK(asym.topLeftCorner(last_interior, last_interior).cwiseAbs().maxCoeff() <
        1e-12 * wa.cwiseAbs().maxCoeff());

  std::mt19937_64 rng(9);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto u = random_field(g, rng);
    const auto v = random_field(g, rng);
    const auto& w = g.weights();
    worst = std::max(worst, std::abs(inner_product(gen.apply(u), v, w) -
                                     inner_product(u, gen.apply(v), w)) /
                                (norm(u, w) * norm(v, w)));
  }
  MESSAGE("polar self-adjointness defect |<Au,v>-<u,Av>|/(|u||v|) = " << worst
          << ", relative matrix defect " << gen.symmetry_defect());
  CHECK(gen.symmetry_defect() > 0.0);
  CHECK(gen.symmetry_defect() < d.dr);  // first order in dr
}

TEST_CASE("interval spectrum: zero ground state and quadratic growth") {
  const Grid g = interval(25);
  const auto lambda = general_spectrum(assemble_1d(g));
  CHECK(std::abs(lambda[0]) < 1e-10);
  for (Eigen::Index k = 1; k < lambda.size(); ++k) CHECK(lambda[k] > lambda[k - 1]);
  // Resolved range: lower half of the spectrum.
  for (Eigen::Index k = 1; k < lambda.size() / 2; ++k) {
    const double ratio = lambda[k] / static_cast<double>(k * k);
    CHECK(ratio > 1.0);
    CHECK(ratio < 10.0);
  }
}

TEST_CASE("solve_forward basic invariances") {
  for (const Grid& g : {interval(25), disk(8, 8)}) {
    const TimeStepper st = stepper_for(g, 0.03, 50);
    CHECK(solve_forward(st, StateField::zeros(g)).values().isZero(0.0));
    const auto c = StateField::constant(g, 2.5);
    const auto yt = solve_forward(st, c);
    CHECK((yt.values().array() - 2.5).abs().maxCoeff() <= 1e-12 * 2.5);
  }
}

TEST_CASE("solve_forward is deterministic and keeps the trajectory") {
  const Grid g = interval(9);
  const TimeStepper st = stepper_for(g, 0.02, 40);
  std::mt19937_64 rng(1);
  const auto y0 = random_field(g, rng);
  const auto traj = solve_forward_trajectory(st, y0);
  REQUIRE(traj.states.size() == 41);
  CHECK(traj.time(40) == doctest::Approx(0.02));
  CHECK(traj.states.back().values() == solve_forward(st, y0).values());
}

TEST_CASE("eigenvector initial data follows the scalar recurrence") {
  const Grid g = interval(25);
  const auto gen = assemble_1d(g);
  // Oracle eigenpair from the general solver on -A.
  Eigen::EigenSolver<Eigen::MatrixXd> es(-gen.matrix());
  const Eigen::VectorXd re = es.eigenvalues().real();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(re.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return re[a] < re[b]; });

  const double final_time = 0.03;
  for (int k : {1, 2, 5}) {
    const Eigen::Index idx = order[static_cast<std::size_t>(k)];
    const double lambda = re[idx];
    const StateField phi(es.eigenvectors().col(idx).real(), g.bulk_size());
    double prev = 0.0;
    for (int steps : {50, 100, 200}) {
      const TimeStepper st(gen, final_time, steps);
      const auto yt = solve_forward(st, phi);
      const double h = 0.5 * lambda * final_time / steps;
      const double rho_n = std::pow((1.0 - h) / (1.0 + h), steps);
      const auto& w = g.weights();
      CHECK(norm(yt - rho_n * phi, w) <= 1e-10 * norm(phi, w));
      const double err = norm(yt - std::exp(-lambda * final_time) * phi, w) / norm(phi, w);
      if (prev > 0.0) CHECK(prev / err > 3.5);
      prev = err;
    }
  }
}

TEST_CASE("adjoint identity holds to rounding on every geometry") {
  std::mt19937_64 rng(21);
  for (const Grid& g : {interval(4), interval(25), disk(8, 8)}) {
    const TimeStepper st = stepper_for(g, 0.02, 37, random_potentials(g, 0.7, 4));
    const auto& w = g.weights();
    for (int i = 0; i < 10; ++i) {
      const auto u = random_field(g, rng);
      const auto v = random_field(g, rng);
      const double lhs = inner_product(solve_forward(st, u), v, w);
      const double rhs = inner_product(u, solve_adjoint(st, v), w);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * norm(u, w) * norm(v, w));
    }
  }
}

TEST_CASE("solve_adjoint basic cases") {
  const Grid g = interval(25);
  const TimeStepper st = stepper_for(g, 0.03, 100);
  CHECK(solve_adjoint(st, StateField::zeros(g)).values().isZero(0.0));
  const auto phi0 = solve_adjoint(st, StateField::constant(g, -1.5));
  CHECK((phi0.values().array() + 1.5).abs().maxCoeff() <= 1e-12 * 1.5);

  // On the disk the weighted transpose does not preserve constants exactly;
  // the deviation is a first-order discretization effect.
  const Grid d = disk(8, 8);
  const TimeStepper sd = stepper_for(d, 0.01, 50);
  const auto psi = solve_adjoint(sd, StateField::constant(d, 1.0));
  MESSAGE("disk adjoint of constant: max deviation " << (psi.values().array() - 1.0).abs().maxCoeff());
}

TEST_CASE("energy never increases with nonnegative potentials on the interval") {
  const Grid g = interval(25);
  Coefficients c = random_potentials(g, 0.5, 2);
  c.bulk_potential = c.bulk_potential.cwiseAbs();
  c.boundary_potential = c.boundary_potential.cwiseAbs();
  const TimeStepper st = stepper_for(g, 0.03, 100, c);
  std::mt19937_64 rng(8);
  const auto traj = solve_forward_trajectory(st, random_field(g, rng));
  const auto& w = g.weights();
  for (std::size_t m = 1; m < traj.states.size(); ++m) {
    CHECK(norm(traj.states[m], w) <= norm(traj.states[m - 1], w) + 1e-12);
  }
}

TEST_CASE("numerical failures are reported") {
  const Grid g = interval(4);
  const double dt = 0.01;
  const auto n = static_cast<Eigen::Index>(g.size());
  Generator bad(g, (2.0 / dt) * Eigen::MatrixXd::Identity(n, n), {});
  CHECK_THROWS_AS(TimeStepper(bad, 0.01, 1), NumericalError);

  const TimeStepper st = stepper_for(g, 0.01, 5);
  auto y = StateField::zeros(g);
  y[1] = std::nan("");
  CHECK_THROWS_AS(solve_forward(st, y), NumericalError);
  CHECK_THROWS_AS(solve_forward(st, StateField::zeros(interval(5))), DimensionError);
  CHECK_THROWS_AS(TimeStepper(assemble(g), 0.0, 5), ConfigError);
  CHECK_THROWS_AS(TimeStepper(assemble(g), 1.0, 0), ConfigError);

  Coefficients wrong;
  wrong.bulk_potential = Eigen::VectorXd::Zero(7);
  CHECK_THROWS_AS(assemble_1d(g, wrong), DimensionError);
}
