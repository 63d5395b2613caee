#include <cmath>
#include <random>

#include "doctest.h"

#include "backheat/errors.hpp"
#include "backheat/inversion.hpp"
#include "backheat/random.hpp"
#include "backheat/spectral.hpp"
#include "test_support.hpp"

using namespace backheat;
using namespace backheat::testing;

namespace {

double example2(const NodePosition& p) { return 6.0 * (1.0 - p.x) * std::log(1.0 + p.x * p.x); }

}  // namespace

TEST_CASE("mt19937_64 conforms to the standard reference value") {
  std::mt19937_64 e;
  e.discard(9999);
  CHECK(e() == 9981545732273789042ull);
}

TEST_CASE("noise") {
  const Grid g = interval(25);
  const auto& w = g.weights();
  const auto y = StateField::sample(g, [](const NodePosition& p) { return std::sin(3.0 * p.x) + 0.5; });

  SUBCASE("zero level is the identity") {
    const auto out = add_noise(y, w, 0.0, 42);
    CHECK((out.values().array() == y.values().array()).all());
  }

  SUBCASE("per-node perturbation stays inside [0, p |Y|)") {
    const double p = 0.05;
    const double bound = p * norm(y, w);
    const auto out = add_noise(y, w, p, 7);
    const auto d = (out - y).values();
    CHECK(d.minCoeff() >= 0.0);
    CHECK(d.maxCoeff() < bound);
    // 26 draws that are all identical would mean a shared sample.
    CHECK(d.maxCoeff() - d.minCoeff() > 0.0);
  }

  SUBCASE("uniform shift moves every entry by the same amount") {
    const auto d = (add_noise(y, w, 0.03, 7, NoiseModel::kUniformShift) - y).values();
    CHECK(d.maxCoeff() - d.minCoeff() < 1e-15);
    CHECK(d[0] > 0.0);
    CHECK(d[0] < 0.03 * norm(y, w));
  }

  SUBCASE("deterministic per seed") {
    const auto a = add_noise(y, w, 0.01, 123);
    const auto b = add_noise(y, w, 0.01, 123);
    const auto c = add_noise(y, w, 0.01, 124);
    CHECK((a.values().array() == b.values().array()).all());
    CHECK_FALSE((a.values().array() == c.values().array()).all());
  }

  SUBCASE("golden vector, seed 42, Nx = 4, Y = 1") {
    const Grid small = interval(4);
    const auto one = StateField::constant(small, 1.0);
    const auto out = add_noise(one, small.weights(), 0.01, 42);
    // Oracle built directly from the engine: |1|^2 = 3 * 0.25 + 2.
    std::mt19937_64 e(42);
    const double scale = 0.01 * std::sqrt(2.75);
    const double frozen[] = {1.0125228378058553, 1.0105971368133693, 1.0124729170937388,
                             1.002259826803918, 1.0149790212320753};
    REQUIRE(out.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      const double u = static_cast<double>(e() >> 11) * 0x1.0p-53;
      CHECK(out[i] == 1.0 + scale * u);
      CHECK(out[i] == frozen[i]);
    }
  }

  CHECK_THROWS_AS(add_noise(y, w, -0.1, 1), ConfigError);
}

TEST_CASE("cost") {
  const Grid g = interval(10);
  const auto st = stepper_for(g, 0.02, 40);
  const auto& w = g.weights();
  std::mt19937_64 rng(8);
  const auto y = random_field(g, rng);

  CHECK(cost(StateField::zeros(g), y, 0.0, st) == doctest::Approx(0.5 * inner_product(y, y, w)));
  CHECK(cost(StateField::zeros(g), y, 5.0, st) == doctest::Approx(0.5 * inner_product(y, y, w)));

  // J(G + sD) is an exact quadratic in s: fit through three points, predict a fourth.
  const auto g0 = random_field(g, rng);
  const auto d = random_field(g, rng);
  const double eps = 1e-3;
  auto j = [&](double s) { return cost(g0 + s * d, y, eps, st); };
  const double j0 = j(0.0), jp = j(1.0), jm = j(-1.0);
  const double a = 0.5 * (jp + jm) - j0;
  const double b = 0.5 * (jp - jm);
  CHECK(j(2.5) == doctest::Approx(j0 + 2.5 * b + 6.25 * a).epsilon(1e-10));
  // Curvature is |Psi D|^2 / 2 + eps |D|^2 / 2.
  const auto psi_d = solve_forward(st, d);
  CHECK(a == doctest::Approx(0.5 * inner_product(psi_d, psi_d, w) + 0.5 * eps * inner_product(d, d, w))
                 .epsilon(1e-9));
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(99);
  for (const Grid& g : {interval(12), disk(6, 7)}) {
    const auto st = stepper_for(g, 0.01, 50, random_potentials(g, 0.5, 3));
    const auto& w = g.weights();
    for (double eps : {0.0, 1e-3}) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto g0 = random_field(g, rng);
        const auto y = random_field(g, rng);
        const auto d = random_field(g, rng);
        const double h = 1e-5;
        const double fd = (cost(g0 + h * d, y, eps, st) - cost(g0 - h * d, y, eps, st)) / (2.0 * h);
        const double an = inner_product(gradient(g0, y, eps, st), d, w);
        CHECK(rel_diff(fd, an) < 1e-6);
      }
    }
  }
}

TEST_CASE("gradient vanishes at the exact solution without regularization") {
  const Grid g = interval(20);
  const auto st = stepper_for(g, 0.03, 100);
  std::mt19937_64 rng(1);
  const auto g0 = random_field(g, rng);
  const auto y = solve_forward(st, g0);
  CHECK(norm(gradient(g0, y, 0.0, st), g.weights()) < 1e-13);
  CHECK(norm(gradient(g0, y, 0.5, st) - 0.5 * g0, g.weights()) < 1e-13);
}

TEST_CASE("convergence and accuracy errors") {
  const Grid g = interval(25);
  const auto st = stepper_for(g, 0.03, 100);
  const auto exact = StateField::sample(g, example2);
  const auto data = solve_forward(st, exact);

  CHECK(accuracy_error(exact, exact, g) == 0.0);
  // This profile vanishes on the boundary, so dropping boundary entries is harmless.
  CHECK(convergence_error(exact, data, st) < 1e-28);

  auto boundary_only = StateField::zeros(g);
  boundary_only.boundary().setConstant(3.0);
  CHECK(accuracy_error(exact, exact + boundary_only, g) == 0.0);
  CHECK(convergence_error(exact + boundary_only, data, st) < 1e-28);

  // With zero boundary entries and eps = 0, e is twice the cost.
  std::mt19937_64 rng(5);
  auto h = random_field(g, rng);
  h.boundary().setZero();
  CHECK(convergence_error(h, data, st) == doctest::Approx(2.0 * cost(h, data, 0.0, st)));

  const auto bump = StateField::constant(g, 0.1);
  // Domain weights cover the interior nodes only: sum = 1 - dx.
  CHECK(accuracy_error(exact, exact + bump, g) == doctest::Approx(0.1 * std::sqrt(1.0 - 0.04)));
}

TEST_CASE("CG stops immediately when the start already meets the threshold") {
  const Grid g = interval(10);
  const auto st = stepper_for(g, 0.02, 40);
  const auto exact = StateField::sample(g, example2);
  const auto data = solve_forward(st, exact);
  const auto r = conjugate_gradient(st, data, {0.0, 1e-6, 500}, exact);
  CHECK(r.iterations() == 0);
  CHECK(r.stop_reason == StopReason::kThresholdMet);
  REQUIRE(r.ledger.size() == 1);
  CHECK(r.ledger[0].alpha == 0.0);
  CHECK((r.estimate.values().array() == exact.values().array()).all());
}

TEST_CASE("CG ledger") {
  ProblemConfig cfg;
  cfg.exact = {"example2", example2};
  cfg.noise_level = 0.01;
  cfg.noise_model = NoiseModel::kUniformShift;
  cfg.threshold = 1e-300;
  cfg.max_iter = 40;
  const auto ex = run_experiment(cfg);
  const auto& led = ex.result.ledger;
  REQUIRE(led.size() >= 2);
  CHECK(led[0].n == 0);
  for (std::size_t n = 0; n < led.size(); ++n) {
    CHECK(led[n].n == static_cast<int>(n));
    CHECK(led[n].convergence_error.has_value());
    CHECK(led[n].accuracy_error.has_value());
    if (n > 0) {
      CHECK(led[n].alpha > 0.0);
      CHECK(led[n].cost <= led[n - 1].cost * (1.0 + 1e-12));
    }
  }
  CHECK(led[1].gamma == 0.0);
  CHECK(ex.result.iterations() == static_cast<int>(led.size()) - 1);

  // Without a reference only J is recorded.
  ProblemConfig bare = cfg;
  bare.exact = {};
  const auto r = cg_reconstruct(bare, ex.noisy_data);
  CHECK_FALSE(r.ledger.back().convergence_error.has_value());
  CHECK(r.ledger.back().cost == doctest::Approx(led[r.ledger.size() - 1].cost));
}

TEST_CASE("CG finite termination on small grids") {
  for (int nx : {3, 5, 8}) {
    const Grid g = interval(nx);
    const auto st = stepper_for(g, 0.01, 100);
    std::mt19937_64 rng(static_cast<std::uint64_t>(nx));
    const auto data = random_field(g, rng);
    const double eps = 1e-2;
    const int dim = static_cast<int>(g.size());
    const auto r = conjugate_gradient(st, data, {eps, 1e-300, dim}, StateField::zeros(g));
    const auto& w = g.weights();
    const double g0 = norm(gradient(StateField::zeros(g), data, eps, st), w);
    const double gn = norm(gradient(r.estimate, data, eps, st), w);
    MESSAGE("nx=" << nx << " |grad| ratio after " << r.iterations() << " steps: " << gn / g0);
    CHECK(r.iterations() <= dim);
    CHECK(gn <= 1e-8 * g0);
  }
}

TEST_CASE("Psi is non-expansive without potentials") {
  const Grid g = interval(25);
  const auto st = stepper_for(g, 0.03, 100);
  const auto& w = g.weights();
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_field(g, rng);
    const auto b = random_field(g, rng);
    CHECK(norm(solve_forward(st, a) - solve_forward(st, b), w) <= norm(a - b, w) * (1.0 + 1e-12));
  }
}

TEST_CASE("problem configuration") {
  ProblemConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.make_grid().size() == 26);

  auto bad = [](auto mutate) {
    ProblemConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](ProblemConfig& c) { c.final_time = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ProblemConfig& c) { c.time_steps = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ProblemConfig& c) { c.epsilon = -1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ProblemConfig& c) { c.threshold = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ProblemConfig& c) { c.noise_level = -0.01; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ProblemConfig& c) { c.max_iter = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ProblemConfig& c) { c.nx = 1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ProblemConfig& c) { c.bulk_potential = {1.0, 2.0}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ProblemConfig& c) {
                    c.initial_guess = Eigen::VectorXd::Zero(3);
                  }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);

  cfg.bulk_potential = {0.25};
  cfg.boundary_potential = {-0.5};
  const auto grid = cfg.make_grid();
  const auto c = cfg.make_coefficients(grid);
  CHECK(c.bulk_potential.size() == 24);
  CHECK((c.bulk_potential.array() == 0.25).all());
  CHECK((c.boundary_potential.array() == -0.5).all());

  const auto st = stepper_for(interval(4), 0.01, 10);
  CHECK_THROWS_AS(conjugate_gradient(st, StateField::zeros(interval(5)), {}, StateField::zeros(interval(4))),
                  DimensionError);
}
