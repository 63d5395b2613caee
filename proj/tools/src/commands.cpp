#include <atomic>
#include <chrono>
#include <exception>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/Core>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "backheat/cli.hpp"
#include "backheat/diagnostics.hpp"
#include "backheat/errors.hpp"
#include "backheat/random.hpp"
#include "backheat/spectral.hpp"

#ifndef BACKHEAT_VERSION
#define BACKHEAT_VERSION "unknown"
#endif

namespace backheat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::now()));
}

/// Collects output paths and writes the single manifest of a command.
class Manifest {
 public:
  Manifest(std::string command, const RunSettings& s) : started_(utc_now()) {
    doc_["command"] = std::move(command);
    doc_["config"] = s.echo;
    doc_["seed"] = s.problem.seed;
    doc_["versions"] = {
        {"backheat", BACKHEAT_VERSION},
        {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                              EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
    };
    doc_["outputs"] = json::array();
  }

  void write_file(const fs::path& path, const std::string& content) {
    write_atomic(path, content);
    std::lock_guard lock(mutex_);
    doc_["outputs"].push_back(path.string());
  }

  json& operator[](const std::string& key) { return doc_[key]; }

  void finish(const fs::path& out, int exit_code) {
    doc_["timestamps"] = {{"started", started_}, {"finished", utc_now()}};
    doc_["exit_code"] = exit_code;
    write_atomic(out / "manifest.json", doc_.dump(2) + "\n");
  }

 private:
  std::string started_;
  json doc_;
  std::mutex mutex_;
};

void require_exact(const RunSettings& s) {
  if (!s.problem.exact) {
    throw ConfigError("this command needs an initial temperature: set \"exact\" or --preset");
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string level_dir(double p) { return fmt::format("noise_{}", p); }

struct LevelOutcome {
  double level = 0.0;
  fs::path dir;
  Experiment experiment;
};

LevelOutcome run_level(const RunSettings& s, double level, const fs::path& dir, Manifest& manifest) {
  ProblemConfig cfg = s.problem;
  cfg.noise_level = level;
  LevelOutcome o{level, dir, run_experiment(cfg)};
  const Grid grid = cfg.make_grid();
  const auto& ex = o.experiment;
  const StateField err = ex.exact_initial - ex.result.estimate;
  manifest.write_file(dir / "history.csv", history_csv(ex.result));
  manifest.write_file(dir / "field.csv",
                      field_csv(grid, {"exact", "reconstructed", "error"},
                                {&ex.exact_initial, &ex.result.estimate, &err}));
  manifest.write_file(dir / "data.csv", field_csv(grid, {"exact_data", "noisy_data"},
                                                  {&ex.exact_data, &ex.noisy_data}));
  if (grid.geometry() == Geometry::kDisk) {
    manifest.write_file(dir / "error_surface.csv",
                        error_surface_csv(grid, ex.exact_initial, ex.result.estimate));
  }
  return o;
}

int verdict(Manifest& m, const fs::path& out, bool ok, const std::string& summary) {
  m["passed"] = ok;
  m["summary"] = summary;
  const int code = ok ? kOk : kPropertyViolation;
  std::cout << (ok ? "PASS " : "FAIL ") << summary << "\n";
  m.finish(out, code);
  return code;
}

}  // namespace

int cmd_forward(const RunSettings& s, const fs::path& out) {
  require_exact(s);
  Manifest manifest("forward", s);
  const TimeStepper stepper = s.problem.make_stepper();
  const Grid& grid = stepper.grid();
  const Trajectory traj =
      solve_forward_trajectory(stepper, StateField::sample(grid, s.problem.exact.value));
  manifest.write_file(out / "forward.csv", trajectory_csv(grid, traj, !s.trajectory));
  manifest["stop_reason"] = nullptr;
  manifest["final_errors"] = {{"e", nullptr}, {"E", nullptr}};
  std::cout << "forward: " << traj.states.size() - 1 << " steps to T = "
            << format_number(stepper.final_time()) << ", |Y(T)| = "
            << format_number(norm(traj.states.back(), grid.weights())) << "\n";
  manifest.finish(out, kOk);
  return kOk;
}

int cmd_reconstruct(const RunSettings& s, const fs::path& out) {
  require_exact(s);
  Manifest manifest("reconstruct", s);
  const auto& levels = s.noise_levels;
  const bool nested = levels.size() > 1;
  std::vector<std::optional<LevelOutcome>> outcomes(levels.size());
  std::vector<std::exception_ptr> errors(levels.size());

  auto job = [&](std::size_t i) {
    try {
      outcomes[i] = run_level(s, levels[i], nested ? out / level_dir(levels[i]) : out, manifest);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const unsigned workers = s.parallel ? worker_count(levels.size()) : 1u;
  if (workers <= 1) {
    for (std::size_t i = 0; i < levels.size(); ++i) job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < levels.size(); i = next++) job(i);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  int code = kOk;
  json runs = json::array();
  for (const auto& o : outcomes) {
    const auto& r = o->experiment.result;
    const auto& last = r.ledger.back();
    std::cout << "p=" << fmt::format("{}", o->level) << " stop_reason=" << to_string(r.stop_reason)
              << " iterations=" << r.iterations() << " J=" << format_number(last.cost)
              << " e=" << format_number(last.convergence_error.value_or(NAN))
              << " E=" << format_number(last.accuracy_error.value_or(NAN)) << "\n";
    if (r.stop_reason != StopReason::kThresholdMet) code = kNoConvergence;
    runs.push_back({{"noise_level", o->level},
                    {"directory", o->dir.string()},
                    {"stop_reason", to_string(r.stop_reason)},
                    {"iterations", r.iterations()},
                    {"final_cost", last.cost},
                    {"final_errors",
                     {{"e", optional_number(last.convergence_error)},
                      {"E", optional_number(last.accuracy_error)}}}});
  }
  manifest["runs"] = runs;
  manifest["stop_reason"] = runs.size() == 1 ? runs[0]["stop_reason"] : json(nullptr);
  manifest["final_errors"] = runs.size() == 1 ? runs[0]["final_errors"] : json(nullptr);
  manifest.finish(out, code);
  return code;
}

int cmd_spectrum(const RunSettings& s, const fs::path& out) {
  Manifest manifest("spectrum", s);
  const auto& c = s.problem;
  const Grid grid = c.make_grid();
  const Generator gen = assemble(grid, c.make_coefficients(grid));
  const EigenSystem eig = eigensystem(gen);
  std::string table = "k,lambda,sigma,amplification\n";
  for (const auto& row : ill_posedness_report(eig, c.final_time)) {
    table += fmt::format("{},{},{},{}\n", row.k, format_number(row.lambda), format_number(row.sigma),
                         format_number(row.amplification));
  }
  manifest.write_file(out / "spectrum.csv", table);
  manifest["symmetry_defect"] = eig.symmetry_defect;
  std::cout << "k=1 lambda=" << format_number(eig.eigenvalues[0])
            << " sigma=" << format_number(std::exp(-eig.eigenvalues[0] * c.final_time))
            << " symmetry_defect=" << format_number(eig.symmetry_defect) << "\n";

  if (c.exact) {
    const TimeStepper stepper = c.make_stepper();
    const StateField data =
        add_noise(solve_forward(stepper, StateField::sample(grid, c.exact.value)), grid.weights(),
                  c.noise_level, c.seed, c.noise_model);
    const PicardReport rep = picard_report(data, eig, c.final_time);
    std::string picard = "k,coefficient,amplified,partial_sum\n";
    for (Eigen::Index k = 0; k < rep.coefficients.size(); ++k) {
      picard += fmt::format("{},{},{},{}\n", k + 1, format_number(rep.coefficients[k]),
                            format_number(rep.amplified[k]), format_number(rep.partial_sums[k]));
    }
    manifest.write_file(out / "picard.csv", picard);
    manifest["picard_overflow_index"] = rep.overflow_index ? json(*rep.overflow_index) : json(nullptr);
    std::cout << "picard: "
              << (rep.representable() ? std::string("representable")
                                      : "overflow at k=" + std::to_string(*rep.overflow_index))
              << "\n";
  }
  manifest.finish(out, kOk);
  return kOk;
}

int cmd_verify(const RunSettings& s, const std::string& what, const fs::path& out) {
  Manifest manifest("verify " + what, s);
  manifest["check"] = what;
  const auto& c = s.problem;
  const TimeStepper stepper = c.make_stepper();
  const Grid& grid = stepper.grid();
  const auto& w = grid.weights();
  std::mt19937_64 rng(c.seed);
  auto trials = [&](int fallback) { return s.trials > 0 ? s.trials : fallback; };
  const fs::path csv = out / ("verify_" + what + ".csv");

  if (what == "gradient") {
    std::string table = "trial,finite_difference,adjoint,relative_error\n";
    double worst = 0.0;
    const double h = 1e-5;
    for (int t = 0; t < trials(10); ++t) {
      const StateField g = random_field(grid, rng);
      const StateField y = random_field(grid, rng);
      const StateField d = random_field(grid, rng);
      const double fd =
          (cost(g + h * d, y, c.epsilon, stepper) - cost(g - h * d, y, c.epsilon, stepper)) / (2 * h);
      const double an = inner_product(gradient(g, y, c.epsilon, stepper), d, w);
      const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-300});
      worst = std::max(worst, rel);
      table += fmt::format("{},{},{},{}\n", t, format_number(fd), format_number(an), format_number(rel));
    }
    manifest.write_file(csv, table);
    manifest["max_relative_error"] = worst;
    return verdict(manifest, out, worst <= 1e-6,
                   "gradient: max relative FD error " + format_number(worst) + " (limit 1e-6)");
  }

  if (what == "adjoint") {
    std::string table = "trial,forward_pairing,adjoint_pairing,normalized_defect\n";
    double worst = 0.0;
    for (int t = 0; t < trials(20); ++t) {
      const StateField g = random_field(grid, rng);
      const StateField v = random_field(grid, rng);
      const double lhs = inner_product(solve_forward(stepper, g), v, w);
      const double rhs = inner_product(g, solve_adjoint(stepper, v), w);
      const double defect = std::abs(lhs - rhs) / (norm(g, w) * norm(v, w));
      worst = std::max(worst, defect);
      table += fmt::format("{},{},{},{}\n", t, format_number(lhs), format_number(rhs),
                           format_number(defect));
    }
    manifest.write_file(csv, table);
    manifest["max_defect"] = worst;
    return verdict(manifest, out, worst <= 1e-10,
                   "adjoint: max defect " + format_number(worst) + " (limit 1e-10)");
  }

  if (what == "logconvexity") {
    std::string table = "trial,max_violation,max_deviation,tolerance\n";
    double worst = -1.0;
    bool ok = true;
    double tol = 0.0;
    for (int t = 0; t < trials(50); ++t) {
      const auto rep = log_convexity_check(solve_forward_trajectory(stepper, random_field(grid, rng)), w);
      worst = std::max(worst, rep.max_violation);
      tol = rep.tolerance;
      ok = ok && rep.holds();
      table += fmt::format("{},{},{},{}\n", t, format_number(rep.max_violation),
                           format_number(rep.max_deviation), format_number(rep.tolerance));
    }
    manifest.write_file(csv, table);
    manifest["max_violation"] = worst;
    manifest["tolerance"] = tol;
    manifest["symmetry_defect"] = stepper.generator().symmetry_defect();
    return verdict(manifest, out, ok,
                   "logconvexity: max relative violation " + format_number(worst) + " (tolerance " +
                       format_number(tol) + ", generator symmetry defect " +
                       format_number(stepper.generator().symmetry_defect()) + ")");
  }

  if (what == "lipschitz") {
    const auto rep = lipschitz_check(stepper, trials(100), c.seed);
    const double d = stepper.generator().potential_bound();
    // Without potentials the gradient map is non-expansive, a sharper claim.
    const double limit = d == 0.0 ? 1.0 + 1e-8 : rep.bound + 1e-8;
    manifest.write_file(csv, fmt::format("trials,max_ratio,constant,bound,limit\n{},{},{},{},{}\n",
                                         rep.trials, format_number(rep.max_ratio),
                                         format_number(rep.constant), format_number(rep.bound),
                                         format_number(limit)));
    manifest["max_ratio"] = rep.max_ratio;
    manifest["limit"] = limit;
    return verdict(manifest, out, rep.max_ratio <= limit,
                   "lipschitz: max ratio " + format_number(rep.max_ratio) + " (limit " +
                       format_number(limit) + ", D = " + format_number(d) + ")");
  }

  if (what == "oracle") {
    const EigenSystem eig = eigensystem(stepper.generator());
    StateField data = c.exact ? solve_forward(stepper, StateField::sample(grid, c.exact.value))
                              : random_field(grid, rng);
    data = add_noise(data, w, c.noise_level, c.seed, c.noise_model);
    const auto cg = conjugate_gradient(stepper, data, {c.epsilon, 1e-300, c.max_iter},
                                       StateField::zeros(grid));
    const StateField ref = spectral_tikhonov(data, eig, c.final_time, c.epsilon).field;
    const double rel = norm(cg.estimate - ref, w) / norm(ref, w);
    const StateField diff = cg.estimate - ref;
    manifest.write_file(csv, field_csv(grid, {"cg", "spectral_tikhonov", "difference"},
                                       {&cg.estimate, &ref, &diff}));
    manifest["relative_difference"] = rel;
    manifest["iterations"] = cg.iterations();
    manifest["stop_reason"] = to_string(cg.stop_reason);
    return verdict(manifest, out, rel <= 1e-4,
                   "oracle: CG vs spectral Tikhonov relative difference " + format_number(rel) +
                       " after " + std::to_string(cg.iterations()) + " iterations (limit 1e-4)");
  }

  throw ConfigError("unknown verify check '" + what +
                    "' (gradient, adjoint, logconvexity, lipschitz, oracle)");
}

int cmd_noise(const RunSettings& s, const fs::path& out) {
  require_exact(s);
  Manifest manifest("noise", s);
  const auto& c = s.problem;
  const TimeStepper stepper = c.make_stepper();
  const Grid& grid = stepper.grid();
  const StateField clean = solve_forward(stepper, StateField::sample(grid, c.exact.value));
  std::vector<StateField> noisy;
  std::vector<std::string> names{"clean"};
  for (double p : s.noise_levels) {
    noisy.push_back(add_noise(clean, grid.weights(), p, c.seed, c.noise_model));
    names.push_back(fmt::format("noisy_{}", p));
  }
  std::vector<const StateField*> cols{&clean};
  for (const auto& n : noisy) cols.push_back(&n);
  manifest.write_file(out / "noise.csv", field_csv(grid, names, cols));
  std::cout << "noise: |Y_T| = " << format_number(norm(clean, grid.weights())) << ", "
            << s.noise_levels.size() << " level(s)\n";
  manifest.finish(out, kOk);
  return kOk;
}

}  // namespace backheat::cli
