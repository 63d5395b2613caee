#include <iostream>

#include <CLI11.hpp>

#include "backheat/cli.hpp"
#include "backheat/errors.hpp"

namespace backheat::cli {

int run(int argc, char** argv) {
  CLI::App app{"Backward heat problem with dynamic boundary conditions: forward solves, "
               "CG reconstruction, spectra and property checks"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::optional<std::string> config;
  std::optional<std::string> preset_name;
  std::optional<std::uint64_t> seed;
  std::string out = "backheat_out";
  app.add_option("--config", config, "JSON configuration file");
  app.add_option("--preset", preset_name, "Named example: " + [] {
    std::string s;
    for (const auto& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }());
  app.add_option("--seed", seed, "Noise and sampling seed (overrides the config)");
  app.add_option("--out", out, "Output directory")->capture_default_str();

  auto* forward = app.add_subcommand("forward", "Propagate the initial temperature to T");
  auto* reconstruct = app.add_subcommand("reconstruct", "Synthesize noisy data and run CG");
  std::optional<std::vector<double>> levels;
  bool parallel = false;
  reconstruct->add_option("--noise-levels", levels, "Noise levels, e.g. 0.01,0.03,0.05")
      ->delimiter(',');
  reconstruct->add_flag("--parallel", parallel, "Run noise levels concurrently (BACKHEAT_THREADS caps)");
  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues, singular values, Picard table");
  auto* verify = app.add_subcommand("verify", "Check a provable property numerically");
  std::string check;
  verify->add_option("check", check, "gradient | adjoint | logconvexity | lipschitz | oracle")
      ->required()
      ->check(CLI::IsMember({"gradient", "adjoint", "logconvexity", "lipschitz", "oracle"}));
  auto* noise = app.add_subcommand("noise", "Write clean and noisy final-time data");
  noise->add_option("--noise-levels", levels, "Noise levels, e.g. 0.01,0.03,0.05")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigFailure;
  }

  try {
    std::optional<std::filesystem::path> config_path;
    if (config) config_path = *config;
    const RunSettings s = load_settings(config_path, preset_name, seed, levels, parallel);
    const std::filesystem::path dir(out);
    if (forward->parsed()) return cmd_forward(s, dir);
    if (reconstruct->parsed()) return cmd_reconstruct(s, dir);
    if (spectrum->parsed()) return cmd_spectrum(s, dir);
    if (verify->parsed()) return cmd_verify(s, check, dir);
    if (noise->parsed()) return cmd_noise(s, dir);
    return kConfigFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
}

}  // namespace backheat::cli
