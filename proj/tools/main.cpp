#include "commands.hpp"
#include "config.hpp"

#include "rslimits/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
  using namespace rslimits;
  CLI::App app{"Replica-symmetric limits for low-rank matrix estimation"};
  app.set_version_flag("--version", std::string("rslimits ") + RSLIMITS_VERSION);

  std::string command;
  std::string config_path;
  cli::Overrides ov;
  int quad_order = 0;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;

  app.add_option("command", command, "sweep | threshold | fixedpoints | amp | oracle | figures")
      ->check(CLI::IsMember({"sweep", "threshold", "fixedpoints", "amp", "oracle", "figures"}));
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto *quad_opt = app.add_option("--quad-order", quad_order, "Gauss-Hermite order (1..512)");
  auto *seed_opt = app.add_option("--seed", seed, "Random seed");
  auto *out_opt = app.add_option("--out", out, "Output directory");
  auto *threads_opt = app.add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }
  if (!command.empty()) ov.command = command;
  if (*quad_opt) ov.quad_order = quad_order;
  if (*seed_opt) ov.seed = seed;
  if (*out_opt) ov.out = out;
  if (*threads_opt) ov.threads = threads;

  cli::RunConfig cfg;
  try {
    cfg = cli::load_config_file(config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path),
                                ov);
  } catch (const cli::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  }

  try {
    for (const auto &path : cli::run(cfg, std::cerr)) std::cout << path << '\n';
  } catch (const cli::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const DomainError &e) {
    std::cerr << "config error (" << cfg.command << "): " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const SizeError &e) {
    std::cerr << "config error (" << cfg.command << "): " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const NumericalError &e) {
    std::cerr << "numerical failure (" << cfg.command << "): " << e.what() << '\n';
    return cli::kExitNumerical;
  } catch (const std::exception &e) {
    std::cerr << "error (" << cfg.command << "): " << e.what() << '\n';
    return 1;
  }
  return cli::kExitOk;
}
