#include <iostream>

#include <CLI11.hpp>

#include "chiralq_cli/commands.hpp"

using namespace chiralq;

int main(int argc, char** argv) {
  CLI::App app{"chiralq: quench dynamics of a 3D chiral topological insulator"};
  app.set_version_flag("--version", cli::kVersion);

  std::string command, config_path, out_dir, noise;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> overrides;
  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(cli::command_names()));
  app.add_option("--config", config_path, "Flat key = value config file");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides noise.seed)");
  app.add_option("--noise", noise, "Photon-noise emulation")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--threads", threads, "Worker threads, 0 = all cores")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--set", overrides, "Extra key=value setting, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cli::RunConfig cfg = config_path.empty() ? cli::RunConfig{}
                                             : cli::load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw cli::ConfigError("--set expects key=value, got '" + kv + "'");
      cli::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (*seed_opt) cfg.seed = seed;
    if (!noise.empty()) cfg.noise = noise == "on";
    set_thread_count(threads);

    const auto manifest = cli::run_command(command, cfg);
    std::cout << manifest["summary"].dump() << "\n"
              << "wrote " << manifest["files"].size() << " files + manifest to "
              << cfg.out_dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "chiralq " << command << ": " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}
