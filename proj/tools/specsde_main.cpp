#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "specsde/harness.hpp"
#include "specsde/version.hpp"

namespace {

std::string default_out_root() {
  if (const char* env = std::getenv("SPECSDE_OUT_ROOT")) return env;
  return "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral-Galerkin simulation and verification toolkit for stochastic evolution equations"};
  app.set_version_flag("--version", specsde::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  long paths_override = 0;
  bool paths_set = false;
  int threads = 0;
  bool quiet = false;

  // `run` executes the task named in the config; the other subcommands force
  // the task kind.
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"run", ""},
      {"simulate", "simulate"},
      {"check", "check"},
      {"moments", "moments"},
      {"sharpness", "sharpness"},
      {"convergence", "convergence"},
      {"unique-monitor", "unique-monitor"}};
  for (const auto& [name, kind] : subs) {
    auto* sub = app.add_subcommand(name, kind.empty() ? "run the task named in the config"
                                                      : "run the " + name + " task");
    sub->add_option("--config", config_path, "experiment config (.json or flat key=value)")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default: $SPECSDE_OUT_ROOT/<task>-<hash>)");
    sub->add_option("--seed", seed_override, "override solver.seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--paths", paths_override, "override task.n_paths")
        ->each([&](const std::string&) { paths_set = true; });
    sub->add_option("--threads", threads, "worker threads (0 = hardware); outputs do not depend on it");
    sub->add_flag("--quiet", quiet, "suppress the summary line");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    specsde::ExperimentConfig config = specsde::parse_config_file(config_path);
    const std::string sub_name = app.get_subcommands().front()->get_name();
    if (sub_name != "run") config.task.kind = sub_name;

    specsde::RunOverrides over;
    if (seed_set) over.seed = seed_override;
    if (paths_set) over.n_paths = paths_override;
    over.threads = threads;
    over.quiet = quiet;

    if (out_dir.empty()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(specsde::config_hash(config)));
      out_dir = default_out_root() + "/" + config.task.kind + "-" + std::string(buf).substr(8);
    }
    const auto result = specsde::run_experiment(config, out_dir, over);
    return result.exit_code;
  } catch (const specsde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return specsde::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return specsde::kExitInternal;
  }
}
