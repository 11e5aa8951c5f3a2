#include "diraclab/config.hpp"
#include "diraclab/evolution.hpp"
#include "diraclab/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace diraclab;
using config::json;

namespace {

struct Common {
  std::string out = "out";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  bool override_wall_guard = false;
  bool resume = false;
  bool quiet = false;
};

void add_common(CLI::App *app, Common &c) {
  app->add_option("-o,--out", c.out, "Output directory");
  app->add_option("-t,--threads", c.threads, "Thread count")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "RNG seed (overrides the config)");
  app->add_flag("--override-wall-guard", c.override_wall_guard,
                "Allow T beyond R minus the support radius");
  app->add_flag("--resume", c.resume, "Continue from snapshot.bin in the output directory");
  app->add_flag("-q,--quiet", c.quiet, "No progress output");
}

runner::RunOptions options(const Common &c, const std::string &dir) {
  runner::RunOptions o;
  o.out_dir = dir;
  o.threads = c.threads;
  o.seed = c.seed;
  o.override_wall_guard = c.override_wall_guard;
  o.resume = c.resume;
  o.quiet = c.quiet;
  return o;
}

void report(const runner::RunManifest &m, const std::string &dir) {
  std::cout << m.name << " [" << m.config_hash << "] -> " << dir
            << (m.completed ? "" : " (incomplete)") << "\n";
  if (m.summary.contains("mass_drift_rel_max"))
    std::cout << "  mass drift " << m.summary["mass_drift_rel_max"] << ", gamma-charge drift "
              << m.summary["gamma_charge_drift_rel_max"] << ", chiral sup "
              << m.summary["chiral_sup_max"] << "\n";
  if (m.scattering)
    std::cout << "  scattering: " << m.scattering->verdict << "\n";
}

config::SimulationConfig resolve(const std::string &config_path, const std::string &preset) {
  if (!config_path.empty())
    return config::load(config_path);
  return config::preset(preset);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Cubic Dirac equation with potentials: radial partial-wave solver"};
  app.set_version_flag("--version", runner::code_version());
  app.require_subcommand(1);

  Common common;

  std::vector<std::string> run_configs;
  auto *run = app.add_subcommand("run", "Run one config, or several into numbered subdirectories");
  run->add_option("configs", run_configs, "Config files (JSON)")->required()->check(CLI::ExistingFile);
  add_common(run, common);

  std::string preset_name;
  bool print_only = false;
  auto *pre = app.add_subcommand("preset", "Print or run a named preset");
  pre->add_option("name", preset_name, "Preset name")->required();
  pre->add_flag("--print", print_only, "Print the config JSON instead of running it");
  add_common(pre, common);

  std::string cp_config, cp_preset = "conservation";
  auto *cp = app.add_subcommand("check-potential",
                                "Condition (V), angular assumptions and A2 ratio of a config");
  cp->add_option("-c,--config", cp_config, "Config file")->check(CLI::ExistingFile);
  cp->add_option("-p,--preset", cp_preset, "Preset to check when no config is given");

  std::string id_config;
  auto *id = app.add_subcommand("check-identities", "Morawetz and Hardy suites");
  id->add_option("-c,--config", id_config, "Config file")->check(CLI::ExistingFile);
  add_common(id, common);

  std::string sc_config, sc_preset = "scattering";
  auto *sc = app.add_subcommand("scattering", "Run with the Duhamel window accumulator and "
                                              "print the tail verdict");
  sc->add_option("-c,--config", sc_config, "Config file")->check(CLI::ExistingFile);
  sc->add_option("-p,--preset", sc_preset, "Preset when no config is given");
  add_common(sc, common);

  std::vector<std::string> all = config::preset_names();
  app.footer("Presets: " + [&] {
    std::string s;
    for (const auto &n : all)
      s += (s.empty() ? "" : ", ") + n;
    return s;
  }());

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (run_configs.size() == 1) {
        report(runner::run(config::load(run_configs[0]), options(common, common.out)),
               common.out);
      } else {
        for (std::size_t i = 0; i < run_configs.size(); ++i) {
          const std::string dir =
              (std::filesystem::path(common.out) / ("run" + std::to_string(i))).string();
          report(runner::run(config::load(run_configs[i]), options(common, dir)), dir);
        }
      }
    } else if (*pre) {
      const auto c = config::preset(preset_name);
      if (print_only)
        std::cout << config::to_json(c).dump(2) << "\n";
      else
        report(runner::run(c, options(common, common.out)), common.out);
    } else if (*cp) {
      std::cout << runner::check_potential(resolve(cp_config, cp_preset)).dump(2) << "\n";
    } else if (*id) {
      auto c = resolve(id_config, "identity-checks");
      c.study = "identity-checks";
      const auto m = runner::run(c, options(common, common.out));
      std::cout << m.summary.dump(2) << "\n";
    } else if (*sc) {
      auto c = resolve(sc_config, sc_preset);
      c.scattering.enabled = true;
      const auto m = runner::run(c, options(common, common.out));
      report(m, common.out);
      if (m.summary.contains("scattering"))
        std::cout << m.summary["scattering"].dump(2) << "\n";
    }
  } catch (const config::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const evolution::SolverAbort &e) {
    std::cerr << "solver abort: " << e.what() << " (last good state in snapshot.bin)\n";
    return 3;
  } catch (const runner::OutputError &e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
