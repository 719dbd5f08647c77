#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "blab/commands.hpp"
#include "blab/config.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory for reports");
  cmd->add_option("--seed", args.seed, "override the config seed");
}

int dispatch(const std::string& name, const CommonArgs& args) {
  blab::ExperimentConfig cfg = blab::ExperimentConfig::parse_file(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  std::string out = args.out_dir.empty() ? cfg.out_dir : args.out_dir;
  if (name == "basis-check") return blab::cmd_basis_check(cfg, out);
  if (name == "sections") return blab::cmd_sections(cfg, out);
  if (name == "essnorm") return blab::cmd_essnorm(cfg, out);
  if (name == "sot") return blab::cmd_sot(cfg, out);
  if (name == "realize") return blab::cmd_realize(cfg, out);
  return blab::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "blab: finite-section Hankel/Toeplitz experiments on weighted Bergman "
      "spaces"};
  app.require_subcommand(1);

  const std::vector<std::string> names = {"basis-check", "sections", "essnorm",
                                          "sot", "realize"};
  const std::vector<std::string> descriptions = {
      "run the space invariant suite",
      "emit finite sections and singular values for the configured symbol",
      "emit essential-norm sandwich estimates",
      "emit strong-operator-topology residual reports",
      "run the full distance-realization pipeline"};

  std::vector<CommonArgs> args(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    add_common(app.add_subcommand(names[i], descriptions[i]), args[i]);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < names.size(); ++i) {
    if (app.get_subcommand(names[i])->parsed()) {
      try {
        return dispatch(names[i], args[i]);
      } catch (const blab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return blab::kExitConfig;
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return blab::kExitConfig;
      } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return blab::kExitConfig;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return blab::kExitNumerical;
      }
    }
  }
  return blab::kExitConfig;
}
