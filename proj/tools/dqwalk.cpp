// dqwalk command-line front end.

#include "dqwalk/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

void add_channel_options(CLI::App& cmd, dqwalk::RunConfig& cfg) {
  cmd.add_option("--channel", cfg.channel.builtin, "coherent | broken-line | coin-dephasing")
      ->check(CLI::IsMember({"coherent", "broken-line", "coin-dephasing"}));
  cmd.add_option("--channel-file", cfg.channel.file, "JSON channel file (overrides --channel)");
  cmd.add_option("--p", cfg.channel.p, "broken-line break probability");
  cmd.add_option("--q", cfg.channel.q, "coin dephasing strength");
  cmd.add_option("--theta1", cfg.channel.theta1);
  cmd.add_option("--theta2", cfg.channel.theta2);
  cmd.add_option("--theta3", cfg.channel.theta3);
  cmd.add_option("--theta4", cfg.channel.theta4);
  cmd.add_option("--coin", cfg.coin, "R | L | symmetric | mixed | r0,r1,r2,r3");
  cmd.add_option("--nk", cfg.n_k, "quadrature nodes (0 = 4*max_hop*t + 8)");
  cmd.add_option("-o,--output", cfg.output, "output path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoherent one-dimensional quantum walk engine"};
  app.require_subcommand(1);

  dqwalk::RunConfig cfg;
  std::string config_path;
  bool dump_config = false;
  app.add_option("--config", config_path, "load a RunConfig JSON; command-line flags override it");
  app.add_flag("--dump-config", dump_config, "print the effective RunConfig as JSON and exit");

  auto* walk = app.add_subcommand("walk", "direct density-matrix simulation");
  add_channel_options(*walk, cfg);
  walk->add_option("--t", cfg.t, "number of steps");
  walk->add_option("--moments-output", cfg.moments_output, "also write the t,first,second,variance CSV here");
  walk->add_flag("--all-sites", cfg.all_sites, "include zero-probability sites");

  auto* moments = app.add_subcommand("moments", "Fourier-space moment series");
  add_channel_options(*moments, cfg);
  moments->add_option("--t", cfg.t, "number of steps");
  moments->add_option("--format", cfg.format)->check(CLI::IsMember({"csv", "json"}));
  moments->add_flag("--naive", cfg.naive, "literal O(t^2) double sum");
  moments->add_flag("--asymptotic", cfg.asymptotic, "long-time first moment");
  moments->add_flag("--inject-g-sign-flip", cfg.inject_g_sign_flip)->group("");

  auto* diffusion = app.add_subcommand("diffusion", "broken-line diffusion coefficient sweep");
  diffusion->add_option("--p-values", cfg.p_values, "break probabilities (default 0.05..1.00)")->delimiter(',');
  diffusion->add_flag("--critical", cfg.critical, "print the p where D = 1/2");
  diffusion->add_flag("--with-slope", cfg.with_slope, "add slope-method D from the moment engine");
  diffusion->add_option("--t-lo", cfg.t_lo);
  diffusion->add_option("--t-hi", cfg.t_hi);
  diffusion->add_option("--tol", cfg.tol, "bisection tolerance for --critical");
  diffusion->add_option("--coin", cfg.coin);
  diffusion->add_option("--nk", cfg.n_k);
  diffusion->add_option("-o,--output", cfg.output);

  auto* xcheck = app.add_subcommand("xcheck", "engine-vs-oracle cross-check table");
  xcheck->add_option("--t", cfg.t, "largest step count compared");
  xcheck->add_option("--nk", cfg.n_k);
  xcheck->add_flag("--coin-reduction", cfg.coin_reduction, "also compare generic and coin-specialized formulas");
  xcheck->add_flag("--inject-g-sign-flip", cfg.inject_g_sign_flip)->group("");
  xcheck->add_option("-o,--output", cfg.output);

  // Parse once to find --config, then reload defaults from it and reparse.
  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot open " << config_path << '\n';
        return dqwalk::kExitInvalidInput;
      }
      cfg = nlohmann::json::parse(in).get<dqwalk::RunConfig>();
      app.parse(argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dqwalk::kExitInvalidInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return dqwalk::kExitInvalidInput;
  }

  for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
  if (dump_config) {
    std::cout << nlohmann::json(cfg).dump(2) << '\n';
    return dqwalk::kExitOk;
  }
  return dqwalk::dispatch(cfg, std::cout, std::cerr);
}
