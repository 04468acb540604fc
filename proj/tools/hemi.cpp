// hemi: command-line driver for the verification suites.

#include <CLI11.hpp>

#include "hemi/cli.hpp"

namespace {

void add_run_flags(CLI::App* sub, hemi::RunConfig& c, std::string& model) {
  sub->add_option("--model", model, "model name, e.g. hemisphere, cap(0.6), radial_bump(3,0.2)");
  sub->add_option("--dim", c.dim, "dimension 4 or 6 (default: 6 for cgb6, else 4)");
  sub->add_option("--radial", c.resolution.radial, "radial Gauss nodes")->capture_default_str();
  sub->add_option("--angular", c.resolution.angular, "angular nodes per axis")->capture_default_str();
  sub->add_option("--fd-step", c.resolution.fd_step, "finite-difference step")->capture_default_str();
  sub->add_option("--mesh", c.resolution.mesh, "spectral mesh elements")->capture_default_str();
  sub->add_option("--refine", c.resolution.refine, "refinement levels (1-3)")->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for sampled models and probes")->capture_default_str();
  sub->add_option("--format", c.format, "json or csv")->capture_default_str();
  sub->add_option("--out", c.out, "report path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for conformally flat metrics on the hemisphere"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hemi::version));

  hemi::RunConfig config;
  std::string model;

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("--suite", config.suite, "cgb4|cgb6|f2|spectrum|chain|identities|probe|all")
      ->capture_default_str();
  add_run_flags(verify, config, model);

  auto* spectrum = app.add_subcommand("spectrum", "first Yamabe eigenvalue and inequality gap");
  add_run_flags(spectrum, config, model);

  auto* chain = app.add_subcommand("chain", "inequality chain over the radial sweep");
  add_run_flags(chain, config, model);

  auto* probe = app.add_subcommand("probe", "search for a counterexample to rigidity");
  add_run_flags(probe, config, model);
  probe->add_option("--basis", config.probe_basis, "radial basis size")->capture_default_str();
  probe->add_option("--iterations", config.probe_iterations, "ascent iterations")->capture_default_str();

  auto* report = app.add_subcommand("report", "re-assert the checks of a JSON report");
  report->add_option("path", config.input, "report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(hemi::ExitStatus::usage);
  }

  if (*spectrum) config.suite = "spectrum";
  if (*chain) config.suite = "chain";
  if (*probe) config.suite = "probe";
  config.verb = app.get_subcommands().front()->get_name();
  if (!model.empty()) config.model = model;
  if (*chain && config.model) {
    std::cerr << "error: chain runs on the built-in sweep and takes no --model\n";
    return static_cast<int>(hemi::ExitStatus::usage);
  }
  return hemi::run(config);
}
