#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "helfrich/driver.h"
#include "helfrich/errors.h"

namespace {

struct CommandArgs {
  CLI::App* cmd = nullptr;
  std::string config_path;
  std::map<std::string, std::string> values;  // config key -> raw value
  std::map<std::string, bool> flags;
  std::vector<std::pair<std::string, CLI::Option*>> opts;
  std::vector<std::pair<std::string, CLI::Option*>> flag_opts;

  std::map<std::string, std::string> provided() const {
    std::map<std::string, std::string> kv;
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) kv[key] = values.at(key);
    for (const auto& [key, opt] : flag_opts)
      if (opt->count() > 0) kv[key] = flags.at(key) ? "1" : "0";
    return kv;
  }
};

void add_common_options(CommandArgs& a) {
  CLI::App* cmd = a.cmd;
  cmd->add_option("--config", a.config_path, "config file (INI; CLI flags win)");
  auto reg = [&](const char* flag, const char* key, const char* desc) {
    a.opts.emplace_back(key, cmd->add_option(flag, a.values[key], desc));
  };
  auto reg_flag = [&](const char* flag, const char* key, const char* desc) {
    a.flag_opts.emplace_back(key, cmd->add_flag(flag, a.flags[key], desc));
  };
  reg("--surface", "surface.name", "catalog surface name");
  reg("--pattern", "mesh.pattern", "mesh pattern: right | crisscross | fan");
  reg("--domain", "mesh.domain",
      "domain: unit-square | centered-square | rect:x0,y0,x1,y1 | ngon:K,R");
  reg("--n", "mesh.n", "subdivisions per side (power of two for fan domains)");
  reg("--levels", "mesh.levels", "refinement levels for converge (>= 3)");
  reg("--integrand", "integrand.name",
      "willmore | p-willmore:<p> | weighted-willmore | spontaneous:<H0>");
  reg_flag("--allow-assumption-violating", "integrand.allow_assumption_violating",
           "enable integrands that violate the standing convexity/coercivity assumptions");
  reg("--directors", "directors.source", "director source: recovery | n0 | optimize | file:<path>");
  reg("--family", "directors.family", "director family: unit | pseudo_unit");
  reg("--quad-order", "quadrature.order", "triangle quadrature order (<= 10)");
  reg("--opt-family", "optimize.family", "optimizer family: pseudo_unit | unit");
  reg("--opt-initial", "optimize.initial", "optimizer start: recovery | n0 | file:<path>");
  reg("--grad-tol", "optimize.grad_tol", "optimizer gradient tolerance (0 = family default)");
  reg("--step-tol", "optimize.step_tol", "optimizer step tolerance");
  reg("--max-iters", "optimize.max_iters", "optimizer iteration budget");
  reg("--regularity-threshold", "tolerances.regularity_threshold",
      "advisory shape-regularity threshold");
  reg("--hypothesis-threshold", "tolerances.hypothesis_threshold",
      "smallness-hypothesis threshold of the pseudo-unit comparison check");
  reg("--threads", "run.threads", "worker threads (0 = all cores)");
  reg("--out-csv", "output.csv", "CSV output path");
  reg("--out-json", "output.json", "JSON report path");
  reg("--out-mesh", "output.mesh", "mesh file output path");
  reg("--out-directors", "output.directors", "mesh+directors output path");
  reg_flag("--fd", "output.with_fd", "add the finite-difference baseline column");
  reg_flag("--per-triangle", "output.per_triangle_in_json",
           "include per-triangle energies in the JSON report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete Helfrich-type curvature energies on triangular complexes"};
  app.require_subcommand(1);

  CommandArgs mesh_args, energy_args, converge_args, optimize_args, verify_args;
  mesh_args.cmd = app.add_subcommand("mesh", "generate, validate and report a mesh");
  energy_args.cmd = app.add_subcommand("energy", "discrete/continuous energy of one level");
  converge_args.cmd = app.add_subcommand("converge", "mesh-refinement convergence study (CSV)");
  optimize_args.cmd = app.add_subcommand("optimize", "minimize the energy over director fields");
  verify_args.cmd = app.add_subcommand("verify", "invariant and comparison-estimate battery");
  for (CommandArgs* a : {&mesh_args, &energy_args, &converge_args, &optimize_args, &verify_args})
    add_common_options(*a);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return helfrich::driver::kExitUsage;
  }

  try {
    CommandArgs* a = nullptr;
    int (*run)(const helfrich::driver::ExperimentConfig&, std::ostream&) = nullptr;
    if (mesh_args.cmd->parsed()) a = &mesh_args, run = helfrich::driver::run_mesh;
    if (energy_args.cmd->parsed()) a = &energy_args, run = helfrich::driver::run_energy;
    if (converge_args.cmd->parsed()) a = &converge_args, run = helfrich::driver::run_converge;
    if (optimize_args.cmd->parsed()) a = &optimize_args, run = helfrich::driver::run_optimize;
    if (verify_args.cmd->parsed()) a = &verify_args, run = helfrich::driver::run_verify;

    helfrich::driver::ExperimentConfig cfg;
    if (!a->config_path.empty())
      helfrich::driver::apply_config(cfg, helfrich::driver::read_config_file(a->config_path));
    helfrich::driver::apply_config(cfg, a->provided());
    return run(cfg, std::cout);
  } catch (const helfrich::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return helfrich::driver::kExitUsage;
  } catch (const helfrich::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return helfrich::driver::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return helfrich::driver::kExitNumerical;
  }
}
