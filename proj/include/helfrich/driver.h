#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "helfrich/directors.h"
#include "helfrich/energy.h"
#include "helfrich/mesh.h"
#include "helfrich/optimize.h"

// Experiment driver behind the CLI subcommands. The binary in tools/ only
// parses flags; everything testable lives here.
namespace helfrich::driver {

struct ExperimentConfig {
  // [surface]
  std::string surface = "paraboloid";
  // [mesh]
  std::string pattern;          // right | crisscross | fan ("" = surface default)
  std::string domain;           // unit-square | centered-square | rect:x0,y0,x1,y1 |
                                // ngon:K,R ("" = surface default)
  int n = 8;
  int levels = 4;               // refinement levels for converge
  // [integrand]
  std::string integrand = "willmore";
  bool allow_assumption_violating = false;
  // [directors]
  std::string director_source = "recovery";  // recovery | n0 | optimize | file:<path>
  std::string family = "unit";
  // [quadrature]
  int quad_order = 4;
  // [optimize]
  std::string opt_family = "pseudo_unit";
  std::string opt_initial = "recovery";      // recovery | n0 | file:<path>
  double grad_tol = 0;                       // 0 = family default
  double step_tol = 1e-14;
  int max_iters = 10000;
  // [tolerances]
  double regularity_threshold = 0.05;
  double hypothesis_threshold = 0.5;
  // [run]
  int threads = 0;                           // 0 = all cores
  // [output]
  std::string out_csv, out_json, out_mesh, out_directors;
  bool with_fd = false;
  bool per_triangle_in_json = false;
};

// Exit codes shared by the driver and the binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

// Flat INI: `[section]` lines then `key = value`; keys surface as
// "section.key". Blank lines and #/; comments ignored.
std::map<std::string, std::string> read_config_file(const std::string& path);
// file values overwrite defaults; CLI-provided keys (second map) win.
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

// Mesh + lift + directors assembled per config (one refinement level). The
// complex sits behind a stable pointer because `field` refers to it.
struct ExperimentSetup {
  SurfaceCatalogEntry surface;
  std::unique_ptr<TriangularComplex3D> complex;  // owns; field.complex aliases it
  DirectorField field;
  Integrand integrand;
};
ExperimentSetup build_setup(const ExperimentConfig& cfg, int n);

// Subcommand drivers; each returns an exit code and reports to `out`.
int run_mesh(const ExperimentConfig& cfg, std::ostream& out);
int run_energy(const ExperimentConfig& cfg, std::ostream& out);
int run_converge(const ExperimentConfig& cfg, std::ostream& out);
int run_optimize(const ExperimentConfig& cfg, std::ostream& out);
int run_verify(const ExperimentConfig& cfg, std::ostream& out);

// One row of the convergence study (also the CSV schema).
struct ConvergeRow {
  int level = 0, n = 0;
  double h = 0, c_star = 0;
  double e_discrete = 0, e_continuous = 0;
  double err_abs = 0, err_rel = 0, rate = 0;  // rate vs previous level (nan first)
  double dir_err_sup = 0, dir_rate = 0;
  double ratio_normal_max = 0, ratio_normal_mean = 0;  // check_normal_estimate
  double ratio_pseudo_max = 0, ratio_pseudo_mean = 0;  // check_pseudo_estimate
  double e_fd = 0;  // only with with_fd
};

struct ConvergeResult {
  std::vector<ConvergeRow> rows;
  double fit_energy_rate = 0;   // least-squares log-log slope
  double fit_dir_rate = 0;
  double reference_energy = 0;  // E0 used for the error columns
};

ConvergeResult converge_study(const ExperimentConfig& cfg);
std::string converge_csv(const ConvergeResult& r);

// Richardson-extrapolated continuous energy over the surface's own domain
// (three nested quadrature meshes). rel_gap = |finest - extrapolated| /
// |extrapolated| estimates the quadrature error of the finest level.
struct ReferenceEnergyResult {
  double finest = 0;
  double extrapolated = 0;
  double rel_gap = 0;
  double observed_order = 0;
};
ReferenceEnergyResult reference_continuous_energy(const SurfaceCatalogEntry& s,
                                                  const Integrand& f, int base_n = 8,
                                                  int quad_order = 6);

// Least-squares slope of log(err) vs log(h); pairs with err <= floor are
// dropped. Returns nan if fewer than two usable pairs remain.
double fit_rate(const std::vector<double>& h, const std::vector<double>& err,
                double floor = 1e-13);

// Verification battery for cmd_verify.
struct CheckResult {
  std::string name;
  bool pass = true;
  double value = 0, threshold = 0;
  std::string detail;
};
std::vector<CheckResult> run_verification(const ExperimentConfig& cfg);

}  // namespace helfrich::driver
