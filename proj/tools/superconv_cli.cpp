// Command-line front end: SU / RS / exact / compare over an eps grid.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "superconv/superconv.hpp"

int main(int argc, char** argv) {
  using namespace superconv;

  CLI::App app{"Superconvergent perturbation theory for finite Hermitian models"};
  RunConfig cfg;

  std::string model_path, builtin, method = "compare", format = "csv", out_path;
  std::size_t dim = cfg.model.dim;
  std::vector<double> eps;
  std::vector<std::size_t> levels{0};
  int order = cfg.order;
  int stages = 0;
  double deg_tol = cfg.tol.deg_tol_rel, gap_guard = cfg.tol.gap_guard_rel, hbar = 0.0;

  auto* model_opt = app.add_option("--model", model_path, "Model file (JSON)")->check(CLI::ExistingFile);
  auto* builtin_opt = app.add_option("--builtin", builtin, "Builtin model (quartic_oscillator)")
                          ->check(CLI::IsMember({std::string(kQuarticOscillator)}));
  model_opt->excludes(builtin_opt);
  app.add_option("--dim", dim, "Dimension of the builtin model")->capture_default_str();
  app.add_option("--method", method, "su | rs | exact | compare")
      ->check(CLI::IsMember({"su", "rs", "exact", "compare"}))
      ->capture_default_str();
  app.add_option("--eps", eps, "Comma-separated perturbation parameters")->delimiter(',')->required();
  app.add_option("--order", order, "Truncation order P")->capture_default_str();
  app.add_option("--stages", stages, "Number of Kolmogorov stages (default ceil(log2(P+1)))");
  app.add_option("--levels", levels, "Comma-separated level indices")->delimiter(',')->capture_default_str();
  app.add_option("--deg-tol", deg_tol, "Degeneracy tolerance, relative to the spectral scale")
      ->capture_default_str();
  app.add_option("--gap-guard", gap_guard, "Small-denominator guard, relative to the spectral scale")
      ->capture_default_str();
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--out", out_path, "Output file (default stdout)");
  auto* hbar_opt = app.add_option("--hbar", hbar, "Override the model's hbar");
  app.add_flag("--serial", [&](std::int64_t) { cfg.parallel = false; }, "Evaluate eps points sequentially");

  CLI11_PARSE(app, argc, argv);

  if (!model_path.empty()) cfg.model.path = model_path;
  if (!builtin.empty()) cfg.model.builtin = builtin;
  cfg.model.dim = dim;
  cfg.method = parse_method(method);
  cfg.format = parse_format(format);
  cfg.eps = eps;
  cfg.levels = levels;
  cfg.order = order;
  if (stages != 0) cfg.stages = stages;
  cfg.tol.deg_tol_rel = deg_tol;
  cfg.tol.gap_guard_rel = gap_guard;
  if (*hbar_opt) cfg.hbar = hbar;

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot open " << out_path << " for writing\n";
      return 1;
    }
    cfg.out = out_path;
    return cmd_run(cfg, out, std::cerr);
  }
  return cmd_run(cfg, std::cout, std::cerr);
}
