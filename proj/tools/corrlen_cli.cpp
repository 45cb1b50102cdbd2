#include "corrlen/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>

using namespace corrlen;

int main(int argc, char** argv) {
  CLI::App app{"correlation length laboratory for long-range lattice models"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  int threads = 1;
  int precision = 12;

  const char* names[] = {"geometry", "criterion", "nu-scan",
                         "saturation", "prefactor", "report"};
  const char* descs[] = {
      "dual vectors, Wulff shape and quasi-isotropy profiles",
      "saturation criterion, thresholds and coupling hypotheses",
      "inverse correlation length nu(lambda) curves",
      "saturation thresholds lambda_sat with regime-labelled curves",
      "prefactor regime diagnostics on a computed Green field",
      "geometry + criterion + saturation (+ prefactor) in one directory"};
  std::string chosen;
  for (int i = 0; i < 6; ++i) {
    auto* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--scenario", scenario_path, "scenario JSON path")->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--threads", threads, "worker threads (default: 1)");
    sub->add_option("--precision", precision, "significant digits in outputs (default: 12)");
    sub->callback([&chosen, name = std::string(names[i])] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Scenario sc = Scenario::load(scenario_path);
    RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.threads = std::max(1, threads);
    ctx.precision = std::clamp(precision, 3, 17);
    RunOutcome res = run_command(chosen, sc, ctx);
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
