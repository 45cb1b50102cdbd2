#pragma once

#include "corrlen/couplings.hpp"
#include "corrlen/greenfn.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace corrlen {

// one self-contained run description, loaded from a JSON file.  The canonical
// serialization (sorted keys) feeds the hash stamped into every output file,
// so identical scenarios are recognizable across runs.
struct Scenario {
  std::string model = "krw";  // krw | gff
  NormSpec norm;
  PrefactorSpec prefactor;
  int kernel_R = 0;
  double tail_tol = 1e-10;
  std::vector<Vec> directions;
  double lambda = 0;
  std::vector<double> lambda_grid;
  int field_R = 0;
  int field_K = 0;
  std::string engine = "auto";
  int window_lo = 0;
  int window_hi = 0;
  double gff_mass2 = 0;
  int probe_n = 0;
  double rho_cut = 0.5;
  bool export_kernel = false;

  std::string canonical;
  std::uint64_t hash = 0;

  static Scenario load(const std::string& path);
  void validate_for(const std::string& command) const;

  // gff runs at the walk weight 1/(1 + m^2); krw uses lambda directly
  double effective_lambda() const;
};

struct RunContext {
  std::string out_dir;
  int threads = 1;
  int precision = 12;
};

struct RunOutcome {
  std::vector<std::string> files;   // everything written, summary last
  std::string summary_json;
};

// command is one of: geometry, criterion, nu-scan, saturation, prefactor,
// report.  Throws ConfigError for bad input, NumericError/BudgetError when
// the computation itself fails.
RunOutcome run_command(const std::string& command, const Scenario& sc, const RunContext& ctx);

// flat binary kernel cache: magic CLKR, version, dim, R, spec hash, Z_J,
// tail bound, count, then J and log J arrays.  load_kernel refuses a file
// whose stored hash does not match the given spec.
void save_kernel(const std::string& path, const CouplingKernel& kernel);
CouplingKernel load_kernel(const std::string& path, const NormSpec& norm,
                           const PrefactorSpec& pref);

// field snapshot, same idea (magic CLGF); round-trips everything needed to
// resume diagnostics without recomputing the series
void save_field(const std::string& path, const GreenField& field);
GreenField load_field(const std::string& path);

// %.{digits}g formatting shared by the CSV and SVG writers
std::string format_sig(double v, int digits);

// every CSV starts with "# corrlen <version> scenario=<016x>"
void write_csv(const std::string& path, std::uint64_t scenario_hash,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color;  // optional; palette cycles when empty
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series);

}  // namespace corrlen
