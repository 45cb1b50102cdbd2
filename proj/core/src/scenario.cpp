#include "corrlen/scenario.hpp"

#include "corrlen/diagnostics.hpp"
#include "corrlen/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

namespace corrlen {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double round_sig(double v, int digits) {
  if (!std::isfinite(v)) return v;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

std::string hex16(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string format_sig(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_csv(const std::string& path, std::uint64_t scenario_hash,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "# corrlen " << version_string << " scenario=" << hex16(scenario_hash) << "\n";
  for (size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw ConfigError("csv row width mismatch");
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw ConfigError("short write to " + path);
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series) {
  static const char* palette[] = {"#1f6feb", "#d73a49", "#2da44e", "#8250df",
                                  "#bf8700", "#0b7285", "#c2255c", "#6e7781"};
  const double W = 760, H = 520, L = 70, Rm = 24, T = 44, B = 58;

  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmin <= xmax)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  if (xmax - xmin < 1e-300) { xmin -= 1; xmax += 1; }
  if (ymax - ymin < 1e-300) { ymin -= 1; ymax += 1; }
  double xpad = 0.04 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

  auto mx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - Rm); };
  auto my = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"520\" "
         "viewBox=\"0 0 760 520\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"760\" height=\"520\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"380\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" fill=\"#222\">" +
         xml_escape(title) + "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    double xv = xmin + i * (xmax - xmin) / 5;
    double yv = ymin + i * (ymax - ymin) / 5;
    char b[256];
    std::snprintf(b, sizeof b,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#e3e3e3\"/>\n",
                  mx(xv), my(ymin), mx(xv), my(ymax));
    svg += b;
    std::snprintf(b, sizeof b,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#e3e3e3\"/>\n",
                  mx(xmin), my(yv), mx(xmax), my(yv));
    svg += b;
    std::snprintf(b, sizeof b,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"11\" "
                  "fill=\"#444\">%s</text>\n",
                  mx(xv), H - B + 16, format_sig(xv, 4).c_str());
    svg += b;
    std::snprintf(b, sizeof b,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"11\" "
                  "fill=\"#444\">%s</text>\n",
                  L - 6, my(yv) + 4, format_sig(yv, 4).c_str());
    svg += b;
  }
  char ax[256];
  std::snprintf(ax, sizeof ax,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#222\"/>\n"
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#222\"/>\n",
                L, H - B, W - Rm, H - B, L, T, L, H - B);
  svg += ax;
  svg += "<text x=\"" + std::to_string((L + W - Rm) / 2) + "\" y=\"" + std::to_string(H - 14) +
         "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\">" + xml_escape(xlabel) +
         "</text>\n";
  svg += "<text x=\"18\" y=\"" + std::to_string((T + H - B) / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\" transform=\"rotate(-90 18 " +
         std::to_string((T + H - B) / 2) + ")\">" + xml_escape(ylabel) + "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    std::string color = s.color.empty() ? palette[si % 8] : s.color;
    size_t n = std::min(s.x.size(), s.y.size());
    size_t finite = 0;
    for (size_t i = 0; i < n; ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) ++finite;
    if (finite <= 4) {  // sparse series render as markers, not lines
      for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        char b[160];
        std::snprintf(b, sizeof b,
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3.5\" fill=\"%s\"/>\n",
                      mx(s.x[i]), my(s.y[i]), color.c_str());
        svg += b;
      }
    } else {
      std::string pts;
      auto flush = [&]() {
        if (pts.empty()) return;
        svg += "<polyline fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
        pts.clear();
      };
      for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) { flush(); continue; }
        char b[64];
        std::snprintf(b, sizeof b, "%.2f,%.2f ", mx(s.x[i]), my(s.y[i]));
        pts += b;
      }
      flush();
    }
    if (!s.label.empty()) {
      double ly = T + 16 + 18.0 * si;
      char b[320];
      std::snprintf(b, sizeof b,
                    "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                    "stroke-width=\"2.5\"/><text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" "
                    "fill=\"#333\">%s</text>\n",
                    W - Rm - 150.0, ly, W - Rm - 126.0, ly, color.c_str(), W - Rm - 120.0,
                    ly + 4, xml_escape(s.label).c_str());
      svg += b;
    }
  }
  svg += "</svg>\n";

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << svg;
  if (!out) throw ConfigError("short write to " + path);
}

namespace {

template <class T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ConfigError("truncated binary file");
  return v;
}

void put_doubles(std::ofstream& o, const std::vector<double>& v) {
  put<std::uint64_t>(o, v.size());
  o.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::ifstream& in, std::uint64_t cap = (1ull << 32)) {
  auto n = get<std::uint64_t>(in);
  if (n > cap) throw ConfigError("binary array too large");
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
  if (!in) throw ConfigError("truncated binary file");
  return v;
}

constexpr std::uint32_t kKernelMagic = 0x524b4c43u;  // "CLKR" little-endian
constexpr std::uint32_t kFieldMagic = 0x46474c43u;   // "CLGF"

}  // namespace

void save_kernel(const std::string& path, const CouplingKernel& kernel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  put(out, kKernelMagic);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, std::uint32_t(kernel.shape.dim));
  put<std::uint32_t>(out, std::uint32_t(kernel.shape.R));
  put<std::uint64_t>(out, kernel.hash);
  put(out, kernel.ZJ);
  put(out, kernel.tail_bound);
  put(out, kernel.min_norm_linf);
  put_doubles(out, kernel.J);
  put_doubles(out, kernel.logJ);
  if (!out) throw ConfigError("short write to " + path);
}

CouplingKernel load_kernel(const std::string& path, const NormSpec& norm,
                           const PrefactorSpec& pref) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  if (get<std::uint32_t>(in) != kKernelMagic) throw ConfigError("not a kernel file: " + path);
  if (get<std::uint32_t>(in) != 1) throw ConfigError("unsupported kernel file version");
  auto dim = get<std::uint32_t>(in);
  auto R = get<std::uint32_t>(in);
  auto hash = get<std::uint64_t>(in);

  CouplingKernel k;
  k.norm = norm;
  k.prefactor = pref;
  k.hash = fnv1a64(norm.cache_key() + "|" + pref.cache_key() + "|R=" + std::to_string(R));
  if (hash != k.hash)
    throw ConfigError("kernel file does not match the given norm/prefactor spec");
  if (int(dim) != norm.dim) throw ConfigError("kernel file dimension mismatch");
  k.shape = BoxShape(int(dim), int(R));
  k.ZJ = get<double>(in);
  k.tail_bound = get<double>(in);
  k.min_norm_linf = get<double>(in);
  k.J = get_doubles(in);
  k.logJ = get_doubles(in);
  if (k.J.size() != k.shape.size || k.logJ.size() != k.shape.size)
    throw ConfigError("kernel file array size mismatch");
  return k;
}

void save_field(const std::string& path, const GreenField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  put(out, kFieldMagic);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, std::uint32_t(field.dim));
  put<std::uint32_t>(out, std::uint32_t(field.R));
  put<std::uint32_t>(out, std::uint32_t(field.K));
  put<std::uint32_t>(out, std::uint32_t(field.K_effective));
  put<std::uint8_t>(out, field.separable_used ? 1 : 0);
  put<std::uint8_t>(out, std::uint8_t(field.model.size()));
  out.write(field.model.data(), std::streamsize(field.model.size()));
  put(out, field.lambda);
  put(out, field.tail_bound);
  put_doubles(out, field.G);
  put_doubles(out, field.logG);
  put_doubles(out, field.layer_mass);
  put_doubles(out, field.layer_peak_log);
  if (!out) throw ConfigError("short write to " + path);
}

GreenField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  if (get<std::uint32_t>(in) != kFieldMagic) throw ConfigError("not a field file: " + path);
  if (get<std::uint32_t>(in) != 1) throw ConfigError("unsupported field file version");
  GreenField f;
  f.dim = int(get<std::uint32_t>(in));
  f.R = int(get<std::uint32_t>(in));
  f.K = int(get<std::uint32_t>(in));
  f.K_effective = int(get<std::uint32_t>(in));
  f.separable_used = get<std::uint8_t>(in) != 0;
  auto mlen = get<std::uint8_t>(in);
  f.model.resize(mlen);
  in.read(f.model.data(), mlen);
  if (!in) throw ConfigError("truncated binary file");
  f.lambda = get<double>(in);
  f.tail_bound = get<double>(in);
  f.shape = BoxShape(f.dim, f.R);
  f.G = get_doubles(in);
  f.logG = get_doubles(in);
  f.layer_mass = get_doubles(in);
  f.layer_peak_log = get_doubles(in);
  if (f.G.size() != f.shape.size || f.logG.size() != f.shape.size)
    throw ConfigError("field file array size mismatch");
  return f;
}

namespace {

double json_number(const json& j, const std::string& key, const char* what) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(std::string("scenario: ") + what + " must be a number");
  return j[key].get<double>();
}

}  // namespace

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario: top level must be an object");

  static const std::set<std::string> known = {
      "model", "dim", "norm", "prefactor", "kernel", "directions", "fan",
      "lambda", "lambda_grid", "field", "window", "gff_mass2", "probe",
      "export_kernel"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("scenario: unknown key '" + it.key() + "'");

  Scenario sc;
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    throw ConfigError("scenario: dim must be an integer");
  int dim = j["dim"].get<int>();
  if (dim < 1 || dim > 4) throw ConfigError("scenario: dim must be in [1, 4]");

  sc.model = j.value("model", std::string("krw"));
  if (sc.model != "krw" && sc.model != "gff")
    throw ConfigError("scenario: model must be 'krw' or 'gff'");

  if (!j.contains("norm") || !j["norm"].is_object())
    throw ConfigError("scenario: norm object required");
  {
    const json& jn = j["norm"];
    std::string fam = jn.value("family", std::string("ellp"));
    if (fam == "ellp") {
      double p = 2.0;
      if (jn.contains("p")) {
        if (jn["p"].is_string()) {
          if (jn["p"].get<std::string>() != "inf")
            throw ConfigError("scenario: norm.p string must be 'inf'");
          p = kInf;
        } else {
          p = json_number(jn, "p", "norm.p");
        }
      }
      sc.norm = make_ell_p(dim, p);
    } else if (fam == "weighted_ellp") {
      double p = json_number(jn, "p", "norm.p");
      if (!jn.contains("weights") || !jn["weights"].is_array())
        throw ConfigError("scenario: norm.weights array required");
      std::vector<double> w;
      for (const auto& e : jn["weights"]) w.push_back(e.get<double>());
      sc.norm = make_weighted_ell_p(dim, p, std::move(w));
    } else if (fam == "polyhedral") {
      if (dim != 2) throw ConfigError("scenario: polyhedral norms are d = 2 only");
      if (!jn.contains("vertices") || !jn["vertices"].is_array())
        throw ConfigError("scenario: norm.vertices array required");
      std::vector<Vec> verts;
      for (const auto& e : jn["vertices"]) {
        if (!e.is_array() || e.size() != 2)
          throw ConfigError("scenario: each vertex must be [x, y]");
        verts.push_back(Vec{e[0].get<double>(), e[1].get<double>()});
      }
      sc.norm = make_polyhedral(std::move(verts));
    } else if (fam == "composite_arc_facet") {
      if (dim != 2) throw ConfigError("scenario: composite_arc_facet is d = 2 only");
      sc.norm = make_composite_arc_facet();
    } else {
      throw ConfigError("scenario: unknown norm family '" + fam + "'");
    }
    sc.norm.validate();
  }

  if (!j.contains("prefactor") || !j["prefactor"].is_object())
    throw ConfigError("scenario: prefactor object required");
  {
    const json& jp = j["prefactor"];
    std::string fam = jp.value("family", std::string("constant"));
    PrefactorSpec ps;
    ps.C = jp.contains("C") ? json_number(jp, "C", "prefactor.C") : 1.0;
    if (fam == "constant") {
      ps.family = PrefactorFamily::Constant;
    } else if (fam == "polynomial") {
      ps.family = PrefactorFamily::Polynomial;
      ps.alpha = json_number(jp, "alpha", "prefactor.alpha");
    } else if (fam == "stretched_exp") {
      ps.family = PrefactorFamily::StretchedExp;
      ps.a = json_number(jp, "a", "prefactor.a");
      ps.gamma = json_number(jp, "gamma", "prefactor.gamma");
    } else if (fam == "table") {
      ps.family = PrefactorFamily::Table;
      if (!jp.contains("table") || !jp["table"].is_array())
        throw ConfigError("scenario: prefactor.table array required");
      for (const auto& e : jp["table"]) ps.table.push_back(e.get<double>());
    } else {
      throw ConfigError("scenario: unknown prefactor family '" + fam + "'");
    }
    ps.validate();
    sc.prefactor = ps;
  }

  if (j.contains("kernel")) {
    const json& jk = j["kernel"];
    if (!jk.is_object()) throw ConfigError("scenario: kernel must be an object");
    if (jk.contains("R")) sc.kernel_R = jk["R"].get<int>();
    if (jk.contains("tail_tol")) sc.tail_tol = jk["tail_tol"].get<double>();
  }

  if (j.contains("directions")) {
    if (!j["directions"].is_array()) throw ConfigError("scenario: directions must be an array");
    for (const auto& e : j["directions"]) {
      if (!e.is_array() || int(e.size()) != dim)
        throw ConfigError("scenario: each direction needs dim components");
      Vec v;
      for (const auto& c : e) v.push_back(c.get<double>());
      sc.directions.push_back(std::move(v));
    }
  }
  if (j.contains("fan")) {
    if (dim != 2) throw ConfigError("scenario: fan directions are d = 2 only");
    int n = j["fan"].get<int>();
    if (n < 2 || n > 256) throw ConfigError("scenario: fan must be in [2, 256]");
    for (int i = 0; i < n; ++i) {
      double th = (M_PI / 4) * i / double(n - 1);  // axis through diagonal
      sc.directions.push_back(Vec{std::cos(th), std::sin(th)});
    }
  }
  if (sc.directions.empty()) {
    Vec e1(dim, 0.0);
    e1[0] = 1;
    sc.directions.push_back(e1);
    if (dim >= 2) sc.directions.push_back(Vec(dim, 1.0));
  }

  if (j.contains("lambda")) sc.lambda = j["lambda"].get<double>();
  if (j.contains("lambda_grid")) {
    if (!j["lambda_grid"].is_array())
      throw ConfigError("scenario: lambda_grid must be an array");
    for (const auto& e : j["lambda_grid"]) sc.lambda_grid.push_back(e.get<double>());
  }
  if (j.contains("field")) {
    const json& jf = j["field"];
    if (!jf.is_object()) throw ConfigError("scenario: field must be an object");
    if (jf.contains("R")) sc.field_R = jf["R"].get<int>();
    if (jf.contains("K")) sc.field_K = jf["K"].get<int>();
    if (jf.contains("engine")) sc.engine = jf["engine"].get<std::string>();
  }
  if (j.contains("window")) {
    const json& jw = j["window"];
    if (!jw.is_array() || jw.size() != 2)
      throw ConfigError("scenario: window must be [n_lo, n_hi]");
    sc.window_lo = jw[0].get<int>();
    sc.window_hi = jw[1].get<int>();
  }
  if (j.contains("gff_mass2")) sc.gff_mass2 = j["gff_mass2"].get<double>();
  if (j.contains("probe")) {
    const json& jp = j["probe"];
    if (!jp.is_object()) throw ConfigError("scenario: probe must be an object");
    if (jp.contains("n")) sc.probe_n = jp["n"].get<int>();
    if (jp.contains("rho_cut")) sc.rho_cut = jp["rho_cut"].get<double>();
  }
  if (j.contains("export_kernel")) sc.export_kernel = j["export_kernel"].get<bool>();

  sc.canonical = j.dump();
  sc.hash = fnv1a64(sc.canonical);
  return sc;
}

double Scenario::effective_lambda() const {
  return model == "gff" ? 1.0 / (1.0 + gff_mass2) : lambda;
}

void Scenario::validate_for(const std::string& command) const {
  norm.validate();
  prefactor.validate();
  if (directions.empty()) throw ConfigError("scenario: at least one direction required");
  for (const Vec& s : directions) {
    if (int(s.size()) != norm.dim) throw ConfigError("scenario: direction dimension mismatch");
    if (!(norm2(s) > 0)) throw ConfigError("scenario: zero direction");
  }
  if (engine != "auto" && engine != "direct" && engine != "separable")
    throw ConfigError("scenario: engine must be auto, direct or separable");
  for (double l : lambda_grid)
    if (!(l > 0 && l < 1)) throw ConfigError("scenario: lambda_grid values must be in (0, 1)");
  if (!(rho_cut > 0 && rho_cut <= 1)) throw ConfigError("scenario: probe.rho_cut in (0, 1]");
  if (model == "gff" && !(gff_mass2 > 0))
    throw ConfigError("scenario: gff model needs gff_mass2 > 0");

  if (command == "geometry") return;
  if (kernel_R < 1) throw ConfigError("scenario: kernel.R >= 1 required for " + command);

  bool needs_field = command == "prefactor";
  if (needs_field) {
    if (field_R < 1 || field_K < 1)
      throw ConfigError("scenario: field.R and field.K required for " + command);
    if (kernel_R < 2 * field_R)
      throw ConfigError("scenario: kernel.R must be at least 2 field.R");
    if (window_lo < 1 || window_hi <= window_lo)
      throw ConfigError("scenario: window [n_lo, n_hi] with 1 <= n_lo < n_hi required");
    double l = effective_lambda();
    if (!(l > 0 && l < 1))
      throw ConfigError("scenario: effective lambda must be in (0, 1) for " + command);
  }
  if (command == "nu-scan" && lambda != 0 && !(lambda > 0 && lambda < 1))
    throw ConfigError("scenario: lambda must be in (0, 1)");
}

namespace {

struct Runner {
  const Scenario& sc;
  const RunContext& rc;
  fs::path dir;
  RunOutcome outcome;

  Runner(const Scenario& s, const RunContext& r) : sc(s), rc(r), dir(r.out_dir) {
    fs::create_directories(dir);
  }

  std::string file(const std::string& name) {
    std::string p = (dir / name).string();
    outcome.files.push_back(p);
    return p;
  }

  double num(double v) const { return round_sig(v, rc.precision); }

  std::string fmt(double v) const { return format_sig(v, rc.precision); }

  json vec_json(const Vec& v) const {
    json a = json::array();
    for (double c : v) a.push_back(num(c));
    return a;
  }

  void finish(const std::string& name, json& summary) {
    summary["scenario"] = hex16(sc.hash);
    summary["version"] = version_string;
    std::string p = file(name);
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p);
    outcome.summary_json = summary.dump(2);
    out << outcome.summary_json << "\n";
  }

  ConvolutionOptions conv_opts() const {
    ConvolutionOptions o;
    o.threads = rc.threads;
    if (sc.engine == "direct") o.engine = ConvolutionOptions::Engine::Direct;
    else if (sc.engine == "separable") o.engine = ConvolutionOptions::Engine::Separable;
    return o;
  }

  CouplingKernel kernel() const {
    CouplingKernel k = normalize_kernel(sc.norm, sc.prefactor, sc.kernel_R, sc.tail_tol);
    return k;
  }
};

Regime point_regime(const NuEstimate& e, double norm_s) {
  if (e.saturated) return Regime::SATURATED;
  return e.nu < 0.05 * norm_s ? Regime::NEAR_CRITICAL : Regime::OZ;
}

RunOutcome run_geometry(const Scenario& sc, const RunContext& rc) {
  Runner r(sc, rc);
  json out;
  out["command"] = "geometry";
  out["dim"] = sc.norm.dim;
  out["norm"] = sc.norm.cache_key();
  json jdirs = json::array();

  std::vector<std::string> cols = {"dir", "norm"};
  for (int i = 0; i < sc.norm.dim; ++i) cols.push_back("s" + std::to_string(i));
  for (int i = 0; i < sc.norm.dim; ++i) cols.push_back("t" + std::to_string(i));
  for (const char* c : {"unique", "facet", "mixed", "kappa_bar", "spread", "quasi_isotropic"})
    cols.push_back(c);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<std::string>> prof_rows;

  for (size_t k = 0; k < sc.directions.size(); ++k) {
    Vec shat = unit(sc.directions[k]);
    double N = evaluate_norm(sc.norm, shat);
    DualVector dual = dual_vector(sc.norm, shat);
    IsotropyProfile prof = fit_isotropy_profile(sc.norm, shat);

    std::vector<std::string> row = {std::to_string(k), r.fmt(N)};
    for (double c : shat) row.push_back(r.fmt(c));
    for (double c : dual.t) row.push_back(r.fmt(c));
    row.push_back(dual.unique ? "1" : "0");
    row.push_back(prof.facet ? "1" : "0");
    row.push_back(prof.mixed_flat_curved ? "1" : "0");
    row.push_back(r.fmt(prof.kappa_bar));
    row.push_back(r.fmt(prof.exponent_spread));
    row.push_back(prof.quasi_isotropic ? "1" : "0");
    rows.push_back(std::move(row));

    if (sc.norm.dim >= 2) {
      Vec that = unit(dual.t);
      Vec v = tangent_basis(that)[0];
      std::vector<double> taus = logspace(1e-3, 0.3, 28);
      try {
        auto pts = boundary_profile(sc.norm, shat, dual.t, v, taus);
        for (const auto& p : pts)
          prof_rows.push_back({std::to_string(k), r.fmt(p.tau), r.fmt(p.f)});
      } catch (const NumericError&) {
        // profile leaves the parametrized neighborhood for this direction
      }
    }

    json jd;
    jd["s"] = r.vec_json(shat);
    jd["norm"] = r.num(N);
    jd["dual"] = {{"t", r.vec_json(dual.t)},
                  {"unique", dual.unique},
                  {"admissible", dual.admissible},
                  {"residual", r.num(dual.residual)}};
    json jt = json::array();
    for (const auto& tan : prof.tangents)
      jt.push_back({{"v", r.vec_json(tan.v)},
                    {"flat", tan.flat},
                    {"kappa", r.num(tan.kappa)},
                    {"c_lo", r.num(tan.c_lo)},
                    {"c_hi", r.num(tan.c_hi)},
                    {"eps", r.num(tan.eps)},
                    {"points_used", tan.points_used}});
    jd["profile"] = {{"facet", prof.facet},
                     {"mixed_flat_curved", prof.mixed_flat_curved},
                     {"kappa_bar", r.num(prof.kappa_bar)},
                     {"exponent_spread", r.num(prof.exponent_spread)},
                     {"quasi_isotropic", prof.quasi_isotropic},
                     {"tangents", jt}};
    jdirs.push_back(jd);
  }
  out["directions"] = jdirs;

  write_csv(r.file("geometry.csv"), sc.hash, cols, rows);
  if (sc.norm.dim >= 2)
    write_csv(r.file("boundary_profiles.csv"), sc.hash, {"dir", "tau", "f"}, prof_rows);

  if (sc.norm.dim == 2) {
    SvgSeries wulff, ball, duals;
    wulff.label = "Wulff shape";
    ball.label = "unit ball";
    duals.label = "duals";
    duals.color = "#d73a49";
    for (int i = 0; i <= 720; ++i) {
      double th = 2 * M_PI * i / 720;
      Vec u{std::cos(th), std::sin(th)};
      double g = wulff_gauge(sc.norm, u);
      wulff.x.push_back(u[0] / g);
      wulff.y.push_back(u[1] / g);
      double nv = evaluate_norm(sc.norm, u);
      ball.x.push_back(u[0] / nv);
      ball.y.push_back(u[1] / nv);
    }
    for (const auto& jd : jdirs) {
      duals.x.push_back(jd["dual"]["t"][0].get<double>());
      duals.y.push_back(jd["dual"]["t"][1].get<double>());
    }
    write_svg_plot(r.file("wulff.svg"), "Wulff shape and norm ball", "t1 / x1", "t2 / x2",
                   {wulff, ball, duals});
  }

  r.finish("geometry.json", out);
  return r.outcome;
}

RunOutcome run_criterion(const Scenario& sc, const RunContext& rc) {
  Runner r(sc, rc);
  CouplingKernel kern = r.kernel();
  if (sc.export_kernel) save_kernel(r.file("kernel.bin"), kern);

  HypothesesReport hyp = check_condensation_hypotheses(sc.prefactor);
  RadialEnvelope env = radial_envelope(sc.prefactor, sc.norm.dim);
  int d = sc.norm.dim;

  struct Row {
    IsotropyProfile prof;
    DualVector dual;
    XiTildeResult xi;
    double lambda_tilde = 0, threshold = 0, lambda0 = 0;
  };
  std::vector<Row> results(sc.directions.size());
  parallel_for(int(sc.directions.size()), rc.threads, [&](int k) {
    Row& row = results[k];
    Vec shat = unit(sc.directions[k]);
    row.prof = fit_isotropy_profile(sc.norm, shat);
    row.dual = dual_vector(sc.norm, shat);
    row.xi = xi_tilde(kern, row.dual.t, kern.shape.R, row.prof);
    row.lambda_tilde =
        row.xi.verdict == CriterionVerdict::DIVERGENT ? 0.0 : std::min(1.0 / row.xi.value, 1.0);
    row.threshold = d == 1 ? 1.0
                  : (row.prof.facet || row.prof.mixed_flat_curved
                         ? double(d)
                         : 1.0 + (d - 1) * (1.0 - 1.0 / row.prof.kappa_bar));
    if (row.lambda_tilde == 0) {
      row.lambda0 = 0;
    } else if (hyp.a == 1.0) {
      row.lambda0 = row.lambda_tilde / hyp.c;
    } else {
      // sub-multiplicative exponent a < 1: the H2 sum needs psi^a, summed on
      // the box plus a crude radial tail (psi^a is summable on its own)
      long double Sa = 0;
      for (size_t i = 0; i < kern.shape.size; ++i) {
        IVec x = kern.shape.decode(i);
        bool origin = true;
        for (int c : x)
          if (c != 0) origin = false;
        if (origin) continue;
        Vec xv = to_vec(x);
        Sa += std::pow(sc.prefactor.evaluate(xv), hyp.a) *
              std::exp(-surcharge(sc.norm, row.dual.t, xv));
      }
      long double tail = 0;
      for (long L = kern.shape.R + 1; L < kern.shape.R + 3000000L; ++L) {
        double shells = std::pow(2.0 * L + 1, d) - std::pow(2.0 * L - 1, d);
        long double term = shells * std::pow(env.upper(double(L)), hyp.a);
        tail += term;
        if (term < tail * 1e-18 && L > kern.shape.R + 16) break;
      }
      row.lambda0 = double(kern.ZJ / (hyp.c * (Sa + tail)));
    }
  });

  std::vector<std::string> cols = {"dir"};
  for (int i = 0; i < d; ++i) cols.push_back("s" + std::to_string(i));
  for (const char* c : {"verdict", "xi_partial", "xi_value", "lambda_tilde", "kappa_bar",
                        "facet", "threshold_alpha", "lambda0"})
    cols.push_back(c);
  std::vector<std::vector<std::string>> rows;
  json jdirs = json::array();
  for (size_t k = 0; k < results.size(); ++k) {
    const Row& row = results[k];
    Vec shat = unit(sc.directions[k]);
    std::vector<std::string> cr = {std::to_string(k)};
    for (double c : shat) cr.push_back(r.fmt(c));
    cr.push_back(to_string(row.xi.verdict));
    cr.push_back(r.fmt(row.xi.partial));
    cr.push_back(r.fmt(row.xi.value));
    cr.push_back(r.fmt(row.lambda_tilde));
    cr.push_back(r.fmt(row.prof.kappa_bar));
    cr.push_back(row.prof.facet ? "1" : "0");
    cr.push_back(r.fmt(row.threshold));
    cr.push_back(r.fmt(row.lambda0));
    rows.push_back(std::move(cr));

    json jd;
    jd["s"] = r.vec_json(shat);
    jd["verdict"] = to_string(row.xi.verdict);
    jd["xi_partial"] = r.num(row.xi.partial);
    jd["xi_tail_estimate"] = r.num(row.xi.tail_estimate);
    jd["xi_value"] = r.num(row.xi.value);
    jd["lambda_tilde"] = r.num(row.lambda_tilde);
    jd["lambda0"] = r.num(row.lambda0);
    jd["threshold_alpha"] = r.num(row.threshold);
    jd["kappa_bar"] = r.num(row.prof.kappa_bar);
    jd["facet"] = row.prof.facet;
    jd["mixed_flat_curved"] = row.prof.mixed_flat_curved;
    jd["quasi_isotropic"] = row.prof.quasi_isotropic;
    if (!row.xi.note.empty()) jd["note"] = row.xi.note;
    jdirs.push_back(jd);
  }

  json out;
  out["command"] = "criterion";
  out["kernel"] = {{"R", kern.shape.R},
                   {"Z_J", r.num(kern.ZJ)},
                   {"tail_rel", r.num(kern.rel_tail())},
                   {"hash", hex16(kern.hash)}};
  out["hypotheses"] = {{"H1", hyp.H1}, {"H2", hyp.H2}, {"a", r.num(hyp.a)},
                       {"c", r.num(hyp.c)}, {"note", hyp.note}};
  out["directions"] = jdirs;
  write_csv(r.file("criterion.csv"), sc.hash, cols, rows);
  r.finish("criterion.json", out);
  return r.outcome;
}

RunOutcome run_nu_scan(const Scenario& sc, const RunContext& rc) {
  Runner r(sc, rc);
  CouplingKernel kern = r.kernel();
  if (sc.export_kernel) save_kernel(r.file("kernel.bin"), kern);

  std::vector<double> grid;
  if (sc.model == "gff") grid.push_back(sc.effective_lambda());
  else if (!sc.lambda_grid.empty()) grid = sc.lambda_grid;
  else if (sc.lambda > 0) grid.push_back(sc.lambda);
  else
    for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);

  struct DirCurve {
    std::vector<NuEstimate> pts;
    std::string note;
  };
  std::vector<DirCurve> curves(sc.directions.size());
  parallel_for(int(sc.directions.size()), rc.threads, [&](int k) {
    Vec shat = unit(sc.directions[k]);
    IsotropyProfile prof = fit_isotropy_profile(sc.norm, shat);
    for (double l : grid) {
      try {
        curves[k].pts.push_back(nu_via_tilt(kern, l, shat, &prof));
      } catch (const NumericError& e) {
        if (sc.field_R >= 1 && sc.field_K >= 1 && sc.window_hi > sc.window_lo) {
          GreenField f = convolution_series(kern, l, sc.field_R, sc.field_K, r.conv_opts());
          curves[k].pts.push_back(nu_via_series(f, shat, sc.window_lo, sc.window_hi));
          curves[k].note += "tilt solve failed at lambda = " + r.fmt(l) +
                            " (" + e.what() + "); series fallback; ";
        } else {
          throw;
        }
      }
    }
  });

  json jdirs = json::array();
  std::vector<std::vector<std::string>> dir_rows;
  std::vector<SvgSeries> svg;
  for (size_t k = 0; k < curves.size(); ++k) {
    Vec shat = unit(sc.directions[k]);
    double norm_s = evaluate_norm(sc.norm, shat);
    std::vector<std::vector<std::string>> rows;
    SvgSeries series;
    series.label = "dir " + std::to_string(k);
    json jpts = json::array();
    for (size_t i = 0; i < grid.size(); ++i) {
      const NuEstimate& e = curves[k].pts[i];
      Regime reg = point_regime(e, norm_s);
      rows.push_back({r.fmt(grid[i]), r.fmt(e.nu), to_string(e.method), to_string(reg)});
      series.x.push_back(grid[i]);
      series.y.push_back(e.nu);
      json jp;
      jp["lambda"] = r.num(grid[i]);
      jp["nu"] = r.num(e.nu);
      jp["method"] = to_string(e.method);
      jp["regime"] = to_string(reg);
      jp["uncertainty"] = r.num(e.uncertainty);
      jp["margin_rel"] = r.num(e.margin_rel);
      jp["saturated"] = e.saturated;
      if (!e.note.empty()) jp["note"] = e.note;
      jpts.push_back(jp);
    }
    write_csv(r.file("nu_curve_" + std::to_string(k) + ".csv"), sc.hash,
              {"lambda", "nu", "method", "regime"}, rows);
    svg.push_back(std::move(series));

    std::vector<std::string> dr = {std::to_string(k)};
    for (double c : shat) dr.push_back(r.fmt(c));
    dir_rows.push_back(std::move(dr));

    json jd;
    jd["s"] = r.vec_json(shat);
    jd["norm"] = r.num(norm_s);
    jd["points"] = jpts;
    if (!curves[k].note.empty()) jd["note"] = curves[k].note;
    jdirs.push_back(jd);
  }
  std::vector<std::string> dcols = {"dir"};
  for (int i = 0; i < sc.norm.dim; ++i) dcols.push_back("s" + std::to_string(i));
  write_csv(r.file("directions.csv"), sc.hash, dcols, dir_rows);
  if (grid.size() > 1) write_svg_plot(r.file("nu_scan.svg"), "inverse correlation length",
                                      "lambda", "nu", svg);

  json out;
  out["command"] = "nu-scan";
  out["model"] = sc.model;
  if (sc.model == "gff")
    out["note"] = "gff runs at lambda = 1/(1 + m^2); nu coincides with the krw "
                  "value at that lambda";
  out["lambda_grid"] = json::array();
  for (double l : grid) out["lambda_grid"].push_back(r.num(l));
  out["directions"] = jdirs;
  r.finish("nu_scan.json", out);
  return r.outcome;
}

RunOutcome run_saturation(const Scenario& sc, const RunContext& rc) {
  Runner r(sc, rc);
  CouplingKernel kern = r.kernel();
  if (sc.export_kernel) save_kernel(r.file("kernel.bin"), kern);

  std::vector<SaturationReport> reports(sc.directions.size());
  parallel_for(int(sc.directions.size()), rc.threads, [&](int k) {
    reports[k] = lambda_sat(kern, sc.directions[k], sc.lambda_grid);
  });

  int d = sc.norm.dim;
  std::vector<std::string> cols = {"dir"};
  for (int i = 0; i < d; ++i) cols.push_back("s" + std::to_string(i));
  for (const char* c : {"verdict", "xi_value", "lambda_tilde", "lambda_sat",
                        "lambda_sat_exact", "has_exact"})
    cols.push_back(c);
  std::vector<std::vector<std::string>> rows;
  json jdirs = json::array();
  SvgSeries sat_curve;

  for (size_t k = 0; k < reports.size(); ++k) {
    const SaturationReport& rep = reports[k];
    std::vector<std::string> row = {std::to_string(k)};
    for (double c : rep.s) row.push_back(r.fmt(c));
    row.push_back(to_string(rep.verdict));
    row.push_back(r.fmt(rep.xi_value));
    row.push_back(r.fmt(rep.lambda_tilde));
    row.push_back(r.fmt(rep.lambda_sat));
    row.push_back(rep.has_exact ? r.fmt(rep.lambda_sat_exact) : "");
    row.push_back(rep.has_exact ? "1" : "0");
    rows.push_back(std::move(row));

    std::vector<std::vector<std::string>> crow;
    for (const CurvePoint& p : rep.curve)
      crow.push_back({r.fmt(p.lambda), r.fmt(p.nu), to_string(p.method), to_string(p.regime)});
    write_csv(r.file("sat_curve_" + std::to_string(k) + ".csv"), sc.hash,
              {"lambda", "nu", "method", "regime"}, crow);

    json jd;
    jd["s"] = r.vec_json(rep.s);
    jd["verdict"] = to_string(rep.verdict);
    jd["xi_value"] = r.num(rep.xi_value);
    jd["lambda_tilde"] = r.num(rep.lambda_tilde);
    jd["lambda_sat"] = r.num(rep.lambda_sat);
    if (rep.has_exact) jd["lambda_sat_exact"] = r.num(rep.lambda_sat_exact);
    jd["assumption"] = rep.assumption;
    if (!rep.note.empty()) jd["note"] = rep.note;
    json jc = json::array();
    for (const CurvePoint& p : rep.curve)
      jc.push_back({{"lambda", r.num(p.lambda)},
                    {"nu", r.num(p.nu)},
                    {"method", to_string(p.method)},
                    {"regime", to_string(p.regime)}});
    jd["curve"] = jc;
    jdirs.push_back(jd);

    if (d == 2) {
      sat_curve.x.push_back(std::atan2(rep.s[1], rep.s[0]));
      sat_curve.y.push_back(rep.lambda_tilde);
    }
  }

  write_csv(r.file("saturation.csv"), sc.hash, cols, rows);
  if (d == 2 && reports.size() >= 3) {
    sat_curve.label = "lambda_tilde";
    write_svg_plot(r.file("saturation.svg"), "saturation threshold by direction",
                   "angle (rad)", "lambda_sat", {sat_curve});
  } else if (!reports.empty() && !reports[0].curve.empty()) {
    SvgSeries nu_curve;
    nu_curve.label = "nu(lambda)";
    for (const CurvePoint& p : reports[0].curve) {
      nu_curve.x.push_back(p.lambda);
      nu_curve.y.push_back(p.nu);
    }
    write_svg_plot(r.file("saturation.svg"), "saturation plateau", "lambda", "nu", {nu_curve});
  }

  json out;
  out["command"] = "saturation";
  out["kernel"] = {{"R", kern.shape.R}, {"Z_J", r.num(kern.ZJ)}, {"hash", hex16(kern.hash)}};
  out["assumption"] = reports.empty() ? "" : reports[0].assumption;
  out["directions"] = jdirs;
  r.finish("saturation.json", out);
  return r.outcome;
}

RunOutcome run_prefactor(const Scenario& sc, const RunContext& rc) {
  Runner r(sc, rc);
  CouplingKernel kern = r.kernel();
  if (sc.export_kernel) save_kernel(r.file("kernel.bin"), kern);

  double lambda = sc.effective_lambda();
  GreenField field = convolution_series(kern, lambda, sc.field_R, sc.field_K, r.conv_opts());
  if (sc.model == "gff") field = gff_green(field, lambda);

  json jdirs = json::array();
  std::vector<std::vector<std::string>> prof_rows;
  std::vector<SvgSeries> ratio_svg;

  for (size_t k = 0; k < sc.directions.size(); ++k) {
    Vec shat = unit(sc.directions[k]);
    NuEstimate nu_s = nu_via_series(field, shat, sc.window_lo, sc.window_hi);
    json jtilt;
    try {
      NuEstimate nu_t = nu_via_tilt(kern, lambda, shat);
      jtilt = {{"nu", r.num(nu_t.nu)},
               {"saturated", nu_t.saturated},
               {"uncertainty", r.num(nu_t.uncertainty)}};
    } catch (const NumericError& e) {
      jtilt = {{"error", e.what()}};
    }
    PrefactorFit fit = oz_exponent_fit(field, kern, shat, sc.window_lo, sc.window_hi, nu_s.nu);
    RatioSequence ratio = prefactor_ratio(field, kern, shat, sc.window_lo, sc.window_hi);
    int pn = sc.probe_n > 0 ? sc.probe_n : sc.window_hi;
    CondensationStat giant =
        giant_step_mass(kern, lambda, shat, pn, sc.rho_cut, sc.field_R, sc.field_K,
                        r.conv_opts());
    StepLawCheck law = step_law_check(kern, lambda, shat);

    SvgSeries series;
    series.label = "dir " + std::to_string(k);
    for (size_t i = 0; i < ratio.r.size(); ++i) {
      prof_rows.push_back({std::to_string(k), r.fmt(ratio.r[i]), r.fmt(ratio.log_ratio[i])});
      series.x.push_back(ratio.r[i]);
      series.y.push_back(ratio.log_ratio[i]);
    }
    ratio_svg.push_back(std::move(series));

    json jd;
    jd["s"] = r.vec_json(shat);
    jd["nu_series"] = {{"nu", r.num(nu_s.nu)},
                       {"nu_plain", r.num(nu_s.nu_plain)},
                       {"nu_upper", r.num(nu_s.nu_upper)},
                       {"rho", r.num(nu_s.rho)},
                       {"uncertainty", r.num(nu_s.uncertainty)},
                       {"residual_rms", r.num(nu_s.residual_rms)},
                       {"points", nu_s.points}};
    if (!nu_s.note.empty()) jd["nu_series"]["note"] = nu_s.note;
    jd["nu_tilt"] = jtilt;
    jd["oz_fit"] = {{"rho", r.num(fit.rho)},
                    {"stderr_rho", r.num(fit.stderr_rho)},
                    {"rho_oz", r.num(fit.rho_oz)},
                    {"residual_rms", r.num(fit.residual_rms)},
                    {"classification", fit.classification}};
    if (!fit.note.empty()) jd["oz_fit"]["note"] = fit.note;
    jd["ratio"] = {{"spread", r.num(ratio.spread)},
                   {"slope", r.num(ratio.slope)},
                   {"rate_gap", r.num(ratio.rate_gap)},
                   {"bounded", ratio.bounded}};
    jd["giant_step"] = {{"mass", r.num(giant.mass)},
                        {"cutoff", r.num(giant.cutoff)},
                        {"g_full", r.num(giant.g_full)},
                        {"g_small", r.num(giant.g_small)}};
    if (!giant.note.empty()) jd["giant_step"]["note"] = giant.note;
    jd["step_law"] = {{"applicable", law.applicable},
                      {"sum", r.num(law.sum)},
                      {"deviation", r.num(law.deviation)},
                      {"drift_speed", r.num(law.drift_speed)}};
    if (!law.note.empty()) jd["step_law"]["note"] = law.note;
    jdirs.push_back(jd);
  }

  write_csv(r.file("prefactor_profile.csv"), sc.hash, {"dir", "r", "log_ratio"}, prof_rows);
  write_svg_plot(r.file("prefactor.svg"), "log G - log J along the ray", "r", "log ratio",
                 ratio_svg);

  json out;
  out["command"] = "prefactor";
  out["model"] = sc.model;
  out["lambda"] = r.num(lambda);
  out["field"] = {{"R", field.R},
                  {"K", field.K},
                  {"K_effective", field.K_effective},
                  {"separable", field.separable_used},
                  {"tail_bound", r.num(field.tail_bound)}};
  out["directions"] = jdirs;
  r.finish("prefactor.json", out);
  return r.outcome;
}

RunOutcome run_report(const Scenario& sc, const RunContext& rc) {
  Runner r(sc, rc);
  json out;
  out["command"] = "report";

  RunOutcome g = run_geometry(sc, rc);
  out["geometry"] = json::parse(g.summary_json);
  RunOutcome c = run_criterion(sc, rc);
  out["criterion"] = json::parse(c.summary_json);
  RunOutcome s = run_saturation(sc, rc);
  out["saturation"] = json::parse(s.summary_json);
  for (auto& o : {&g, &c, &s})
    r.outcome.files.insert(r.outcome.files.end(), o->files.begin(), o->files.end());

  bool with_field = sc.field_R >= 1 && sc.field_K >= 1 && sc.window_hi > sc.window_lo &&
                    sc.effective_lambda() > 0 && sc.effective_lambda() < 1;
  if (with_field) {
    RunOutcome p = run_prefactor(sc, rc);
    out["prefactor"] = json::parse(p.summary_json);
    r.outcome.files.insert(r.outcome.files.end(), p.files.begin(), p.files.end());
  }

  r.finish("report.json", out);
  return r.outcome;
}

}  // namespace

RunOutcome run_command(const std::string& command, const Scenario& sc, const RunContext& ctx) {
  sc.validate_for(command);
  if (command == "geometry") return run_geometry(sc, ctx);
  if (command == "criterion") return run_criterion(sc, ctx);
  if (command == "nu-scan") return run_nu_scan(sc, ctx);
  if (command == "saturation") return run_saturation(sc, ctx);
  if (command == "prefactor") return run_prefactor(sc, ctx);
  if (command == "report") return run_report(sc, ctx);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace corrlen
