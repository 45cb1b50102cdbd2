#include "corrlen/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace corrlen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// distinct lattice points [n s] for n in [n_lo, n_hi], with both field and
// kernel coverage checked up front
struct RayPoints {
  std::vector<IVec> x;
  std::vector<double> r;
};

RayPoints ray_points(const GreenField& field, const CouplingKernel& kernel, const Vec& shat,
                     int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi <= n_lo) throw ConfigError("ray window: need 1 <= n_lo < n_hi");
  RayPoints out;
  std::map<size_t, IVec> seen;
  int d = field.dim;
  for (int n = n_lo; n <= n_hi; ++n) {
    IVec x(d);
    for (int i = 0; i < d; ++i) x[i] = int(std::llround(n * shat[i]));
    if (!field.shape.contains(x)) throw ConfigError("ray window leaves the computed box");
    if (!kernel.shape.contains(x)) throw ConfigError("ray window leaves the kernel box");
    seen.emplace(field.shape.index(x), x);
  }
  for (auto& [idx, x] : seen) {
    double r2 = 0;
    for (int c : x) r2 += double(c) * c;
    out.x.push_back(x);
    out.r.push_back(std::sqrt(r2));
  }
  return out;
}

}  // namespace

PrefactorFit oz_exponent_fit(const GreenField& field, const CouplingKernel& kernel,
                             const Vec& s, int n_lo, int n_hi, double nu) {
  Vec shat = unit(s);
  RayPoints pts = ray_points(field, kernel, shat, n_lo, n_hi);

  PrefactorFit fit;
  fit.rho_oz = (field.dim - 1) / 2.0;

  // condensation screen first: bounded G/J means the correction is not a
  // power law at all and the rho fit below would be meaningless
  RatioSequence ratio = prefactor_ratio(field, kernel, s, n_lo, n_hi);
  if (ratio.bounded) {
    fit.classification = "CONDENSED";
    fit.note = "G tracks J along the ray (bounded ratio); no OZ correction";
    return fit;
  }

  std::vector<double> lr, y;
  for (size_t i = 0; i < pts.x.size(); ++i) {
    double lg = field.logG[field.shape.index(pts.x[i])];
    if (!std::isfinite(lg))
      throw NumericError("oz_exponent_fit: G underflowed inside the window");
    lr.push_back(std::log(pts.r[i]));
    y.push_back(lg + nu * pts.r[i]);  // residual decay after removing e^{-nu r}
  }
  if (lr.size() < 5) throw ConfigError("oz_exponent_fit: fewer than 5 distinct points");

  LinFit lf = linear_fit(lr, y);
  fit.rho = lf.slope;
  fit.stderr_rho = lf.stderr_slope;
  fit.residual_rms = lf.residual_rms;
  fit.points = int(lr.size());
  if (lf.residual_rms > 0.05) {
    fit.classification = "INCONCLUSIVE";
    fit.note = "large residuals: window too short or nu off";
  } else if (std::abs(fit.rho + fit.rho_oz) < 0.15) {
    fit.classification = "OZ";
  } else {
    fit.classification = "INCONCLUSIVE";
    fit.note = "power-law correction off the OZ value";
  }
  return fit;
}

RatioSequence prefactor_ratio(const GreenField& field, const CouplingKernel& kernel,
                              const Vec& s, int n_lo, int n_hi) {
  Vec shat = unit(s);
  RayPoints pts = ray_points(field, kernel, shat, n_lo, n_hi);

  RatioSequence seq;
  for (size_t i = 0; i < pts.x.size(); ++i) {
    double lg = field.logG[field.shape.index(pts.x[i])];
    double lj = kernel.logJ[kernel.shape.index(pts.x[i])];
    if (!std::isfinite(lg))
      throw NumericError("prefactor_ratio: G underflowed inside the window");
    seq.r.push_back(pts.r[i]);
    seq.log_ratio.push_back(lg - lj);
  }
  if (seq.r.size() < 3) throw ConfigError("prefactor_ratio: fewer than 3 distinct points");

  double mn = kInf, mx = -kInf;
  std::vector<double> lr;
  for (size_t i = 0; i < seq.r.size(); ++i) {
    mn = std::min(mn, seq.log_ratio[i]);
    mx = std::max(mx, seq.log_ratio[i]);
    lr.push_back(std::log(seq.r[i]));
  }
  seq.spread = mx - mn;
  seq.slope = linear_fit(lr, seq.log_ratio).slope;
  seq.rate_gap = linear_fit(seq.r, seq.log_ratio).slope;
  seq.bounded = seq.spread < std::log(10.0) && std::abs(seq.rate_gap) <= 0.05;
  return seq;
}

CondensationStat giant_step_mass(const CouplingKernel& kernel, double lambda, const Vec& s,
                                 int n, double rho_cut, int R, int K,
                                 const ConvolutionOptions& opts) {
  if (n < 1) throw ConfigError("giant_step_mass: n >= 1");
  if (!(rho_cut > 0 && rho_cut <= 1)) throw ConfigError("giant_step_mass: rho_cut in (0, 1]");
  Vec shat = unit(s);
  int d = kernel.shape.dim;

  CondensationStat st;
  st.x.resize(d);
  for (int i = 0; i < d; ++i) st.x[i] = int(std::llround(n * shat[i]));
  st.cutoff = rho_cut * evaluate_norm(kernel.norm, st.x);

  GreenField full = convolution_series(kernel, lambda, R, K, opts);
  ConvolutionOptions masked = opts;
  masked.engine = ConvolutionOptions::Engine::Auto;  // cap forces the direct engine
  masked.step_norm_cap = st.cutoff;
  GreenField small = convolution_series(kernel, lambda, R, K, masked);

  double lg_full = full.logG_at(st.x);
  double lg_small = small.logG_at(st.x);
  if (!std::isfinite(lg_full))
    throw NumericError("giant_step_mass: G underflowed at the probe point");
  st.g_full = full.G_at(st.x);
  st.g_small = small.G_at(st.x);
  st.mass = std::isfinite(lg_small) ? 1.0 - std::exp(lg_small - lg_full) : 1.0;
  st.mass = std::clamp(st.mass, 0.0, 1.0);
  if (full.tail_bound > 1e-12 * st.g_full)
    st.note = "length truncation not negligible at the probe point";
  return st;
}

StepLawCheck step_law_check(const CouplingKernel& kernel, double lambda, const Vec& s) {
  StepLawCheck chk;
  NuEstimate est = nu_via_tilt(kernel, lambda, s);
  if (est.saturated) {
    chk.note = "tilt saturates at the Wulff boundary: no interior maximizer, "
               "the step law is undefined";
    return chk;
  }
  Vec u = unit(est.t_star);
  double c = tilt_box_root(kernel, lambda, u);
  if (!std::isfinite(c)) {
    chk.note = "no interior root along the tilt direction";
    return chk;
  }
  chk.applicable = true;
  chk.t_star = scaled(u, c);

  int d = kernel.shape.dim;
  chk.mean_step.assign(d, 0.0);
  long double sum = 0;
  for (size_t i = 0; i < kernel.shape.size; ++i) {
    if (!std::isfinite(kernel.logJ[i])) continue;
    IVec y = kernel.shape.decode(i);
    double w = lambda * std::exp(kernel.logJ[i] + dot(chk.t_star, y));
    sum += w;
    for (int j = 0; j < d; ++j) chk.mean_step[j] += w * y[j];
  }
  chk.sum = double(sum);
  chk.deviation = std::abs(chk.sum - 1.0);
  for (int j = 0; j < d; ++j) chk.mean_step[j] /= chk.sum;
  chk.drift_speed = std::sqrt(dot(chk.mean_step, chk.mean_step));
  return chk;
}

}  // namespace corrlen
