#include "corrlen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace corrlen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_inf_p(double p) { return std::isinf(p); }

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// dihedral images of x under sign flips and coordinate swap (d = 2)
std::vector<Vec> square_symmetry_orbit(const Vec& v) {
  std::vector<Vec> out;
  for (int sw = 0; sw < 2; ++sw)
    for (int s1 = -1; s1 <= 1; s1 += 2)
      for (int s2 = -1; s2 <= 1; s2 += 2) {
        Vec w = sw ? Vec{v[1], v[0]} : v;
        w[0] *= s1;
        w[1] *= s2;
        out.push_back(w);
      }
  return out;
}

bool close_vec(const Vec& a, const Vec& b, double tol) {
  for (size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

// vertices sorted by polar angle, for the d = 2 polyhedral gauge
std::vector<Vec> poly_sorted(const NormSpec& spec) {
  std::vector<Vec> v = spec.vertices;
  std::sort(v.begin(), v.end(), [](const Vec& a, const Vec& b) {
    return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
  });
  return v;
}

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

double poly_gauge(const std::vector<Vec>& sorted, double x0, double x1) {
  if (x0 == 0 && x1 == 0) return 0;
  const size_t n = sorted.size();
  double th = std::atan2(x1, x0);
  // find the sector [v_i, v_{i+1}) containing direction th
  size_t lo = 0, hi = n;  // first vertex with angle > th, via binary search
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (std::atan2(sorted[mid][1], sorted[mid][0]) <= th) lo = mid + 1; else hi = mid;
  }
  size_t j = lo % n;
  size_t i = (j + n - 1) % n;
  const Vec& vi = sorted[i];
  const Vec& vj = sorted[j];
  double det = cross2(vi, vj);
  Vec x{x0, x1};
  double a = cross2(x, vj) / det;
  double b = cross2(vi, x) / det;
  return a + b;
}

double composite_gauge(double x0, double x1) {
  double a = std::max(std::abs(x0), std::abs(x1));
  double b = std::min(std::abs(x0), std::abs(x1));
  if (2 * b <= a) return a;
  return 2 * (a + b - std::sqrt(2 * a * b));
}

double ellp_core(const double* x, int d, double p, const double* w) {
  double m = 0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(x[i]));
  if (m == 0) return 0;
  if (is_inf_p(p)) return m;
  if (p == 1) {
    double s = 0;
    for (int i = 0; i < d; ++i) s += (w ? w[i] : 1.0) * std::abs(x[i]);
    return s;
  }
  if (p == 2 && !w) {
    double s = 0;
    for (int i = 0; i < d; ++i) {
      double u = x[i] / m;
      s += u * u;
    }
    return m * std::sqrt(s);
  }
  double s = 0;
  for (int i = 0; i < d; ++i) {
    double u = std::abs(x[i]) / m;
    if (u > 0) s += (w ? w[i] : 1.0) * std::pow(u, p);
  }
  return m * std::pow(s, 1.0 / p);
}

double eval_impl(const NormSpec& spec, const double* x) {
  switch (spec.family) {
    case NormFamily::EllP:
      return ellp_core(x, spec.dim, spec.p, nullptr);
    case NormFamily::WeightedEllP:
      return ellp_core(x, spec.dim, spec.p, spec.weights.data());
    case NormFamily::Polyhedral:
      return poly_gauge(poly_sorted(spec), x[0], x[1]);
    case NormFamily::CompositeArcFacet:
      return composite_gauge(x[0], x[1]);
  }
  throw ConfigError("evaluate_norm: unknown family");
}

}  // namespace

void NormSpec::validate() const {
  if (dim < 1 || dim > 4) throw ConfigError("NormSpec: need 1 <= dim <= 4");
  switch (family) {
    case NormFamily::EllP:
      if (!(p >= 1)) throw ConfigError("NormSpec: ell_p needs p >= 1");
      break;
    case NormFamily::WeightedEllP: {
      if (!(p >= 1) || is_inf_p(p))
        throw ConfigError("NormSpec: weighted_ell_p needs finite p >= 1");
      if (int(weights.size()) != dim) throw ConfigError("NormSpec: weights size != dim");
      for (double w : weights)
        if (!(w > 0)) throw ConfigError("NormSpec: weights must be positive");
      // permutation symmetry of the lattice forces equal weights for d >= 2
      for (double w : weights)
        if (std::abs(w - weights[0]) > 1e-15 * weights[0])
          throw ConfigError("NormSpec: weighted_ell_p requires equal weights (lattice symmetry)");
      break;
    }
    case NormFamily::Polyhedral: {
      if (dim != 2) throw ConfigError("NormSpec: polyhedral family implemented for dim 2 only");
      if (vertices.size() < 4) throw ConfigError("NormSpec: polyhedral needs >= 4 vertices");
      for (const Vec& v : vertices) {
        if (v.size() != 2) throw ConfigError("NormSpec: polyhedral vertex dim mismatch");
        if (std::abs(v[0]) + std::abs(v[1]) < 1e-12)
          throw ConfigError("NormSpec: polyhedral vertex at origin");
      }
      // closure under the lattice symmetries
      for (const Vec& v : vertices) {
        for (const Vec& img : square_symmetry_orbit(v)) {
          bool found = false;
          for (const Vec& u : vertices)
            if (close_vec(u, img, 1e-12)) { found = true; break; }
          if (!found)
            throw ConfigError("NormSpec: polyhedral vertex set not closed under lattice symmetries");
        }
      }
      // strict convexity of the vertex fan: all vertices extreme, sorted
      std::vector<Vec> v = poly_sorted(*this);
      size_t n = v.size();
      for (size_t i = 0; i < n; ++i) {
        const Vec& a = v[i];
        const Vec& b = v[(i + 1) % n];
        const Vec& c = v[(i + 2) % n];
        if (cross2(a, b) <= 1e-14)
          throw ConfigError("NormSpec: polyhedral vertices with duplicate or reversed angles");
        Vec ab{b[0] - a[0], b[1] - a[1]}, bc{c[0] - b[0], c[1] - b[1]};
        if (cross2(ab, bc) <= 1e-14)
          throw ConfigError("NormSpec: polyhedral vertex set not strictly convex");
      }
      break;
    }
    case NormFamily::CompositeArcFacet:
      if (dim != 2) throw ConfigError("NormSpec: composite_arc_facet is dim 2 only");
      break;
  }
}

std::string NormSpec::cache_key() const {
  std::string k;
  switch (family) {
    case NormFamily::EllP: k = "ell_p"; break;
    case NormFamily::WeightedEllP: k = "weighted_ell_p"; break;
    case NormFamily::Polyhedral: k = "polyhedral"; break;
    case NormFamily::CompositeArcFacet: k = "composite_arc_facet"; break;
  }
  k += ";d=" + std::to_string(dim);
  if (family == NormFamily::EllP || family == NormFamily::WeightedEllP)
    k += ";p=" + fmt_g17(p);
  if (family == NormFamily::WeightedEllP) {
    k += ";w=";
    for (double w : weights) k += fmt_g17(w) + ",";
  }
  if (family == NormFamily::Polyhedral) {
    std::vector<Vec> v = vertices;
    std::sort(v.begin(), v.end());
    k += ";v=";
    for (const Vec& u : v) k += fmt_g17(u[0]) + ":" + fmt_g17(u[1]) + ",";
  }
  return k;
}

NormSpec make_ell_p(int dim, double p) {
  NormSpec s;
  s.dim = dim;
  s.family = NormFamily::EllP;
  s.p = p;
  s.validate();
  return s;
}

NormSpec make_weighted_ell_p(int dim, double p, std::vector<double> weights) {
  NormSpec s;
  s.dim = dim;
  s.family = NormFamily::WeightedEllP;
  s.p = p;
  s.weights = std::move(weights);
  s.validate();
  return s;
}

NormSpec make_polyhedral(std::vector<Vec> vertices) {
  NormSpec s;
  s.dim = 2;
  s.family = NormFamily::Polyhedral;
  s.vertices = std::move(vertices);
  s.validate();
  return s;
}

NormSpec make_composite_arc_facet() {
  NormSpec s;
  s.dim = 2;
  s.family = NormFamily::CompositeArcFacet;
  s.validate();
  return s;
}

double evaluate_norm(const NormSpec& spec, const Vec& x) {
  if (int(x.size()) != spec.dim) throw ConfigError("evaluate_norm: dimension mismatch");
  return eval_impl(spec, x.data());
}

double evaluate_norm(const NormSpec& spec, const IVec& x) {
  Vec v = to_vec(x);
  return eval_impl(spec, v.data());
}

std::vector<Vec> tangent_basis(const Vec& that) {
  int d = int(that.size());
  if (d == 1) return {};
  if (d == 2) return {Vec{-that[1], that[0]}};
  std::vector<Vec> basis;
  for (int i = 0; i < d && int(basis.size()) < d - 1; ++i) {
    Vec v(d, 0.0);
    v[i] = 1.0;
    double c = dot(v, that);
    for (int k = 0; k < d; ++k) v[k] -= c * that[k];
    for (const Vec& b : basis) {
      double cb = dot(v, b);
      for (int k = 0; k < d; ++k) v[k] -= cb * b[k];
    }
    double n = norm2(v);
    if (n > 1e-8) basis.push_back(scaled(v, 1.0 / n));
  }
  if (int(basis.size()) != d - 1) throw NumericError("tangent_basis: degenerate normal");
  return basis;
}

double wulff_gauge(const NormSpec& spec, const Vec& t) {
  int d = spec.dim;
  if (d == 1) {
    Vec one{1.0};
    return std::abs(t[0]) / eval_impl(spec, one.data());
  }
  auto ratio = [&](const Vec& u) {
    double n = eval_impl(spec, u.data());
    return dot(t, u) / n;
  };
  if (d == 2) {
    auto ratio_th = [&](double th) {
      Vec u{std::cos(th), std::sin(th)};
      return ratio(u);
    };
    const int N = 1440;
    double best = -kInf, best_th = 0;
    for (int i = 0; i < N; ++i) {
      double th = 2 * M_PI * i / N;
      double r = ratio_th(th);
      if (r > best) { best = r; best_th = th; }
    }
    double h = 2 * M_PI / N;
    double th = golden_max(ratio_th, best_th - h, best_th + h, 1e-12);
    return std::max(best, ratio_th(th));
  }
  // d == 3: deterministic Fibonacci sphere scan with local golden polish
  const int N = 8192;
  double best = -kInf;
  Vec best_u(3, 0.0);
  const double ga = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < N; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / N;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec u{r * std::cos(ga * i), r * std::sin(ga * i), z};
    double q = ratio(u);
    if (q > best) { best = q; best_u = u; }
  }
  // polish over spherical angles around the best sample
  double th0 = std::acos(std::clamp(best_u[2], -1.0, 1.0));
  double ph0 = std::atan2(best_u[1], best_u[0]);
  double dth = 2.0 / std::sqrt(double(N));
  for (int round = 0; round < 3; ++round) {
    auto f_th = [&](double th) {
      Vec u{std::sin(th) * std::cos(ph0), std::sin(th) * std::sin(ph0), std::cos(th)};
      return ratio(u);
    };
    th0 = golden_max(f_th, th0 - dth, th0 + dth, 1e-11);
    auto f_ph = [&](double ph) {
      Vec u{std::sin(th0) * std::cos(ph), std::sin(th0) * std::sin(ph), std::cos(th0)};
      return ratio(u);
    };
    ph0 = golden_max(f_ph, ph0 - dth, ph0 + dth, 1e-11);
    dth *= 0.25;
  }
  Vec u{std::sin(th0) * std::cos(ph0), std::sin(th0) * std::sin(ph0), std::cos(th0)};
  return std::max(best, ratio(u));
}

namespace {

double probe_residual(const NormSpec& spec, const Vec& t) {
  return std::max(0.0, wulff_gauge(spec, t) - 1.0);
}

DualVector dual_ellp(const NormSpec& spec, const Vec& shat) {
  int d = spec.dim;
  bool weighted = spec.family == NormFamily::WeightedEllP;
  double p = spec.p;
  DualVector out;
  out.t.assign(d, 0.0);
  if (is_inf_p(p)) {
    // dual norm is ell_1; the exposed face is spanned by the max coordinates
    double m = 0;
    for (double v : shat) m = std::max(m, std::abs(v));
    std::vector<int> arg;
    for (int i = 0; i < d; ++i)
      if (std::abs(shat[i]) >= m * (1 - 1e-12)) arg.push_back(i);
    for (int i : arg) out.t[i] = (shat[i] >= 0 ? 1.0 : -1.0) / arg.size();
    out.unique = arg.size() == 1;
    return out;
  }
  if (p == 1) {
    bool zero = false;
    for (int i = 0; i < d; ++i) {
      double w = weighted ? spec.weights[i] : 1.0;
      if (std::abs(shat[i]) < 1e-14) zero = true;
      else out.t[i] = shat[i] > 0 ? w : -w;
    }
    out.unique = !zero;
    return out;
  }
  double N = eval_impl(spec, shat.data());
  for (int i = 0; i < d; ++i) {
    double w = weighted ? spec.weights[i] : 1.0;
    double a = std::abs(shat[i]);
    double g = a == 0 ? 0.0 : w * std::pow(a, p - 1) / std::pow(N, p - 1);
    out.t[i] = shat[i] >= 0 ? g : -g;
  }
  out.unique = true;
  return out;
}

// functional of the polygon edge through vertices a, b: t.a = t.b = 1
Vec edge_functional(const Vec& a, const Vec& b) {
  double det = cross2(a, b);
  if (std::abs(det) < 1e-14) throw NumericError("dual_vector: degenerate polygon edge");
  return Vec{(b[1] - a[1]) / det, (a[0] - b[0]) / det};
}

DualVector dual_polyhedral(const NormSpec& spec, const Vec& shat) {
  std::vector<Vec> v = poly_sorted(spec);
  size_t n = v.size();
  double th = std::atan2(shat[1], shat[0]);
  size_t lo = 0, hi = n;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (std::atan2(v[mid][1], v[mid][0]) <= th) lo = mid + 1; else hi = mid;
  }
  size_t j = lo % n;
  size_t i = (j + n - 1) % n;
  DualVector out;
  // s parallel to a vertex: normal cone spanned by the two adjacent edges
  double cross_i = cross2(v[i], shat);
  double cross_j = cross2(v[j], shat);
  double scale = norm2(shat);
  if (std::abs(cross_i) < 1e-12 * scale || std::abs(cross_j) < 1e-12 * scale) {
    size_t k = std::abs(cross_i) < std::abs(cross_j) ? i : j;
    const Vec& prev = v[(k + n - 1) % n];
    const Vec& next = v[(k + 1) % n];
    Vec t1 = edge_functional(prev, v[k]);
    Vec t2 = edge_functional(v[k], next);
    out.t = Vec{0.5 * (t1[0] + t2[0]), 0.5 * (t1[1] + t2[1])};
    out.unique = false;
    return out;
  }
  out.t = edge_functional(v[i], v[j]);
  out.unique = true;
  return out;
}

DualVector dual_composite(const Vec& shat) {
  double a = std::max(std::abs(shat[0]), std::abs(shat[1]));
  double b = std::min(std::abs(shat[0]), std::abs(shat[1]));
  int ia = std::abs(shat[0]) >= std::abs(shat[1]) ? 0 : 1;
  int ib = 1 - ia;
  DualVector out;
  out.t.assign(2, 0.0);
  if (2 * b <= a) {
    out.t[ia] = shat[ia] >= 0 ? 1.0 : -1.0;
  } else {
    double ga = 2 * (1 - std::sqrt(b / (2 * a)));
    double gb = 2 * (1 - std::sqrt(a / (2 * b)));
    out.t[ia] = shat[ia] >= 0 ? ga : -ga;
    out.t[ib] = shat[ib] >= 0 ? gb : -gb;
  }
  out.unique = true;  // the Wulff shape {|t|_1 + |t|_2 <= 2} is strictly convex
  return out;
}

}  // namespace

DualVector dual_vector(const NormSpec& spec, const Vec& s) {
  spec.validate();
  if (int(s.size()) != spec.dim) throw ConfigError("dual_vector: dimension mismatch");
  Vec shat = unit(s);
  DualVector out;
  switch (spec.family) {
    case NormFamily::EllP:
    case NormFamily::WeightedEllP:
      out = dual_ellp(spec, shat);
      break;
    case NormFamily::Polyhedral:
      out = dual_polyhedral(spec, shat);
      break;
    case NormFamily::CompositeArcFacet:
      out = dual_composite(shat);
      break;
  }
  out.admissible = true;
  if (spec.dim <= 3) out.residual = probe_residual(spec, out.t);
  double err = std::abs(dot(out.t, shat) - eval_impl(spec, shat.data()));
  if (err > 1e-9)
    throw NumericError("dual_vector: duality identity violated, residual " + fmt_g17(err));
  return out;
}

DualVector dual_vector_numeric(const NormSpec& spec, const Vec& s) {
  spec.validate();
  Vec shat = unit(s);
  int d = spec.dim;
  double N = eval_impl(spec, shat.data());
  auto norm_at = [&](const Vec& x) { return eval_impl(spec, x.data()); };
  DualVector out;

  if (d == 1) {
    out.t = Vec{shat[0] >= 0 ? N : -N};
    out.unique = true;
    out.residual = probe_residual(spec, out.t);
    return out;
  }

  auto one_sided = [&](const Vec& v, double h0) {
    // Richardson-extrapolated one-sided derivative of |shat + tau v| at 0+
    auto D = [&](double h) {
      Vec x = shat;
      for (int k = 0; k < d; ++k) x[k] += h * v[k];
      return (norm_at(x) - N) / h;
    };
    return (D(h0) - 6 * D(h0 / 2) + 8 * D(h0 / 4)) / 3.0;
  };

  if (d == 2) {
    Vec v{-shat[1], shat[0]};
    double Dp = one_sided(v, 1e-4);
    Vec mv{-v[0], -v[1]};
    double Dm = -one_sided(mv, 1e-4);
    if (Dp - Dm > 1e-6) {
      // kink: the normal cone is {N shat + c v : c in [Dm, Dp]}
      double c = 0.5 * (Dp + Dm);
      out.t = Vec{N * shat[0] + c * v[0], N * shat[1] + c * v[1]};
      out.unique = false;
      out.residual = probe_residual(spec, out.t);
      return out;
    }
    // smooth: high-order central difference along v
    double h = 1e-3;
    auto g = [&](double tau) {
      Vec x{shat[0] + tau * v[0], shat[1] + tau * v[1]};
      return norm_at(x);
    };
    double c = (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h);
    out.t = Vec{N * shat[0] + c * v[0], N * shat[1] + c * v[1]};
    out.unique = true;
    out.residual = probe_residual(spec, out.t);
    return out;
  }

  // d >= 3: coordinate-wise central differences, smooth points only
  double h = 1e-3;
  Vec t(d, 0.0);
  for (int i = 0; i < d; ++i) {
    auto g = [&](double dx) {
      Vec x = shat;
      x[i] += dx;
      return norm_at(x);
    };
    double fwd = (g(h) - g(0)) / h;
    double bwd = (g(0) - g(-h)) / h;
    if (std::abs(fwd - bwd) > 2e-3)
      throw NumericError("dual_vector_numeric: non-smooth point in d >= 3 needs a closed form");
    t[i] = (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h);
  }
  // Euler relation pins the normal component exactly
  double c = N / dot(t, shat);
  out.t = scaled(t, c);
  out.unique = true;
  if (d <= 3) out.residual = probe_residual(spec, out.t);
  return out;
}

SurchargeDetail surcharge_detail(const NormSpec& spec, const Vec& t, const Vec& x) {
  SurchargeDetail r;
  r.raw = eval_impl(spec, x.data()) - dot(t, x);
  if (r.raw >= 0) {
    r.value = r.raw;
  } else if (r.raw >= -1e-12 * std::max(1.0, std::abs(dot(t, x)))) {
    r.value = 0;
    r.clamped = true;
  } else {
    throw NumericError("surcharge: negative beyond tolerance (t outside the Wulff shape), raw " +
                       fmt_g17(r.raw));
  }
  return r;
}

double surcharge(const NormSpec& spec, const Vec& t, const Vec& x) {
  return surcharge_detail(spec, t, x).value;
}

double surcharge(const NormSpec& spec, const Vec& t, const IVec& x) {
  return surcharge_detail(spec, t, to_vec(x)).value;
}

std::vector<ProfilePoint> boundary_profile(const NormSpec& spec, const Vec& s, const Vec& t,
                                           const Vec& v, const std::vector<double>& taus) {
  spec.validate();
  Vec shat = unit(s);
  double N = eval_impl(spec, shat.data());
  Vec s0 = scaled(shat, 1.0 / N);
  Vec that = unit(t);
  // the tangent direction must be orthogonal to the dual direction
  Vec vv = v;
  double c = dot(vv, that);
  if (std::abs(c) > 1e-9) {
    for (size_t k = 0; k < vv.size(); ++k) vv[k] -= c * that[k];
  }
  vv = unit(vv);

  int d = spec.dim;
  std::vector<ProfilePoint> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    Vec base(d);
    for (int k = 0; k < d; ++k) base[k] = s0[k] + tau * vv[k];
    auto g = [&](double f) {
      Vec x(d);
      for (int k = 0; k < d; ++k) x[k] = base[k] - f * that[k];
      return eval_impl(spec, x.data()) - 1.0;
    };
    double g0 = g(0);
    if (g0 < -1e-10)
      throw NumericError("boundary_profile: start point inside the ball (bad dual?)");
    double fhi = std::max(1e-9, tau * tau);
    const double fcap = 4.0;
    while (g(fhi) > 0) {
      fhi *= 2;
      if (fhi > fcap)
        throw NumericError("boundary_profile: tau outside the parametrized neighborhood");
    }
    double lo = 0, hi = fhi;
    for (int it = 0; it < 120 && hi - lo > 0; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (g(mid) >= 0) lo = mid; else hi = mid;
    }
    double f = 0.5 * (lo + hi);
    if (f < 5e-14) f = 0;
    out.push_back({tau, f});
  }
  return out;
}

IsotropyProfile fit_isotropy_profile(const NormSpec& spec, const Vec& s,
                                     const IsotropyOptions& opt) {
  spec.validate();
  IsotropyProfile prof;
  prof.s = unit(s);
  DualVector dual = dual_vector(spec, prof.s);
  prof.t = dual.t;
  Vec that = unit(dual.t);
  std::vector<Vec> basis = tangent_basis(that);
  if (basis.empty()) {
    // d = 1: the sphere is two points, profile is trivially flat
    prof.facet = true;
    prof.quasi_isotropic = true;
    return prof;
  }
  std::vector<Vec> dirs;
  for (const Vec& b : basis) {
    dirs.push_back(b);
    dirs.push_back(scaled(b, -1.0));
  }

  std::vector<double> kappas;
  for (const Vec& v : dirs) {
    TangentFit fit;
    fit.v = v;
    // expand the neighborhood until the parametrization stops bracketing or
    // the profile leaves the small-f window
    double eps = 0.05;
    double eps_ok = 0;
    while (eps <= 3.3) {
      try {
        auto pr = boundary_profile(spec, s, prof.t, v, {eps});
        eps_ok = eps;
        if (pr[0].f > 0.2) break;
      } catch (const NumericError&) {
        break;
      }
      eps *= 2;
    }
    if (eps_ok == 0)
      throw NumericError("fit_isotropy_profile: no bracketing neighborhood found");
    fit.eps = eps_ok;
    std::vector<double> taus = logspace(std::max(1e-4, eps_ok * 1e-3), eps_ok, opt.n_taus);
    auto pts = boundary_profile(spec, s, prof.t, v, taus);

    // flat test on the lower third of the log range: a facet is flat on an
    // open neighborhood, a curved profile rises out of the noise floor there
    double log_lo = std::log(taus.front()), log_hi = std::log(taus.back());
    double third = std::exp(log_lo + (log_hi - log_lo) / 3.0);
    bool flat = true;
    int nlow = 0;
    for (const auto& q : pts)
      if (q.tau <= third) {
        ++nlow;
        if (q.f > opt.flat_tol) flat = false;
      }
    fit.flat = flat && nlow >= 3;

    if (!fit.flat) {
      std::vector<double> lx, ly;
      for (const auto& q : pts)
        if (q.f >= opt.f_floor && q.f <= opt.f_cap) {
          lx.push_back(std::log(q.tau));
          ly.push_back(std::log(q.f));
        }
      if (lx.size() < 4)
        throw NumericError("fit_isotropy_profile: too few usable profile points");
      LinFit lf = linear_fit(lx, ly);
      fit.kappa = lf.slope;
      fit.points_used = int(lx.size());
      kappas.push_back(fit.kappa);
    }
    prof.tangents.push_back(std::move(fit));
  }

  bool any_flat = false, any_curved = false;
  for (const auto& f : prof.tangents) (f.flat ? any_flat : any_curved) = true;
  prof.facet = any_flat && !any_curved;
  prof.mixed_flat_curved = any_flat && any_curved;
  if (!kappas.empty()) {
    prof.kappa_bar = median(kappas);
    double kmin = *std::min_element(kappas.begin(), kappas.end());
    double kmax = *std::max_element(kappas.begin(), kappas.end());
    prof.exponent_spread = kmax - kmin;
  }
  prof.quasi_isotropic =
      prof.facet || (!prof.mixed_flat_curved && prof.exponent_spread < opt.spread_tol);

  // c bounds against g(tau) = tau^kappa_bar on the sampled window
  if (!prof.facet && !kappas.empty()) {
    for (auto& f : prof.tangents) {
      if (f.flat) continue;
      std::vector<double> taus = logspace(std::max(1e-4, f.eps * 1e-3), f.eps, opt.n_taus);
      auto pts = boundary_profile(spec, s, prof.t, f.v, taus);
      double clo = kInf, chi = 0;
      for (const auto& q : pts) {
        if (q.f < opt.f_floor || q.f > opt.f_cap) continue;
        double ratio = q.f / std::pow(q.tau, prof.kappa_bar);
        clo = std::min(clo, ratio);
        chi = std::max(chi, ratio);
      }
      f.c_lo = std::isfinite(clo) ? clo : 0;
      f.c_hi = chi;
    }
  }
  return prof;
}

}  // namespace corrlen
