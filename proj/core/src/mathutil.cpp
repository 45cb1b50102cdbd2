#include "corrlen/mathutil.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>

namespace corrlen {

double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(const Vec& a, const IVec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

Vec scaled(const Vec& a, double c) {
  Vec r(a);
  for (double& v : r) v *= c;
  return r;
}

Vec to_vec(const IVec& x) {
  Vec r(x.size());
  for (size_t i = 0; i < x.size(); ++i) r[i] = x[i];
  return r;
}

Vec unit(const Vec& a) {
  double n = norm2(a);
  if (!(n > 0)) throw NumericError("unit: zero vector");
  return scaled(a, 1.0 / n);
}

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (!(lo > 0) || !(hi > lo) || n < 2) throw NumericError("logspace: bad range");
  std::vector<double> g(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
  return g;
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  if (n != y.size() || n < 2) throw NumericError("linear_fit: need >= 2 points");
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= n; my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw NumericError("linear_fit: degenerate abscissae");
  LinFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n >= 3) {
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      ss += r * r;
    }
    double s2 = ss / (n - 2);
    f.stderr_slope = std::sqrt(s2 / sxx);
    f.stderr_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    f.residual_rms = std::sqrt(ss / n);
  }
  return f;
}

// Normal equations on centered columns; the 3x3 system is tiny and the
// abscissae (n, log n) are well conditioned on the fit windows used here.
LogLinFit linear_log_fit(const std::vector<double>& n, const std::vector<double>& y) {
  size_t m = n.size();
  if (m != y.size() || m < 4) throw NumericError("linear_log_fit: need >= 4 points");
  std::vector<double> l(m);
  for (size_t i = 0; i < m; ++i) {
    if (!(n[i] > 0)) throw NumericError("linear_log_fit: abscissae must be positive");
    l[i] = std::log(n[i]);
  }
  double mn = 0, ml = 0, my = 0;
  for (size_t i = 0; i < m; ++i) { mn += n[i]; ml += l[i]; my += y[i]; }
  mn /= m; ml /= m; my /= m;
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < m; ++i) {
    double u = n[i] - mn, v = l[i] - ml, w = y[i] - my;
    a11 += u * u; a12 += u * v; a22 += v * v;
    b1 += u * w; b2 += v * w;
  }
  double det = a11 * a22 - a12 * a12;
  if (!(std::abs(det) > 1e-12 * a11 * a22)) {
    throw NumericError("linear_log_fit: collinear abscissae, widen the fit window");
  }
  LogLinFit f;
  f.slope_lin = (b1 * a22 - b2 * a12) / det;
  f.slope_log = (a11 * b2 - a12 * b1) / det;
  f.intercept = my - f.slope_lin * mn - f.slope_log * ml;
  double ss = 0;
  for (size_t i = 0; i < m; ++i) {
    double r = y[i] - f.intercept - f.slope_lin * n[i] - f.slope_log * l[i];
    ss += r * r;
  }
  if (m > 3) {
    double s2 = ss / (m - 3);
    f.stderr_lin = std::sqrt(s2 * a22 / det);
    f.stderr_log = std::sqrt(s2 * a11 / det);
  }
  f.residual_rms = std::sqrt(ss / m);
  return f;
}

double bisect_increasing(const std::function<double(double)>& f, double lo, double hi,
                         int iters) {
  double flo = f(lo), fhi = f(hi);
  if (flo > 0 || fhi < 0) throw NumericError("bisect_increasing: root not bracketed");
  for (int i = 0; i < iters && hi - lo > 0; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) <= 0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {
double golden_extremum(const std::function<double(double)>& f, double lo, double hi,
                       double xtol, bool maximize) {
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    bool keep_left = maximize ? (fc > fd) : (fc < fd);
    if (keep_left) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}
}  // namespace

double golden_max(const std::function<double(double)>& f, double lo, double hi, double xtol) {
  return golden_extremum(f, lo, hi, xtol, true);
}
double golden_min(const std::function<double(double)>& f, double lo, double hi, double xtol) {
  return golden_extremum(f, lo, hi, xtol, false);
}

double polylog(double s, double x) {
  if (!(x >= 0 && x < 1)) throw NumericError("polylog: need 0 <= x < 1");
  if (x == 0) return 0;
  double sum = 0, xn = 1;
  for (int n = 1; n < 200000; ++n) {
    xn *= x;
    double term = xn / std::pow(double(n), s);
    sum += term;
    // geometric envelope on the remainder
    if (term / (1 - x) < 1e-17 * sum) break;
  }
  return sum;
}

double zeta(double s) {
  if (!(s > 1)) throw NumericError("zeta: need s > 1");
  return std::riemann_zeta(s);
}

double poly_exp_tail(double alpha, double c, double R) {
  if (c < 0 || R < 1) throw NumericError("poly_exp_tail: bad arguments");
  auto f = [&](double x) { return std::pow(x, -alpha) * std::exp(-c * x); };
  if (c * R > 40) {
    // term ratio <= e^{-c}; the whole tail is below double noise here anyway
    return f(R + 1) / (1 - std::exp(-c));
  }
  // sum_{n>R} f(n) ~ int_{R+1/2}^inf f dx + f'(R+1/2)/24 (midpoint rule).
  double tail;
  double a = R + 0.5;
  if (c == 0) {
    if (!(alpha > 1)) return std::numeric_limits<double>::infinity();
    tail = std::pow(a, 1 - alpha) / (alpha - 1);
  } else {
    // Simpson in u = log(x/a); the substitution keeps the power-law part
    // smooth per panel for every c down to 0.
    double X;
    if (alpha >= 0) {
      X = a + (45.0 + alpha * std::log1p(45.0 / (c * a))) / c;
    } else {
      // growing polynomial factor: the integrand peaks at x = (1 - alpha)/c,
      // so size the range off the peak instead of the lower endpoint
      double m = -alpha;
      double y = 45 + m;
      for (int it = 0; it < 4; ++it) y = 45 + m * (1 + std::log1p(y / std::max(m, 1.0)));
      X = a + y / c;
    }
    double U = std::log(X / a);
    auto g = [&](double u) {
      double x = a * std::exp(u);
      return f(x) * x;
    };
    int panels = 8192;
    double h = U / panels;
    double acc = 0;
    for (int i = 0; i < panels; ++i) {
      double u0 = i * h, u2 = u0 + h, u1 = u0 + 0.5 * h;
      acc += (h / 6) * (g(u0) + 4 * g(u1) + g(u2));
    }
    tail = acc;
  }
  double fp = -(alpha / a + c) * f(a);
  return tail + fp / 24.0;
}

uint64_t fnv1a64(const void* data, size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = 14695981039346656037ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

int median_index(std::vector<double> v) {
  if (v.empty()) throw NumericError("median: empty");
  std::vector<int> idx(v.size());
  for (size_t i = 0; i < v.size(); ++i) idx[i] = int(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  return idx[idx.size() / 2];
}

double median(std::vector<double> v) {
  if (v.empty()) throw NumericError("median: empty");
  std::sort(v.begin(), v.end());
  size_t m = v.size() / 2;
  if (v.size() % 2) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mx;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mx);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace corrlen
