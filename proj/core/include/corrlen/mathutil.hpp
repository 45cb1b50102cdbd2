#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace corrlen {

// Configuration problems (bad scenario, invalid spec parameters).  The CLI
// maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric failures: non-convergence, bracket failures, precision loss.
// The CLI maps these to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resource guard failures (enumeration budget and similar).  Exit code 3.
struct BudgetError : NumericError {
  using NumericError::NumericError;
};

using Vec = std::vector<double>;
using IVec = std::vector<int>;

double dot(const Vec& a, const Vec& b);
double dot(const Vec& a, const IVec& b);
double norm2(const Vec& a);
Vec scaled(const Vec& a, double c);
Vec to_vec(const IVec& x);
// Euclidean-unit copy; throws NumericError on the zero vector.
Vec unit(const Vec& a);

double logaddexp(double a, double b);

// log-spaced grid, n >= 2 points from lo to hi inclusive, lo, hi > 0.
std::vector<double> logspace(double lo, double hi, int n);

struct LinFit {
  double intercept = 0, slope = 0;
  double stderr_slope = 0, stderr_intercept = 0;
  double residual_rms = 0;
};
// Ordinary least squares y = a + b x.  Needs >= 3 points for error bars.
LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct LogLinFit {
  double intercept = 0, slope_lin = 0, slope_log = 0;
  double stderr_lin = 0, stderr_log = 0;
  double residual_rms = 0;
};
// Least squares y = a + b n + c log(n) over integer-valued abscissae n > 0.
LogLinFit linear_log_fit(const std::vector<double>& n, const std::vector<double>& y);

// Root of an increasing function on [lo, hi] with f(lo) <= 0 <= f(hi).
double bisect_increasing(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 200);

// Maximum of a unimodal function on [lo, hi] via golden-section search.
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double xtol = 1e-12);
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double xtol = 1e-12);

// Polylogarithm Li_s(x) = sum_{n>=1} x^n / n^s for x in [0, 1), s real.
// Plain series; geometric convergence for the x = e^{-c} arguments used here.
double polylog(double s, double x);

// Riemann zeta(s) for s > 1.
double zeta(double s);

// sum_{n > R} n^{-alpha} e^{-c n} for alpha >= 0, c >= 0 (not both trivial),
// via midpoint Euler-Maclaurin; relative accuracy ~1e-9 for R >= 100.
double poly_exp_tail(double alpha, double c, double R);

uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);

int median_index(std::vector<double> v);  // index of median element (value copy sorted)
double median(std::vector<double> v);

// Runs fn(i) for i in [0, n) on up to `threads` std::threads.  Exceptions are
// captured and the first one is rethrown after the pool joins.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace corrlen
