#pragma once

#include "corrlen/greenfn.hpp"

#include <string>
#include <vector>

namespace corrlen {

// post-fit classification of the decay prefactor along a ray.
// OZ means G ~ e^{-nu r} / r^{(d-1)/2}; CONDENSED means G tracks the direct
// coupling J itself (one giant step carries the correlation).
struct PrefactorFit {
  double rho = 0;  // fitted exponent in log G = a - nu r + rho log r
  double stderr_rho = 0;
  double residual_rms = 0;
  int points = 0;
  double rho_oz = 0;  // the reference value (d-1)/2
  std::string classification;  // OZ | CONDENSED | INCONCLUSIVE
  std::string note;
};

PrefactorFit oz_exponent_fit(const GreenField& field, const CouplingKernel& kernel,
                             const Vec& s, int n_lo, int n_hi, double nu);

// ratio G(0, x_n) / J(x_n) along a ray; bounded ratios are the signature of
// the condensation regime past saturation
struct RatioSequence {
  std::vector<double> r;          // Euclidean distances
  std::vector<double> log_ratio;  // log G - log J
  double spread = 0;              // max - min of log_ratio
  double slope = 0;               // d log_ratio / d log r
  double rate_gap = 0;            // d log_ratio / d r, the exponential rate of G/J
  // bounded gates on spread and rate_gap, not on slope: a condensed profile
  // approaches its constant like 1 + c/r, so slope stays near -c/r_mid at any
  // finite window while rate_gap vanishes; in the OZ regime rate_gap ~ 1 - nu/|s|
  bool bounded = false;
  std::string note;
};

RatioSequence prefactor_ratio(const GreenField& field, const CouplingKernel& kernel,
                              const Vec& s, int n_lo, int n_hi);

// weight fraction carried by walks that take at least one step of norm
// >= rho_cut * |x_n|, measured by masking the kernel and re-summing
struct CondensationStat {
  double mass = 0;
  double cutoff = 0;
  IVec x;
  double g_full = 0;
  double g_small = 0;
  std::string note;
};

CondensationStat giant_step_mass(const CouplingKernel& kernel, double lambda, const Vec& s,
                                 int n, double rho_cut, int R, int K,
                                 const ConvolutionOptions& opts = {});

// the tilted step law w(y) = lambda e^{t*.y} J(y) at the optimal interior
// tilt; it must be an exact probability law when the tilt does not saturate
struct StepLawCheck {
  bool applicable = false;
  double sum = 0;
  double deviation = 0;  // |sum - 1|
  Vec t_star;
  Vec mean_step;         // E[y] under w, the ballistic drift
  double drift_speed = 0;  // |E[y]|_2
  std::string note;
};

StepLawCheck step_law_check(const CouplingKernel& kernel, double lambda, const Vec& s);

}  // namespace corrlen
