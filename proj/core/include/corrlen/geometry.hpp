#pragma once

#include <limits>
#include <string>
#include <vector>

#include "corrlen/mathutil.hpp"

namespace corrlen {

// Norm conventions.  All families define a norm on R^d invariant under
// coordinate permutations and sign flips (the lattice symmetries); validate()
// rejects parameter sets that break this.  The unit ball is U = {|x| <= 1},
// the Wulff shape is W = {t : t.x <= |x| for all x}.
enum class NormFamily { EllP, WeightedEllP, Polyhedral, CompositeArcFacet };

struct NormSpec {
  int dim = 0;
  NormFamily family = NormFamily::EllP;
  // EllP / WeightedEllP exponent, p >= 1; infinity() selects the max norm
  // (EllP only: a weighted max norm is not expressible in this family).
  double p = 2.0;
  // WeightedEllP: |x| = (sum w_i |x_i|^p)^{1/p}, w_i > 0 all equal for d >= 2
  // (unequal weights break permutation symmetry); in d = 1 this is the scaled
  // norm |x| = w^{1/p} |x|.
  std::vector<double> weights;
  // Polyhedral (dim 2 only): unit ball = convex hull of `vertices`, a finite
  // set closed under sign flips and coordinate swap.
  std::vector<Vec> vertices;
  // CompositeArcFacet (dim 2 only): unit ball = [-1/2,1/2]^2 + B(0,1/2),
  // four facets joined by quarter-circle arcs of radius 1/2.  No parameters.

  void validate() const;
  std::string cache_key() const;  // canonical serialization, feeds hashes
};

NormSpec make_ell_p(int dim, double p);
NormSpec make_weighted_ell_p(int dim, double p, std::vector<double> weights);
NormSpec make_polyhedral(std::vector<Vec> vertices);
NormSpec make_composite_arc_facet();

double evaluate_norm(const NormSpec& spec, const Vec& x);
double evaluate_norm(const NormSpec& spec, const IVec& x);

// Dual vector t of a direction s: t.s = |s| with t in the Wulff shape
// boundary.  For smooth points t is the gradient of the norm; at kinks the
// normal cone is detected and its centroid returned (a non-extremal, hence
// admissible, element).  `unique` is false when the cone is nontrivial,
// i.e. when the Wulff shape has a facet with normal s.
struct DualVector {
  Vec t;
  bool unique = true;
  bool admissible = true;
  // max over probed unit directions of t.u - |u| (should be <= ~1e-12)
  double residual = 0;
};

DualVector dual_vector(const NormSpec& spec, const Vec& s);
// Finite-difference route, used as an independent check of the closed forms.
DualVector dual_vector_numeric(const NormSpec& spec, const Vec& s);

// Surcharge s_t(x) = |x| - t.x (>= 0 for t in the Wulff shape).  Negatives
// down to -1e-12 are rounding and clamp to zero; anything lower throws.
struct SurchargeDetail {
  double value = 0;
  double raw = 0;
  bool clamped = false;
};
SurchargeDetail surcharge_detail(const NormSpec& spec, const Vec& t, const Vec& x);
double surcharge(const NormSpec& spec, const Vec& t, const Vec& x);
double surcharge(const NormSpec& spec, const Vec& t, const IVec& x);

// Local boundary parametrization near s0 = s/|s|: the point
// s0 + tau v - f(tau) that lies on the unit sphere of the norm, with that the
// Euclidean-unit dual direction and v a tangent unit vector (v.t = 0).
// Solved by bisection; throws NumericError when tau leaves the neighborhood
// where the parametrization brackets.
struct ProfilePoint {
  double tau = 0;
  double f = 0;
};
std::vector<ProfilePoint> boundary_profile(const NormSpec& spec, const Vec& s, const Vec& t,
                                           const Vec& v, const std::vector<double>& taus);

// Power-law fit of one tangent direction: f(tau) ~ c tau^kappa on the sampled
// window, or flat (f identically zero at resolution) on a facet.
struct TangentFit {
  Vec v;
  bool flat = false;
  double kappa = 0;
  double c_lo = 0, c_hi = 0;  // bounds on f/g over the sampled window
  double eps = 0;             // neighborhood half-width that bracketed
  int points_used = 0;
};

struct IsotropyProfile {
  Vec s;  // Euclidean-unit direction
  Vec t;  // dual vector
  std::vector<TangentFit> tangents;
  bool facet = false;            // all tangents flat: s0 interior to a facet
  double kappa_bar = 0;          // median exponent over curved tangents
  double exponent_spread = 0;    // max - min curved exponent
  bool mixed_flat_curved = false;
  bool quasi_isotropic = false;
};

struct IsotropyOptions {
  int n_taus = 22;
  double f_floor = 1e-13;    // below this f is noise
  double flat_tol = 1e-12;   // profile counts as flat below this
  double f_cap = 0.05;       // fit window keeps f below this
  double spread_tol = 0.05;  // quasi-isotropy exponent spread tolerance
};

IsotropyProfile fit_isotropy_profile(const NormSpec& spec, const Vec& s,
                                     const IsotropyOptions& opt = {});

// Orthonormal basis of the tangent space at the dual direction (normal that).
std::vector<Vec> tangent_basis(const Vec& that);

// max over unit directions u of t.u / |u|; equals 1 exactly when t is on the
// Wulff boundary.  Used for feasibility margins of tilted sums.
double wulff_gauge(const NormSpec& spec, const Vec& t);

}  // namespace corrlen
