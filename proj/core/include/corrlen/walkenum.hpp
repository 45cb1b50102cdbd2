#pragma once

#include "corrlen/couplings.hpp"

#include <cstdint>
#include <vector>

namespace corrlen {

// exhaustive small-box enumeration, the ground truth the convolution engine
// is checked against.  Walks start at the origin, take steps of any length
// inside [-R, R]^d, and are weighted lambda^k prod J(steps).
struct EnumConfig {
  int dim = 1;
  int R = 2;
  int max_length = 4;
  double lambda = 0.5;
  double budget = 1e8;  // cap on sum_{k<=K} (N-1)^k projected node visits
};

struct EnumResult {
  BoxShape shape;
  std::vector<double> G;  // per-endpoint weighted walk sums, empty walk included
  std::uint64_t nodes = 0;
  int max_length = 0;

  double G_at(const IVec& x) const;
};

EnumResult enumerate_krw(const CouplingKernel& kernel, const EnumConfig& cfg);

// same enumeration restricted to self-avoiding walks; site-wise dominated by
// the killed walk sum
EnumResult enumerate_saw(const CouplingKernel& kernel, const EnumConfig& cfg);

}  // namespace corrlen
