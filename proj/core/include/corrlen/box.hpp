#pragma once

#include <cstddef>
#include <cstdlib>

#include "corrlen/mathutil.hpp"

namespace corrlen {

// Row-major index map for the centered lattice box [-R, R]^d.
struct BoxShape {
  int dim = 0;
  int R = 0;
  size_t size = 0;

  BoxShape() = default;
  BoxShape(int d, int radius) : dim(d), R(radius) {
    if (d < 1 || d > 4 || radius < 0) throw ConfigError("BoxShape: need 1 <= dim <= 4, R >= 0");
    size = 1;
    size_t side = 2 * size_t(radius) + 1;
    for (int i = 0; i < d; ++i) size *= side;
  }

  int side() const { return 2 * R + 1; }

  bool contains(const IVec& x) const {
    for (int i = 0; i < dim; ++i)
      if (std::abs(x[i]) > R) return false;
    return true;
  }

  size_t index(const IVec& x) const {
    size_t idx = 0;
    for (int i = 0; i < dim; ++i) idx = idx * side() + size_t(x[i] + R);
    return idx;
  }

  IVec decode(size_t idx) const {
    IVec x(dim);
    for (int i = dim - 1; i >= 0; --i) {
      x[i] = int(idx % side()) - R;
      idx /= side();
    }
    return x;
  }
};

}  // namespace corrlen
