#include "corrlen/walkenum.hpp"

#include <cmath>
#include <string>

namespace corrlen {

double EnumResult::G_at(const IVec& x) const {
  if (!shape.contains(x)) throw ConfigError("EnumResult: site outside box");
  return G[shape.index(x)];
}

namespace {

struct Enumerator {
  const CouplingKernel& kernel;
  const EnumConfig& cfg;
  BoxShape box;
  // per-site flat accumulation over up to fanout^K paths; long double keeps
  // the summation error below the 1e-12 cross-route agreement bar
  std::vector<long double> G;
  std::vector<char> visited;
  std::uint64_t nodes = 0;
  bool saw;

  Enumerator(const CouplingKernel& k, const EnumConfig& c, bool self_avoiding)
      : kernel(k), cfg(c), box(c.dim, c.R), saw(self_avoiding) {
    if (c.dim != k.shape.dim) throw ConfigError("enumerate: dimension mismatch");
    if (c.max_length < 0) throw ConfigError("enumerate: max_length >= 0");
    if (k.shape.R < 2 * c.R)
      throw ConfigError("enumerate: kernel box must cover radius 2R");
    double projected = 0, layer = 1;
    double fanout = double(box.size) - 1;
    for (int k2 = 1; k2 <= c.max_length; ++k2) {
      layer *= fanout;
      projected += layer;
      if (projected > c.budget)
        throw BudgetError("enumerate: projected node count " + std::to_string(projected) +
                          " exceeds budget at length " + std::to_string(k2));
    }
    G.assign(box.size, 0.0);
    visited.assign(box.size, 0);
  }

  void dfs(const IVec& site, int length, double weight) {
    if (length == cfg.max_length) return;
    int d = cfg.dim;
    IVec z(d, -cfg.R);
    for (;;) {
      bool same = true;
      for (int i = 0; i < d; ++i)
        if (z[i] != site[i]) same = false;
      if (!same) {
        size_t zi = box.index(z);
        if (!saw || !visited[zi]) {
          IVec diff(d);
          for (int i = 0; i < d; ++i) diff[i] = z[i] - site[i];
          double j = kernel.J[kernel.shape.index(diff)];
          if (j > 0) {
            double w = weight * cfg.lambda * j;
            ++nodes;
            G[zi] += w;
            if (saw) visited[zi] = 1;
            dfs(z, length + 1, w);
            if (saw) visited[zi] = 0;
          }
        }
      }
      int i = 0;
      for (; i < d; ++i) {
        if (z[i] < cfg.R) {
          ++z[i];
          break;
        }
        z[i] = -cfg.R;
      }
      if (i == d) break;
    }
  }

  EnumResult run() {
    IVec origin(cfg.dim, 0);
    G[box.index(origin)] = 1.0;  // empty walk
    if (saw) visited[box.index(origin)] = 1;
    dfs(origin, 0, 1.0);
    EnumResult res;
    res.shape = box;
    res.G.assign(G.begin(), G.end());
    res.nodes = nodes;
    res.max_length = cfg.max_length;
    return res;
  }
};

}  // namespace

EnumResult enumerate_krw(const CouplingKernel& kernel, const EnumConfig& cfg) {
  return Enumerator(kernel, cfg, false).run();
}

EnumResult enumerate_saw(const CouplingKernel& kernel, const EnumConfig& cfg) {
  return Enumerator(kernel, cfg, true).run();
}

}  // namespace corrlen
