#include <benchmark/benchmark.h>

#include <cmath>

#include "corrlen/greenfn.hpp"

using namespace corrlen;

namespace {

PrefactorSpec poly(double alpha) {
  PrefactorSpec p;
  p.family = PrefactorFamily::Polynomial;
  p.alpha = alpha;
  return p;
}

const CouplingKernel& kernel_d1() {
  static CouplingKernel k = normalize_kernel(make_ell_p(1, 2), poly(2.0), 400);
  return k;
}

const CouplingKernel& kernel_d2() {
  static CouplingKernel k = normalize_kernel(make_ell_p(2, 1), PrefactorSpec{}, 160);
  return k;
}

void bm_norm_eval(benchmark::State& state) {
  NormSpec spec = make_ell_p(2, 4);
  Vec x{0.3, -1.7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_norm(spec, x));
    x[0] += 1e-9;  // defeat caching
  }
}
BENCHMARK(bm_norm_eval);

void bm_dual_solve(benchmark::State& state) {
  NormSpec spec = make_ell_p(2, 4);
  double th = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_vector(spec, Vec{std::cos(th), std::sin(th)}));
    th += 1e-4;
  }
}
BENCHMARK(bm_dual_solve);

void bm_convolution_direct_d1(benchmark::State& state) {
  const auto& k = kernel_d1();
  ConvolutionOptions o;
  o.engine = ConvolutionOptions::Engine::Direct;
  int R = int(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(convolution_series(k, 0.5, R, 40, o));
  state.SetComplexityN(R);
}
BENCHMARK(bm_convolution_direct_d1)->Arg(50)->Arg(100)->Arg(200)->Complexity();

void bm_convolution_separable_d1(benchmark::State& state) {
  const auto& k = kernel_d1();
  ConvolutionOptions o;
  o.engine = ConvolutionOptions::Engine::Separable;
  int R = int(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(convolution_series(k, 0.5, R, 40, o));
  state.SetComplexityN(R);
}
BENCHMARK(bm_convolution_separable_d1)->Arg(50)->Arg(100)->Arg(200)->Complexity();

void bm_convolution_direct_d2(benchmark::State& state) {
  const auto& k = kernel_d2();
  ConvolutionOptions o;
  o.engine = ConvolutionOptions::Engine::Direct;
  for (auto _ : state)
    benchmark::DoNotOptimize(convolution_series(k, 0.5, int(state.range(0)), 20, o));
}
BENCHMARK(bm_convolution_direct_d2)->Arg(20)->Arg(40);

void bm_convolution_separable_d2(benchmark::State& state) {
  const auto& k = kernel_d2();
  ConvolutionOptions o;
  o.engine = ConvolutionOptions::Engine::Separable;
  for (auto _ : state)
    benchmark::DoNotOptimize(convolution_series(k, 0.5, int(state.range(0)), 20, o));
}
BENCHMARK(bm_convolution_separable_d2)->Arg(20)->Arg(40)->Arg(80);

void bm_tilted_mass(benchmark::State& state) {
  const auto& k = kernel_d2();
  Vec t{0.6, 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(tilted_mass(k, t, 160));
    t[1] += 1e-9;
  }
}
BENCHMARK(bm_tilted_mass);

void bm_tilt_solve(benchmark::State& state) {
  const auto& k = kernel_d1();
  double l = 0.6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nu_via_tilt(k, l, Vec{1.0}));
    l += 1e-7;
  }
}
BENCHMARK(bm_tilt_solve);

}  // namespace

BENCHMARK_MAIN();
