// Microbenchmarks for the hot paths: proximal mappings, the simplex
// projection, the envelope evaluation, Hessian-vector products, the inner
// CG solve and a small end-to-end run.  Sizes mirror typical instances
// rather than stress limits; use --benchmark_filter to narrow.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "fbtn/cg.hpp"
#include "fbtn/fbe.hpp"
#include "fbtn/oracles.hpp"
#include "fbtn/prox.hpp"
#include "fbtn/rng.hpp"
#include "fbtn/smooth.hpp"
#include "fbtn/solver.hpp"

using fbtn::Matrix;
using fbtn::Rng;
using fbtn::Vector;

namespace {

void BM_ProxL1(benchmark::State& state) {
  const fbtn::Index n = state.range(0);
  fbtn::L1Norm g(n, 0.3);
  Rng rng(1);
  Vector x = rng.gaussian_vector(n);
  for (auto _ : state) {
    auto r = g.prox(x, 0.7);
    benchmark::DoNotOptimize(r.point.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ProxL1)->Arg(1000)->Arg(100000);

void BM_SimplexProjection(benchmark::State& state) {
  const fbtn::Index n = state.range(0);
  Rng rng(2);
  Vector x = rng.gaussian_vector(n);
  for (auto _ : state) {
    auto r = fbtn::project_to_simplex(x, 1.0);
    benchmark::DoNotOptimize(r.point.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SimplexProjection)->Arg(1000)->Arg(100000);

void BM_ProxLInf(benchmark::State& state) {
  const fbtn::Index n = state.range(0);
  fbtn::LInfNorm g(n, 0.5);
  Rng rng(3);
  Vector x = rng.gaussian_vector(n);
  for (auto _ : state) {
    auto r = g.prox(x, 1.1);
    benchmark::DoNotOptimize(r.point.data());
  }
}
BENCHMARK(BM_ProxLInf)->Arg(1000);

void BM_CgSolve(benchmark::State& state) {
  const fbtn::Index n = 100;
  Rng rng(4);
  Matrix Q = fbtn::oracles::random_orthogonal(rng, n);
  Vector eigs = Vector::LinSpaced(n, 0.5, 6.0);
  Matrix M = Q * eigs.asDiagonal() * Q.transpose();
  Vector rhs = rng.gaussian_vector(n);
  auto matvec = [&](const Vector& p) { return Vector(M * p); };
  for (auto _ : state) {
    auto out = fbtn::cg_solve(matvec, rhs, 1e-8, Vector::Zero(n), 2 * n);
    benchmark::DoNotOptimize(out.direction.data());
  }
}
BENCHMARK(BM_CgSolve);

struct LassoFixture {
  std::shared_ptr<fbtn::LeastSquaresSmooth> f;
  std::shared_ptr<fbtn::L1Norm> g;
  Vector x;

  explicit LassoFixture(fbtn::Index m = 40, fbtn::Index n = 100) {
    Rng rng(5);
    Matrix A = rng.gaussian_matrix(m, n) / std::sqrt(double(m));
    Vector b = rng.gaussian_vector(m);
    f = std::make_shared<fbtn::LeastSquaresSmooth>(A, b);
    g = std::make_shared<fbtn::L1Norm>(n, 0.1);
    x = rng.gaussian_vector(n);
  }
};

void BM_EnvelopeEvaluate(benchmark::State& state) {
  LassoFixture fix;
  fbtn::FbeProblem problem(fix.f, fix.g);
  for (auto _ : state) {
    auto pt = problem.evaluate(fix.x);
    benchmark::DoNotOptimize(pt.fbe);
  }
}
BENCHMARK(BM_EnvelopeEvaluate);

void BM_EnvelopeHessVec(benchmark::State& state) {
  LassoFixture fix;
  fbtn::FbeProblem problem(fix.f, fix.g);
  auto pt = problem.evaluate(fix.x);
  Rng rng(6);
  Vector p = rng.gaussian_vector(fix.x.size());
  for (auto _ : state) {
    Vector hp = problem.hess_vec_fbe(pt, p);
    benchmark::DoNotOptimize(hp.data());
  }
}
BENCHMARK(BM_EnvelopeHessVec);

void BM_FullSolve(benchmark::State& state) {
  LassoFixture fix;
  fbtn::SolverOptions opts;
  opts.eps = 1e-8;
  for (auto _ : state) {
    fbtn::FbeProblem problem(fix.f, fix.g);
    auto sol = fbtn::fbtn_solve(problem, Vector::Zero(fix.x.size()), opts);
    benchmark::DoNotOptimize(sol.x.data());
  }
}
BENCHMARK(BM_FullSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
