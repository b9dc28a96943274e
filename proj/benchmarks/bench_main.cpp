#include <benchmark/benchmark.h>

#include "phfem/factorization.hpp"
#include "phfem/fem1d.hpp"
#include "phfem/fem2d.hpp"

using namespace phfem;

namespace {

// 1D stiffness plus mass: a cheap, well conditioned SPD test matrix.
SparseMatrix rod_matrix(Index n) {
  Forms1D f = assemble_forms(Mesh1D::uniform(0.0, 1.0, n), [](double) { return 1.0; });
  return axpby(1.0, f.M, 1e-4, f.K);
}

void BM_Spmv(benchmark::State& state) {
  Spaces2D sp(build_mesh(Rect{}, state.range(0), state.range(0), 1.0));
  Forms2D f = assemble_static(sp);
  Vector x = Vector::Ones(f.M.cols());
  for (auto _ : state) benchmark::DoNotOptimize(spmv(f.M, x));
  state.SetItemsProcessed(state.iterations() * f.M.nnz());
}
BENCHMARK(BM_Spmv)->Arg(16)->Arg(48);

void BM_FactorSolve(benchmark::State& state) {
  SparseMatrix a = rod_matrix(state.range(0));
  Vector b = Vector::Ones(a.rows());
  for (auto _ : state) {
    Factorization lu(a, state.range(1) != 0);
    benchmark::DoNotOptimize(lu.solve(b));
  }
}
BENCHMARK(BM_FactorSolve)->Args({1000, 0})->Args({1000, 1})->Args({100000, 0});

void BM_MassFactor2D(benchmark::State& state) {
  Spaces2D sp(build_mesh(Rect{}, state.range(0), state.range(0), 1.0));
  Forms2D f = assemble_static(sp);
  for (auto _ : state) {
    Factorization lu(f.M, false);
    benchmark::DoNotOptimize(lu.solve(Vector::Ones(f.M.rows())));
  }
}
BENCHMARK(BM_MassFactor2D)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_AssembleD1(benchmark::State& state) {
  Spaces2D sp(build_mesh(Rect{}, state.range(0), state.range(0), 1.15));
  ModulatedAssembler ma(sp);
  Vector omega = Vector::LinSpaced(sp.n_omega(), -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(ma.D1(omega));
}
BENCHMARK(BM_AssembleD1)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
