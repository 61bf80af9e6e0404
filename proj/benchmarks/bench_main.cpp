#include <benchmark/benchmark.h>

#include "neuropt/cases/fish.hpp"
#include "neuropt/cases/min_snap.hpp"
#include "neuropt/codegen/lower.hpp"
#include "neuropt/learned/mlp.hpp"
#include "neuropt/nlpsolve/solver.hpp"
#include "neuropt/random.hpp"
#include "neuropt/symgraph/derivatives.hpp"

namespace {

using namespace neuropt;

MlpSpec bench_mlp(int in, int width, int depth, int out) {
  Pcg32 rng(7);
  MlpSpec spec;
  spec.in_features = in;
  int fan_in = in;
  for (int l = 0; l <= depth; ++l) {
    const int rows = l == depth ? out : width;
    DenseLayer layer{Matrix(rows, fan_in), Vector(rows)};
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.uniform(-0.3, 0.3);
    for (Eigen::Index i = 0; i < layer.biases.size(); ++i) layer.biases(i) = rng.uniform(-0.1, 0.1);
    spec.layers.push_back(std::move(layer));
    fan_in = rows;
  }
  return spec;
}

struct MlpFunctions {
  sym::SymFunction value;
  sym::SymFunction jac;
  sym::SymFunction hess;
};

MlpFunctions mlp_functions(int width) {
  const MlpSpec spec = bench_mlp(3, width, 2, 2);
  sym::ExprGraph g;
  const sym::ExprRef x = g.symbol("x", 3);
  const sym::ExprRef y = embed_mlp(spec, x);
  const sym::ExprRef s = sym::sum(y);
  return {sym::SymFunction(sym::unique_function_name("bench_v"), {x}, {y}),
          sym::SymFunction(sym::unique_function_name("bench_j"), {x}, {sym::jacobian(y, x)}),
          sym::SymFunction(sym::unique_function_name("bench_h"), {x}, {sym::hessian(s, x).hess})};
}

void BM_GraphEval(benchmark::State& state) {
  const MlpFunctions f = mlp_functions(static_cast<int>(state.range(0)));
  const Matrix in = Vector::Constant(3, 0.2);
  sym::Workspace ws;
  for (auto _ : state) {
    sym::evaluate(f.value, std::span<const Matrix>(&in, 1), ws);
    benchmark::DoNotOptimize(ws.output(0).data());
  }
}
BENCHMARK(BM_GraphEval)->Arg(16)->Arg(64);

void BM_GraphJacobian(benchmark::State& state) {
  const MlpFunctions f = mlp_functions(static_cast<int>(state.range(0)));
  const Matrix in = Vector::Constant(3, 0.2);
  sym::Workspace ws;
  for (auto _ : state) {
    sym::evaluate(f.jac, std::span<const Matrix>(&in, 1), ws);
    benchmark::DoNotOptimize(ws.output(0).data());
  }
}
BENCHMARK(BM_GraphJacobian)->Arg(16)->Arg(64);

void BM_GraphHessian(benchmark::State& state) {
  const MlpFunctions f = mlp_functions(static_cast<int>(state.range(0)));
  const Matrix in = Vector::Constant(3, 0.2);
  sym::Workspace ws;
  for (auto _ : state) {
    sym::evaluate(f.hess, std::span<const Matrix>(&in, 1), ws);
    benchmark::DoNotOptimize(ws.output(0).data());
  }
}
BENCHMARK(BM_GraphHessian)->Arg(16)->Arg(64);

void BM_DeriveHessian(benchmark::State& state) {
  const MlpSpec spec = bench_mlp(3, 64, 2, 2);
  for (auto _ : state) {
    sym::ExprGraph g;
    const sym::ExprRef x = g.symbol("x", 3);
    benchmark::DoNotOptimize(sym::hessian(sym::sum(embed_mlp(spec, x)), x).hess.index());
  }
}
BENCHMARK(BM_DeriveHessian);

void BM_TapeEval(benchmark::State& state) {
  const MlpFunctions f = mlp_functions(static_cast<int>(state.range(0)));
  const codegen::Tape t = codegen::lower(f.jac);
  const Matrix in = Vector::Constant(3, 0.2);
  codegen::TapeScratch scratch;
  std::vector<Matrix> out;
  for (auto _ : state) {
    codegen::eval_tape(t, std::span<const Matrix>(&in, 1), out, scratch);
    benchmark::DoNotOptimize(out[0].data());
  }
}
BENCHMARK(BM_TapeEval)->Arg(16)->Arg(64);

void BM_SolveMinSnapQp(benchmark::State& state) {
  const cases::TrajParams tp = cases::default_traj_params();
  const NlpProblem p = cases::build_min_snap_nlp(tp, cases::DensityFieldParams{}, false, std::nullopt);
  for (auto _ : state) benchmark::DoNotOptimize(solve(p).objective_value);
}
BENCHMARK(BM_SolveMinSnapQp)->Unit(benchmark::kMillisecond);

void BM_SolveFishAnalytic(benchmark::State& state) {
  const NlpProblem p = cases::build_fish_nlp(cases::default_fish_params(), cases::default_flow_field());
  for (auto _ : state) benchmark::DoNotOptimize(solve(p).objective_value);
}
BENCHMARK(BM_SolveFishAnalytic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
