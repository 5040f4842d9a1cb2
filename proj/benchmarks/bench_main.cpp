#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "liesde/fields.hpp"
#include "liesde/flowtaylor.hpp"
#include "liesde/group.hpp"
#include "liesde/noise.hpp"
#include "liesde/sde.hpp"

namespace {

using namespace liesde;

void bm_sample_brownian(benchmark::State& state) {
  const TimeGrid grid(1.0, 1024);
  std::uint64_t path_index = 0;
  for (auto _ : state) {
    DrivingPath path = sample_brownian(grid, 2, 42, path_index++);
    benchmark::DoNotOptimize(path.values.data());
  }
}
BENCHMARK(bm_sample_brownian);

void bm_iterated_integral_12(benchmark::State& state) {
  const TimeGrid grid(1.0, static_cast<std::size_t>(state.range(0)));
  const DrivingPath path = with_time_component(sample_brownian(grid, 2, 7, 0));
  for (auto _ : state) {
    // Fresh table each round so the second-level convolution is timed,
    // not the cache lookup.
    IteratedIntegralTable table(path);
    benchmark::DoNotOptimize(table.integral(MultiIndex{1, 2}).back());
  }
}
BENCHMARK(bm_iterated_integral_12)->Arg(256)->Arg(1024)->Arg(4096);

void bm_heun_gbm(benchmark::State& state) {
  PolyVectorField lin(1);
  lin.add_term(0, {1}, 1.0);
  StratonovichSystem sys;
  sys.state_dim = 1;
  sys.noise_dim = 2;
  sys.fields = {lin};
  sys.coeff = {{Polynomial::constant(2, 0.08), Polynomial::constant(2, 0.2)}};
  const TimeGrid grid(1.0, static_cast<std::size_t>(state.range(0)));
  const DrivingPath path = with_time_component(sample_brownian(grid, 1, 42, 0));
  Eigen::VectorXd z0(1);
  z0 << 1.0;
  for (auto _ : state) {
    Trajectory traj = integrate_heun(sys, path, z0);
    benchmark::DoNotOptimize(traj.states.back()(0));
  }
}
BENCHMARK(bm_heun_gbm)->Arg(256)->Arg(1024)->Arg(4096);

void bm_expm_so3(benchmark::State& state) {
  Eigen::Matrix3d xi;
  xi << 0.0, -0.3, 0.2, 0.3, 0.0, -0.1, -0.2, 0.1, 0.0;
  for (auto _ : state) {
    Eigen::MatrixXd g = expm(xi);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(bm_expm_so3);

void bm_bracket_degree3(benchmark::State& state) {
  PolyVectorField a(2), b(2);
  a.add_term(0, {2, 1}, 1.0);
  a.add_term(1, {0, 3}, -0.5);
  b.add_term(0, {1, 2}, 2.0);
  b.add_term(1, {3, 0}, 1.0);
  for (auto _ : state) {
    PolyVectorField c = bracket(a, b);
    benchmark::DoNotOptimize(c.max_abs_coefficient());
  }
}
BENCHMARK(bm_bracket_degree3);

void bm_lie_closure_affine(benchmark::State& state) {
  std::vector<PolyVectorField> gens;
  Eigen::Matrix2d rot, dia;
  rot << 0.0, 1.0, -1.0, 0.0;
  dia << 1.0, 0.0, 0.0, -1.0;
  gens.push_back(linear_vector_field(rot));
  gens.push_back(linear_vector_field(dia));
  Eigen::Vector2d e1(1.0, 0.0), e2(0.0, 1.0);
  gens.push_back(constant_vector_field(e1));
  gens.push_back(constant_vector_field(e2));
  for (auto _ : state) {
    ClosureReport report = lie_closure(gens, 16);
    benchmark::DoNotOptimize(report.dimension);
  }
}
BENCHMARK(bm_lie_closure_affine);

void bm_beta_table_degree3(benchmark::State& state) {
  PolyVectorField y1(2), y2(2);
  y1.add_term(0, {0, 0}, 1.0);
  y2.add_term(1, {1, 0}, 1.0);
  const std::vector<PolyVectorField> fields = {PolyVectorField(2), y1, y2};
  for (auto _ : state) {
    auto table = beta_table(fields, 3);
    benchmark::DoNotOptimize(table.size());
  }
}
BENCHMARK(bm_beta_table_degree3);

}  // namespace

BENCHMARK_MAIN();
