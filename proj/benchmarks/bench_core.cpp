#include <benchmark/benchmark.h>

#include <random>

#include "chiralq/chiralq.hpp"

using namespace chiralq;

namespace {

ModelParams fig_params() {
  ModelParams p;
  p.m_z = 1.4;
  p.t_so = 0.2;
  return p;
}

void BM_EvolvePolarization(benchmark::State& state) {
  const ModelParams p = fig_params();
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  const State psi = init_state(k, p, QuenchSpec::shallow(1, 2.0)).psi;
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_polarization(k, p, psi, t));
    t += 0.01;
  }
}
BENCHMARK(BM_EvolvePolarization);

void BM_DenseOracle(benchmark::State& state) {
  const ModelParams p = fig_params();
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  const State psi = init_state(k, p, QuenchSpec::shallow(1, 2.0)).psi;
  for (auto _ : state) benchmark::DoNotOptimize(dense_evolution_oracle(k, p, psi, 3.0));
}
BENCHMARK(BM_DenseOracle);

void BM_TimeAverage(benchmark::State& state) {
  const ModelParams p = fig_params();
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  const QuenchSpec q = QuenchSpec::shallow(2, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(time_avg_polarization(k, p, q));
}
BENCHMARK(BM_TimeAverage);

void BM_ReconstructBis(benchmark::State& state) {
  const ModelParams p = fig_params();
  BisOptions o;
  o.level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_bis(p, o));
}
BENCHMARK(BM_ReconstructBis)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_WindingLevel5(benchmark::State& state) {
  const ModelParams p = fig_params();
  BisOptions o;
  o.level = 5;
  const TriMesh mesh = reconstruct_bis(p, o).mesh;
  for (auto _ : state) benchmark::DoNotOptimize(winding_W(mesh, g_field(mesh, p)));
  state.counters["faces"] = static_cast<double>(mesh.face_count());
}
BENCHMARK(BM_WindingLevel5)->Unit(benchmark::kMillisecond);

void BM_SolidAngle(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  std::vector<Vec3> v(3 * 1024);
  for (auto& x : v) x = Vec3(n(gen), n(gen), n(gen)).normalized();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solid_angle(v[i], v[i + 1], v[i + 2]));
    i = (i + 3) % v.size();
  }
}
BENCHMARK(BM_SolidAngle);

void BM_NoisyMeasurement(benchmark::State& state) {
  const ModelParams p = fig_params();
  const ReadoutEmulator em(p, PhotonCalibration::draw(1), NoiseOptions{}, 7);
  const Vec3 k = Vec3(0.1, 0.6, 0.1) * kPi;
  for (auto _ : state) benchmark::DoNotOptimize(em.measure(k, QuenchSpec::deep(0), 0));
}
BENCHMARK(BM_NoisyMeasurement);

void BM_LocateCharges(benchmark::State& state) {
  ModelParams p;
  p.m_z = 1.4;
  for (auto _ : state)
    benchmark::DoNotOptimize(locate_charges(p, QuenchSpec::kInf, Region::full_bz()));
}
BENCHMARK(BM_LocateCharges)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
