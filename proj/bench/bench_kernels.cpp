#include <benchmark/benchmark.h>

#include <numbers>

#include "iekf/car.hpp"
#include "iekf/nav.hpp"
#include "iekf/parallel.hpp"

namespace {

using namespace iekf;

const std::vector<AffineSample>& nav_samples() {
  static const auto s = draw_affine_samples(Group::SE2_3, 6, 4096, 1);
  return s;
}

std::vector<TangentVector> car_xi0(int n) {
  std::vector<TangentVector> out;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    out.emplace_back(Group::SE2, Eigen::Vector3d(std::cos(a), std::sin(a), 0.3).normalized());
  }
  return out;
}

void BM_AffineSerial(benchmark::State& st) {
  const Dynamics d = nav::dynamics();
  for (auto _ : st) benchmark::DoNotOptimize(serial::affine_residuals(d, nav_samples()));
}

void BM_AffineOmp(benchmark::State& st) {
  const Dynamics d = nav::dynamics();
  for (auto _ : st) benchmark::DoNotOptimize(omp::affine_residuals(d, nav_samples()));
}

void BM_LogLinearSerial(benchmark::State& st) {
  const Dynamics d = car::dynamics();
  const auto lin = linearize(d, ErrorSide::Left, car::A_left);
  const auto xs = car_xi0(8);
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        serial::verify_log_linear_batch(d, lin, xs, constant_input(Eigen::Vector2d(0.2, 1.0)), 0.0, 1.0, 1e-3));
  }
}

void BM_LogLinearOmp(benchmark::State& st) {
  const Dynamics d = car::dynamics();
  const auto lin = linearize(d, ErrorSide::Left, car::A_left);
  const auto xs = car_xi0(8);
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        omp::verify_log_linear_batch(d, lin, xs, constant_input(Eigen::Vector2d(0.2, 1.0)), 0.0, 1.0, 1e-3));
  }
}

std::vector<Scenario> batch() {
  std::vector<Scenario> out;
  for (int i = 0; i < 4; ++i) {
    Scenario sc = scenarios::fig1(true);
    sc.inject_noise = true;
    sc.seed = i + 1;
    sc.name = "b" + std::to_string(i);
    out.push_back(sc);
  }
  return out;
}

void BM_RunBatchSerial(benchmark::State& st) {
  const auto sc = batch();
  for (auto _ : st) benchmark::DoNotOptimize(serial::run_batch(sc));
}

void BM_RunBatchOmp(benchmark::State& st) {
  const auto sc = batch();
  for (auto _ : st) benchmark::DoNotOptimize(omp::run_batch(sc));
}

BENCHMARK(BM_AffineSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AffineOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogLinearSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogLinearOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunBatchOmp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
