#include <gtest/gtest.h>

#include <random>

#include "iekf/car.hpp"
#include "iekf/nav.hpp"
#include "iekf/parallel.hpp"

using namespace iekf;

TEST(Parallel, AffineResidualsMatchSerial) {
  const Dynamics d = nav::dynamics();
  const auto samples = draw_affine_samples(d.group, d.input_dim, 64, 3);
  EXPECT_EQ(serial::affine_residuals(d, samples), omp::affine_residuals(d, samples));
}

TEST(Parallel, LogLinearBatchMatchesSerial) {
  const Dynamics d = car::dynamics();
  const LinearizedDynamics lin = linearize(d, ErrorSide::Left, car::A_left);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<TangentVector> xs;
  for (int i = 0; i < 8; ++i) xs.emplace_back(Group::SE2, Eigen::Vector3d(normal(rng), normal(rng), normal(rng)));
  const auto u = constant_input(Eigen::Vector2d(0.2, 1.0));
  const auto a = serial::verify_log_linear_batch(d, lin, xs, u, 0.0, 1.0, 1e-3);
  const auto b = omp::verify_log_linear_batch(d, lin, xs, u, 0.0, 1.0, 1e-3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].max_deviation, b[i].max_deviation);
    EXPECT_EQ(a[i].feasible, b[i].feasible);
  }
}

TEST(Parallel, RunBatchMatchesSerial) {
  std::vector<Scenario> scs{scenarios::fig1(true), scenarios::fig2(2), scenarios::standstill()};
  for (auto& sc : scs) sc.inject_noise = true;
  const auto a = serial::run_batch(scs);
  const auto b = omp::run_batch(scs, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t f = 0; f < a[i].filters.size(); ++f) {
      EXPECT_EQ(a[i].filters[f].err_log_norm, b[i].filters[f].err_log_norm);
    }
  }
}

TEST(Parallel, ErrorsPropagateOutOfRegion) {
  std::vector<Scenario> scs{scenarios::fig1(true)};
  scs[0].obs_rate = 3.0;
  EXPECT_THROW(omp::run_batch(scs, 2), InvalidArgument);
}
