#include "popec/math_util.hpp"

#include <cmath>

#include "doctest.h"

using namespace popec;

TEST_CASE("inverse normal quantiles") {
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(inverse_normal_cdf(0.025) ==
        doctest::Approx(-1.959963985).epsilon(1e-8));
  CHECK(inverse_normal_cdf(0.995) == doctest::Approx(2.575829304).epsilon(1e-8));
  for (double p : {1e-6, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-6})
    CHECK(normal_cdf(inverse_normal_cdf(p)) == doctest::Approx(p).epsilon(1e-10));
  CHECK_THROWS(inverse_normal_cdf(0.0));
  CHECK_THROWS(inverse_normal_cdf(1.0));
}

TEST_CASE("rng determinism and moments") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform01() == b.uniform01());

  Rng rng(7);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.exponential(2.0);
    sum += v;
    sum2 += v * v;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
  CHECK(sum2 / n == doctest::Approx(0.5).epsilon(0.05));

  double gsum = 0.0, gsum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.gaussian(1.0, 2.0);
    gsum += v;
    gsum2 += (v - 1.0) * (v - 1.0);
  }
  CHECK(gsum / n == doctest::Approx(1.0).epsilon(0.05));
  CHECK(gsum2 / n == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("weighted pick honors residual mass") {
  Rng rng(3);
  const std::vector<double> weights{0.2, 0.3};
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 100000; ++i) ++counts[rng.pick_or_none(weights)];
  CHECK(counts[0] / 1e5 == doctest::Approx(0.2).epsilon(0.05));
  CHECK(counts[1] / 1e5 == doctest::Approx(0.3).epsilon(0.05));
  CHECK(counts[2] / 1e5 == doctest::Approx(0.5).epsilon(0.05));
}
