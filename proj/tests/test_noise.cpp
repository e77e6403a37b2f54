#include <doctest.h>

#include <cmath>

#include "adastep/errors.hpp"
#include "adastep/noise.hpp"
#include "test_helpers.hpp"

using namespace adastep;

TEST_CASE("zero noise returns the exact gradient") {
  auto obj = make_quadratic(2, {1.0, 3.0}, {0.0, 0.0}, 0);
  GradientOracle oracle{obj, NoiseModel::none()};
  Rng rng(1, 0);
  Vector x{1.5, -0.5};
  Vector g = sample_gradient(oracle, x, rng);
  Vector exact = obj->grad(x);
  CHECK(g[0] == exact[0]);
  CHECK(g[1] == exact[1]);
}

TEST_CASE("three-point noise matches its law") {
  // The three atoms are weighted to cancel exactly: mean
  // (7/15)*1 + (1/5)*(-3/2) + (1/3)*(-1/2) = 0, and the weights sum to 1.
  CHECK(7.0 / 15.0 + 1.0 / 5.0 + 1.0 / 3.0 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::fabs((7.0 / 15.0) * 1.0 + (1.0 / 5.0) * (-1.5) +
                  (1.0 / 3.0) * (-0.5)) < 1e-15);

  NoiseModel model = NoiseModel::three_point(10.0);
  Rng rng(2, 0);
  const int n = 100000;
  int n_plus = 0, n_mid = 0, n_low = 0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double xi = sample_noise(model, 1, rng)[0];
    sum += xi;
    if (xi == 10.0) ++n_plus;
    else if (xi == -15.0) ++n_mid;
    else if (xi == -5.0) ++n_low;
    else FAIL("unexpected three-point atom");
  }
  auto within_3se = [&](int count, double p) {
    double se = std::sqrt(p * (1.0 - p) / n);
    return std::fabs(static_cast<double>(count) / n - p) <= 3.0 * se;
  };
  CHECK(within_3se(n_plus, 7.0 / 15.0));
  CHECK(within_3se(n_mid, 1.0 / 5.0));
  CHECK(within_3se(n_low, 1.0 / 3.0));
  // Variance of the law is exactly sigma^2, so SE of the mean is sigma/sqrt(n).
  CHECK(std::fabs(sum / n) <= 3.0 * 10.0 / std::sqrt(static_cast<double>(n)));

  CHECK_THROWS_AS(sample_noise(model, 2, rng), ConfigError);
}

TEST_CASE("bounded-sphere noise stays in the ball") {
  NoiseModel model = NoiseModel::bounded_sphere(2.0);
  Rng rng(3, 0);
  const int n = 100000;
  Vector mean(3, 0.0);
  double max_norm = 0.0;
  double mean_norm_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Vector xi = sample_noise(model, 3, rng);
    max_norm = std::max(max_norm, norm(xi));
    mean_norm_sq += norm_sq(xi);
    for (int j = 0; j < 3; ++j) mean[j] += xi[j];
  }
  for (int j = 0; j < 3; ++j) mean[j] /= n;
  CHECK(max_norm <= 2.0);
  // Component std is at most the radius, so 3 standard errors of the mean
  // vector norm is generously 3 * S * sqrt(d) / sqrt(n).
  CHECK(norm(mean) <= 3.0 * 2.0 * std::sqrt(3.0) / std::sqrt(static_cast<double>(n)));
  // E||xi||^2 = S^2 d/(d+2) for the uniform ball.
  CHECK(mean_norm_sq / n ==
        doctest::Approx(4.0 * 3.0 / 5.0).epsilon(0.02));
}

TEST_CASE("gaussian noise is normalized to total variance sigma^2") {
  NoiseModel model = NoiseModel::gaussian(2.0);
  Rng rng(4, 0);
  const int n = 100000;
  double mean_norm_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    mean_norm_sq += norm_sq(sample_noise(model, 5, rng));
  }
  CHECK(mean_norm_sq / n == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("unbiasedness audit") {
  auto obj = make_quadratic(2, {1.0, 4.0}, {0.0, 0.0}, 11);
  Rng rng(5, 0);
  Vector x{0.7, -1.1};

  GradientOracle none{obj, NoiseModel::none()};
  CHECK(check_unbiased(none, x, 1000, rng) == 0.0);

  GradientOracle gauss{obj, NoiseModel::gaussian(1.0)};
  double dev = check_unbiased(gauss, x, 100000, rng);
  CHECK(dev <= 4.0 / std::sqrt(100000.0));

  auto obj1 = make_quadratic(1, {1.0}, {0.0}, 0);
  GradientOracle three{obj1, NoiseModel::three_point(10.0)};
  double dev3 = check_unbiased(three, {1.0}, 100000, rng);
  CHECK(dev3 <= 4.0 * 10.0 / std::sqrt(100000.0));

  CHECK_THROWS_AS(check_unbiased(none, x, 10, rng), ConfigError);
}

TEST_CASE("unbiasedness holds for every model at random points") {
  auto obj = make_smooth_nonconvex(3);
  Rng rng(6, 0);
  std::vector<NoiseModel> models = {NoiseModel::bounded_sphere(0.5),
                                    NoiseModel::gaussian(0.5)};
  for (const auto& model : models) {
    GradientOracle oracle{obj, model};
    for (int i = 0; i < 10; ++i) {
      Vector x = testing::random_point(rng, 3);
      CHECK(check_unbiased(oracle, x, 20000, rng) <=
            4.0 * 0.5 / std::sqrt(20000.0));
    }
  }
}

TEST_CASE("sub-Gaussian moment estimates") {
  Rng rng(7, 0);
  // Bounded support: every term exp(||xi||^2/S^2) <= e, so the estimate is
  // below e deterministically.
  NoiseModel ball = NoiseModel::bounded_sphere(1.5);
  auto est = check_subgaussian_moment(ball, 4, 1.5, 10000, rng);
  CHECK_FALSE(est.overflowed);
  CHECK(est.estimate <= std::exp(1.0));

  NoiseModel gauss = NoiseModel::gaussian(1.0);
  auto est2 = check_subgaussian_moment(gauss, 4, 2.0, 100000, rng);
  CHECK_FALSE(est2.overflowed);
  CHECK(est2.estimate <= std::exp(1.0) * (1.0 + 5.0 / std::sqrt(100000.0)));

  // A vanishing claim makes the exponent blow up.
  auto est3 = check_subgaussian_moment(gauss, 4, 1e-8, 10000, rng);
  CHECK(est3.overflowed);
  CHECK(std::isinf(est3.estimate));
  CHECK_FALSE(est3.diagnostic.empty());

  CHECK_THROWS_AS(check_subgaussian_moment(NoiseModel::none(), 4, 1.0, 10000, rng),
                  ConfigError);
  CHECK_THROWS_AS(check_subgaussian_moment(gauss, 4, 1.0, 100, rng), ConfigError);
}

TEST_CASE("declared sub-Gaussian scales satisfy the moment bound") {
  Rng rng(8, 0);
  for (const auto& model : {NoiseModel::bounded_sphere(2.0), NoiseModel::gaussian(1.5)}) {
    auto est = check_subgaussian_moment(model, 3, model.subgaussian_sigma(), 50000, rng);
    CHECK_FALSE(est.overflowed);
    CHECK(est.estimate <= std::exp(1.0) * (1.0 + 5.0 / std::sqrt(50000.0)));
  }
}

TEST_CASE("bounded-support capability flag") {
  CHECK(NoiseModel::none().bounded_support());
  CHECK(NoiseModel::bounded_sphere(1.0).bounded_support());
  CHECK(NoiseModel::three_point(1.0).bounded_support());
  CHECK_FALSE(NoiseModel::gaussian(1.0).bounded_support());
  CHECK(NoiseModel::bounded_sphere(1.0).support_radius() == 1.0);
  CHECK(NoiseModel::three_point(2.0).support_radius() == 3.0);
  CHECK_THROWS_AS(NoiseModel::gaussian(1.0).support_radius(), ConfigError);
}

TEST_CASE("identical seeds reproduce the sample stream bit for bit") {
  NoiseModel model = NoiseModel::gaussian(1.0);
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) {
    Vector xa = sample_noise(model, 4, a);
    Vector xb = sample_noise(model, 4, b);
    for (int j = 0; j < 4; ++j) CHECK(xa[j] == xb[j]);
  }
  // Different stream index diverges.
  Rng c(42, 4);
  bool any_diff = false;
  Rng a2(42, 3);
  for (int i = 0; i < 10 && !any_diff; ++i) {
    any_diff = sample_noise(model, 4, a2) != sample_noise(model, 4, c);
  }
  CHECK(any_diff);
}

TEST_CASE("noise model parameter validation") {
  CHECK_THROWS_AS(NoiseModel::bounded_sphere(0.0), ConfigError);
  CHECK_THROWS_AS(NoiseModel::gaussian(-1.0), ConfigError);
  CHECK_THROWS_AS(NoiseModel::three_point(0.0), ConfigError);
}
