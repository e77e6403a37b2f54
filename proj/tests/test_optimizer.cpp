#include <doctest.h>

#include <cmath>

#include "adastep/errors.hpp"
#include "adastep/optimizer.hpp"
#include "test_helpers.hpp"

using namespace adastep;

namespace {

RunConfig basic_config(ObjectivePtr obj, StepsizeConfig step, Vector x0,
                       std::int64_t horizon, std::uint64_t seed = 1,
                       NoiseModel noise = NoiseModel::none()) {
  RunConfig rc;
  rc.objective = std::move(obj);
  rc.noise = noise;
  rc.stepsize = step;
  rc.x0 = std::move(x0);
  rc.horizon = horizon;
  rc.seed = seed;
  return rc;
}

}  // namespace

TEST_CASE("constant stepsize on a 1-d quadratic follows the linear recursion") {
  // f = x^2 (A = 2), eta = 0.25: x_{t+1} = x_t (1 - 0.5), so x_3 = 0.25.
  auto obj = make_quadratic(1, {2.0}, {0.0}, 0);
  auto traj = run(basic_config(obj, StepsizeConfig::poly(0.0, 0.25), {1.0}, 3));
  CHECK(traj.status == RunStatus::Ok);
  CHECK(traj.last_t == 3);
  CHECK(traj.last_x[0] == 0.25);
  CHECK(traj.sum_x[0] == 1.0 + 0.5 + 0.25);
}

TEST_CASE("zero-noise adagrad two-step hand simulation") {
  // g1 = 2, eta1 = 1/sqrt(4) = 0.5 -> x2 = 0; g2 = 0, x3 = 0.
  auto obj = make_quadratic(1, {2.0}, {0.0}, 0);
  auto traj = run(basic_config(obj, StepsizeConfig::global_adagrad(1.0, 4.0, 0.0),
                               {1.0}, 3));
  REQUIRE(traj.checkpoints.size() >= 3);
  CHECK(traj.checkpoints[0].t == 1);
  CHECK(traj.checkpoints[0].eta_min == 0.5);
  CHECK(traj.checkpoints[0].grad_norm_sq == 4.0);
  CHECK(traj.checkpoints[1].t == 2);
  CHECK(traj.checkpoints[1].f_gap == 0.0);
  CHECK(traj.checkpoints[1].eta_min ==
        doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-15));
  CHECK(traj.last_x[0] == 0.0);
}

TEST_CASE("reruns with the same seed are bit-identical") {
  auto obj = make_quadratic(3, {1.0, 2.0, 6.0}, {0.1, 0.2, -0.3}, 3);
  auto cfg = basic_config(obj, StepsizeConfig::global_adagrad(0.5, 1.0, 0.1),
                          {1.0, -1.0, 2.0}, 500, 77,
                          NoiseModel::gaussian(0.5));
  auto a = run(cfg);
  auto b = run(cfg);
  REQUIRE(a.checkpoints.size() == b.checkpoints.size());
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    CHECK(a.checkpoints[i].f_gap == b.checkpoints[i].f_gap);
    CHECK(a.checkpoints[i].grad_norm_sq == b.checkpoints[i].grad_norm_sq);
    CHECK(a.checkpoints[i].eta_min == b.checkpoints[i].eta_min);
    CHECK(a.checkpoints[i].liminf_stat == b.checkpoints[i].liminf_stat);
  }
  for (int j = 0; j < 3; ++j) {
    CHECK(a.last_x[j] == b.last_x[j]);
    CHECK(a.sum_x[j] == b.sum_x[j]);
  }
  CHECK(a.best_grad_norm_sq == b.best_grad_norm_sq);
  CHECK(a.sum_eta_sq_g_sq == b.sum_eta_sq_g_sq);
}

TEST_CASE("selectors") {
  auto obj = make_quadratic(1, {2.0}, {0.0}, 0);

  SUBCASE("horizon one: all selectors return x1") {
    auto traj = run(basic_config(obj, StepsizeConfig::poly(0.0, 0.1), {2.0}, 1));
    for (auto which : {Selector::Last, Selector::Average, Selector::BestGradient}) {
      auto sel = select(traj, which);
      CHECK(sel.x[0] == 2.0);
      CHECK(sel.t == 1);
    }
  }

  SUBCASE("zero-gradient start keeps every selector at x1") {
    auto traj = run(basic_config(obj, StepsizeConfig::poly(0.0, 0.1), {0.0}, 5));
    CHECK(select(traj, Selector::Average).x[0] == 0.0);
    CHECK(select(traj, Selector::Last).x[0] == 0.0);
  }

  SUBCASE("best-gradient picks the argmin of the true gradient norm") {
    Trajectory traj;
    traj.status = RunStatus::Ok;
    traj.objective = obj;
    traj.dim = 1;
    traj.horizon = 3;
    traj.f_star = 0.0;
    traj.sum_x = {3.0};
    traj.last_x = {1.5};
    traj.last_t = 3;
    traj.best_t = 2;
    traj.best_x = {0.5};          // grad norms [4, 1, 9] -> iterate 2 wins
    traj.best_grad_norm_sq = 1.0;
    auto sel = select(traj, Selector::BestGradient);
    CHECK(sel.t == 2);
    CHECK(sel.x[0] == 0.5);
    CHECK(sel.grad_norm_sq == doctest::Approx(1.0));
  }
}

TEST_CASE("best and liminf statistics match brute force on short runs") {
  auto obj = make_smooth_nonconvex(2);
  double eps = 0.25;
  auto cfg = basic_config(obj, StepsizeConfig::global_adagrad(0.8, 1.0, eps),
                          {1.5, -2.0}, 500, 5, NoiseModel::bounded_sphere(0.3));
  std::vector<Vector> xs;
  auto traj = run(cfg, [&](const StepRecord& rec) {
    // reconstruct x_t from x_after of the previous step
    if (rec.t == 1) xs.push_back({1.5, -2.0});
    if (rec.t < 500) xs.push_back(rec.x_after);
  });
  REQUIRE(xs.size() == 500);
  double best = std::numeric_limits<double>::infinity();
  std::int64_t best_t = 0;
  double liminf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double gn = norm_sq(obj->grad(xs[i]));
    if (gn < best) {
      best = gn;
      best_t = static_cast<std::int64_t>(i) + 1;
    }
    liminf = std::min(liminf, gn * std::pow(static_cast<double>(i + 1), 0.5 - eps));
  }
  CHECK(traj.best_grad_norm_sq == best);
  CHECK(traj.best_t == best_t);
  CHECK(traj.liminf_stat == liminf);
  double prev_stat = std::numeric_limits<double>::infinity();
  for (const auto& row : traj.checkpoints) {
    CHECK(traj.best_grad_norm_sq <= row.grad_norm_sq);
    CHECK(row.f_gap >= -1e-9);
    CHECK(row.grad_norm_sq >= 0.0);
    CHECK(row.liminf_stat <= prev_stat);  // running min never rises
    prev_stat = row.liminf_stat;
  }
}

TEST_CASE("replaying recorded steps reconstructs the trajectory bit-exactly") {
  auto obj = make_quadratic(2, {1.0, 4.0}, {0.0, 0.0}, 9);
  for (auto step : {StepsizeConfig::global_adagrad(0.6, 2.0, 0.1),
                    StepsizeConfig::coord_adagrad(0.6, 2.0, 0.1)}) {
    auto cfg = basic_config(obj, step, {1.0, 1.0}, 200, 11,
                            NoiseModel::gaussian(0.5));
    std::vector<StepRecord> records;
    auto traj = run(cfg, [&](const StepRecord& rec) { records.push_back(rec); });
    REQUIRE(records.size() == 200);
    Vector x = cfg.x0;
    for (const auto& rec : records) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        double eta = rec.eta.size() == 1 ? rec.eta[0] : rec.eta[j];
        x[j] -= eta * rec.g[j];
        CHECK(x[j] == rec.x_after[j]);
      }
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
      // x_after at the final record is one update past the last iterate.
      CHECK(records.back().x_after[j] == x[j]);
    }
    CHECK(traj.status == RunStatus::Ok);
  }
}

TEST_CASE("milestones capture exact prefix statistics") {
  auto obj = make_quadratic(2, {1.0, 3.0}, {0.0, 0.0}, 0);
  auto cfg = basic_config(obj, StepsizeConfig::global_adagrad(0.5, 1.0, 0.0),
                          {1.0, -1.0}, 100, 13, NoiseModel::gaussian(0.3));
  cfg.milestones = {10, 50, 100};
  auto traj = run(cfg);
  REQUIRE(traj.milestones.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    std::int64_t t = cfg.milestones[i];
    auto short_cfg = cfg;
    short_cfg.horizon = t;
    short_cfg.milestones.clear();
    auto short_traj = run(short_cfg);  // same seed: identical prefix
    auto avg = select(short_traj, Selector::Average);
    CHECK(traj.milestones[i].t == t);
    CHECK(traj.milestones[i].f_gap_average_iterate == avg.f_gap);
    CHECK(traj.milestones[i].min_grad_norm_sq == short_traj.best_grad_norm_sq);
    CHECK(traj.milestones[i].liminf_stat == short_traj.liminf_stat);
  }
}

TEST_CASE("divergence is reported as a numerical failure with the failing step") {
  // Constant stepsize c with c*M > 2 on a quadratic diverges geometrically.
  auto obj = make_quadratic(1, {2.0}, {0.0}, 0);
  auto cfg = basic_config(obj, StepsizeConfig::poly(0.0, 3.0), {1.0}, 2000);
  auto traj = run(cfg);
  CHECK(traj.status == RunStatus::NumericalFailure);
  CHECK(traj.failed_at > 0);
  CHECK(traj.failed_at <= 2000);
  CHECK(traj.horizon < 2000);
  CHECK_FALSE(traj.checkpoints.empty());  // partial trajectory survives
  CHECK_THROWS_AS(select(traj, Selector::Last), NumericalError);
}

TEST_CASE("biased variant differs from the delayed one on the same stream") {
  auto obj = make_quadratic(1, {2.0}, {0.0}, 0);
  auto delayed = run(basic_config(
      obj, StepsizeConfig::global_adagrad(1.0, 4.0, 0.0), {1.0}, 50, 3,
      NoiseModel::bounded_sphere(1.0)));
  auto biased = run(basic_config(
      obj, StepsizeConfig::biased_global_adagrad(1.0, 4.0, 0.0), {1.0}, 50, 3,
      NoiseModel::bounded_sphere(1.0)));
  CHECK(delayed.status == RunStatus::Ok);
  CHECK(biased.status == RunStatus::Ok);
  CHECK(delayed.last_x[0] != biased.last_x[0]);
}

TEST_CASE("run config validation") {
  auto obj = make_quadratic(2, {1.0, 2.0}, {0.0, 0.0}, 0);
  RunConfig rc;
  CHECK_THROWS_AS(run(rc), ConfigError);  // no objective
  rc = basic_config(obj, StepsizeConfig::poly(0.0, 0.1), {1.0}, 10);
  CHECK_THROWS_AS(run(rc), ConfigError);  // x0 dimension mismatch
  rc.x0 = {1.0, 1.0};
  rc.horizon = 0;
  CHECK_THROWS_AS(run(rc), ConfigError);
  rc.horizon = 10;
  rc.milestones = {5, 5};
  CHECK_THROWS_AS(run(rc), ConfigError);  // not strictly increasing
  rc.milestones = {5, 20};
  CHECK_THROWS_AS(run(rc), ConfigError);  // beyond horizon
  rc.milestones = {5, 10};
  CHECK_NOTHROW(run(rc));
}

TEST_CASE("biased-step monte carlo estimator") {
  Rng rng(101, 0);
  SUBCASE("noiseless case is exactly positive") {
    auto est = run_biased_step(1.0, 0.0, 10.0, 1.0, 0.0, rng, 100);
    CHECK(est.mean == doctest::Approx(1.0 / std::sqrt(11.0)).epsilon(1e-15));
    CHECK(est.std_error == 0.0);
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(run_biased_step(1.0, 1.0, 0.0, 1.0, 0.0, rng, 100), ConfigError);
    CHECK_THROWS_AS(run_biased_step(1.0, 1.0, 1.0, 1.0, 0.0, rng, 0), ConfigError);
  }
}

TEST_CASE("descent and bounded-sum inequalities hold in monte carlo mean") {
  // E[sum_t <grad, eta grad>] <= f(x1) - f* + (M/2) E[sum_t ||eta g||^2]
  // and, for eps > 0 global stepsizes,
  // E[sum eta^2 ||g||^2] <= K + (4a^2/b^(1+2e))(1+lnT) s^2
  //                          + (4a/b^(1/2+e)) E[sum eta ||grad||^2].
  auto obj = make_quadratic(3, {1.0, 2.0, 4.0}, {0.0, 0.0, 0.0}, 17);
  const double m = obj->constants().smoothness;
  const double alpha = 0.4, beta = 2.0, eps = 0.2, radius = 1.0;
  const std::int64_t horizon = 200;
  const int n_runs = 100;
  const double f_gap0 = obj->eval({1.0, 1.0, 1.0});

  for (auto step : {StepsizeConfig::global_adagrad(alpha, beta, eps),
                    StepsizeConfig::coord_adagrad(alpha, beta, eps)}) {
    std::vector<double> descent_excess;
    std::vector<double> bss_excess;
    for (int i = 0; i < n_runs; ++i) {
      auto cfg = basic_config(obj, step, {1.0, 1.0, 1.0}, horizon, 1000 + i,
                              NoiseModel::bounded_sphere(radius));
      auto traj = run(cfg);
      REQUIRE(traj.status == RunStatus::Ok);
      descent_excess.push_back(traj.sum_eta_dir_grad -
                               0.5 * m * traj.sum_eta_sq_g_sq);
      bss_excess.push_back(traj.sum_eta_sq_g_sq -
                           (4.0 * alpha / std::pow(beta, 0.5 + eps)) *
                               traj.sum_eta_dir_grad);
    }
    auto descent = testing::mean_std_err(descent_excess);
    CHECK(descent.mean <= f_gap0 + 3.0 * descent.std_error);

    auto bss = testing::mean_std_err(bss_excess);
    double sigma_sq = radius * radius;  // valid H4' scale for bounded noise
    double dim_factor = step.is_coordinate_wise() ? 3.0 : 1.0;
    double rhs = dim_factor * (alpha * alpha /
                                   (2.0 * eps * std::pow(beta, 2.0 * eps)) +
                               (4.0 * alpha * alpha / std::pow(beta, 1.0 + 2.0 * eps)) *
                                   (1.0 + std::log(static_cast<double>(horizon))) *
                                   sigma_sq);
    CHECK(bss.mean <= rhs + 3.0 * bss.std_error);
  }
}
