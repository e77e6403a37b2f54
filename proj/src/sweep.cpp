#include "adastep/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "adastep/errors.hpp"

namespace adastep {

using nlohmann::json;

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

NoiseModel noise_at_sigma(const NoiseModel& family, double sigma) {
  if (sigma == 0.0) return NoiseModel::none();
  switch (family.kind) {
    case NoiseKind::BoundedSphere: return NoiseModel::bounded_sphere(sigma);
    case NoiseKind::Gaussian: return NoiseModel::gaussian(sigma);
    case NoiseKind::ThreePoint: return NoiseModel::three_point(sigma);
    case NoiseKind::None:
      throw ConfigError("sweep: non-zero sigma requires a noise kind other than 'none'");
  }
  return NoiseModel::none();
}

double metric_value(const MilestoneRow& row, SweepMetric metric) {
  return metric == SweepMetric::FGapAverage ? row.f_gap_average_iterate
                                            : row.min_grad_norm_sq;
}

void open_or_throw(std::ofstream& out, const std::string& path) {
  out.open(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, int workers) {
  if (!config.sweep) throw ConfigError("config: 'sweep' section is missing");
  const SweepSection& sw = *config.sweep;
  ObjectivePtr objective = config.objective.build();

  SweepResult result;
  result.sigmas = sw.sigmas;
  result.seeds = sw.resolved_seeds();
  std::sort(result.seeds.begin(), result.seeds.end());
  result.horizons = sw.horizons;
  result.metric = sw.metric;

  const std::int64_t t_max = sw.horizons.back();
  const std::size_t n_cells = result.sigmas.size() * result.seeds.size();
  result.cells.resize(n_cells);

  auto run_cell = [&](std::size_t index) {
    std::size_t si = index / result.seeds.size();
    std::size_t ki = index % result.seeds.size();
    CellResult& cell = result.cells[index];
    cell.sigma = result.sigmas[si];
    cell.seed = result.seeds[ki];

    RunConfig rc;
    rc.objective = objective;
    rc.noise = noise_at_sigma(config.noise, cell.sigma);
    rc.stepsize = config.stepsize;
    rc.x0 = sw.x0;
    rc.horizon = t_max;
    rc.seed = cell.seed;
    rc.record_stride = t_max;  // aggregates and milestones only
    rc.milestones = sw.horizons;
    Trajectory traj = run(rc);

    cell.status = traj.status;
    cell.failed_at = traj.failed_at;
    cell.milestones = traj.milestones;
    if (!traj.checkpoints.empty()) {
      cell.last_finite_f_gap = traj.checkpoints.back().f_gap;
      cell.last_finite_grad_norm_sq = traj.checkpoints.back().grad_norm_sq;
    }
  };

  int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(n_cells)));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < n_cells; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n_cells; i = next.fetch_add(1)) {
          run_cell(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& cell : result.cells) {
    if (cell.status != RunStatus::Ok) ++result.n_failed;
  }

  // Per-sigma rate fits: mean metric over seeds at each horizon, then a
  // log-log fit. Cells are already seed-ascending, so the reduction order is
  // independent of how the config listed the seeds.
  for (std::size_t si = 0; si < result.sigmas.size(); ++si) {
    SigmaRate rate;
    rate.sigma = result.sigmas[si];
    rate.metric = to_string(sw.metric);
    std::vector<std::pair<double, double>> points;
    int n_ok = 0;
    for (std::size_t hi = 0; hi < sw.horizons.size(); ++hi) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t ki = 0; ki < result.seeds.size(); ++ki) {
        const CellResult& cell = result.cells[si * result.seeds.size() + ki];
        if (cell.status != RunStatus::Ok) continue;
        sum += metric_value(cell.milestones[hi], sw.metric);
        ++count;
      }
      if (count > 0) {
        points.emplace_back(static_cast<double>(sw.horizons[hi]), sum / count);
      }
      n_ok = count;
    }
    rate.n_seeds = n_ok;
    try {
      RateEstimate est = fit_rate(points, rate.metric);
      rate.slope = est.slope;
      rate.r_squared = est.r_squared;
      rate.ok = true;
    } catch (const ConfigError&) {
      rate.slope = std::nan("");
      rate.r_squared = std::nan("");
      rate.ok = false;
    }
    result.rates.push_back(rate);
  }

  // Per-sigma theorem-bound reports at the largest horizon. The convex bound
  // needs a known minimizer; the nonconvex one only smoothness.
  for (std::size_t si = 0; si < result.sigmas.size(); ++si) {
    SigmaBound sb;
    sb.sigma = result.sigmas[si];
    if (config.stepsize.variant != StepsizeVariant::GlobalAdaGrad) {
      sb.applicable = false;
      sb.note = "bounds are stated for the global_adagrad stepsize";
      result.bounds.push_back(sb);
      continue;
    }
    // The average-iterate bound needs a known minimizer; every smooth
    // objective with a known infimum gets the best-iterate bound instead.
    BoundKind kind;
    if (objective->constants().x_star.has_value() &&
        objective->kind() == ObjectiveKind::Quadratic) {
      kind = BoundKind::Convex;
      sb.theorem = "convex";
    } else {
      kind = BoundKind::Nonconvex;
      sb.theorem = "nonconvex";
    }

    NoiseModel cell_noise = noise_at_sigma(config.noise, sb.sigma);
    TheoremParams params;
    params.alpha = config.stepsize.alpha;
    params.beta = config.stepsize.beta;
    params.epsilon = config.stepsize.epsilon;
    params.smoothness = objective->constants().smoothness;
    params.sigma = cell_noise.kind == NoiseKind::None ? 0.0 : cell_noise.subgaussian_sigma();
    params.horizon = static_cast<double>(t_max);
    if (kind == BoundKind::Convex) {
      params.x0_distance = objective->dist_to_minimizer(sw.x0);
    } else {
      params.f_gap0 = objective->eval(sw.x0) - objective->constants().f_star;
    }
    sb.params = params;
    sb.bound = kind == BoundKind::Convex ? theorem_convex_bound(params)
                                         : theorem_nonconvex_bound(params);
    sb.applicable = true;
    if (!sb.bound.valid_regime) {
      sb.note = "invalid-regime: theorem precondition violated";
      result.bounds.push_back(sb);
      continue;
    }

    double moment = 0.5 - params.epsilon;
    double sum = 0.0, sum_sq = 0.0;
    int n = 0;
    for (std::size_t ki = 0; ki < result.seeds.size(); ++ki) {
      const CellResult& cell = result.cells[si * result.seeds.size() + ki];
      if (cell.status != RunStatus::Ok) continue;
      const MilestoneRow& last = cell.milestones.back();
      double base = kind == BoundKind::Convex ? last.f_gap_average_iterate
                                              : last.min_grad_norm_sq;
      double v = std::pow(base, moment);
      sum += v;
      sum_sq += v * v;
      ++n;
    }
    sb.n_seeds = n;
    if (n > 0) {
      sb.lhs_mean = sum / n;
      double var = n > 1 ? (sum_sq - sum * sum / n) / (n - 1) : 0.0;
      sb.lhs_std_error = var > 0.0 ? std::sqrt(var / n) : 0.0;
      sb.satisfied = sb.lhs_mean <= sb.bound.rhs + 3.0 * sb.lhs_std_error;
    }
    result.bounds.push_back(sb);
  }

  return result;
}

Trajectory run_single(const ExperimentConfig& config) {
  if (!config.run) throw ConfigError("config: 'run' section is missing");
  RunConfig rc;
  rc.objective = config.objective.build();
  rc.noise = config.noise;
  rc.stepsize = config.stepsize;
  rc.x0 = config.run->x0;
  rc.horizon = config.run->horizon;
  rc.seed = config.run->seed;
  rc.record_stride = config.run->record_stride;
  return run(rc);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "t,f_gap,grad_norm_sq,eta_min,eta_max,liminf_stat\n";
  for (const auto& row : traj.checkpoints) {
    out << row.t << ',' << g17(row.f_gap) << ',' << g17(row.grad_norm_sq) << ','
        << g17(row.eta_min) << ',' << g17(row.eta_max) << ','
        << g17(row.liminf_stat) << '\n';
  }
}

namespace {

json selection_to_json(const Trajectory& traj, Selector which) {
  Selection sel = select(traj, which);
  json j;
  j["t"] = sel.t;
  j["f_gap"] = sel.f_gap;
  j["grad_norm_sq"] = sel.grad_norm_sq;
  j["x"] = sel.x;
  return j;
}

}  // namespace

void write_run_summary_json(const Trajectory& traj, const std::string& path) {
  json j;
  j["status"] = traj.status == RunStatus::Ok ? "ok" : "numerical_failure";
  j["horizon"] = traj.horizon;
  if (traj.status == RunStatus::Ok) {
    j["last"] = selection_to_json(traj, Selector::Last);
    j["average"] = selection_to_json(traj, Selector::Average);
    j["best_gradient"] = selection_to_json(traj, Selector::BestGradient);
    j["liminf_stat"] = traj.liminf_stat;
  } else {
    j["failed_at"] = traj.failed_at;
    if (!traj.checkpoints.empty()) {
      j["last_finite_f_gap"] = traj.checkpoints.back().f_gap;
      j["last_finite_grad_norm_sq"] = traj.checkpoints.back().grad_norm_sq;
    }
  }
  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << '\n';
}

void write_run_manifest(const ExperimentConfig& config, const Trajectory& traj,
                        double wall_seconds, const std::string& path) {
  json j;
  j["config_hash"] = config_hash(config);
  j["version"] = kVersion;
  j["wall_time_s"] = wall_seconds;
  j["trajectory_rows"] = traj.checkpoints.size();
  j["status"] = traj.status == RunStatus::Ok ? "ok" : "numerical_failure";
  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << '\n';
}

void write_metrics_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "sigma,seed,T,metric,value,status\n";
  const std::string metric = to_string(result.metric);
  for (const auto& cell : result.cells) {
    for (const auto& row : cell.milestones) {
      out << g17(cell.sigma) << ',' << cell.seed << ',' << row.t << ',' << metric
          << ',' << g17(metric_value(row, result.metric)) << ",ok\n";
    }
    if (cell.status != RunStatus::Ok) {
      double last = result.metric == SweepMetric::FGapAverage
                        ? cell.last_finite_f_gap
                        : cell.last_finite_grad_norm_sq;
      out << g17(cell.sigma) << ',' << cell.seed << ',' << cell.failed_at << ','
          << metric << ',' << g17(last) << ",failed\n";
    }
  }
}

void write_rates_csv(const std::vector<SigmaRate>& rates, const std::string& path) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "sigma,metric,slope,r_squared,n_seeds\n";
  for (const auto& r : rates) {
    out << g17(r.sigma) << ',' << r.metric << ',' << g17(r.slope) << ','
        << g17(r.r_squared) << ',' << r.n_seeds << '\n';
  }
}

namespace {

json bound_to_json(const SigmaBound& sb) {
  json j;
  j["sigma"] = sb.sigma;
  j["applicable"] = sb.applicable;
  if (!sb.note.empty()) j["note"] = sb.note;
  if (!sb.applicable) return j;
  j["theorem"] = sb.theorem;
  j["valid_regime"] = sb.bound.valid_regime;
  j["params"] = {{"alpha", sb.params.alpha},       {"beta", sb.params.beta},
                 {"epsilon", sb.params.epsilon},   {"smoothness", sb.params.smoothness},
                 {"sigma", sb.params.sigma},       {"horizon", sb.params.horizon},
                 {"x0_distance", sb.params.x0_distance}, {"f_gap0", sb.params.f_gap0}};
  if (!sb.bound.valid_regime) return j;
  j["gamma"] = sb.bound.gamma;
  j["rhs"] = sb.bound.rhs;
  j["lhs_mean"] = sb.lhs_mean;
  j["lhs_std_error"] = sb.lhs_std_error;
  j["n_seeds"] = sb.n_seeds;
  j["satisfied"] = sb.satisfied;
  json markov;
  for (double delta : {0.5, 0.1, 0.05}) {
    markov[g17(delta)] = sb.bound.markov(delta);
  }
  j["markov_bounds"] = markov;
  return j;
}

}  // namespace

void write_bounds_json(const SweepResult& result, const std::string& path) {
  json arr = json::array();
  for (const auto& sb : result.bounds) arr.push_back(bound_to_json(sb));
  std::ofstream out;
  open_or_throw(out, path);
  out << arr.dump(2) << '\n';
}

void write_sweep_manifest(const ExperimentConfig& config, const SweepResult& result,
                          double wall_seconds, const std::string& path) {
  json j;
  j["config_hash"] = config_hash(config);
  j["version"] = kVersion;
  j["wall_time_s"] = wall_seconds;
  j["n_cells"] = result.cells.size();
  j["n_failed"] = result.n_failed;
  j["horizons"] = result.horizons;
  j["files"] = {"metrics.csv", "rates.csv", "bounds.json"};
  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << '\n';
}

std::vector<SigmaRate> refit_rates_from_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("rates: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "sigma,seed,T,metric,value,status") {
    throw ConfigError("rates: '" + path + "' is not a metrics.csv file");
  }
  // (sigma, T) -> seed-keyed values; keys are ordered so the refit is
  // deterministic whatever the row order.
  std::map<double, std::map<std::int64_t, std::map<std::uint64_t, double>>> table;
  std::map<double, std::string> metric_names;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string sigma_s, seed_s, t_s, metric_s, value_s, status_s;
    if (!std::getline(row, sigma_s, ',') || !std::getline(row, seed_s, ',') ||
        !std::getline(row, t_s, ',') || !std::getline(row, metric_s, ',') ||
        !std::getline(row, value_s, ',') || !std::getline(row, status_s)) {
      throw ConfigError("rates: malformed row '" + line + "'");
    }
    if (status_s != "ok") continue;
    double sigma = std::stod(sigma_s);
    table[sigma][std::stoll(t_s)][std::stoull(seed_s)] = std::stod(value_s);
    metric_names[sigma] = metric_s;
  }
  std::vector<SigmaRate> rates;
  for (const auto& [sigma, horizons] : table) {
    SigmaRate rate;
    rate.sigma = sigma;
    rate.metric = metric_names[sigma];
    std::vector<std::pair<double, double>> points;
    int n_seeds = 0;
    for (const auto& [t, by_seed] : horizons) {
      double sum = 0.0;
      for (const auto& [seed, value] : by_seed) sum += value;
      points.emplace_back(static_cast<double>(t),
                          sum / static_cast<double>(by_seed.size()));
      n_seeds = static_cast<int>(by_seed.size());
    }
    rate.n_seeds = n_seeds;
    try {
      RateEstimate est = fit_rate(points, rate.metric);
      rate.slope = est.slope;
      rate.r_squared = est.r_squared;
      rate.ok = true;
    } catch (const ConfigError&) {
      rate.slope = std::nan("");
      rate.r_squared = std::nan("");
      rate.ok = false;
    }
    rates.push_back(rate);
  }
  return rates;
}

void write_lemma_report(const LemmaReport& report, const std::string& text_path,
                        const std::string& json_path) {
  std::ofstream txt;
  open_or_throw(txt, text_path);
  json arr = json::array();
  for (const auto& c : report.checks) {
    txt << c.name << ": " << c.instances << " instances, " << c.violations
        << " violations, worst relative excess " << g17(c.worst_violation) << '\n';
    if (!c.counterexample.empty()) {
      txt << "  counterexample: " << c.counterexample << '\n';
    }
    json j;
    j["name"] = c.name;
    j["instances"] = c.instances;
    j["violations"] = c.violations;
    j["worst_violation"] = c.worst_violation;
    if (!c.counterexample.empty()) j["counterexample"] = c.counterexample;
    arr.push_back(j);
  }
  txt << (report.all_passed() ? "PASS" : "FAIL") << '\n';
  std::ofstream js;
  open_or_throw(js, json_path);
  js << arr.dump(2) << '\n';
}

}  // namespace adastep
