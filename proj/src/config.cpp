#include "adastep/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "adastep/errors.hpp"

namespace adastep {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& key : required) {
    if (!obj.contains(key)) {
      throw ConfigError("config: missing key '" + key + "' in '" + where + "'");
    }
  }
  for (const auto& [key, value] : obj.items()) {
    if (!required.count(key) && !optional.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' in '" + where + "'");
    }
  }
}

double get_number(const json& obj, const std::string& where, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError("config: '" + where + "." + key + "' must be a number");
  }
  return v.get<double>();
}

std::int64_t get_int(const json& obj, const std::string& where, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("config: '" + where + "." + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

Vector get_vector(const json& obj, const std::string& where, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_array()) {
    throw ConfigError("config: '" + where + "." + key + "' must be an array of numbers");
  }
  Vector out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) {
      throw ConfigError("config: '" + where + "." + key + "' must contain numbers only");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

ObjectiveConfig parse_objective(const json& obj) {
  ObjectiveConfig out;
  if (!obj.is_object() || !obj.contains("kind")) {
    throw ConfigError("config: missing key 'kind' in 'objective'");
  }
  std::string kind = obj.at("kind").get<std::string>();
  if (kind == "quadratic") {
    out.kind = ObjectiveKind::Quadratic;
    require_keys(obj, "objective", {"kind", "dim", "eigenvalues", "x_star"},
                 {"rotation_seed"});
    out.dim = static_cast<int>(get_int(obj, "objective", "dim"));
    out.eigenvalues = get_vector(obj, "objective", "eigenvalues");
    out.x_star = get_vector(obj, "objective", "x_star");
    if (obj.contains("rotation_seed")) {
      out.rotation_seed = static_cast<std::uint64_t>(get_int(obj, "objective", "rotation_seed"));
    }
  } else if (kind == "logistic") {
    out.kind = ObjectiveKind::Logistic;
    require_keys(obj, "objective", {"kind", "dim", "n_samples", "data_seed"});
    out.dim = static_cast<int>(get_int(obj, "objective", "dim"));
    out.n_samples = static_cast<int>(get_int(obj, "objective", "n_samples"));
    out.data_seed = static_cast<std::uint64_t>(get_int(obj, "objective", "data_seed"));
  } else if (kind == "smooth_nonconvex") {
    out.kind = ObjectiveKind::SmoothNonconvex;
    require_keys(obj, "objective", {"kind", "dim"});
    out.dim = static_cast<int>(get_int(obj, "objective", "dim"));
  } else {
    throw ConfigError("config: unknown 'objective.kind' value '" + kind + "'");
  }
  return out;
}

NoiseModel parse_noise(const json& obj) {
  if (!obj.is_object() || !obj.contains("kind")) {
    throw ConfigError("config: missing key 'kind' in 'noise'");
  }
  std::string kind = obj.at("kind").get<std::string>();
  if (kind == "none") {
    require_keys(obj, "noise", {"kind"});
    return NoiseModel::none();
  }
  if (kind == "bounded_sphere") {
    require_keys(obj, "noise", {"kind", "radius"});
    return NoiseModel::bounded_sphere(get_number(obj, "noise", "radius"));
  }
  if (kind == "gaussian") {
    require_keys(obj, "noise", {"kind", "sigma"});
    return NoiseModel::gaussian(get_number(obj, "noise", "sigma"));
  }
  if (kind == "three_point") {
    require_keys(obj, "noise", {"kind", "magnitude"});
    return NoiseModel::three_point(get_number(obj, "noise", "magnitude"));
  }
  throw ConfigError("config: unknown 'noise.kind' value '" + kind + "'");
}

StepsizeConfig parse_stepsize(const json& obj) {
  if (!obj.is_object() || !obj.contains("variant")) {
    throw ConfigError("config: missing key 'variant' in 'stepsize'");
  }
  std::string variant = obj.at("variant").get<std::string>();
  if (variant == "poly") {
    require_keys(obj, "stepsize", {"variant", "power", "scale"});
    return StepsizeConfig::poly(get_number(obj, "stepsize", "power"),
                                get_number(obj, "stepsize", "scale"));
  }
  require_keys(obj, "stepsize", {"variant", "alpha", "beta", "epsilon"});
  double alpha = get_number(obj, "stepsize", "alpha");
  double beta = get_number(obj, "stepsize", "beta");
  double epsilon = get_number(obj, "stepsize", "epsilon");
  if (variant == "global_adagrad") {
    return StepsizeConfig::global_adagrad(alpha, beta, epsilon);
  }
  if (variant == "coord_adagrad") {
    return StepsizeConfig::coord_adagrad(alpha, beta, epsilon);
  }
  if (variant == "biased_global_adagrad") {
    return StepsizeConfig::biased_global_adagrad(alpha, beta, epsilon);
  }
  throw ConfigError("config: unknown 'stepsize.variant' value '" + variant + "'");
}

RunSection parse_run(const json& obj) {
  require_keys(obj, "run", {"x0", "horizon", "seed"}, {"record_stride"});
  RunSection out;
  out.x0 = get_vector(obj, "run", "x0");
  out.horizon = get_int(obj, "run", "horizon");
  out.seed = static_cast<std::uint64_t>(get_int(obj, "run", "seed"));
  if (obj.contains("record_stride")) {
    out.record_stride = get_int(obj, "run", "record_stride");
  }
  if (out.horizon < 1) throw ConfigError("config: 'run.horizon' must be >= 1");
  if (out.record_stride < 1) throw ConfigError("config: 'run.record_stride' must be >= 1");
  return out;
}

SweepSection parse_sweep(const json& obj) {
  require_keys(obj, "sweep", {"sigmas", "horizons", "metric", "x0"},
               {"seeds", "seed_count"});
  SweepSection out;
  out.sigmas = get_vector(obj, "sweep", "sigmas");
  if (out.sigmas.empty()) throw ConfigError("config: 'sweep.sigmas' must be non-empty");
  for (double s : out.sigmas) {
    if (!(s >= 0.0)) throw ConfigError("config: 'sweep.sigmas' must be >= 0");
  }
  if (obj.contains("seeds") == obj.contains("seed_count")) {
    throw ConfigError("config: 'sweep' needs exactly one of 'seeds' or 'seed_count'");
  }
  if (obj.contains("seeds")) {
    const json& seeds = obj.at("seeds");
    if (!seeds.is_array() || seeds.empty()) {
      throw ConfigError("config: 'sweep.seeds' must be a non-empty array");
    }
    std::set<std::uint64_t> seen;
    for (const auto& e : seeds) {
      if (!e.is_number_integer()) {
        throw ConfigError("config: 'sweep.seeds' must contain integers");
      }
      auto s = e.get<std::uint64_t>();
      if (!seen.insert(s).second) {
        throw ConfigError("config: 'sweep.seeds' must be distinct");
      }
      out.seeds.push_back(s);
    }
  } else {
    int n = static_cast<int>(get_int(obj, "sweep", "seed_count"));
    if (n < 1) throw ConfigError("config: 'sweep.seed_count' must be >= 1");
    out.seed_count = n;
  }
  const json& hz = obj.at("horizons");
  if (!hz.is_array() || hz.size() < 1) {
    throw ConfigError("config: 'sweep.horizons' must be a non-empty array");
  }
  for (const auto& e : hz) {
    if (!e.is_number_integer()) {
      throw ConfigError("config: 'sweep.horizons' must contain integers");
    }
    out.horizons.push_back(e.get<std::int64_t>());
  }
  for (std::size_t i = 0; i < out.horizons.size(); ++i) {
    if (out.horizons[i] < 1 || (i > 0 && out.horizons[i] <= out.horizons[i - 1])) {
      throw ConfigError("config: 'sweep.horizons' must be strictly increasing and >= 1");
    }
  }
  std::string metric = obj.at("metric").get<std::string>();
  if (metric == "f_gap_avg") {
    out.metric = SweepMetric::FGapAverage;
  } else if (metric == "min_grad_sq") {
    out.metric = SweepMetric::MinGradNormSq;
  } else {
    throw ConfigError("config: unknown 'sweep.metric' value '" + metric + "'");
  }
  out.x0 = get_vector(obj, "sweep", "x0");
  return out;
}

}  // namespace

std::string to_string(SweepMetric metric) {
  return metric == SweepMetric::FGapAverage ? "f_gap_avg" : "min_grad_sq";
}

ObjectivePtr ObjectiveConfig::build() const {
  switch (kind) {
    case ObjectiveKind::Quadratic:
      return make_quadratic(dim, eigenvalues, x_star, rotation_seed);
    case ObjectiveKind::Logistic:
      return make_logistic(dim, n_samples, data_seed);
    case ObjectiveKind::SmoothNonconvex:
      return make_smooth_nonconvex(dim);
  }
  throw ConfigError("config: invalid objective kind");
}

std::vector<std::uint64_t> SweepSection::resolved_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int i = 1; i <= seed_count.value_or(0); ++i) out.push_back(i);
  return out;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  require_keys(doc, "(root)", {"objective", "noise", "stepsize"},
               {"run", "sweep", "output_dir", "workers"});
  ExperimentConfig out;
  out.objective = parse_objective(doc.at("objective"));
  out.noise = parse_noise(doc.at("noise"));
  out.stepsize = parse_stepsize(doc.at("stepsize"));
  if (doc.contains("run")) out.run = parse_run(doc.at("run"));
  if (doc.contains("sweep")) out.sweep = parse_sweep(doc.at("sweep"));
  if (doc.contains("output_dir")) {
    out.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("workers")) {
    int w = static_cast<int>(get_int(doc, "(root)", "workers"));
    if (w < 1) throw ConfigError("config: 'workers' must be >= 1");
    out.workers = w;
  }
  // Cross checks that need the objective's dimension.
  ObjectivePtr obj = out.objective.build();
  out.noise.validate(obj->dim());
  if (out.run && static_cast<int>(out.run->x0.size()) != obj->dim()) {
    throw ConfigError("config: 'run.x0' length must equal objective dim");
  }
  if (out.sweep && static_cast<int>(out.sweep->x0.size()) != obj->dim()) {
    throw ConfigError("config: 'sweep.x0' length must equal objective dim");
  }
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  json doc;
  json obj;
  switch (config.objective.kind) {
    case ObjectiveKind::Quadratic:
      obj["kind"] = "quadratic";
      obj["dim"] = config.objective.dim;
      obj["eigenvalues"] = config.objective.eigenvalues;
      obj["x_star"] = config.objective.x_star;
      obj["rotation_seed"] = config.objective.rotation_seed;
      break;
    case ObjectiveKind::Logistic:
      obj["kind"] = "logistic";
      obj["dim"] = config.objective.dim;
      obj["n_samples"] = config.objective.n_samples;
      obj["data_seed"] = config.objective.data_seed;
      break;
    case ObjectiveKind::SmoothNonconvex:
      obj["kind"] = "smooth_nonconvex";
      obj["dim"] = config.objective.dim;
      break;
  }
  doc["objective"] = obj;

  json noise;
  noise["kind"] = to_string(config.noise.kind);
  switch (config.noise.kind) {
    case NoiseKind::None: break;
    case NoiseKind::BoundedSphere: noise["radius"] = config.noise.scale; break;
    case NoiseKind::Gaussian: noise["sigma"] = config.noise.scale; break;
    case NoiseKind::ThreePoint: noise["magnitude"] = config.noise.scale; break;
  }
  doc["noise"] = noise;

  json step;
  step["variant"] = to_string(config.stepsize.variant);
  if (config.stepsize.variant == StepsizeVariant::PolySchedule) {
    step["power"] = config.stepsize.poly_power;
    step["scale"] = config.stepsize.poly_scale;
  } else {
    step["alpha"] = config.stepsize.alpha;
    step["beta"] = config.stepsize.beta;
    step["epsilon"] = config.stepsize.epsilon;
  }
  doc["stepsize"] = step;

  if (config.run) {
    json run;
    run["x0"] = config.run->x0;
    run["horizon"] = config.run->horizon;
    run["seed"] = config.run->seed;
    run["record_stride"] = config.run->record_stride;
    doc["run"] = run;
  }
  if (config.sweep) {
    json sweep;
    sweep["sigmas"] = config.sweep->sigmas;
    if (config.sweep->seed_count) {
      sweep["seed_count"] = *config.sweep->seed_count;
    } else {
      sweep["seeds"] = config.sweep->seeds;
    }
    sweep["horizons"] = config.sweep->horizons;
    sweep["metric"] = to_string(config.sweep->metric);
    sweep["x0"] = config.sweep->x0;
    doc["sweep"] = sweep;
  }
  doc["output_dir"] = config.output_dir;
  if (config.workers) doc["workers"] = *config.workers;
  return doc;
}

std::string config_hash(const ExperimentConfig& config) {
  std::string canonical = config_to_json(config).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int resolve_workers(const ExperimentConfig& config) {
  if (const char* env = std::getenv("ADASTEP_WORKERS")) {
    int w = std::atoi(env);
    if (w < 1) throw ConfigError("ADASTEP_WORKERS must be a positive integer");
    return w;
  }
  if (config.workers) return *config.workers;
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace adastep
