#include "qew/config.hpp"

#include <cmath>

namespace qew::config {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw ConfigError(where + ": " + why);
}

const json& block(const json& root, const std::string& name) {
  if (!root.is_object()) fail("config", "document root must be a JSON object");
  const auto it = root.find(name);
  if (it == root.end()) fail(name, "missing configuration block");
  if (!it->is_object()) fail(name, "block must be a JSON object");
  return *it;
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(where + "." + key, "unknown field");
  }
}

double get_number(const json& j, const std::string& where, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) fail(where + "." + field, "required field missing");
  if (!it->is_number()) fail(where + "." + field, "must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) fail(where + "." + field, "must be finite");
  return v;
}

double get_number_or(const json& j, const std::string& where, const char* field, double dflt) {
  return j.contains(field) ? get_number(j, where, field) : dflt;
}

long long get_integer(const json& j, const std::string& where, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) fail(where + "." + field, "required field missing");
  if (!it->is_number_integer()) fail(where + "." + field, "must be an integer");
  return it->get<long long>();
}

long long get_integer_in(const json& j, const std::string& where, const char* field,
                         long long lo, long long hi) {
  const long long v = get_integer(j, where, field);
  if (v < lo || v > hi)
    fail(where + "." + field,
         "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

std::uint64_t get_seed_or(const json& j, const std::string& where, const char* field,
                          std::uint64_t dflt) {
  if (!j.contains(field)) return dflt;
  const auto& v = j.at(field);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
    fail(where + "." + field, "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> parse_grid(const json& j, const std::string& where, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) fail(where + "." + std::string(field), "required field missing");
  std::vector<double> grid;
  if (it->is_array()) {
    for (const auto& v : *it) {
      if (!v.is_number() || !std::isfinite(v.get<double>()))
        fail(where + "." + field, "grid entries must be finite numbers");
      grid.push_back(v.get<double>());
    }
  } else if (it->is_object()) {
    const std::string w = where + "." + field;
    reject_unknown(*it, w, {"from", "to", "step"});
    const double from = get_number(*it, w, "from");
    const double to = get_number(*it, w, "to");
    const double step = get_number_or(*it, w, "step", 1.0);
    if (step <= 0.0) fail(w + ".step", "must be positive");
    if (to < from) fail(w, "'to' must be >= 'from'");
    if ((to - from) / step > 1e6) fail(w, "grid too large");
    for (double v = from; v <= to + 1e-12 * std::max(1.0, std::abs(to)); v += step)
      grid.push_back(v);
  } else {
    fail(where + "." + field, "must be an array of numbers or {from, to, step}");
  }
  if (grid.empty()) fail(where + "." + field, "grid must be non-empty");
  for (double v : grid)
    if (v < 0.0) fail(where + "." + field, "forces must be >= 0");
  return grid;
}

dynamics::SimConfig parse_sim_fields(const json& j, const std::string& where, bool want_force) {
  dynamics::SimConfig sim;
  sim.d = static_cast<int>(get_integer_in(j, where, "d", 1, lattice::kMaxDim));
  sim.N = static_cast<int>(get_integer_in(j, where, "N", 2, 1 << 20));
  if (want_force) {
    sim.F = get_number(j, where, "F");
    if (sim.F < 0.0) fail(where + ".F", "must be >= 0");
  }
  sim.T = get_number(j, where, "T");
  if (sim.T <= 0.0) fail(where + ".T", "must be positive");
  sim.record_interval = get_number(j, where, "record_interval");
  if (sim.record_interval <= 0.0 || sim.record_interval > sim.T)
    fail(where + ".record_interval", "must lie in (0, T]");
  if (j.contains("dt")) {
    const double dt = get_number(j, where, "dt");
    if (dt <= 0.0) fail(where + ".dt", "must be positive");
    sim.dt = dt;
  }
  sim.tracked_site = 0;
  if (j.contains("tracked_site"))
    sim.tracked_site =
        static_cast<std::size_t>(get_integer_in(j, where, "tracked_site", 0, 1LL << 40));
  sim.distribution = parse_distribution(
      j.contains("distribution") ? j.at("distribution") : json::object(),
      where + ".distribution");
  return sim;
}

std::vector<std::uint64_t> parse_seeds(const json& j, const std::string& where) {
  const auto it = j.find("seeds");
  if (it == j.end()) fail(where + ".seeds", "required field missing");
  if (!it->is_array() || it->empty())
    fail(where + ".seeds", "must be a non-empty array of non-negative integers");
  std::vector<std::uint64_t> seeds;
  for (const auto& v : *it) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<long long>() < 0))
      fail(where + ".seeds", "must be a non-empty array of non-negative integers");
    seeds.push_back(v.get<std::uint64_t>());
  }
  return seeds;
}

}  // namespace

disorder::ObstacleDistribution parse_distribution(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object with a 'kind' field");
  if (j.empty()) return disorder::ObstacleDistribution::zero();
  const auto it = j.find("kind");
  if (it == j.end() || !it->is_string()) fail(where + ".kind", "required string field");
  const std::string kind = it->get<std::string>();
  try {
    if (kind == "zero") {
      reject_unknown(j, where, {"kind"});
      return disorder::ObstacleDistribution::zero();
    }
    if (kind == "constant") {
      reject_unknown(j, where, {"kind", "s"});
      return disorder::ObstacleDistribution::constant(get_number(j, where, "s"));
    }
    if (kind == "uniform") {
      reject_unknown(j, where, {"kind", "a", "b"});
      return disorder::ObstacleDistribution::uniform(get_number(j, where, "a"),
                                                     get_number(j, where, "b"));
    }
    if (kind == "exponential") {
      reject_unknown(j, where, {"kind", "rate"});
      return disorder::ObstacleDistribution::exponential(get_number(j, where, "rate"));
    }
    if (kind == "bernoulli") {
      reject_unknown(j, where, {"kind", "p", "s"});
      return disorder::ObstacleDistribution::bernoulli_scaled(get_number(j, where, "p"),
                                                              get_number(j, where, "s"));
    }
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(where + ".kind",
       "unknown kind '" + kind + "' (zero | constant | uniform | exponential | bernoulli)");
}

SimulateConfig parse_simulate(const json& root) {
  const json& j = block(root, "simulate");
  reject_unknown(j, "simulate",
                 {"d", "N", "F", "T", "record_interval", "dt", "tracked_site", "distribution",
                  "seeds", "lambda"});
  SimulateConfig c;
  c.sim = parse_sim_fields(j, "simulate", true);
  c.seeds = parse_seeds(j, "simulate");
  if (j.contains("lambda")) {
    const double lambda = get_number(j, "simulate", "lambda");
    if (lambda <= 0.0) fail("simulate.lambda", "must be positive");
    if (!c.sim.distribution.has_exponential_moment(lambda))
      fail("simulate.lambda", "exponential moment diverges for this distribution");
    c.lambda = lambda;
  }
  return c;
}

BoundConfig parse_bound(const json& root) {
  const json& j = block(root, "bound");
  reject_unknown(j, "bound", {"lambda", "beta", "distribution", "d", "F_grid"});
  BoundConfig c;
  c.lambda = get_number_or(j, "bound", "lambda", 1.0);
  if (c.lambda <= 0.0) fail("bound.lambda", "must be positive");
  c.d = static_cast<int>(get_integer_in(j, "bound", "d", 1, lattice::kMaxDim));
  if (j.contains("beta") && j.contains("distribution"))
    fail("bound", "give either 'beta' or 'distribution', not both");
  if (j.contains("beta")) {
    const double beta = get_number(j, "bound", "beta");
    if (beta < 1.0) fail("bound.beta", "must be >= 1");
    c.beta = beta;
  } else if (j.contains("distribution")) {
    c.distribution = parse_distribution(j.at("distribution"), "bound.distribution");
    if (!c.distribution->has_exponential_moment(c.lambda))
      fail("bound.distribution",
           "exponential moment diverges at this lambda (need lambda < rate)");
  } else {
    fail("bound", "give either 'beta' or 'distribution'");
  }
  c.F_grid = parse_grid(j, "bound", "F_grid");
  return c;
}

EnumerateConfig parse_enumerate(const json& root) {
  const json& j = block(root, "enumerate");
  reject_unknown(j, "enumerate", {"k", "d", "A", "F", "seed", "distribution", "lambda", "mu"});
  EnumerateConfig c;
  c.k = static_cast<int>(get_integer_in(j, "enumerate", "k", 1, 8));
  c.d = static_cast<int>(get_integer_in(j, "enumerate", "d", 1, lattice::kMaxDim));
  c.A = get_integer_in(j, "enumerate", "A", 0, 200);
  c.F = get_integer_in(j, "enumerate", "F", 0, 1000000);
  c.seed = get_seed_or(j, "enumerate", "seed", 1);
  c.distribution = parse_distribution(
      j.contains("distribution") ? j.at("distribution") : json::object(),
      "enumerate.distribution");
  c.lambda = get_number_or(j, "enumerate", "lambda", 1.0);
  c.mu = get_number_or(j, "enumerate", "mu", c.lambda + 1.0);
  if (c.lambda <= 0.0) fail("enumerate.lambda", "must be positive");
  if (c.mu <= c.lambda) fail("enumerate.mu", "must exceed lambda");
  return c;
}

VerifyConfig parse_verify(const json& root) {
  const json& j = block(root, "verify");
  reject_unknown(j, "verify", {"seed", "resamples", "corrupt_divergence", "instances"});
  VerifyConfig c;
  c.seed = get_seed_or(j, "verify", "seed", 1);
  c.resamples = static_cast<std::size_t>(get_integer_in(j, "verify", "resamples", 10, 1000000));
  if (!j.contains("resamples")) c.resamples = 400;
  if (j.contains("corrupt_divergence")) {
    if (!j.at("corrupt_divergence").is_boolean())
      fail("verify.corrupt_divergence", "must be a boolean");
    c.corrupt_divergence = j.at("corrupt_divergence").get<bool>();
  }
  if (j.contains("instances")) {
    if (!j.at("instances").is_array() || j.at("instances").empty())
      fail("verify.instances", "must be a non-empty array");
    std::size_t idx = 0;
    for (const auto& ij : j.at("instances")) {
      const std::string where = "verify.instances[" + std::to_string(idx++) + "]";
      if (!ij.is_object()) fail(where, "must be an object");
      reject_unknown(ij, where, {"k", "d", "A", "F", "lambda", "mu", "seed", "distribution"});
      VerifyInstance inst;
      inst.k = static_cast<int>(get_integer_in(ij, where, "k", 1, 8));
      inst.d = static_cast<int>(get_integer_in(ij, where, "d", 1, lattice::kMaxDim));
      inst.A = get_integer_in(ij, where, "A", 0, 200);
      inst.F = get_integer_in(ij, where, "F", 0, 1000000);
      inst.lambda = get_number_or(ij, where, "lambda", 1.0);
      inst.mu = get_number_or(ij, where, "mu", inst.lambda + 1.0);
      if (inst.lambda <= 0.0) fail(where + ".lambda", "must be positive");
      if (inst.mu <= inst.lambda) fail(where + ".mu", "must exceed lambda");
      inst.seed = get_seed_or(ij, where, "seed", c.seed);
      inst.distribution = parse_distribution(
          ij.contains("distribution") ? ij.at("distribution") : json::object(),
          where + ".distribution");
      c.instances.push_back(inst);
    }
  }
  return c;
}

SweepConfig parse_sweep(const json& root) {
  const json& j = block(root, "sweep");
  reject_unknown(j, "sweep",
                 {"d", "N", "T", "record_interval", "dt", "tracked_site", "distribution",
                  "seeds", "lambda", "F_grid"});
  SweepConfig c;
  c.base.sim = parse_sim_fields(j, "sweep", false);
  c.base.seeds = parse_seeds(j, "sweep");
  c.F_grid = parse_grid(j, "sweep", "F_grid");
  c.lambda = get_number_or(j, "sweep", "lambda", 1.0);
  if (c.lambda <= 0.0) fail("sweep.lambda", "must be positive");
  if (!c.base.sim.distribution.has_exponential_moment(c.lambda))
    fail("sweep.lambda", "exponential moment diverges for this distribution");
  c.base.lambda = c.lambda;
  return c;
}

json distribution_to_json(const disorder::ObstacleDistribution& dist) {
  json j;
  switch (dist.kind) {
    case disorder::DistKind::zero:
      j["kind"] = "zero";
      break;
    case disorder::DistKind::constant:
      j["kind"] = "constant";
      j["s"] = dist.s;
      break;
    case disorder::DistKind::uniform:
      j["kind"] = "uniform";
      j["a"] = dist.a;
      j["b"] = dist.b;
      break;
    case disorder::DistKind::exponential:
      j["kind"] = "exponential";
      j["rate"] = dist.rate;
      break;
    case disorder::DistKind::bernoulli_scaled:
      j["kind"] = "bernoulli";
      j["p"] = dist.p;
      j["s"] = dist.s;
      break;
  }
  return j;
}

json simulate_to_json(const SimulateConfig& c) {
  json j;
  j["d"] = c.sim.d;
  j["N"] = c.sim.N;
  j["F"] = c.sim.F;
  j["T"] = c.sim.T;
  j["record_interval"] = c.sim.record_interval;
  if (c.sim.dt) j["dt"] = *c.sim.dt;
  j["tracked_site"] = c.sim.tracked_site;
  j["distribution"] = distribution_to_json(c.sim.distribution);
  j["seeds"] = c.seeds;
  if (c.lambda) j["lambda"] = *c.lambda;
  return j;
}

}  // namespace qew::config
