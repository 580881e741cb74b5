#include "qew/commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qew/bound.hpp"
#include "qew/config.hpp"
#include "qew/discrete.hpp"
#include "qew/disorder.hpp"
#include "qew/dynamics.hpp"
#include "qew/lattice.hpp"
#include "qew/rng.hpp"

namespace qew::commands {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Shortest round-trip decimal representation.
std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config::ConfigError("--config: cannot read " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw config::ConfigError("--config: " + path + " is not valid JSON: " + e.what());
  }
}

fs::path require_out_dir(const CommandOptions& opt) {
  const fs::path dir(opt.out_dir);
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw config::ConfigError("--out: not an existing directory: " + opt.out_dir);
  return dir;
}

void write_text(const fs::path& file, const std::string& content) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw config::ConfigError("cannot open for writing: " + file.string());
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + file.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json statistic_to_json(const dynamics::SeedStatistic& st) {
  json j;
  j["mean"] = st.mean;
  j["min"] = st.min;
  j["se"] = st.se;
  j["half_width"] = st.half_width;
  j["n"] = st.n;
  return j;
}

json bound_to_json(const bound::BoundResult& res) {
  json j;
  j["value"] = res.value;
  j["branch"] = bound::branch_name(res.branch);
  if (std::isfinite(res.mu_star)) j["mu_star"] = res.mu_star;
  return j;
}

struct SimulationBatch {
  std::vector<dynamics::IntegrateResult> runs;
  std::vector<std::uint64_t> seeds;
};

SimulationBatch run_batch(const config::SimulateConfig& c, int workers) {
  SimulationBatch batch;
  batch.seeds = c.seeds;
  dynamics::IntegrateOptions opts;
  opts.workers = workers;
  for (const std::uint64_t seed : c.seeds) {
    dynamics::SimConfig sc = c.sim;
    sc.field_seed = seed;
    const disorder::QuenchedField field(seed, sc.d, sc.distribution);
    const dynamics::Simulator sim(sc, field);
    batch.runs.push_back(sim.integrate(opts));
  }
  return batch;
}

std::string records_csv(const SimulationBatch& batch) {
  std::string csv = "seed,t,mean_udot,min_udot,mean_u_over_t,tracked_u_over_t\n";
  for (std::size_t i = 0; i < batch.runs.size(); ++i) {
    const std::string seed = std::to_string(batch.seeds[i]);
    for (const dynamics::VelocityRecord& r : batch.runs[i].records) {
      csv += seed;
      csv += ',';
      csv += fmt(r.t);
      csv += ',';
      csv += fmt(r.mean_udot);
      csv += ',';
      csv += fmt(r.min_udot);
      csv += ',';
      csv += fmt(r.mean_u_over_t);
      csv += ',';
      csv += fmt(r.tracked_u_over_t);
      csv += '\n';
    }
  }
  return csv;
}

json batch_summary(const config::SimulateConfig& c, const SimulationBatch& batch) {
  json summary;
  summary["config"]["simulate"] = config::simulate_to_json(c);

  json per_seed = json::array();
  for (std::size_t i = 0; i < batch.runs.size(); ++i) {
    const dynamics::IntegrateResult& r = batch.runs[i];
    json row;
    row["seed"] = batch.seeds[i];
    row["dt"] = r.plan.dt;
    row["steps_per_record"] = r.plan.steps_per_record;
    row["s_max"] = r.plan.s_max;
    row["stability_limit"] = r.plan.stability_limit;
    row["final_mean_u_over_t"] = r.records.back().mean_u_over_t;
    row["final_tracked_u_over_t"] = r.records.back().tracked_u_over_t;
    row["window_mean_velocity"] = r.window_mean_velocity;
    per_seed.push_back(row);
  }
  summary["per_seed"] = per_seed;

  const dynamics::VelocityStatistics stats = dynamics::velocity_statistics(batch.runs);
  summary["aggregate"]["site_mean"] = statistic_to_json(stats.site_mean);
  summary["aggregate"]["tracked"] = statistic_to_json(stats.tracked);
  summary["aggregate"]["window"] = statistic_to_json(stats.window);

  if (c.lambda) {
    const double beta = disorder::beta(c.sim.distribution, *c.lambda);
    bound::BoundParams p;
    p.lambda = *c.lambda;
    p.beta = beta;
    p.d = c.sim.d;
    p.F = c.sim.F;
    json ref = bound_to_json(bound::velocity_lower_bound(p));
    ref["lambda"] = *c.lambda;
    ref["beta"] = beta;
    ref["F"] = c.sim.F;
    summary["v_reference"] = ref;
  }
  return summary;
}

void apply_seed_override(std::vector<std::uint64_t>& seeds,
                         const std::optional<std::uint64_t>& override_seed) {
  if (override_seed) seeds = {*override_seed};
}

// ---------------------------------------------------------------------------
// verify: the oracle suite.

struct CheckOutcome {
  std::string name;
  std::string status;  // "pass" | "fail" | "skipped"
  double margin = 0.0;
  json detail;
};

CheckOutcome check_divergence(std::uint64_t seed, bool corrupt) {
  CheckOutcome out{"divergence-identity", "pass", 0.0, json::object()};
  constexpr int kCases = 100;
  long long worst = 0;
  for (int n = 0; n < kCases; ++n) {
    const int d = 1 + n % 3;
    const int k = 1 + (n / 3) % 3;
    const lattice::CubeGeom geom(k + 1, d);
    lattice::CubeField<long long> f(geom, 0);
    for (std::size_t i = 0; i < geom.size(); ++i) {
      rng::KeyedHash h(seed);
      h.feed(0x4449564944ull);  // stream tag for these test fields
      h.feed(static_cast<std::uint64_t>(n));
      h.feed(i);
      f[i] = static_cast<long long>(h.value() % 10);
    }
    const long long flux = lattice::boundary_flux(f, k);
    long long lap_sum = 0;
    const lattice::CubeGeom inner(k, d);
    for (std::size_t i = 0; i < inner.size(); ++i)
      lap_sum += lattice::laplacian(f, inner.coords(i));
    if (corrupt) lap_sum += 1;  // fault hook: the identity must now fail
    worst = std::max(worst, std::abs(flux - lap_sum));
  }
  out.margin = static_cast<double>(worst);
  out.detail["cases"] = kCases;
  if (worst != 0) out.status = "fail";
  return out;
}

CheckOutcome check_partition_sum(std::uint64_t seed) {
  CheckOutcome out{"partition-sum-identity", "pass", 0.0, json::object()};
  struct Case {
    int k, d;
    long long A, F;
  };
  const std::vector<Case> cases = {{1, 1, 1, 1}, {1, 1, 2, 2}, {2, 1, 1, 2},
                                   {2, 1, 2, 1}, {1, 2, 1, 1}};
  int ran = 0, skipped = 0;
  for (std::size_t n = 0; n < cases.size(); ++n) {
    const Case& cs = cases[n];
    const disorder::ObstacleDistribution dist =
        (n % 2 == 0) ? disorder::ObstacleDistribution::exponential(2.0)
                     : disorder::ObstacleDistribution::uniform(0.0, 2.0);
    const disorder::QuenchedField field(rng::derive_seed(seed, 0x5053ull, n), cs.d, dist);
    const discrete::FrozenDisorder fd =
        discrete::FrozenDisorder::materialize(field, cs.k + 1, cs.A);
    try {
      const discrete::PartitionSum ps =
          discrete::partition_sum(cs.k, cs.d, cs.A, fd, cs.F, 1.0, 2.0);
      out.margin = std::max(out.margin, ps.relative_gap);
      ++ran;
    } catch (const discrete::BudgetExceeded&) {
      ++skipped;
    } catch (const std::logic_error&) {
      out.status = "fail";
      out.margin = 1.0;
      ++ran;
    }
  }
  out.detail["cases"] = ran;
  out.detail["skipped"] = skipped;
  return out;
}

CheckOutcome check_supermartingale(const config::VerifyConfig& c) {
  CheckOutcome out{"supermartingale", "pass", 0.0, json::object()};
  std::vector<config::VerifyInstance> instances = c.instances;
  if (instances.empty()) {
    // Default instance grid: one-dimensional, both radii, caps 1..3.
    struct Row {
      int k;
      long long A, F;
      double mu;
      bool exponential;
    };
    const std::vector<Row> rows = {{1, 1, 1, 2.0, true},  {1, 2, 2, 1.5, false},
                                   {1, 3, 3, 2.5, true},  {2, 1, 2, 2.0, false},
                                   {2, 2, 1, 1.5, true},  {2, 3, 3, 2.0, false}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      config::VerifyInstance inst;
      inst.k = rows[i].k;
      inst.d = 1;
      inst.A = rows[i].A;
      inst.F = rows[i].F;
      inst.lambda = 1.0;
      inst.mu = rows[i].mu;
      inst.seed = rng::derive_seed(c.seed, 0x534Dull, i);
      inst.distribution = rows[i].exponential
                              ? disorder::ObstacleDistribution::exponential(2.0)
                              : disorder::ObstacleDistribution::uniform(0.0, 2.0);
      instances.push_back(inst);
    }
  }

  json rows = json::array();
  double min_slack = std::numeric_limits<double>::infinity();
  int skipped = 0;
  for (const config::VerifyInstance& inst : instances) {
    json row;
    row["k"] = inst.k;
    row["d"] = inst.d;
    row["A"] = inst.A;
    row["F"] = inst.F;
    row["lambda"] = inst.lambda;
    row["mu"] = inst.mu;
    row["seed"] = inst.seed;
    row["distribution"] = config::distribution_to_json(inst.distribution);
    try {
      const disorder::QuenchedField field(inst.seed, inst.d, inst.distribution);
      const discrete::SupermartingaleResult res = discrete::supermartingale_check(
          inst.k, inst.d, inst.A, field, inst.F, inst.lambda, inst.mu, c.resamples);
      row["y_k"] = res.y_k;
      row["gamma_hat"] = res.gamma_hat;
      row["gamma_se"] = res.gamma_se;
      row["lhs_hat"] = res.lhs_hat;
      row["lhs_se"] = res.lhs_se;
      row["slack"] = res.slack;
      row["decomposition_gap"] = res.decomposition_gap;
      row["n_profiles"] = res.n_profiles;
      row["resamples"] = res.resamples;
      row["status"] = res.pass ? "pass" : "fail";
      min_slack = std::min(min_slack, res.slack);
      if (!res.pass) out.status = "fail";
    } catch (const discrete::BudgetExceeded&) {
      row["status"] = "skipped";
      ++skipped;
    } catch (const std::logic_error& e) {
      row["status"] = "fail";
      row["error"] = e.what();
      out.status = "fail";
    }
    rows.push_back(row);
  }
  out.margin = std::isfinite(min_slack) ? min_slack : 0.0;
  out.detail["instances"] = rows;
  out.detail["skipped"] = skipped;
  return out;
}

CheckOutcome check_extension_counts(std::uint64_t seed) {
  CheckOutcome out{"extension-count-bound", "pass", 0.0, json::object()};
  struct Case {
    int k, d;
    long long A, F;
    bool zero_disorder;
  };
  const std::vector<Case> cases = {
      {1, 1, 1, 2, false}, {2, 1, 2, 2, false}, {3, 1, 3, 2, false}, {1, 2, 1, 1, true}};
  unsigned long long pairs = 0;
  long double min_margin = std::numeric_limits<long double>::infinity();
  int skipped = 0;
  for (std::size_t n = 0; n < cases.size(); ++n) {
    const Case& cs = cases[n];
    const disorder::ObstacleDistribution dist =
        cs.zero_disorder ? disorder::ObstacleDistribution::zero()
                         : disorder::ObstacleDistribution::exponential(2.0);
    const disorder::QuenchedField field(rng::derive_seed(seed, 0x4558ull, n), cs.d, dist);
    const discrete::FrozenDisorder fd =
        discrete::FrozenDisorder::materialize(field, cs.k + 1, cs.A);
    const long long shell = lattice::ring_size(cs.k, cs.d);
    const long long freedom = lattice::ring_size_growth(cs.k, cs.d);
    try {
      discrete::enumerate_admissible(
          cs.k, cs.d, cs.A, fd, cs.F, [&](const discrete::Profile& w) {
            const auto counts = discrete::extension_velocity_counts(w, fd, cs.F);
            for (const auto& [j, count] : counts) {
              long double limit = static_cast<long double>(lattice::weak_compositions(shell, j));
              for (long long i = 0; i < freedom; ++i)
                limit *= static_cast<long double>(cs.A + 1);
              min_margin = std::min(min_margin, limit - static_cast<long double>(count));
              ++pairs;
            }
          });
    } catch (const discrete::BudgetExceeded&) {
      ++skipped;
    } catch (const std::logic_error&) {
      out.status = "fail";
    }
  }
  out.margin = std::isfinite(static_cast<double>(min_margin))
                   ? static_cast<double>(min_margin)
                   : 0.0;
  if (out.status != "fail" && min_margin < 0.0L) out.status = "fail";
  out.detail["profile_velocity_pairs"] = pairs;
  out.detail["skipped"] = skipped;
  return out;
}

}  // namespace

int cmd_simulate(const CommandOptions& opt) {
  const fs::path dir = require_out_dir(opt);
  config::SimulateConfig c = config::parse_simulate(load_config(opt.config_path));
  apply_seed_override(c.seeds, opt.seed_override);

  const SimulationBatch batch = run_batch(c, opt.workers);
  const std::string csv = records_csv(batch);
  const std::string summary = dump(batch_summary(c, batch));

  write_text(dir / "records.csv", csv);
  write_text(dir / "summary.json", summary);
  return 0;
}

int cmd_bound(const CommandOptions& opt) {
  const fs::path dir = require_out_dir(opt);
  const config::BoundConfig c = config::parse_bound(load_config(opt.config_path));
  const double beta = c.beta ? *c.beta : disorder::beta(*c.distribution, c.lambda);

  std::string csv = "F,V,mu_star,branch\n";
  json rows = json::array();
  for (const double F : c.F_grid) {
    bound::BoundParams p;
    p.lambda = c.lambda;
    p.beta = beta;
    p.d = c.d;
    p.F = F;
    const bound::BoundResult res = bound::velocity_lower_bound(p);
    csv += fmt(F);
    csv += ',';
    csv += fmt(res.value);
    csv += ',';
    csv += fmt(res.mu_star);
    csv += ',';
    csv += bound::branch_name(res.branch);
    csv += '\n';
    json row = bound_to_json(res);
    row["F"] = F;
    rows.push_back(row);
  }

  json summary;
  summary["config"]["bound"]["lambda"] = c.lambda;
  summary["config"]["bound"]["beta"] = beta;
  if (c.distribution)
    summary["config"]["bound"]["distribution"] = config::distribution_to_json(*c.distribution);
  summary["config"]["bound"]["d"] = c.d;
  summary["config"]["bound"]["F_grid"] = c.F_grid;
  summary["rows"] = rows;

  write_text(dir / "bound.csv", csv);
  write_text(dir / "bound.json", dump(summary));
  return 0;
}

int cmd_enumerate(const CommandOptions& opt) {
  const fs::path dir = require_out_dir(opt);
  config::EnumerateConfig c = config::parse_enumerate(load_config(opt.config_path));
  if (opt.seed_override) c.seed = *opt.seed_override;

  const disorder::QuenchedField field(c.seed, c.d, c.distribution);
  const discrete::FrozenDisorder fd = discrete::FrozenDisorder::materialize(field, c.k + 1, c.A);

  const unsigned long long count = discrete::count_admissible(c.k, c.d, c.A, fd, c.F);
  const discrete::Rational mav = discrete::min_average_velocity(c.k, c.d, c.A, fd, c.F);
  const discrete::PartitionSum ps =
      discrete::partition_sum(c.k, c.d, c.A, fd, c.F, c.lambda, c.mu);

  json outj;
  outj["config"]["enumerate"]["k"] = c.k;
  outj["config"]["enumerate"]["d"] = c.d;
  outj["config"]["enumerate"]["A"] = c.A;
  outj["config"]["enumerate"]["F"] = c.F;
  outj["config"]["enumerate"]["seed"] = c.seed;
  outj["config"]["enumerate"]["distribution"] = config::distribution_to_json(c.distribution);
  outj["config"]["enumerate"]["lambda"] = c.lambda;
  outj["config"]["enumerate"]["mu"] = c.mu;
  outj["admissible_count"] = count;
  outj["min_avg_velocity"]["num"] = mav.num;
  outj["min_avg_velocity"]["den"] = mav.den;
  outj["min_avg_velocity"]["value"] = mav.value();
  outj["partition_sum"]["boundary_form"] = ps.boundary_form;
  outj["partition_sum"]["laplacian_form"] = ps.laplacian_form;
  outj["partition_sum"]["relative_gap"] = ps.relative_gap;

  write_text(dir / "enumerate.json", dump(outj));
  return 0;
}

int cmd_verify(const CommandOptions& opt) {
  const fs::path dir = require_out_dir(opt);
  config::VerifyConfig c = config::parse_verify(load_config(opt.config_path));
  if (opt.seed_override) c.seed = *opt.seed_override;

  std::vector<CheckOutcome> checks;
  checks.push_back(check_divergence(c.seed, c.corrupt_divergence));
  checks.push_back(check_partition_sum(c.seed));
  checks.push_back(check_supermartingale(c));
  checks.push_back(check_extension_counts(c.seed));

  bool all_pass = true;
  json rows = json::array();
  for (const CheckOutcome& chk : checks) {
    json row;
    row["name"] = chk.name;
    row["status"] = chk.status;
    row["margin"] = chk.margin;
    for (const auto& [key, value] : chk.detail.items()) row[key] = value;
    rows.push_back(row);
    all_pass = all_pass && chk.status != "fail";
  }

  json report;
  report["config"]["verify"]["seed"] = c.seed;
  report["config"]["verify"]["resamples"] = c.resamples;
  report["config"]["verify"]["corrupt_divergence"] = c.corrupt_divergence;
  report["checks"] = rows;
  report["all_pass"] = all_pass;

  write_text(dir / "verify_report.json", dump(report));
  return all_pass ? 0 : 1;
}

int cmd_sweep(const CommandOptions& opt) {
  const fs::path dir = require_out_dir(opt);
  config::SweepConfig c = config::parse_sweep(load_config(opt.config_path));
  apply_seed_override(c.base.seeds, opt.seed_override);
  const double beta = disorder::beta(c.base.sim.distribution, c.lambda);

  std::string csv = "F,v_tracked_mean,v_tracked_se,v_window_mean,V_bound\n";
  for (const double F : c.F_grid) {
    config::SimulateConfig sc = c.base;
    sc.sim.F = F;
    const SimulationBatch batch = run_batch(sc, opt.workers);
    const dynamics::VelocityStatistics stats = dynamics::velocity_statistics(batch.runs);
    bound::BoundParams p;
    p.lambda = c.lambda;
    p.beta = beta;
    p.d = c.base.sim.d;
    p.F = F;
    const bound::BoundResult res = bound::velocity_lower_bound(p);
    csv += fmt(F);
    csv += ',';
    csv += fmt(stats.tracked.mean);
    csv += ',';
    csv += fmt(stats.tracked.se);
    csv += ',';
    csv += fmt(stats.window.mean);
    csv += ',';
    csv += fmt(res.value);
    csv += '\n';
  }

  json summary;
  summary["config"]["sweep"] = config::simulate_to_json(c.base);
  summary["config"]["sweep"].erase("F");
  summary["config"]["sweep"]["F_grid"] = c.F_grid;
  summary["config"]["sweep"]["lambda"] = c.lambda;
  summary["beta"] = beta;

  write_text(dir / "sweep.csv", csv);
  write_text(dir / "sweep.json", dump(summary));
  return 0;
}

int run_command(const std::string& name, const CommandOptions& opt) {
  try {
    if (name == "simulate") return cmd_simulate(opt);
    if (name == "bound") return cmd_bound(opt);
    if (name == "enumerate") return cmd_enumerate(opt);
    if (name == "verify") return cmd_verify(opt);
    if (name == "sweep") return cmd_sweep(opt);
    std::cerr << "unknown command: " << name << "\n";
    return 2;
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const discrete::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << fmt(e.candidates) << " candidates (limit "
              << fmt(discrete::kEnumerationBudget) << ")\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "filesystem error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "check failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qew::commands
