#include "qew/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace qew::dynamics {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_config(const SimConfig& c) {
  require(c.d >= 1 && c.d <= lattice::kMaxDim, "sim: dimension out of range");
  require(c.N >= 2, "sim: torus side must be >= 2");
  require(std::isfinite(c.F) && c.F >= 0.0, "sim: force must be finite and >= 0");
  require(std::isfinite(c.T) && c.T > 0.0, "sim: final time must be positive");
  require(c.record_interval > 0.0 && c.record_interval <= c.T,
          "sim: record_interval must lie in (0, T]");
  if (c.dt) require(*c.dt > 0.0, "sim: dt must be positive");
}

}  // namespace

TimeStepPlan plan_time_step(const SimConfig& config, const disorder::QuenchedField& field) {
  check_config(config);
  require(field.dim() == config.d, "sim: field dimension mismatch");

  const double ratio = config.T / config.record_interval;
  const double rounded = std::round(ratio);
  require(std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio) && rounded >= 1.0,
          "sim: record_interval must divide T");

  TimeStepPlan plan;
  plan.n_records = static_cast<std::size_t>(rounded);

  // Largest obstacle strength any site can feel before time T.  Heights stay
  // in [0, F*T] (monotone dynamics under the stability limit), so scanning
  // integer heights up to ceil(F*T)+1 covers every bump support reachable.
  const lattice::TorusGeom torus(config.N, config.d);
  const long long hmax = static_cast<long long>(std::ceil(config.F * config.T)) + 1;
  double s_max = 0.0;
  for (std::size_t i = 0; i < torus.size(); ++i) {
    const lattice::Coord c = torus.coords(i);
    const std::span<const int> site(c.data(), static_cast<std::size_t>(config.d));
    for (long long h = 0; h <= hmax; ++h)
      s_max = std::max(s_max, field.strength(site, h));
  }
  plan.s_max = s_max;
  plan.stability_limit = 0.9 / (4.0 * config.d + 8.0 * s_max);

  double dt = plan.stability_limit;
  if (config.dt) {
    require(*config.dt <= plan.stability_limit + 1e-15,
            "sim: requested dt exceeds the stability limit");
    dt = *config.dt;
  }
  plan.steps_per_record =
      static_cast<std::size_t>(std::ceil(config.record_interval / dt - 1e-12));
  plan.steps_per_record = std::max<std::size_t>(plan.steps_per_record, 1);
  plan.dt = config.record_interval / static_cast<double>(plan.steps_per_record);
  return plan;
}

Simulator::Simulator(const SimConfig& config, const disorder::QuenchedField& field)
    : config_(config),
      field_(field),
      torus_(config.N, config.d),
      plan_(plan_time_step(config, field)) {
  require(config_.tracked_site < torus_.size(), "sim: tracked_site outside the torus");
  const std::size_t n = torus_.size();
  const std::size_t twod = 2 * static_cast<std::size_t>(config_.d);
  neighbors_.resize(n * twod);
  site_coords_.resize(n * static_cast<std::size_t>(config_.d));
  for (std::size_t i = 0; i < n; ++i) {
    const lattice::Coord c = torus_.coords(i);
    for (int a = 0; a < config_.d; ++a) {
      site_coords_[i * static_cast<std::size_t>(config_.d) + static_cast<std::size_t>(a)] = c[a];
      neighbors_[i * twod + 2 * static_cast<std::size_t>(a)] = torus_.neighbor(i, a, -1);
      neighbors_[i * twod + 2 * static_cast<std::size_t>(a) + 1] = torus_.neighbor(i, a, +1);
    }
  }
}

void Simulator::rhs(std::span<const double> u, std::span<double> out, int workers) const {
  const std::size_t n = torus_.size();
  require(u.size() == n && out.size() == n, "rhs: field size mismatch");
  const std::size_t twod = 2 * static_cast<std::size_t>(config_.d);
  const double twod_f = static_cast<double>(twod);

  const auto fill = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double lap = -twod_f * u[i];
      const std::size_t* nb = &neighbors_[i * twod];
      for (std::size_t e = 0; e < twod; ++e) lap += u[nb[e]];
      const std::span<const int> site(&site_coords_[i * static_cast<std::size_t>(config_.d)],
                                      static_cast<std::size_t>(config_.d));
      out[i] = lap - field_.force(site, u[i]) + config_.F;
    }
  };

  if (workers > 1 && n >= 256) {
    const std::size_t w = static_cast<std::size_t>(workers);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
      const std::size_t lo = n * t / w, hi = n * (t + 1) / w;
      if (lo < hi) pool.emplace_back(fill, lo, hi);
    }
    for (std::thread& th : pool) th.join();
  } else {
    fill(0, n);
  }
}

IntegrateResult Simulator::integrate(const IntegrateOptions& options) const {
  const std::size_t n = torus_.size();
  std::vector<double> u(n, 0.0);
  if (options.initial_u) {
    require(options.initial_u->size() == n, "integrate: initial field size mismatch");
    u = *options.initial_u;
  }
  std::vector<double> udot(n, 0.0);

  IntegrateResult result;
  result.plan = plan_;
  result.records.reserve(plan_.n_records);

  const double guard_base = config_.F + plan_.s_max;
  const double fourd = 4.0 * static_cast<double>(config_.d);

  for (std::size_t m = 1; m <= plan_.n_records; ++m) {
    for (std::size_t s = 0; s < plan_.steps_per_record; ++s) {
      rhs(u, udot, options.workers);
      // Serial blow-up guard; |du/dt| can never legitimately reach this.
      double umax = 0.0;
      for (double v : u) umax = std::max(umax, std::abs(v));
      const double guard = 10.0 * (guard_base + fourd * umax);
      const double t_now =
          (static_cast<double>(m - 1) * static_cast<double>(plan_.steps_per_record) +
           static_cast<double>(s)) *
          plan_.dt;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(udot[i]) <= guard)) throw SimulationInstability(t_now, i, udot[i]);
      }
      for (std::size_t i = 0; i < n; ++i) u[i] += plan_.dt * udot[i];
    }
    const double t = static_cast<double>(m) * config_.record_interval;
    rhs(u, udot, options.workers);
    VelocityRecord rec;
    rec.t = t;
    double sum_udot = 0.0, min_udot = udot[0], sum_u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_udot += udot[i];
      min_udot = std::min(min_udot, udot[i]);
      sum_u += u[i];
    }
    rec.mean_udot = sum_udot / static_cast<double>(n);
    rec.min_udot = min_udot;
    rec.mean_u_over_t = sum_u / static_cast<double>(n) / t;
    rec.tracked_u_over_t = u[config_.tracked_site] / t;
    result.records.push_back(rec);
    if (options.observer) options.observer(result.records.back(), u);
  }

  result.final_u = std::move(u);
  result.final_time = config_.T;

  const std::size_t r = result.records.size();
  const std::size_t m_half = (r + 1) / 2;  // first record index (1-based) with t >= T/2
  if (r >= 2) {
    const VelocityRecord& a = result.records[m_half - 1];
    const VelocityRecord& b = result.records[r - 1];
    result.window_mean_velocity =
        (b.mean_u_over_t * b.t - a.mean_u_over_t * a.t) / (b.t - a.t);
  } else {
    result.window_mean_velocity = result.records.back().mean_u_over_t;
  }
  return result;
}

SeedStatistic summarize(std::span<const double> values) {
  SeedStatistic st;
  st.n = values.size();
  if (st.n == 0) return st;
  double sum = 0.0;
  st.min = values[0];
  for (double v : values) {
    sum += v;
    st.min = std::min(st.min, v);
  }
  st.mean = sum / static_cast<double>(st.n);
  if (st.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.se = std::sqrt(ss / static_cast<double>(st.n - 1) / static_cast<double>(st.n));
  }
  st.half_width = 3.0 * st.se;
  return st;
}

VelocityStatistics velocity_statistics(std::span<const IntegrateResult> runs) {
  std::vector<double> site_mean, tracked, window;
  site_mean.reserve(runs.size());
  tracked.reserve(runs.size());
  window.reserve(runs.size());
  for (const IntegrateResult& r : runs) {
    if (r.records.empty()) continue;
    site_mean.push_back(r.records.back().mean_u_over_t);
    tracked.push_back(r.records.back().tracked_u_over_t);
    window.push_back(r.window_mean_velocity);
  }
  VelocityStatistics out;
  out.site_mean = summarize(site_mean);
  out.tracked = summarize(tracked);
  out.window = summarize(window);
  return out;
}

}  // namespace qew::dynamics
