#ifndef QEW_DYNAMICS_HPP
#define QEW_DYNAMICS_HPP

// Explicit-Euler integration of the driven interface ODE on a periodic torus:
//   du_i/dt = (discrete laplacian u)_i - f_i(u_i) + F,   u_i(0) = 0,
// with f the quenched pinning force of a disorder::QuenchedField.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qew/disorder.hpp"
#include "qew/lattice.hpp"

namespace qew::dynamics {

struct SimConfig {
  int d = 1;
  int N = 64;                     // torus side; volume is N^d
  double F = 1.0;                 // driving force
  double T = 10.0;                // final time
  double record_interval = 1.0;   // spacing of velocity records; must divide T
  std::optional<double> dt;       // explicit step; default obeys the stability limit
  std::uint64_t field_seed = 1;
  disorder::ObstacleDistribution distribution = disorder::ObstacleDistribution::zero();
  std::size_t tracked_site = 0;   // flat torus index whose height is reported
};

struct VelocityRecord {
  double t = 0.0;
  double mean_udot = 0.0;       // spatial mean of du/dt at time t
  double min_udot = 0.0;
  double mean_u_over_t = 0.0;   // spatial mean height divided by t
  double tracked_u_over_t = 0.0;
};

struct TimeStepPlan {
  double dt = 0.0;               // effective step; divides record_interval exactly
  std::size_t steps_per_record = 0;
  std::size_t n_records = 0;
  double s_max = 0.0;            // largest obstacle strength reachable by time T
  double stability_limit = 0.0;  // 0.9 / (4d + 8 s_max)
};

// Scans obstacle strengths over every torus site and every integer height the
// interface can reach by time T (0..ceil(F*T)+1), derives the stability limit,
// and snaps dt so that records land exactly on multiples of record_interval.
// Throws std::invalid_argument on an unstable explicit dt or a record_interval
// that does not divide T.
TimeStepPlan plan_time_step(const SimConfig& config, const disorder::QuenchedField& field);

struct SimulationInstability : std::runtime_error {
  SimulationInstability(double t_, std::size_t site_, double udot_)
      : std::runtime_error("integration unstable: |du/dt| exceeded the blow-up guard"),
        t(t_), site(site_), udot(udot_) {}
  double t;
  std::size_t site;
  double udot;
};

struct IntegrateOptions {
  int workers = 1;
  std::optional<std::vector<double>> initial_u;  // defaults to all zeros
  // Called after each record row is appended; u is the current height field.
  std::function<void(const VelocityRecord&, std::span<const double>)> observer;
};

struct IntegrateResult {
  std::vector<VelocityRecord> records;  // at t = record_interval, 2*record_interval, ..., T
  std::vector<double> final_u;
  double final_time = 0.0;
  // Mean height slope between the first record time >= T/2 and T; equals
  // mean_u(T)/T when there is only one record.
  double window_mean_velocity = 0.0;
  TimeStepPlan plan;
};

class Simulator {
 public:
  Simulator(const SimConfig& config, const disorder::QuenchedField& field);

  const SimConfig& config() const { return config_; }
  const lattice::TorusGeom& torus() const { return torus_; }
  const TimeStepPlan& plan() const { return plan_; }
  std::size_t volume() const { return torus_.size(); }

  // out[i] = laplacian(u)_i - f_i(u_i) + F.  Deterministic for any worker
  // count: workers fill disjoint site ranges and every reduction is serial.
  void rhs(std::span<const double> u, std::span<double> out, int workers = 1) const;

  IntegrateResult integrate(const IntegrateOptions& options = {}) const;

 private:
  SimConfig config_;
  disorder::QuenchedField field_;
  lattice::TorusGeom torus_;
  TimeStepPlan plan_;
  std::vector<std::size_t> neighbors_;  // 2d entries per site
  std::vector<int> site_coords_;        // d entries per site
};

struct SeedStatistic {
  double mean = 0.0;
  double min = 0.0;
  double se = 0.0;          // sample standard error; 0 for a single run
  double half_width = 0.0;  // 3 * se
  std::size_t n = 0;
};

SeedStatistic summarize(std::span<const double> values);

struct VelocityStatistics {
  SeedStatistic site_mean;  // final mean_u_over_t across runs
  SeedStatistic tracked;    // final tracked_u_over_t across runs
  SeedStatistic window;     // window_mean_velocity across runs
};

VelocityStatistics velocity_statistics(std::span<const IntegrateResult> runs);

}  // namespace qew::dynamics

#endif
