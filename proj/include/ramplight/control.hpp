#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ramplight/timeseries.hpp"

namespace ramplight {

/// Ramp rate limit on the plant output, symmetric up/down.
struct RampSpec {
  double rate_limit = 2.0 / 3.0;  ///< W/m^2/s
  double dt = 7.0;                ///< seconds per control step

  /// Per-step output budget r = rate_limit * dt.
  double step() const { return rate_limit * dt; }
  void validate() const;
};

/// The three-way action set: follow the irradiance within the ramp budget,
/// or move the output at the maximum rate in either direction.
enum class Action : std::uint8_t { Track = 0, Up = 1, Down = 2 };

std::string_view action_name(Action a);
Action action_from_name(std::string_view name);

struct Trajectory {
  double u0 = 0.0;          ///< initial output the first step is constrained to
  std::vector<double> u;    ///< output per step, W/m^2
  std::vector<Action> actions;       ///< empty for continuous trajectories
  std::vector<double> confidences;   ///< empty unless produced by a gated policy
  std::vector<std::uint8_t> deviated;  ///< 1 where the policy left Track

  bool ramp_feasible(const RampSpec& ramp, double tol = 1e-9) const;
};

struct Interval {
  double lo;
  double hi;
};

/// Outputs reachable from u_prev in one step: [max(0, u_prev - r), u_prev + r].
Interval reach_interval(double u_prev, const RampSpec& ramp);

/// Reactive controller step: the projection of s_t onto the reach interval.
double baseline_step(double u_prev, double s_t, const RampSpec& ramp);

double apply_action(double u_prev, double s_t, Action a, const RampSpec& ramp);

Trajectory baseline_rollout(const IrradianceSeries& s, double u0, const RampSpec& ramp);

/// Sum_t |u[t] - s[t]| * dt. Throws on length mismatch.
double throughput(std::span<const double> s, std::span<const double> u, double dt);

/// Sum_t |u[t] - s[t]| (the LP objective, no dt factor).
double tracking_objective(const IrradianceSeries& s, const Trajectory& traj);

/// Maps a continuous optimal output onto the nearest discrete action.
/// Ties prefer Track, then Down. Throws NumericError when u_star is outside
/// the reach interval by more than tol.
Action label_action(double u_star, double u_prev, double s_t, const RampSpec& ramp,
                    double tol = 1e-6);

/// Backward value functions of the throughput-minimization problem for one
/// episode. G_t(u) = min cost of serving steps t..T-1 when the output at
/// step t is u; each G_t is convex piecewise linear, and only its minimizer
/// interval is needed to act optimally. After the O(T log T) build, the
/// first output of an optimal suffix from any state (t, u_prev) is an O(1)
/// query, which is what makes expert labeling cheap during imitation runs.
class SuffixOptimalLabeler {
 public:
  SuffixOptimalLabeler(const IrradianceSeries& s, const RampSpec& ramp);

  /// First output of an optimal suffix starting at step t with previous
  /// output u_prev: the projection of G_t's minimizer interval onto the
  /// reach interval, preferring to stay at u_prev inside a flat minimum.
  double optimal_output(int t, double u_prev) const;

  Action optimal_action(int t, double u_prev, double tol = 1e-6) const;

  /// Full optimal trajectory for steps t_start..T-1.
  Trajectory recover(int t_start, double u_prev) const;

  Interval minimizer(int t) const { return {min_lo_[t], min_hi_[t]}; }
  int size() const { return static_cast<int>(min_lo_.size()); }

 private:
  std::vector<double> min_lo_;
  std::vector<double> min_hi_;
  std::vector<double> s_;
  RampSpec ramp_;
};

/// Exact hindsight optimum: ramp-feasible u minimizing sum |u - s| with
/// |u[0] - u0| <= r. Among the optima it returns the one that moves only
/// when forced to.
Trajectory hindsight_optimal(const IrradianceSeries& s, double u0, const RampSpec& ramp);

/// Hindsight optimum of the suffix s[t_start..] with initial condition u_prev.
Trajectory hindsight_optimal_from(const IrradianceSeries& s, int t_start, double u_prev,
                                  const RampSpec& ramp);

/// Independent verification oracle: exact DP over output levels quantized to
/// multiples of grid_step on [0, max(s) + r]. grid_step must divide r.
/// The inner level sweep runs data-parallel; dp_oracle_serial is the plain
/// loop kept as the reference implementation.
Trajectory dp_oracle(const IrradianceSeries& s, double u0, const RampSpec& ramp,
                     double grid_step);
Trajectory dp_oracle_serial(const IrradianceSeries& s, double u0, const RampSpec& ramp,
                            double grid_step);

/// Episode-parallel batch helper used by the evaluation pipeline.
std::vector<Trajectory> hindsight_optimal_batch(std::span<const IrradianceSeries> episodes,
                                                const RampSpec& ramp);
std::vector<Trajectory> hindsight_optimal_batch_serial(std::span<const IrradianceSeries> episodes,
                                                       const RampSpec& ramp);

}  // namespace ramplight
