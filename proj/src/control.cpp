#include "ramplight/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "ramplight/common.hpp"

namespace ramplight {

void RampSpec::validate() const {
  if (rate_limit <= 0.0) throw ConfigError("ramp spec: rate_limit must be > 0");
  if (dt <= 0.0) throw ConfigError("ramp spec: dt must be > 0");
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Track: return "TRACK";
    case Action::Up: return "UP";
    case Action::Down: return "DOWN";
  }
  return "TRACK";
}

Action action_from_name(std::string_view name) {
  if (name == "TRACK") return Action::Track;
  if (name == "UP") return Action::Up;
  if (name == "DOWN") return Action::Down;
  throw ConfigError("unknown action name: " + std::string(name));
}

bool Trajectory::ramp_feasible(const RampSpec& ramp, double tol) const {
  const double r = ramp.step();
  double prev = u0;
  for (double v : u) {
    if (v < 0.0) return false;
    if (std::abs(v - prev) > r + tol) return false;
    prev = v;
  }
  return true;
}

Interval reach_interval(double u_prev, const RampSpec& ramp) {
  const double r = ramp.step();
  return {std::max(0.0, u_prev - r), u_prev + r};
}

double baseline_step(double u_prev, double s_t, const RampSpec& ramp) {
  const Interval reach = reach_interval(u_prev, ramp);
  return std::clamp(s_t, reach.lo, reach.hi);
}

double apply_action(double u_prev, double s_t, Action a, const RampSpec& ramp) {
  const double r = ramp.step();
  switch (a) {
    case Action::Track: return baseline_step(u_prev, s_t, ramp);
    case Action::Up: return u_prev + r;
    case Action::Down: return std::max(0.0, u_prev - r);
  }
  return baseline_step(u_prev, s_t, ramp);
}

Trajectory baseline_rollout(const IrradianceSeries& s, double u0, const RampSpec& ramp) {
  Trajectory traj;
  traj.u0 = u0;
  traj.u.resize(s.values.size());
  traj.actions.assign(s.values.size(), Action::Track);
  double prev = u0;
  for (std::size_t t = 0; t < s.values.size(); ++t) {
    prev = baseline_step(prev, s.values[t], ramp);
    traj.u[t] = prev;
  }
  return traj;
}

double throughput(std::span<const double> s, std::span<const double> u, double dt) {
  if (s.size() != u.size()) throw NumericError("throughput: length mismatch");
  double total = 0.0;
  for (std::size_t t = 0; t < s.size(); ++t) total += std::abs(u[t] - s[t]);
  return total * dt;
}

double tracking_objective(const IrradianceSeries& s, const Trajectory& traj) {
  return throughput(s.values, traj.u, 1.0);
}

Action label_action(double u_star, double u_prev, double s_t, const RampSpec& ramp,
                    double tol) {
  const Interval reach = reach_interval(u_prev, ramp);
  if (u_star < reach.lo - tol || u_star > reach.hi + tol)
    throw NumericError("label_action: target output outside the reach interval");

  const double cand_track = baseline_step(u_prev, s_t, ramp);
  const double cand_up = u_prev + ramp.step();
  const double cand_down = std::max(0.0, u_prev - ramp.step());

  const double d_track = std::abs(cand_track - u_star);
  const double d_up = std::abs(cand_up - u_star);
  const double d_down = std::abs(cand_down - u_star);

  // Ties go to Track, then Down.
  Action best = Action::Track;
  double best_d = d_track;
  if (d_down < best_d) {
    best = Action::Down;
    best_d = d_down;
  }
  if (d_up < best_d) {
    best = Action::Up;
    best_d = d_up;
  }
  return best;
}

// --- Backward value functions -------------------------------------------
//
// G_{T-1}(u) = |u - s[T-1]|
// G_t(u)     = |u - s[t]| + min_{|v-u| <= r} G_{t+1}(v)
//
// All summands have unit slope increments, so each G_t is convex piecewise
// linear with integer slopes. The classic two-heap representation applies:
// the left heap holds breakpoints left of the minimum, the right heap those
// right of it, and the inf-convolution with the ramp window [-r, r] becomes
// lazy offsets that move the two sides apart. Since s >= 0, every G_t is
// strictly decreasing on u < 0 and the minimizer interval stays >= 0.

SuffixOptimalLabeler::SuffixOptimalLabeler(const IrradianceSeries& s, const RampSpec& ramp)
    : s_(s.values), ramp_(ramp) {
  ramp.validate();
  if (s_.empty()) throw ConfigError("suffix labeler: empty series");
  const int n = static_cast<int>(s_.size());
  min_lo_.resize(n);
  min_hi_.resize(n);

  const double r = ramp.step();
  std::priority_queue<double> left;  // max-heap
  std::priority_queue<double, std::vector<double>, std::greater<double>> right;
  double off_l = 0.0, off_r = 0.0;

  for (int t = n - 1; t >= 0; --t) {
    if (t < n - 1) {
      off_l -= r;
      off_r += r;
    }
    const double st = s_[t];
    left.push(st - off_l);
    right.push(st - off_r);
    const double l = left.top() + off_l;
    const double rr = right.top() + off_r;
    if (l > rr) {
      left.pop();
      right.pop();
      left.push(rr - off_l);
      right.push(l - off_r);
    }
    min_lo_[t] = left.top() + off_l;
    min_hi_[t] = right.top() + off_r;
  }
}

double SuffixOptimalLabeler::optimal_output(int t, double u_prev) const {
  const double r = ramp_.step();
  const double lo = std::max(0.0, u_prev - r);
  const double hi = u_prev + r;
  const double a = min_lo_[t];
  const double b = min_hi_[t];
  if (hi < a) return hi;  // minimum unreachable above: climb at full rate
  if (lo > b) return lo;  // minimum unreachable below: descend at full rate
  return std::clamp(u_prev, std::max(lo, a), std::min(hi, b));
}

Action SuffixOptimalLabeler::optimal_action(int t, double u_prev, double tol) const {
  return label_action(optimal_output(t, u_prev), u_prev, s_[t], ramp_, tol);
}

Trajectory SuffixOptimalLabeler::recover(int t_start, double u_prev) const {
  const int n = static_cast<int>(s_.size());
  if (t_start < 0 || t_start >= n) throw ConfigError("suffix recovery: t_start out of range");
  Trajectory traj;
  traj.u0 = u_prev;
  traj.u.resize(n - t_start);
  double prev = u_prev;
  for (int t = t_start; t < n; ++t) {
    prev = optimal_output(t, prev);
    traj.u[t - t_start] = prev;
  }
  return traj;
}

Trajectory hindsight_optimal(const IrradianceSeries& s, double u0, const RampSpec& ramp) {
  SuffixOptimalLabeler labeler(s, ramp);
  return labeler.recover(0, u0);
}

Trajectory hindsight_optimal_from(const IrradianceSeries& s, int t_start, double u_prev,
                                  const RampSpec& ramp) {
  SuffixOptimalLabeler labeler(s, ramp);
  return labeler.recover(t_start, u_prev);
}

// --- Grid DP oracle -------------------------------------------------------

namespace {

Trajectory dp_oracle_impl(const IrradianceSeries& s, double u0, const RampSpec& ramp,
                          double grid_step, bool parallel) {
  ramp.validate();
  if (grid_step <= 0.0) throw ConfigError("dp_oracle: grid_step must be > 0");
  const double r = ramp.step();
  const int k = static_cast<int>(std::llround(r / grid_step));
  if (k < 1 || std::abs(k * grid_step - r) > 1e-9 * r)
    throw ConfigError("dp_oracle: grid_step must divide the per-step budget exactly");

  const int n = static_cast<int>(s.values.size());
  if (n < 1) throw ConfigError("dp_oracle: empty series");
  const double top = *std::max_element(s.values.begin(), s.values.end()) + r;
  const int levels = static_cast<int>(std::floor(top / grid_step + 1e-9)) + 1;

  const double transitions = static_cast<double>(n) * levels * (2.0 * k + 1.0);
  if (transitions > 1e8) throw NumericError("dp_oracle: grid too large (state-transition guard)");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(levels, kInf), cur(levels, kInf);
  std::vector<std::int16_t> back(static_cast<std::size_t>(n) * levels, 0);

  for (int i = 0; i < levels; ++i) {
    const double u = i * grid_step;
    if (std::abs(u - u0) <= r + 1e-9) prev[i] = std::abs(u - s.values[0]);
  }

  for (int t = 1; t < n; ++t) {
    const double st = s.values[t];
    std::int16_t* bp = back.data() + static_cast<std::size_t>(t) * levels;
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < levels; ++i) {
      const int j_lo = std::max(0, i - k);
      const int j_hi = std::min(levels - 1, i + k);
      double best = kInf;
      int best_j = j_lo;
      for (int j = j_lo; j <= j_hi; ++j) {
        if (prev[j] < best) {
          best = prev[j];
          best_j = j;
        }
      }
      cur[i] = best + std::abs(i * grid_step - st);
      bp[i] = static_cast<std::int16_t>(best_j - i);
    }
    std::swap(prev, cur);
  }

  int arg = 0;
  for (int i = 1; i < levels; ++i)
    if (prev[i] < prev[arg]) arg = i;
  if (!std::isfinite(prev[arg])) throw NumericError("dp_oracle: no feasible trajectory");

  Trajectory traj;
  traj.u0 = u0;
  traj.u.resize(n);
  int level = arg;
  for (int t = n - 1; t >= 1; --t) {
    traj.u[t] = level * grid_step;
    level += back[static_cast<std::size_t>(t) * levels + level];
  }
  traj.u[0] = level * grid_step;
  return traj;
}

}  // namespace

Trajectory dp_oracle(const IrradianceSeries& s, double u0, const RampSpec& ramp,
                     double grid_step) {
  return dp_oracle_impl(s, u0, ramp, grid_step, true);
}

Trajectory dp_oracle_serial(const IrradianceSeries& s, double u0, const RampSpec& ramp,
                            double grid_step) {
  return dp_oracle_impl(s, u0, ramp, grid_step, false);
}

namespace {

std::vector<Trajectory> hindsight_batch_impl(std::span<const IrradianceSeries> episodes,
                                             const RampSpec& ramp, bool parallel) {
  std::vector<Trajectory> out(episodes.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(episodes.size()); ++i) {
    out[i] = hindsight_optimal(episodes[i], episodes[i].values.front(), ramp);
  }
  return out;
}

}  // namespace

std::vector<Trajectory> hindsight_optimal_batch(std::span<const IrradianceSeries> episodes,
                                                const RampSpec& ramp) {
  return hindsight_batch_impl(episodes, ramp, true);
}

std::vector<Trajectory> hindsight_optimal_batch_serial(std::span<const IrradianceSeries> episodes,
                                                       const RampSpec& ramp) {
  return hindsight_batch_impl(episodes, ramp, false);
}

}  // namespace ramplight
