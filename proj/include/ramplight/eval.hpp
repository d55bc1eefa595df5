#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ramplight/control.hpp"
#include "ramplight/imitation.hpp"
#include "ramplight/net.hpp"
#include "ramplight/observation.hpp"
#include "ramplight/timeseries.hpp"

namespace ramplight {

/// Relative improvement in percent, normalized so the baseline scores 0 and
/// the hindsight optimum 100. Throws NumericError when j_base <= j_opt
/// (degenerate episode set, e.g. clear-sky only).
double improvement(double j_base, double j_opt, double j_policy);

/// Sequential gated rollout of the policy over one episode; records actions,
/// confidences and deviated flags.
Trajectory rollout_policy(const PolicyNetwork& net, const Episode& episode, double threshold,
                          const RampSpec& ramp);

struct SweepRow {
  double threshold;
  double j_policy;
  double improvement_pct;
  double deviating_pct;  ///< percent of steps deviating from Track
  double good_pct;       ///< percent of steps that deviate and help
  std::size_t deviation_count;
};

/// Evaluates each threshold over the episode set; throughputs aggregate over
/// episodes before normalizing. Episode rollouts run in parallel and reduce
/// in episode order.
std::vector<SweepRow> threshold_sweep(const PolicyNetwork& net, std::span<const Episode> episodes,
                                      std::span<const double> thresholds, const RampSpec& ramp);

struct DeviationStats {
  double deviating_pct;
  double good_pct;
};

/// A deviating step is good when it matches the label of the suffix optimum
/// from the policy's own state, or moves the output strictly closer to that
/// suffix-optimal output than Track would.
DeviationStats deviation_stats(const Trajectory& policy_traj, const Episode& episode,
                               double u0, const RampSpec& ramp);

struct CalibrationBin {
  double lo;
  double hi;
  double mean_confidence;
  double accuracy;
  double share;
  std::size_t count;
};

/// Reliability histogram: equal-width confidence bins over [1/3, 1].
std::vector<CalibrationBin> calibration(const PolicyNetwork& net,
                                        std::span<const LabeledState> states, int bins = 10);

struct PerEpisodeThroughput {
  int day_id;
  double j_base;
  double j_opt;
  double j_policy;
};

struct EvalReport {
  std::size_t episode_count = 0;
  double j_base = 0.0;
  double j_opt = 0.0;
  double j_policy = 0.0;
  double selected_threshold = 0.0;
  double validation_improvement_pct = 0.0;
  double improvement_pct = 0.0;
  std::vector<SweepRow> sweep;                    // test set
  std::vector<CalibrationBin> calibration_bins;   // validation set
  std::vector<PerEpisodeThroughput> per_episode;  // test set
};

/// Threshold selection on the validation split (argmax improvement, first
/// winner), then the full evaluation protocol on the test split.
EvalReport evaluate_model(const PolicyNetwork& net, std::span<const Episode> validation,
                          std::span<const Episode> test, std::span<const double> thresholds,
                          const RampSpec& ramp);

struct TrainedPolicy {
  PolicyNetwork net;
  DaggerResult dagger;
};

/// Mode-dependent training pipeline: range-classification pretraining for
/// the feature-driven modes (skipped for FutureIrradiance, which uses the
/// policy head layers alone), then the DAgger loop.
TrainedPolicy train_policy(ExperimentMode mode, std::span<const Episode> train_episodes,
                           const NormalizationSpec& norm, const DaggerSchedule& schedule,
                           const TrainConfig& train_cfg, const RampSpec& ramp);

struct DataConfig {
  SyntheticConfig synthetic;
  int n_days = 60;
  std::uint64_t split_seed = 7;
};

/// End to end: synthesize the dataset, split it, train for the mode, select
/// the threshold on validation, report on test. Deterministic given the
/// configured seeds.
EvalReport run_experiment(ExperimentMode mode, const DataConfig& data,
                          const DaggerSchedule& schedule, const TrainConfig& train_cfg,
                          std::span<const double> thresholds, const RampSpec& ramp);

void save_trajectory_csv(const IrradianceSeries& s, const Trajectory& traj,
                         const std::filesystem::path& path);
void save_sweep_csv(std::span<const SweepRow> sweep, const std::filesystem::path& path);
void save_calibration_csv(std::span<const CalibrationBin> bins, const std::filesystem::path& path);
void save_per_episode_csv(std::span<const PerEpisodeThroughput> rows,
                          const std::filesystem::path& path);
void save_summary(const EvalReport& report, const std::filesystem::path& path);

}  // namespace ramplight
