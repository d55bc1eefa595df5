#include "ramplight/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>

#include "ramplight/common.hpp"
#include "ramplight/rng.hpp"

namespace ramplight {

double improvement(double j_base, double j_opt, double j_policy) {
  if (!(j_base > j_opt))
    throw NumericError("improvement: degenerate episode set (baseline equals optimum)");
  return 100.0 * (j_base - j_policy) / (j_base - j_opt);
}

Trajectory rollout_policy(const PolicyNetwork& net, const Episode& episode, double threshold,
                          const RampSpec& ramp) {
  const auto& s = episode.irradiance;
  const ObservationBuilder builder(episode, net.normalization(), net.input_spec());

  Trajectory traj;
  traj.u0 = s.values.front();
  traj.u.resize(s.size());
  traj.actions.resize(s.size());
  traj.confidences.resize(s.size());
  traj.deviated.resize(s.size());

  double u_prev = traj.u0;
  for (int t = 0; t < s.size(); ++t) {
    const std::vector<double> obs = builder.build(t, u_prev);
    const ActionChoice choice = select_action(net, obs, threshold);
    u_prev = apply_action(u_prev, s.values[t], choice.action, ramp);
    traj.u[t] = u_prev;
    traj.actions[t] = choice.action;
    traj.confidences[t] = choice.confidence;
    traj.deviated[t] = choice.deviated ? 1 : 0;
  }
  return traj;
}

namespace {

struct DeviationCounts {
  std::size_t deviating = 0;
  std::size_t good = 0;
  std::size_t steps = 0;
};

DeviationCounts count_deviations(const Trajectory& policy_traj, const Episode& episode,
                                 double u0, const RampSpec& ramp,
                                 const SuffixOptimalLabeler& labeler) {
  const auto& s = episode.irradiance;
  if (policy_traj.deviated.empty() || policy_traj.actions.empty())
    throw ConfigError("deviation_stats: trajectory carries no action/deviation record");
  if (static_cast<int>(policy_traj.u.size()) != s.size())
    throw ConfigError("deviation_stats: trajectory length mismatch");

  DeviationCounts counts;
  counts.steps = policy_traj.u.size();
  double u_prev = u0;
  for (int t = 0; t < s.size(); ++t) {
    if (policy_traj.deviated[t]) {
      ++counts.deviating;
      const double u_star = labeler.optimal_output(t, u_prev);
      const Action label = label_action(u_star, u_prev, s.values[t], ramp);
      const double u_track = baseline_step(u_prev, s.values[t], ramp);
      const double u_taken = policy_traj.u[t];
      if (policy_traj.actions[t] == label ||
          std::abs(u_taken - u_star) < std::abs(u_track - u_star))
        ++counts.good;
    }
    u_prev = policy_traj.u[t];
  }
  return counts;
}

}  // namespace

DeviationStats deviation_stats(const Trajectory& policy_traj, const Episode& episode,
                               double u0, const RampSpec& ramp) {
  const SuffixOptimalLabeler labeler(episode.irradiance, ramp);
  const DeviationCounts c = count_deviations(policy_traj, episode, u0, ramp, labeler);
  const double total = static_cast<double>(c.steps);
  return {100.0 * c.deviating / total, 100.0 * c.good / total};
}

std::vector<SweepRow> threshold_sweep(const PolicyNetwork& net, std::span<const Episode> episodes,
                                      std::span<const double> thresholds, const RampSpec& ramp) {
  if (thresholds.empty()) throw ConfigError("threshold_sweep: no thresholds");
  if (episodes.empty()) throw ConfigError("threshold_sweep: no episodes");

  const std::int64_t n_eps = static_cast<std::int64_t>(episodes.size());

  // Per-episode references and labelers shared by every threshold.
  std::vector<double> j_base(n_eps), j_opt(n_eps);
  std::vector<std::unique_ptr<SuffixOptimalLabeler>> labelers(n_eps);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n_eps; ++i) {
    const auto& s = episodes[i].irradiance;
    labelers[i] = std::make_unique<SuffixOptimalLabeler>(s, ramp);
    const Trajectory base = baseline_rollout(s, s.values.front(), ramp);
    const Trajectory opt = labelers[i]->recover(0, s.values.front());
    j_base[i] = throughput(s.values, base.u, s.dt);
    j_opt[i] = throughput(s.values, opt.u, s.dt);
  }
  const double j_base_total = std::accumulate(j_base.begin(), j_base.end(), 0.0);
  const double j_opt_total = std::accumulate(j_opt.begin(), j_opt.end(), 0.0);

  std::vector<SweepRow> rows(thresholds.size());
  for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
    const double threshold = thresholds[ti];
    std::vector<double> j_pol(n_eps);
    std::vector<DeviationCounts> counts(n_eps);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n_eps; ++i) {
      const auto& ep = episodes[i];
      const Trajectory traj = rollout_policy(net, ep, threshold, ramp);
      j_pol[i] = throughput(ep.irradiance.values, traj.u, ep.irradiance.dt);
      counts[i] = count_deviations(traj, ep, traj.u0, ramp, *labelers[i]);
    }
    SweepRow row;
    row.threshold = threshold;
    row.j_policy = std::accumulate(j_pol.begin(), j_pol.end(), 0.0);
    row.improvement_pct = improvement(j_base_total, j_opt_total, row.j_policy);
    std::size_t total_steps = 0, total_dev = 0, total_good = 0;
    for (std::int64_t i = 0; i < n_eps; ++i) {
      total_steps += counts[i].steps;
      total_dev += counts[i].deviating;
      total_good += counts[i].good;
    }
    row.deviation_count = total_dev;
    row.deviating_pct = 100.0 * static_cast<double>(total_dev) / static_cast<double>(total_steps);
    row.good_pct = 100.0 * static_cast<double>(total_good) / static_cast<double>(total_steps);
    rows[ti] = row;
  }
  return rows;
}

std::vector<CalibrationBin> calibration(const PolicyNetwork& net,
                                        std::span<const LabeledState> states, int bins) {
  if (bins <= 0) throw ConfigError("calibration: bins must be > 0");
  const double lo = 1.0 / 3.0;
  const double width = (1.0 - lo) / bins;

  std::vector<CalibrationBin> out(bins);
  for (int b = 0; b < bins; ++b) {
    out[b] = {lo + b * width, lo + (b + 1) * width, 0.0, 0.0, 0.0, 0};
  }
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<std::size_t> hits(bins, 0);
  for (const LabeledState& st : states) {
    const ActionChoice choice = select_action(net, st.obs, 0.0);
    int b = static_cast<int>((choice.confidence - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    conf_sum[b] += choice.confidence;
    if (choice.action == st.label) ++hits[b];
    ++out[b].count;
  }
  const double total = static_cast<double>(states.size());
  for (int b = 0; b < bins; ++b) {
    if (out[b].count > 0) {
      out[b].mean_confidence = conf_sum[b] / out[b].count;
      out[b].accuracy = static_cast<double>(hits[b]) / out[b].count;
    }
    out[b].share = total > 0.0 ? out[b].count / total : 0.0;
  }
  return out;
}

namespace {

std::vector<LabeledState> validation_states(const PolicyNetwork& net,
                                            std::span<const Episode> validation,
                                            const RampSpec& ramp) {
  std::vector<LabeledState> all;
  for (const Episode& ep : validation) {
    // Ungated rollout: the states the network itself would visit.
    const MixedRolloutResult rollout =
        mixed_rollout(net, ep, 0.0, ramp, derive_seed(0, "calibration"));
    std::vector<LabeledState> labeled = label_states(rollout.states, ep.irradiance, ramp);
    all.insert(all.end(), std::make_move_iterator(labeled.begin()),
               std::make_move_iterator(labeled.end()));
  }
  return all;
}

}  // namespace

EvalReport evaluate_model(const PolicyNetwork& net, std::span<const Episode> validation,
                          std::span<const Episode> test, std::span<const double> thresholds,
                          const RampSpec& ramp) {
  EvalReport report;
  report.episode_count = test.size();

  const std::vector<SweepRow> val_sweep = threshold_sweep(net, validation, thresholds, ramp);
  std::size_t best = 0;
  for (std::size_t i = 1; i < val_sweep.size(); ++i)
    if (val_sweep[i].improvement_pct > val_sweep[best].improvement_pct) best = i;
  report.selected_threshold = val_sweep[best].threshold;
  report.validation_improvement_pct = val_sweep[best].improvement_pct;

  report.sweep = threshold_sweep(net, test, thresholds, ramp);
  report.improvement_pct = report.sweep[best].improvement_pct;
  report.j_policy = report.sweep[best].j_policy;

  report.per_episode.resize(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& ep = test[i];
    const auto& s = ep.irradiance;
    const Trajectory base = baseline_rollout(s, s.values.front(), ramp);
    const Trajectory opt = hindsight_optimal(s, s.values.front(), ramp);
    const Trajectory pol = rollout_policy(net, ep, report.selected_threshold, ramp);
    report.per_episode[i] = {s.day_id, throughput(s.values, base.u, s.dt),
                             throughput(s.values, opt.u, s.dt),
                             throughput(s.values, pol.u, s.dt)};
    report.j_base += report.per_episode[i].j_base;
    report.j_opt += report.per_episode[i].j_opt;
  }

  const std::vector<LabeledState> states = validation_states(net, validation, ramp);
  report.calibration_bins = calibration(net, states, 10);
  return report;
}

TrainedPolicy train_policy(ExperimentMode mode, std::span<const Episode> train_episodes,
                           const NormalizationSpec& norm, const DaggerSchedule& schedule,
                           const TrainConfig& train_cfg, const RampSpec& ramp) {
  if (train_episodes.empty()) throw ConfigError("train_policy: no training episodes");
  const int feature_dim = mode == ExperimentMode::FutureIrradiance
                              ? 0
                              : train_episodes.front().features.dim();
  const ObservationSpec spec = make_observation_spec(mode, feature_dim);
  const bool uses_pretraining = mode != ExperimentMode::FutureIrradiance;

  TrainedPolicy out{PolicyNetwork(spec, {128, 64, 16}, norm, train_cfg.seed, uses_pretraining),
                    {}};
  if (uses_pretraining) pretrain(out.net, train_episodes, train_cfg, ramp);
  out.net.drop_aux_heads();
  out.dagger = dagger_train(out.net, train_episodes, schedule, train_cfg, ramp);
  return out;
}

EvalReport run_experiment(ExperimentMode mode, const DataConfig& data,
                          const DaggerSchedule& schedule, const TrainConfig& train_cfg,
                          std::span<const double> thresholds, const RampSpec& ramp) {
  if (data.n_days < 3) throw ConfigError("run_experiment: need at least 3 days");

  std::vector<Episode> episodes(data.n_days);
#pragma omp parallel for schedule(dynamic)
  for (int d = 0; d < data.n_days; ++d) episodes[d] = generate_synthetic(data.synthetic, d);

  std::vector<int> ids(data.n_days);
  for (int d = 0; d < data.n_days; ++d) ids[d] = d;
  const DatasetSplit split = split_days(ids, {0.70, 0.15, 0.15}, data.split_seed);

  auto gather = [&](const std::vector<int>& day_ids) {
    std::vector<Episode> out;
    for (int id : day_ids) out.push_back(episodes[id]);
    return out;
  };
  const std::vector<Episode> train_eps = gather(split.train);
  const std::vector<Episode> val_eps = gather(split.validation);
  const std::vector<Episode> test_eps = gather(split.test);

  std::vector<const IrradianceSeries*> train_series;
  for (const Episode& ep : train_eps) train_series.push_back(&ep.irradiance);
  const NormalizationSpec norm = fit_normalization(train_series);

  const TrainedPolicy trained =
      train_policy(mode, train_eps, norm, schedule, train_cfg, ramp);
  return evaluate_model(trained.net, val_eps, test_eps, thresholds, ramp);
}

// --- Report writers ---------------------------------------------------------

void save_trajectory_csv(const IrradianceSeries& s, const Trajectory& traj,
                         const std::filesystem::path& path) {
  if (static_cast<int>(traj.u.size()) != s.size())
    throw ConfigError("trajectory csv: length mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[128];
  out << "t,s,u,action,confidence\n";
  for (int t = 0; t < s.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", s.start_time + t * s.dt, s.values[t],
                  traj.u[t]);
    out << buf;
    out << ",";
    if (t < static_cast<int>(traj.actions.size())) out << action_name(traj.actions[t]);
    out << ",";
    if (t < static_cast<int>(traj.confidences.size())) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.confidences[t]);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_sweep_csv(std::span<const SweepRow> sweep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[192];
  out << "threshold,j_policy,improvement_pct,deviating_pct,good_pct,deviation_count\n";
  for (const SweepRow& r : sweep) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", r.threshold,
                  r.j_policy, r.improvement_pct, r.deviating_pct, r.good_pct, r.deviation_count);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_calibration_csv(std::span<const CalibrationBin> bins,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[192];
  out << "bin_lo,bin_hi,mean_confidence,accuracy,share,count\n";
  for (const CalibrationBin& b : bins) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", b.lo, b.hi,
                  b.mean_confidence, b.accuracy, b.share, b.count);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_per_episode_csv(std::span<const PerEpisodeThroughput> rows,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[160];
  out << "day_id,j_base,j_opt,j_policy\n";
  for (const PerEpisodeThroughput& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.day_id, r.j_base, r.j_opt,
                  r.j_policy);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_summary(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[256];
  out << "episodes: " << report.episode_count << "\n";
  std::snprintf(buf, sizeof buf, "selected_threshold: %.17g\n", report.selected_threshold);
  out << buf;
  std::snprintf(buf, sizeof buf, "validation_improvement_pct: %.17g\n",
                report.validation_improvement_pct);
  out << buf;
  std::snprintf(buf, sizeof buf, "baseline: improvement 0 (J %.17g)\n", report.j_base);
  out << buf;
  std::snprintf(buf, sizeof buf, "optimal: improvement 100 (J %.17g)\n", report.j_opt);
  out << buf;
  std::snprintf(buf, sizeof buf, "policy: improvement %.17g (J %.17g)\n", report.improvement_pct,
                report.j_policy);
  out << buf;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ramplight
