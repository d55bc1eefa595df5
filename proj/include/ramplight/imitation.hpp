#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ramplight/control.hpp"
#include "ramplight/net.hpp"
#include "ramplight/observation.hpp"

namespace ramplight {

/// Pretraining target: where the irradiance will sit relative to the ramp
/// budget after a horizon. Values double as class indices.
enum class RangeClass : int { Contained = 0, Higher = 1, Lower = 2 };

inline constexpr std::array<double, 4> kPretrainHorizons = {10.0, 30.0, 60.0, 120.0};

/// For each step and horizon h: Contained when |s(t+h) - s(t)| <= rate * h,
/// Higher when the change exceeds the budget upward, Lower otherwise.
/// Horizons index the series at the nearest whole step; reads past the end
/// clamp to the last sample.
std::vector<std::array<RangeClass, 4>> make_pretrain_labels(
    const IrradianceSeries& s, const RampSpec& ramp,
    const std::array<double, 4>& horizons = kPretrainHorizons);

struct DaggerSchedule {
  double p = 0.9;  ///< mixing decay base, beta_n = p^n
  int epochs = 50;
  int collect_every = 2;
  int first_collect_after_epoch = 5;
  int rollout_episodes_per_collection = 4;
  std::uint64_t seed = 11;

  double beta(int epoch) const;
  /// Collections land at first+1, first+1+every, ... (6, 8, ... by default).
  bool is_collection_epoch(int epoch) const;
  void validate() const;
};

struct DatasetExample {
  std::vector<double> obs;
  Action label;
  int episode_id;
  int t;
  int epoch;  ///< collecting epoch (0 = bootstrap)
};

/// DAgger's growing dataset D. Append-only during a run.
class AggregatedDataset {
 public:
  void append(std::vector<double> obs, Action label, int episode_id, int t, int epoch);
  std::size_t size() const { return examples_.size(); }
  const std::vector<DatasetExample>& examples() const { return examples_; }
  void save_csv(const std::filesystem::path& path) const;

 private:
  std::vector<DatasetExample> examples_;
};

struct VisitedState {
  std::vector<double> obs;
  double u_prev;
  int t;
};

struct MixedRolloutResult {
  std::vector<VisitedState> states;
  Trajectory trajectory;
};

/// Rolls one episode under the beta-mixture: at every step, with probability
/// beta execute the hindsight-optimal action label for the current state,
/// otherwise the network's ungated argmax. Every visited state is recorded.
MixedRolloutResult mixed_rollout(const PolicyNetwork& net, const Episode& episode,
                                 double beta, const RampSpec& ramp, std::uint64_t seed);

struct LabeledState {
  std::vector<double> obs;
  Action label;
  int t;
  double u_prev;
};

/// Labels visited states with the first action of the optimal suffix from
/// each state. State labeling is independent and runs in parallel.
std::vector<LabeledState> label_states(std::span<const VisitedState> states,
                                       const IrradianceSeries& series, const RampSpec& ramp);

struct EpochStats {
  int epoch;
  double beta;
  double mean_loss;
  std::size_t dataset_size;
  std::size_t collected;  ///< examples appended this epoch
};

struct DaggerResult {
  std::vector<EpochStats> history;
  AggregatedDataset dataset;
};

void save_history_csv(std::span<const EpochStats> history, const std::filesystem::path& path);

/// The DAgger loop. D is seeded from pure expert rollouts (the behavior
/// cloning bootstrap), then every collection epoch adds beta-mixed rollout
/// states labeled by the hindsight optimum; every epoch retrains on all of
/// D. Episodes for round k are taken round-robin from train_episodes.
DaggerResult dagger_train(PolicyNetwork& net, std::span<const Episode> train_episodes,
                          const DaggerSchedule& schedule, const TrainConfig& cfg,
                          const RampSpec& ramp);

/// Ablation baseline: trains only on expert-visited states of the given
/// episodes. With the same episodes, epochs and seeds this reproduces
/// dagger_train stopped before its first collection.
void behavior_clone(PolicyNetwork& net, std::span<const Episode> episodes,
                    const TrainConfig& cfg, const RampSpec& ramp, std::uint64_t rollout_seed);

/// Observation/label pairs for the range-classification pretraining task,
/// built along the baseline rollout of each episode.
std::vector<AuxExample> build_aux_examples(const Episode& episode, const PolicyNetwork& net,
                                           const RampSpec& ramp);

/// Trains the trunk and auxiliary heads on the range-classification task for
/// cfg.epochs; the policy head is untouched. Requires auxiliary heads.
void pretrain(PolicyNetwork& net, std::span<const Episode> episodes, const TrainConfig& cfg,
              const RampSpec& ramp);

/// Mean over heads and examples of argmax-equals-label.
double aux_accuracy(const PolicyNetwork& net, std::span<const AuxExample> examples);

}  // namespace ramplight
