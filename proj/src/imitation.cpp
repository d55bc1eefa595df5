#include "ramplight/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ramplight/common.hpp"
#include "ramplight/rng.hpp"

namespace ramplight {

std::vector<std::array<RangeClass, 4>> make_pretrain_labels(
    const IrradianceSeries& s, const RampSpec& ramp, const std::array<double, 4>& horizons) {
  s.validate();
  ramp.validate();
  const int n = s.size();
  std::array<int, 4> steps;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    if (horizons[h] <= 0.0) throw ConfigError("pretrain labels: horizons must be > 0");
    steps[h] = std::max(1, static_cast<int>(std::llround(horizons[h] / s.dt)));
  }

  std::vector<std::array<RangeClass, 4>> labels(n);
  for (int t = 0; t < n; ++t) {
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const int idx = std::min(t + steps[h], n - 1);
      const double diff = s.values[idx] - s.values[t];
      const double budget = ramp.rate_limit * horizons[h];
      if (std::abs(diff) <= budget)
        labels[t][h] = RangeClass::Contained;
      else
        labels[t][h] = diff > budget ? RangeClass::Higher : RangeClass::Lower;
    }
  }
  return labels;
}

double DaggerSchedule::beta(int epoch) const { return std::pow(p, epoch); }

bool DaggerSchedule::is_collection_epoch(int epoch) const {
  if (epoch <= first_collect_after_epoch) return false;
  return (epoch - first_collect_after_epoch - 1) % collect_every == 0;
}

void DaggerSchedule::validate() const {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dagger schedule: p must lie in [0, 1)");
  if (epochs < first_collect_after_epoch)
    throw ConfigError("dagger schedule: epochs must be >= first_collect_after_epoch");
  if (collect_every <= 0) throw ConfigError("dagger schedule: collect_every must be > 0");
  if (rollout_episodes_per_collection <= 0)
    throw ConfigError("dagger schedule: rollout_episodes_per_collection must be > 0");
}

void AggregatedDataset::append(std::vector<double> obs, Action label, int episode_id, int t,
                               int epoch) {
  if (!examples_.empty() && epoch < examples_.back().epoch)
    throw ConfigError("aggregated dataset: collecting epochs must be nondecreasing");
  examples_.push_back({std::move(obs), label, episode_id, t, epoch});
}

void AggregatedDataset::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[64];
  out << "label,episode_id,t,epoch,obs...\n";
  for (const DatasetExample& ex : examples_) {
    out << action_name(ex.label) << "," << ex.episode_id << "," << ex.t << "," << ex.epoch;
    for (double v : ex.obs) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

MixedRolloutResult mixed_rollout(const PolicyNetwork& net, const Episode& episode,
                                 double beta, const RampSpec& ramp, std::uint64_t seed) {
  if (beta < 0.0 || beta > 1.0) throw ConfigError("mixed_rollout: beta must lie in [0, 1]");
  const auto& s = episode.irradiance;
  const ObservationBuilder builder(episode, net.normalization(), net.input_spec());
  const SuffixOptimalLabeler labeler(s, ramp);
  Rng rng(seed);

  MixedRolloutResult result;
  result.trajectory.u0 = s.values.front();
  result.trajectory.u.resize(s.size());
  result.trajectory.actions.resize(s.size());
  result.trajectory.deviated.resize(s.size());
  result.states.reserve(s.size());

  double u_prev = result.trajectory.u0;
  for (int t = 0; t < s.size(); ++t) {
    std::vector<double> obs = builder.build(t, u_prev);
    result.states.push_back({obs, u_prev, t});
    Action a;
    if (rng.bernoulli(beta)) {
      a = labeler.optimal_action(t, u_prev);
    } else {
      a = select_action(net, obs, 0.0).action;  // ungated during collection
    }
    u_prev = apply_action(u_prev, s.values[t], a, ramp);
    result.trajectory.u[t] = u_prev;
    result.trajectory.actions[t] = a;
    result.trajectory.deviated[t] = a != Action::Track ? 1 : 0;
  }
  return result;
}

std::vector<LabeledState> label_states(std::span<const VisitedState> states,
                                       const IrradianceSeries& series, const RampSpec& ramp) {
  const SuffixOptimalLabeler labeler(series, ramp);
  std::vector<LabeledState> out(states.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(states.size()); ++i) {
    const VisitedState& st = states[i];
    out[i].obs = st.obs;
    out[i].t = st.t;
    out[i].u_prev = st.u_prev;
    out[i].label = labeler.optimal_action(st.t, st.u_prev);
  }
  return out;
}

void save_history_csv(std::span<const EpochStats> history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[64];
  out << "epoch,beta,mean_loss,dataset_size,collected\n";
  for (const EpochStats& e : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%zu,%zu\n", e.epoch, e.beta, e.mean_loss,
                  e.dataset_size, e.collected);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// One pass of minibatch training over the whole dataset; returns mean batch loss.
double train_epoch(PolicyNetwork& net, const AggregatedDataset& dataset, const TrainConfig& cfg,
                   OptimizerState& state, std::uint64_t shuffle_seed) {
  const auto& examples = dataset.examples();
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(shuffle_seed);
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_index(i + 1)]);

  double loss_sum = 0.0;
  std::size_t batches = 0;
  std::vector<LabeledExample> batch;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
    batch.clear();
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back({examples[order[i]].obs, examples[order[i]].label});
    loss_sum += train_step(net, batch, cfg, state);
    ++batches;
  }
  return batches ? loss_sum / static_cast<double>(batches) : 0.0;
}

// Collects beta-mixed rollouts over one round-robin slice of the episodes
// and appends labeled states to D. Returns the number of appended examples.
std::size_t collect_round(PolicyNetwork& net, std::span<const Episode> episodes,
                          const RampSpec& ramp, AggregatedDataset& dataset, int round,
                          int per_round, double beta, int epoch, std::uint64_t seed) {
  const int n = static_cast<int>(episodes.size());
  const std::uint64_t round_seed = derive_seed(seed, "collect-round", static_cast<std::uint64_t>(round));
  std::size_t appended = 0;
  for (int j = 0; j < per_round; ++j) {
    const int idx = (round * per_round + j) % n;
    const Episode& ep = episodes[idx];
    const MixedRolloutResult rollout =
        mixed_rollout(net, ep, beta, ramp, derive_seed(round_seed, "episode", j));
    const std::vector<LabeledState> labeled =
        label_states(rollout.states, ep.irradiance, ramp);
    for (const LabeledState& st : labeled) {
      dataset.append(st.obs, st.label, ep.irradiance.day_id, st.t, epoch);
      ++appended;
    }
  }
  return appended;
}

}  // namespace

DaggerResult dagger_train(PolicyNetwork& net, std::span<const Episode> train_episodes,
                          const DaggerSchedule& schedule, const TrainConfig& cfg,
                          const RampSpec& ramp) {
  schedule.validate();
  cfg.validate();
  if (train_episodes.empty()) throw ConfigError("dagger_train: no training episodes");

  DaggerResult result;
  OptimizerState state;

  // Bootstrap: pure expert rollouts so the first epochs have data.
  collect_round(net, train_episodes, ramp, result.dataset, 0,
                schedule.rollout_episodes_per_collection, 1.0, 0, schedule.seed);

  int round = 1;
  for (int epoch = 1; epoch <= schedule.epochs; ++epoch) {
    std::size_t collected = 0;
    if (schedule.is_collection_epoch(epoch)) {
      collected = collect_round(net, train_episodes, ramp, result.dataset, round,
                                schedule.rollout_episodes_per_collection,
                                schedule.beta(epoch), epoch, schedule.seed);
      ++round;
    }
    const double mean_loss = train_epoch(net, result.dataset, cfg, state,
                                         derive_seed(cfg.seed, "dagger-epoch",
                                                     static_cast<std::uint64_t>(epoch)));
    result.history.push_back({epoch, schedule.beta(epoch), mean_loss,
                              result.dataset.size(), collected});
  }
  return result;
}

void behavior_clone(PolicyNetwork& net, std::span<const Episode> episodes,
                    const TrainConfig& cfg, const RampSpec& ramp, std::uint64_t rollout_seed) {
  cfg.validate();
  if (episodes.empty()) throw ConfigError("behavior_clone: no episodes");

  AggregatedDataset dataset;
  collect_round(net, episodes, ramp, dataset, 0, static_cast<int>(episodes.size()), 1.0, 0,
                rollout_seed);

  OptimizerState state;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    train_epoch(net, dataset, cfg, state,
                derive_seed(cfg.seed, "dagger-epoch", static_cast<std::uint64_t>(epoch)));
  }
}

std::vector<AuxExample> build_aux_examples(const Episode& episode, const PolicyNetwork& net,
                                           const RampSpec& ramp) {
  const auto& s = episode.irradiance;
  const ObservationBuilder builder(episode, net.normalization(), net.input_spec());
  const auto labels = make_pretrain_labels(s, ramp);
  const Trajectory base = baseline_rollout(s, s.values.front(), ramp);

  std::vector<AuxExample> out;
  out.reserve(s.size());
  double u_prev = base.u0;
  for (int t = 0; t < s.size(); ++t) {
    AuxExample ex;
    ex.obs = builder.build(t, u_prev);
    for (int h = 0; h < 4; ++h) ex.labels[h] = static_cast<int>(labels[t][h]);
    out.push_back(std::move(ex));
    u_prev = base.u[t];
  }
  return out;
}

void pretrain(PolicyNetwork& net, std::span<const Episode> episodes, const TrainConfig& cfg,
              const RampSpec& ramp) {
  cfg.validate();
  if (!net.has_aux_heads()) throw ConfigError("pretrain: network has no auxiliary heads");
  if (episodes.empty()) throw ConfigError("pretrain: no episodes");

  std::vector<AuxExample> examples;
  for (const Episode& ep : episodes) {
    auto ex = build_aux_examples(ep, net, ramp);
    examples.insert(examples.end(), std::make_move_iterator(ex.begin()),
                    std::make_move_iterator(ex.end()));
  }

  OptimizerState state;
  std::vector<std::size_t> order(examples.size());
  std::vector<AuxExample> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(cfg.seed, "pretrain-epoch", static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(examples[order[i]]);
      aux_train_step(net, batch, cfg, state);
    }
  }
}

double aux_accuracy(const PolicyNetwork& net, std::span<const AuxExample> examples) {
  if (examples.empty()) throw ConfigError("aux_accuracy: no examples");
  std::size_t hits = 0;
  for (const AuxExample& ex : examples) {
    const auto heads = net.forward_aux(ex.obs);
    for (int k = 0; k < PolicyNetwork::kAuxHeads; ++k) {
      int arg = 0;
      for (int i = 1; i < 3; ++i)
        if (heads[k][i] > heads[k][arg]) arg = i;
      if (arg == ex.labels[k]) ++hits;
    }
  }
  return static_cast<double>(hits) /
         (static_cast<double>(examples.size()) * PolicyNetwork::kAuxHeads);
}

}  // namespace ramplight
