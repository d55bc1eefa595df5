#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ramplight/control.hpp"
#include "ramplight/observation.hpp"

namespace ramplight {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

struct LayerParams {
  Matrix w;               // out x in
  std::vector<double> b;  // out
};

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 50;
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 13;
  double l2_penalty = 0.0;

  void validate() const;
};

struct LabeledExample {
  std::vector<double> obs;
  Action label;
};

/// Pretraining example: one observation with the 4 range-classification
/// labels (class indices 0..2, one per horizon).
struct AuxExample {
  std::vector<double> obs;
  std::array<int, 4> labels;
};

/// Fully connected ReLU classifier over the three actions, with optional
/// auxiliary heads used only during pretraining. The normalization spec and
/// observation layout travel with the parameters so a saved model is
/// self-describing.
class PolicyNetwork {
 public:
  static constexpr int kActions = 3;
  static constexpr int kAuxHeads = 4;

  PolicyNetwork() = default;
  PolicyNetwork(const ObservationSpec& spec, const std::vector<int>& hidden,
                const NormalizationSpec& norm, std::uint64_t seed, bool with_aux_heads);

  const ObservationSpec& input_spec() const { return spec_; }
  const NormalizationSpec& normalization() const { return norm_; }
  int input_dim() const { return layers_.empty() ? 0 : layers_.front().w.cols; }
  int trunk_output_dim() const;

  bool has_aux_heads() const { return !aux_.empty(); }
  void drop_aux_heads() { aux_.clear(); }

  std::array<double, kActions> forward(std::span<const double> obs) const;
  std::array<std::array<double, kActions>, kAuxHeads> forward_aux(std::span<const double> obs) const;

  std::vector<LayerParams>& layers() { return layers_; }
  const std::vector<LayerParams>& layers() const { return layers_; }
  std::vector<LayerParams>& aux_heads() { return aux_; }
  const std::vector<LayerParams>& aux_heads() const { return aux_; }

  /// Index of the policy head (the last entry of layers()).
  int policy_head_index() const { return static_cast<int>(layers_.size()) - 1; }

 private:
  friend struct NetOps;
  ObservationSpec spec_;
  NormalizationSpec norm_;
  std::vector<LayerParams> layers_;  // trunk + policy head
  std::vector<LayerParams> aux_;     // kAuxHeads heads on the last hidden layer
};

/// Gradient (or optimizer-moment) storage shaped like a network.
struct NetGradients {
  std::vector<LayerParams> layers;
  std::vector<LayerParams> aux;
  double loss = 0.0;
};

/// Mean cross entropy of the true labels plus l2 * sum of squared weights.
double loss(const PolicyNetwork& net, std::span<const LabeledExample> batch, double l2);

/// Analytic gradient of loss(). The batch is accumulated in fixed-size
/// blocks that are reduced in index order, so the result is identical for
/// any thread count; gradient_serial is the single-pass reference.
NetGradients gradient(const PolicyNetwork& net, std::span<const LabeledExample> batch, double l2);
NetGradients gradient_serial(const PolicyNetwork& net, std::span<const LabeledExample> batch, double l2);

/// Pretraining objective: mean over the four auxiliary heads of their mean
/// cross entropy, plus l2 * sum of squared weights on the trunk and heads.
/// The policy head does not participate.
double aux_loss(const PolicyNetwork& net, std::span<const AuxExample> batch, double l2);
NetGradients aux_gradient(const PolicyNetwork& net, std::span<const AuxExample> batch, double l2);
NetGradients aux_gradient_serial(const PolicyNetwork& net, std::span<const AuxExample> batch, double l2);

struct OptimizerState {
  NetGradients m;  // first moments (Adam)
  NetGradients v;  // second moments (Adam)
  long step_count = 0;
};

/// One optimizer update on one batch. Returns the batch loss before the
/// update. aux_train_step drives the pretraining objective and leaves the
/// policy head untouched.
double train_step(PolicyNetwork& net, std::span<const LabeledExample> batch,
                  const TrainConfig& cfg, OptimizerState& state);
double aux_train_step(PolicyNetwork& net, std::span<const AuxExample> batch,
                      const TrainConfig& cfg, OptimizerState& state);

struct ActionChoice {
  Action action;
  double confidence;
  bool deviated;
};

/// Confidence-gated action selection: the network's argmax is executed only
/// when its confidence (max softmax probability) strictly exceeds the
/// threshold; otherwise Track. Argmax ties resolve to Track.
ActionChoice select_action(const PolicyNetwork& net, std::span<const double> obs,
                           double threshold);

/// Versioned text serialization, >= 17 significant digits per parameter, so
/// forward passes of a reloaded model are bitwise identical. Auxiliary heads
/// are not serialized.
void save_model(const PolicyNetwork& net, const std::filesystem::path& path);
PolicyNetwork load_model(const std::filesystem::path& path);
PolicyNetwork load_model_for_mode(const std::filesystem::path& path, ExperimentMode mode);

}  // namespace ramplight
