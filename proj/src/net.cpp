#include "ramplight/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ramplight/common.hpp"
#include "ramplight/rng.hpp"

namespace ramplight {

// Assembles a network from deserialized parts (friend of PolicyNetwork).
struct NetOps {
  static PolicyNetwork assemble(ObservationSpec spec, NormalizationSpec norm,
                                std::vector<LayerParams> layers) {
    PolicyNetwork net;
    net.spec_ = spec;
    net.norm_ = norm;
    net.layers_ = std::move(layers);
    return net;
  }
};

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("train config: learning_rate must be >= 0");
  if (batch_size <= 0) throw ConfigError("train config: batch_size must be > 0");
  if (epochs < 0) throw ConfigError("train config: epochs must be >= 0");
  if (l2_penalty < 0.0) throw ConfigError("train config: l2_penalty must be >= 0");
}

namespace {

void glorot_init(LayerParams& layer, int out, int in, Rng& rng) {
  layer.w = Matrix(out, in);
  layer.b.assign(out, 0.0);
  const double bound = std::sqrt(6.0 / (in + out));
  for (double& w : layer.w.a) w = rng.uniform(-bound, bound);
}

void matvec(const LayerParams& layer, std::span<const double> in, std::vector<double>& out) {
  out.resize(layer.w.rows);
  for (int r = 0; r < layer.w.rows; ++r) {
    const double* row = layer.w.a.data() + static_cast<std::size_t>(r) * layer.w.cols;
    double acc = layer.b[r];
    for (int c = 0; c < layer.w.cols; ++c) acc += row[c] * in[c];
    out[r] = acc;
  }
}

double logsumexp3(const double* z) {
  const double m = std::max(z[0], std::max(z[1], z[2]));
  return m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m) + std::exp(z[2] - m));
}

std::array<double, 3> softmax3(const double* z) {
  const double lse = logsumexp3(z);
  return {std::exp(z[0] - lse), std::exp(z[1] - lse), std::exp(z[2] - lse)};
}

}  // namespace

PolicyNetwork::PolicyNetwork(const ObservationSpec& spec, const std::vector<int>& hidden,
                             const NormalizationSpec& norm, std::uint64_t seed,
                             bool with_aux_heads)
    : spec_(spec), norm_(norm) {
  norm.validate();
  if (hidden.empty()) throw ConfigError("policy network: need at least one hidden layer");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("policy network: hidden widths must be > 0");

  Rng rng(derive_seed(seed, "net-init"));
  int in = spec.total_dim();
  for (int width : hidden) {
    LayerParams layer;
    glorot_init(layer, width, in, rng);
    layers_.push_back(std::move(layer));
    in = width;
  }
  LayerParams head;
  glorot_init(head, kActions, in, rng);
  layers_.push_back(std::move(head));

  if (with_aux_heads) {
    for (int k = 0; k < kAuxHeads; ++k) {
      LayerParams aux;
      glorot_init(aux, kActions, in, rng);
      aux_.push_back(std::move(aux));
    }
  }
}

int PolicyNetwork::trunk_output_dim() const {
  if (layers_.size() < 2) return 0;
  return layers_[layers_.size() - 2].w.rows;
}

namespace {

// Forward through the trunk and policy head, keeping pre-activations for
// backprop. activations[0] is the input; activations[l+1] the output of
// layer l after its nonlinearity (none on the policy head).
void forward_states(const std::vector<LayerParams>& layers, std::span<const double> obs,
                    std::vector<std::vector<double>>& activations,
                    std::vector<std::vector<double>>& pre) {
  const std::size_t n_layers = layers.size();
  activations.resize(n_layers + 1);
  pre.resize(n_layers);
  activations[0].assign(obs.begin(), obs.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    matvec(layers[l], activations[l], pre[l]);
    activations[l + 1] = pre[l];
    if (l + 1 < n_layers)
      for (double& v : activations[l + 1]) v = v > 0.0 ? v : 0.0;
  }
}

}  // namespace

std::array<double, PolicyNetwork::kActions> PolicyNetwork::forward(
    std::span<const double> obs) const {
  if (static_cast<int>(obs.size()) != input_dim())
    throw ConfigError("forward: observation dimension mismatch");
  std::vector<double> cur(obs.begin(), obs.end()), next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    matvec(layers_[l], cur, next);
    if (l + 1 < layers_.size())
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    std::swap(cur, next);
  }
  return softmax3(cur.data());
}

std::array<std::array<double, PolicyNetwork::kActions>, PolicyNetwork::kAuxHeads>
PolicyNetwork::forward_aux(std::span<const double> obs) const {
  if (!has_aux_heads()) throw ConfigError("forward_aux: network has no auxiliary heads");
  if (static_cast<int>(obs.size()) != input_dim())
    throw ConfigError("forward_aux: observation dimension mismatch");
  std::vector<double> cur(obs.begin(), obs.end()), next;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    matvec(layers_[l], cur, next);
    for (double& v : next) v = v > 0.0 ? v : 0.0;
    std::swap(cur, next);
  }
  std::array<std::array<double, kActions>, kAuxHeads> out;
  std::vector<double> z;
  for (int k = 0; k < kAuxHeads; ++k) {
    matvec(aux_[k], cur, z);
    out[k] = softmax3(z.data());
  }
  return out;
}

namespace {

NetGradients zero_grads(const PolicyNetwork& net) {
  NetGradients g;
  for (const LayerParams& l : net.layers()) {
    LayerParams z;
    z.w = Matrix(l.w.rows, l.w.cols);
    z.b.assign(l.b.size(), 0.0);
    g.layers.push_back(std::move(z));
  }
  for (const LayerParams& l : net.aux_heads()) {
    LayerParams z;
    z.w = Matrix(l.w.rows, l.w.cols);
    z.b.assign(l.b.size(), 0.0);
    g.aux.push_back(std::move(z));
  }
  return g;
}

void add_grads(NetGradients& into, const NetGradients& from) {
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    auto& a = into.layers[l];
    const auto& b = from.layers[l];
    for (std::size_t i = 0; i < a.w.a.size(); ++i) a.w.a[i] += b.w.a[i];
    for (std::size_t i = 0; i < a.b.size(); ++i) a.b[i] += b.b[i];
  }
  for (std::size_t l = 0; l < into.aux.size(); ++l) {
    auto& a = into.aux[l];
    const auto& b = from.aux[l];
    for (std::size_t i = 0; i < a.w.a.size(); ++i) a.w.a[i] += b.w.a[i];
    for (std::size_t i = 0; i < a.b.size(); ++i) a.b[i] += b.b[i];
  }
  into.loss += from.loss;
}

// Accumulates one example's raw (unscaled) policy gradient; returns its CE.
double accumulate_policy_example(const PolicyNetwork& net, const LabeledExample& ex,
                                 NetGradients& g,
                                 std::vector<std::vector<double>>& activations,
                                 std::vector<std::vector<double>>& pre,
                                 std::vector<double>& delta, std::vector<double>& delta_prev) {
  const auto& layers = net.layers();
  forward_states(layers, ex.obs, activations, pre);
  const std::size_t last = layers.size() - 1;
  const double* z = pre[last].data();
  const double ce = logsumexp3(z) - z[static_cast<int>(ex.label)];
  const std::array<double, 3> probs = softmax3(z);

  delta.assign(probs.begin(), probs.end());
  delta[static_cast<int>(ex.label)] -= 1.0;

  for (std::size_t l = last + 1; l-- > 0;) {
    auto& gl = g.layers[l];
    const auto& input = activations[l];
    for (int r = 0; r < gl.w.rows; ++r) {
      const double d = delta[r];
      gl.b[r] += d;
      double* grow = gl.w.a.data() + static_cast<std::size_t>(r) * gl.w.cols;
      for (int c = 0; c < gl.w.cols; ++c) grow[c] += d * input[c];
    }
    if (l == 0) break;
    delta_prev.assign(layers[l].w.cols, 0.0);
    for (int r = 0; r < layers[l].w.rows; ++r) {
      const double d = delta[r];
      const double* row = layers[l].w.a.data() + static_cast<std::size_t>(r) * layers[l].w.cols;
      for (int c = 0; c < layers[l].w.cols; ++c) delta_prev[c] += d * row[c];
    }
    for (int c = 0; c < layers[l].w.cols; ++c)
      if (pre[l - 1][c] <= 0.0) delta_prev[c] = 0.0;  // f'(0) = 0
    std::swap(delta, delta_prev);
  }
  return ce;
}

double accumulate_aux_example(const PolicyNetwork& net, const AuxExample& ex,
                              NetGradients& g,
                              std::vector<std::vector<double>>& activations,
                              std::vector<std::vector<double>>& pre,
                              std::vector<double>& delta, std::vector<double>& delta_prev) {
  const auto& layers = net.layers();
  const auto& aux = net.aux_heads();
  const std::size_t trunk_layers = layers.size() - 1;

  // Trunk forward only (all hidden layers, ReLU everywhere).
  activations.resize(trunk_layers + 1);
  pre.resize(trunk_layers);
  activations[0].assign(ex.obs.begin(), ex.obs.end());
  for (std::size_t l = 0; l < trunk_layers; ++l) {
    matvec(layers[l], activations[l], pre[l]);
    activations[l + 1] = pre[l];
    for (double& v : activations[l + 1]) v = v > 0.0 ? v : 0.0;
  }
  const std::vector<double>& h = activations[trunk_layers];

  const double head_weight = 1.0 / PolicyNetwork::kAuxHeads;
  double ce_sum = 0.0;
  delta.assign(h.size(), 0.0);
  std::vector<double> z;
  for (int k = 0; k < PolicyNetwork::kAuxHeads; ++k) {
    matvec(aux[k], h, z);
    ce_sum += logsumexp3(z.data()) - z[ex.labels[k]];
    std::array<double, 3> probs = softmax3(z.data());
    probs[ex.labels[k]] -= 1.0;
    auto& gk = g.aux[k];
    for (int r = 0; r < 3; ++r) {
      const double d = head_weight * probs[r];
      gk.b[r] += d;
      double* grow = gk.w.a.data() + static_cast<std::size_t>(r) * gk.w.cols;
      const double* wrow = aux[k].w.a.data() + static_cast<std::size_t>(r) * aux[k].w.cols;
      for (std::size_t c = 0; c < h.size(); ++c) {
        grow[c] += d * h[c];
        delta[c] += d * wrow[c];
      }
    }
  }

  // Back through the trunk.
  for (std::size_t c = 0; c < h.size(); ++c)
    if (pre[trunk_layers - 1][c] <= 0.0) delta[c] = 0.0;
  for (std::size_t l = trunk_layers; l-- > 0;) {
    auto& gl = g.layers[l];
    const auto& input = activations[l];
    for (int r = 0; r < gl.w.rows; ++r) {
      const double d = delta[r];
      gl.b[r] += d;
      double* grow = gl.w.a.data() + static_cast<std::size_t>(r) * gl.w.cols;
      for (int c = 0; c < gl.w.cols; ++c) grow[c] += d * input[c];
    }
    if (l == 0) break;
    delta_prev.assign(layers[l].w.cols, 0.0);
    for (int r = 0; r < layers[l].w.rows; ++r) {
      const double d = delta[r];
      const double* row = layers[l].w.a.data() + static_cast<std::size_t>(r) * layers[l].w.cols;
      for (int c = 0; c < layers[l].w.cols; ++c) delta_prev[c] += d * row[c];
    }
    for (int c = 0; c < layers[l].w.cols; ++c)
      if (pre[l - 1][c] <= 0.0) delta_prev[c] = 0.0;
    std::swap(delta, delta_prev);
  }
  return ce_sum * head_weight;
}

double weight_square_sum(const PolicyNetwork& net, bool aux_mode) {
  double sum = 0.0;
  const auto& layers = net.layers();
  const std::size_t n = aux_mode ? layers.size() - 1 : layers.size();
  for (std::size_t l = 0; l < n; ++l)
    for (double w : layers[l].w.a) sum += w * w;
  if (aux_mode)
    for (const auto& head : net.aux_heads())
      for (double w : head.w.a) sum += w * w;
  return sum;
}

// Adds the L2 term to a mean-scaled gradient. In aux mode the policy head is
// excluded so pretraining cannot move it.
void finalize_grads(const PolicyNetwork& net, NetGradients& g, std::size_t n, double l2,
                    bool aux_mode) {
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t head = net.layers().size() - 1;
  for (std::size_t l = 0; l < g.layers.size(); ++l) {
    const bool skip_l2 = aux_mode && l == head;
    for (std::size_t i = 0; i < g.layers[l].w.a.size(); ++i) {
      g.layers[l].w.a[i] *= inv_n;
      if (!skip_l2) g.layers[l].w.a[i] += 2.0 * l2 * net.layers()[l].w.a[i];
    }
    for (double& b : g.layers[l].b) b *= inv_n;
  }
  for (std::size_t l = 0; l < g.aux.size(); ++l) {
    for (std::size_t i = 0; i < g.aux[l].w.a.size(); ++i) {
      g.aux[l].w.a[i] *= inv_n;
      g.aux[l].w.a[i] += 2.0 * l2 * net.aux_heads()[l].w.a[i];
    }
    for (double& b : g.aux[l].b) b *= inv_n;
  }
  g.loss = g.loss * inv_n + l2 * weight_square_sum(net, aux_mode);
}

constexpr std::size_t kGradBlock = 16;

template <typename Example, typename Accumulate>
NetGradients blocked_gradient(const PolicyNetwork& net, std::span<const Example> batch,
                              double l2, bool aux_mode, bool parallel, Accumulate acc) {
  if (batch.empty()) throw ConfigError("gradient: empty batch");
  const std::size_t blocks = (batch.size() + kGradBlock - 1) / kGradBlock;
  std::vector<NetGradients> partial(blocks);

#pragma omp parallel for schedule(static) if (parallel && blocks > 1)
  for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(blocks); ++bi) {
    NetGradients g = zero_grads(net);
    std::vector<std::vector<double>> activations, pre;
    std::vector<double> delta, delta_prev;
    const std::size_t lo = bi * kGradBlock;
    const std::size_t hi = std::min(batch.size(), lo + kGradBlock);
    for (std::size_t i = lo; i < hi; ++i)
      g.loss += acc(net, batch[i], g, activations, pre, delta, delta_prev);
    partial[bi] = std::move(g);
  }

  NetGradients total = std::move(partial[0]);
  for (std::size_t bi = 1; bi < blocks; ++bi) add_grads(total, partial[bi]);
  finalize_grads(net, total, batch.size(), l2, aux_mode);
  return total;
}

template <typename Example, typename Accumulate>
NetGradients serial_gradient(const PolicyNetwork& net, std::span<const Example> batch,
                             double l2, bool aux_mode, Accumulate acc) {
  if (batch.empty()) throw ConfigError("gradient: empty batch");
  NetGradients g = zero_grads(net);
  std::vector<std::vector<double>> activations, pre;
  std::vector<double> delta, delta_prev;
  for (const Example& ex : batch)
    g.loss += acc(net, ex, g, activations, pre, delta, delta_prev);
  finalize_grads(net, g, batch.size(), l2, aux_mode);
  return g;
}

}  // namespace

double loss(const PolicyNetwork& net, std::span<const LabeledExample> batch, double l2) {
  if (batch.empty()) throw ConfigError("loss: empty batch");
  double total = 0.0;
  std::vector<double> cur, next;
  for (const LabeledExample& ex : batch) {
    cur.assign(ex.obs.begin(), ex.obs.end());
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      matvec(net.layers()[l], cur, next);
      if (l + 1 < net.layers().size())
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      std::swap(cur, next);
    }
    total += logsumexp3(cur.data()) - cur[static_cast<int>(ex.label)];
  }
  return total / static_cast<double>(batch.size()) + l2 * weight_square_sum(net, false);
}

NetGradients gradient(const PolicyNetwork& net, std::span<const LabeledExample> batch,
                      double l2) {
  return blocked_gradient<LabeledExample>(net, batch, l2, false, true,
                                          accumulate_policy_example);
}

NetGradients gradient_serial(const PolicyNetwork& net, std::span<const LabeledExample> batch,
                             double l2) {
  return serial_gradient<LabeledExample>(net, batch, l2, false, accumulate_policy_example);
}

double aux_loss(const PolicyNetwork& net, std::span<const AuxExample> batch, double l2) {
  if (!net.has_aux_heads()) throw ConfigError("aux_loss: network has no auxiliary heads");
  if (batch.empty()) throw ConfigError("aux_loss: empty batch");
  double total = 0.0;
  for (const AuxExample& ex : batch) {
    const auto heads = net.forward_aux(ex.obs);
    double ce = 0.0;
    for (int k = 0; k < PolicyNetwork::kAuxHeads; ++k)
      ce += -std::log(heads[k][ex.labels[k]]);
    total += ce / PolicyNetwork::kAuxHeads;
  }
  return total / static_cast<double>(batch.size()) + l2 * weight_square_sum(net, true);
}

NetGradients aux_gradient(const PolicyNetwork& net, std::span<const AuxExample> batch,
                          double l2) {
  if (!net.has_aux_heads()) throw ConfigError("aux_gradient: network has no auxiliary heads");
  return blocked_gradient<AuxExample>(net, batch, l2, true, true, accumulate_aux_example);
}

NetGradients aux_gradient_serial(const PolicyNetwork& net, std::span<const AuxExample> batch,
                                 double l2) {
  if (!net.has_aux_heads()) throw ConfigError("aux_gradient: network has no auxiliary heads");
  return serial_gradient<AuxExample>(net, batch, l2, true, accumulate_aux_example);
}

namespace {

void ensure_state(const PolicyNetwork& net, OptimizerState& state) {
  if (state.m.layers.size() != net.layers().size() ||
      state.m.aux.size() != net.aux_heads().size()) {
    state.m = zero_grads(net);
    state.v = zero_grads(net);
    state.step_count = 0;
  }
}

void apply_update(PolicyNetwork& net, const NetGradients& g, const TrainConfig& cfg,
                  OptimizerState& state, bool aux_mode) {
  ensure_state(net, state);
  const std::size_t head = net.layers().size() - 1;

  auto update = [&](LayerParams& p, const LayerParams& gl, LayerParams& m, LayerParams& v) {
    if (cfg.optimizer == Optimizer::Sgd) {
      for (std::size_t i = 0; i < p.w.a.size(); ++i) p.w.a[i] -= cfg.learning_rate * gl.w.a[i];
      for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] -= cfg.learning_rate * gl.b[i];
      return;
    }
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    auto adam = [&](double& param, double grad, double& mi, double& vi) {
      mi = b1 * mi + (1.0 - b1) * grad;
      vi = b2 * vi + (1.0 - b2) * grad * grad;
      param -= cfg.learning_rate * (mi / c1) / (std::sqrt(vi / c2) + eps);
    };
    for (std::size_t i = 0; i < p.w.a.size(); ++i) adam(p.w.a[i], gl.w.a[i], m.w.a[i], v.w.a[i]);
    for (std::size_t i = 0; i < p.b.size(); ++i) adam(p.b[i], gl.b[i], m.b[i], v.b[i]);
  };

  ++state.step_count;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (aux_mode && l == head) continue;  // pretraining never touches the policy head
    update(net.layers()[l], g.layers[l], state.m.layers[l], state.v.layers[l]);
  }
  for (std::size_t l = 0; l < net.aux_heads().size(); ++l)
    update(net.aux_heads()[l], g.aux[l], state.m.aux[l], state.v.aux[l]);
}

}  // namespace

double train_step(PolicyNetwork& net, std::span<const LabeledExample> batch,
                  const TrainConfig& cfg, OptimizerState& state) {
  cfg.validate();
  const NetGradients g = gradient(net, batch, cfg.l2_penalty);
  apply_update(net, g, cfg, state, false);
  return g.loss;
}

double aux_train_step(PolicyNetwork& net, std::span<const AuxExample> batch,
                      const TrainConfig& cfg, OptimizerState& state) {
  cfg.validate();
  const NetGradients g = aux_gradient(net, batch, cfg.l2_penalty);
  apply_update(net, g, cfg, state, true);
  return g.loss;
}

ActionChoice select_action(const PolicyNetwork& net, std::span<const double> obs,
                           double threshold) {
  const auto probs = net.forward(obs);
  int arg = 0;  // Track first, so exact ties stay with the safe default
  for (int i = 1; i < PolicyNetwork::kActions; ++i)
    if (probs[i] > probs[arg]) arg = i;
  const double confidence = probs[arg];
  const Action action = confidence > threshold ? static_cast<Action>(arg) : Action::Track;
  return {action, confidence, action != Action::Track};
}

// --- Serialization ---------------------------------------------------------

void save_model(const PolicyNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path.string());
  char buf[64];
  out << "ramplight-model 1\n";
  out << "mode " << mode_name(net.input_spec().mode) << "\n";
  out << "feature_dim " << net.input_spec().feature_dim << "\n";
  std::snprintf(buf, sizeof buf, "%.17g %.17g", net.normalization().min, net.normalization().max);
  out << "normalization " << buf << "\n";
  out << "layers " << net.layers().size() << "\n";
  for (const LayerParams& l : net.layers()) {
    out << "layer " << l.w.rows << " " << l.w.cols << "\n";
    for (int r = 0; r < l.w.rows; ++r) {
      for (int c = 0; c < l.w.cols; ++c) {
        std::snprintf(buf, sizeof buf, c ? " %.17g" : "%.17g", l.w.at(r, c));
        out << buf;
      }
      out << "\n";
    }
    out << "bias";
    for (double b : l.b) {
      std::snprintf(buf, sizeof buf, " %.17g", b);
      out << buf;
    }
    out << "\n";
  }
  out << "end\n";
  if (!out) throw IoError("write failed: " + path.string());
}

PolicyNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path.string());

  auto expect = [&](const std::string& want) {
    std::string tok;
    if (!(in >> tok) || tok != want)
      throw IoError("model file " + path.string() + ": expected `" + want + "`");
  };

  expect("ramplight-model");
  int version = 0;
  if (!(in >> version)) throw IoError("model file " + path.string() + ": missing version");
  if (version != 1)
    throw ConfigError("model file " + path.string() + ": unsupported version " +
                      std::to_string(version));

  expect("mode");
  std::string mode_str;
  in >> mode_str;
  ObservationSpec spec;
  spec.mode = mode_from_name(mode_str);
  expect("feature_dim");
  in >> spec.feature_dim;
  if (spec.mode == ExperimentMode::FutureIrradiance ? spec.feature_dim != 0
                                                    : spec.feature_dim <= 0)
    throw ConfigError("model file " + path.string() + ": feature_dim inconsistent with mode");

  NormalizationSpec norm;
  expect("normalization");
  in >> norm.min >> norm.max;
  norm.validate();

  expect("layers");
  std::size_t n_layers = 0;
  in >> n_layers;
  if (!in || n_layers < 2) throw IoError("model file " + path.string() + ": bad layer count");

  std::vector<LayerParams> layers;
  for (std::size_t l = 0; l < n_layers; ++l) {
    expect("layer");
    int rows = 0, cols = 0;
    in >> rows >> cols;
    if (!in || rows <= 0 || cols <= 0)
      throw IoError("model file " + path.string() + ": bad layer shape");
    LayerParams p;
    p.w = Matrix(rows, cols);
    for (double& w : p.w.a)
      if (!(in >> w)) throw IoError("model file " + path.string() + ": truncated weights");
    expect("bias");
    p.b.resize(rows);
    for (double& b : p.b)
      if (!(in >> b)) throw IoError("model file " + path.string() + ": truncated biases");
    layers.push_back(std::move(p));
  }
  expect("end");

  // Shape validation: consecutive layers compose, head outputs 3 classes,
  // input matches the declared observation layout.
  for (std::size_t l = 1; l < layers.size(); ++l)
    if (layers[l].w.cols != layers[l - 1].w.rows)
      throw ConfigError("model file " + path.string() + ": layer shapes do not compose");
  if (layers.back().w.rows != PolicyNetwork::kActions)
    throw ConfigError("model file " + path.string() + ": policy head must have 3 outputs");
  if (layers.front().w.cols != spec.total_dim())
    throw ConfigError("model file " + path.string() + ": input dim does not match mode layout");

  return NetOps::assemble(spec, norm, std::move(layers));
}

PolicyNetwork load_model_for_mode(const std::filesystem::path& path, ExperimentMode mode) {
  PolicyNetwork net = load_model(path);
  if (net.input_spec().mode != mode)
    throw ConfigError("model file " + path.string() + ": trained for mode " +
                      std::string(mode_name(net.input_spec().mode)) + ", requested " +
                      std::string(mode_name(mode)));
  return net;
}

}  // namespace ramplight
