#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brownne/brownian.hpp"
#include "brownne/random.hpp"

namespace brownne {

enum class ActivationKind : std::uint8_t { relu = 0, brownian = 1 };

struct LayerActivation {
  ActivationKind kind = ActivationKind::relu;
  BrownianSpec brownian{};

  static LayerActivation relu() { return {}; }
  static LayerActivation brownian_relu(const BrownianSpec& spec) {
    return {ActivationKind::brownian, spec};
  }
};

/// Widths (input, hidden..., output) and one activation per hidden layer. The
/// output layer always feeds a softmax cross-entropy head.
struct MlpSpec {
  std::vector<int> layer_widths;
  std::vector<LayerActivation> activations;
  std::uint64_t seed = 0;

  std::size_t hidden_count() const { return layer_widths.size() - 2; }
  void validate() const;
};

struct Layer {
  Eigen::MatrixXd weights;  ///< out x in
  Eigen::VectorXd bias;     ///< out
};

struct MlpParams {
  std::vector<Layer> layers;

  std::size_t parameter_count() const;
};

/// Rows are examples with features in [0, 1].
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

enum class Mode { train, eval };

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;       ///< input of each layer, batch x width
  std::vector<Eigen::MatrixXd> preactivations;  ///< hidden layers only
  Eigen::MatrixXd logits;
};

/// He-normal weights N(0, 2 / fan_in), zero biases; a pure function of spec.seed.
MlpParams init_params(const MlpSpec& spec);

/// Brownian layers add forward noise in train mode, and in eval mode only when
/// `noise_at_eval` is set.
ForwardCache forward(const MlpParams& params, const Eigen::MatrixXd& batch, const MlpSpec& spec,
                     Mode mode, RandomStream& rng, bool noise_at_eval = false);

/// Mean softmax cross-entropy; writes d loss / d logits when `grad` is non-null.
double softmax_cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                             Eigen::MatrixXd* grad = nullptr);

/// Backpropagates an upstream gradient on the logits. Hidden layer
/// derivatives are H(z) for ReLU layers and fresh backward_activation samples
/// for Brownian layers.
std::vector<Layer> backward_from_logits(const MlpParams& params, const ForwardCache& cache,
                                        const Eigen::MatrixXd& logit_grad, const MlpSpec& spec,
                                        RandomStream& rng);

/// Gradient of the mean cross-entropy loss for `labels`.
std::vector<Layer> backward(const MlpParams& params, const ForwardCache& cache,
                            const std::vector<int>& labels, const MlpSpec& spec,
                            RandomStream& rng);

struct Metrics {
  double top1 = 0.0;
  double top3 = 0.0;
};

/// Top-k accuracy of a logit matrix. Ties rank the lower class index first.
Metrics score_logits(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

/// Deterministic evaluation (no Brownian noise unless noise_at_eval).
Metrics evaluate(const MlpParams& params, const Dataset& data, const MlpSpec& spec,
                 bool noise_at_eval = false, std::uint64_t noise_seed = 0);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 0.05;
  double data_pct = 1.0;
  bool noise_at_eval = false;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double top1 = 0.0;
  double top3 = 0.0;
};

struct TrainResult {
  MlpParams params;
  std::vector<EpochMetrics> trace;
  std::size_t train_examples = 0;
};

/// Minibatch SGD. The training subset (data_pct), the shuffle order, the
/// initial weights and the Brownian noise each come from their own substream
/// of spec.seed, so a spec with alpha = 0 everywhere reproduces the all-ReLU
/// run bit for bit.
TrainResult train(const MlpSpec& spec, const Dataset& train_set, const Dataset& eval_set,
                  const TrainConfig& cfg);

/// Flat little-endian checkpoint: "BRWN", u32 version, u32 width count,
/// widths (u32), per hidden layer a u8 tag (0 relu, 1 brownian; brownian adds
/// u32 n, f64 v, f64 alpha), then per layer the row-major f64 weights followed
/// by the f64 bias.
void save_checkpoint(const std::string& path, const MlpSpec& spec, const MlpParams& params);
std::pair<MlpSpec, MlpParams> load_checkpoint(const std::string& path);

}  // namespace brownne
