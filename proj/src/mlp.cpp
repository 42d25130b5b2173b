#include "brownne/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "brownne/error.hpp"

namespace brownne {

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw ContractError("an MLP needs at least input and output widths");
  for (int w : layer_widths) {
    if (w < 1) throw ContractError("layer widths must be positive");
  }
  if (activations.size() != hidden_count()) {
    throw ContractError("expected " + std::to_string(hidden_count()) +
                        " hidden activations, got " + std::to_string(activations.size()));
  }
}

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers) count += layer.weights.size() + layer.bias.size();
  return count;
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ContractError("dataset has " + std::to_string(features.rows()) + " rows but " +
                        std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= class_count) throw ContractError("label " + std::to_string(y) + " out of range");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.class_count = class_count;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

MlpParams init_params(const MlpSpec& spec) {
  spec.validate();
  auto rng = RandomStream::derive(spec.seed, "mlp/init");
  MlpParams params;
  for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const double scale = std::sqrt(2.0 / in);
    Layer layer;
    layer.weights.resize(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.weights(r, c) = scale * rng.normal();
    }
    layer.bias = Eigen::VectorXd::Zero(out);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ForwardCache forward(const MlpParams& params, const Eigen::MatrixXd& batch, const MlpSpec& spec,
                     Mode mode, RandomStream& rng, bool noise_at_eval) {
  if (batch.cols() != spec.layer_widths.front()) {
    throw ContractError("batch width " + std::to_string(batch.cols()) +
                        " does not match input width " + std::to_string(spec.layer_widths.front()));
  }
  const bool noisy = mode == Mode::train || noise_at_eval;
  ForwardCache cache;
  Eigen::MatrixXd x = batch;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Eigen::MatrixXd z = x * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    cache.inputs.push_back(std::move(x));
    if (l + 1 == params.layers.size()) {
      cache.logits = std::move(z);
      break;
    }
    const auto& act = spec.activations[l];
    Eigen::MatrixXd a(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const double zi = z(r, c);
        a(r, c) = (noisy && act.kind == ActivationKind::brownian)
                      ? forward_activation(zi, act.brownian, rng)
                      : (zi > 0.0 ? zi : 0.0);
      }
    }
    if (!a.allFinite()) {
      throw EvaluationError("non-finite activation in hidden layer " + std::to_string(l));
    }
    cache.preactivations.push_back(std::move(z));
    x = std::move(a);
  }
  return cache;
}

double softmax_cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                             Eigen::MatrixXd* grad) {
  const auto rows = logits.rows();
  if (static_cast<std::size_t>(rows) != labels.size()) throw ContractError("label count mismatch");
  double loss = 0.0;
  if (grad) grad->resize(rows, logits.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double peak = logits.row(r).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(r).array() - peak).exp().matrix();
    const double total = e.sum();
    loss += std::log(total) + peak - logits(r, labels[r]);
    if (grad) {
      grad->row(r) = e / total;
      (*grad)(r, labels[r]) -= 1.0;
    }
  }
  if (grad) *grad /= static_cast<double>(rows);
  return loss / static_cast<double>(rows);
}

std::vector<Layer> backward_from_logits(const MlpParams& params, const ForwardCache& cache,
                                        const Eigen::MatrixXd& logit_grad, const MlpSpec& spec,
                                        RandomStream& rng) {
  const std::size_t depth = params.layers.size();
  if (cache.inputs.size() != depth || cache.preactivations.size() + 1 != depth) {
    throw ContractError("forward cache does not match the parameter set");
  }
  if (logit_grad.rows() != cache.logits.rows() || logit_grad.cols() != cache.logits.cols()) {
    throw ContractError("upstream gradient shape does not match the logits");
  }
  std::vector<Layer> grads(depth);
  Eigen::MatrixXd upstream = logit_grad;
  for (std::size_t l = depth; l-- > 0;) {
    grads[l].weights = upstream.transpose() * cache.inputs[l];
    grads[l].bias = upstream.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd below = upstream * params.layers[l].weights;
    const auto& z = cache.preactivations[l - 1];
    const auto& act = spec.activations[l - 1];
    for (Eigen::Index r = 0; r < below.rows(); ++r) {
      for (Eigen::Index c = 0; c < below.cols(); ++c) {
        const double zi = z(r, c);
        const double slope = act.kind == ActivationKind::brownian
                                 ? backward_activation(zi, act.brownian, rng)
                                 : (zi > 0.0 ? 1.0 : 0.0);
        below(r, c) *= slope;
      }
    }
    upstream = std::move(below);
  }
  return grads;
}

std::vector<Layer> backward(const MlpParams& params, const ForwardCache& cache,
                            const std::vector<int>& labels, const MlpSpec& spec,
                            RandomStream& rng) {
  Eigen::MatrixXd grad;
  softmax_cross_entropy(cache.logits, labels, &grad);
  return backward_from_logits(params, cache, grad, spec, rng);
}

Metrics score_logits(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) throw ContractError("label count mismatch");
  if (labels.empty()) return {};
  std::size_t hit1 = 0;
  std::size_t hit3 = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int y = labels[r];
    const double target = logits(r, y);
    int rank = 0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const double v = logits(r, c);
      if (v > target || (v == target && c < y)) ++rank;
    }
    hit1 += rank < 1;
    hit3 += rank < 3;
  }
  const double n = static_cast<double>(labels.size());
  return {hit1 / n, hit3 / n};
}

Metrics evaluate(const MlpParams& params, const Dataset& data, const MlpSpec& spec,
                 bool noise_at_eval, std::uint64_t noise_seed) {
  auto rng = RandomStream::derive(noise_seed, "mlp/eval");
  const auto cache = forward(params, data.features, spec, Mode::eval, rng, noise_at_eval);
  return score_logits(cache.logits, data.labels);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ContractError("learning_rate must be positive");
  if (!(data_pct > 0.0 && data_pct <= 1.0)) throw ContractError("data_pct must lie in (0, 1]");
}

namespace {

void shuffle(std::vector<std::size_t>& items, RandomStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(items[i - 1], items[std::min(j, i - 1)]);
  }
}

}  // namespace

TrainResult train(const MlpSpec& spec, const Dataset& train_set, const Dataset& eval_set,
                  const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  train_set.validate();
  eval_set.validate();
  if (train_set.size() == 0) throw ContractError("training set is empty");
  if (train_set.class_count != spec.layer_widths.back()) {
    throw ContractError("output width does not match the class count");
  }

  auto split_rng = RandomStream::derive(spec.seed, "mlp/split");
  auto order_rng = RandomStream::derive(spec.seed, "mlp/shuffle");
  auto noise_rng = RandomStream::derive(spec.seed, "mlp/noise");

  std::vector<std::size_t> rows(train_set.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  shuffle(rows, split_rng);
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.data_pct * static_cast<double>(rows.size()) - 1e-9)));
  rows.resize(keep);
  const Dataset data = train_set.subset(rows);

  TrainResult result;
  result.params = init_params(spec);
  result.train_examples = data.size();
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, order_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
      const Dataset batch = data.subset(idx);
      ForwardCache cache;
      try {
        cache = forward(result.params, batch.features, spec, Mode::train, noise_rng);
      } catch (const EvaluationError& e) {
        throw EvaluationError("epoch " + std::to_string(epoch + 1) + ": " + e.what());
      }
      Eigen::MatrixXd grad;
      const double loss = softmax_cross_entropy(cache.logits, batch.labels, &grad);
      if (!std::isfinite(loss)) {
        throw EvaluationError("training loss became non-finite in epoch " + std::to_string(epoch + 1));
      }
      loss_sum += loss * static_cast<double>(idx.size());
      const auto grads = backward_from_logits(result.params, cache, grad, spec, noise_rng);
      for (std::size_t l = 0; l < grads.size(); ++l) {
        result.params.layers[l].weights -= cfg.learning_rate * grads[l].weights;
        result.params.layers[l].bias -= cfg.learning_rate * grads[l].bias;
      }
    }
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    const auto scores = evaluate(result.params, eval_set, spec, cfg.noise_at_eval, spec.seed);
    m.top1 = scores.top1;
    m.top3 = scores.top3;
    result.trace.push_back(m);
  }
  return result;
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T take(std::istream& in, const std::string& path) {
  unsigned char bytes[sizeof(T)];
  const auto offset = static_cast<std::size_t>(in.tellg());
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ParseError("truncated checkpoint '" + path + "'", offset);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr std::uint32_t checkpoint_version = 1;

}  // namespace

void save_checkpoint(const std::string& path, const MlpSpec& spec, const MlpParams& params) {
  spec.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write("BRWN", 4);
  put<std::uint32_t>(out, checkpoint_version);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.layer_widths.size()));
  for (int w : spec.layer_widths) put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  for (const auto& act : spec.activations) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(act.kind));
    if (act.kind == ActivationKind::brownian) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(act.brownian.n));
      put<double>(out, act.brownian.v);
      put<double>(out, act.brownian.alpha);
    }
  }
  for (const auto& layer : params.layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) put<double>(out, layer.weights(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) put<double>(out, layer.bias(r));
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

std::pair<MlpSpec, MlpParams> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "BRWN", 4) != 0) {
    throw ParseError("'" + path + "' is not a BRWN checkpoint", 0);
  }
  const auto version = take<std::uint32_t>(in, path);
  if (version != checkpoint_version) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  MlpSpec spec;
  const auto count = take<std::uint32_t>(in, path);
  if (count < 2 || count > 4096) throw ParseError("implausible layer count " + std::to_string(count), 8);
  for (std::uint32_t i = 0; i < count; ++i) {
    spec.layer_widths.push_back(static_cast<int>(take<std::uint32_t>(in, path)));
  }
  for (std::size_t i = 0; i + 2 < count; ++i) {
    const auto offset = static_cast<std::size_t>(in.tellg());
    const auto tag = take<std::uint8_t>(in, path);
    if (tag == 0) {
      spec.activations.push_back(LayerActivation::relu());
    } else if (tag == 1) {
      const auto n = static_cast<int>(take<std::uint32_t>(in, path));
      const double v = take<double>(in, path);
      const double alpha = take<double>(in, path);
      spec.activations.push_back(LayerActivation::brownian_relu(BrownianSpec(n, v, alpha)));
    } else {
      throw ParseError("unknown activation tag " + std::to_string(tag), offset);
    }
  }
  spec.validate();
  MlpParams params;
  for (std::size_t l = 0; l + 1 < count; ++l) {
    Layer layer;
    layer.weights.resize(spec.layer_widths[l + 1], spec.layer_widths[l]);
    layer.bias.resize(spec.layer_widths[l + 1]);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = take<double>(in, path);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = take<double>(in, path);
    params.layers.push_back(std::move(layer));
  }
  return {spec, params};
}

}  // namespace brownne
