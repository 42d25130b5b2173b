#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <optional>
#include <fstream>
#include <string>

#include "brownne/error.hpp"
#include "brownne/mlp.hpp"
#include "oracles.hpp"

using namespace brownne;

namespace {

MlpSpec toy_spec(std::vector<int> widths, std::uint64_t seed, std::optional<BrownianSpec> noisy = {}) {
  MlpSpec s;
  s.layer_widths = std::move(widths);
  s.seed = seed;
  for (std::size_t l = 0; l + 2 < s.layer_widths.size(); ++l) {
    s.activations.push_back(noisy ? LayerActivation::brownian_relu(*noisy) : LayerActivation::relu());
  }
  return s;
}

Dataset make_data(int rows, int cols, int classes, std::uint64_t seed) {
  RandomStream rng(seed);
  Dataset d;
  d.features.resize(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) d.features(i, j) = rng.uniform();
  }
  for (int i = 0; i < rows; ++i) d.labels.push_back(static_cast<int>(rng.next_u64() % classes));
  d.class_count = classes;
  return d;
}

// two Gaussian blobs in [0,1]^2, separated by the diagonal
Dataset blobs(int rows, std::uint64_t seed) {
  RandomStream rng(seed);
  Dataset d;
  d.features.resize(rows, 2);
  d.class_count = 2;
  for (int i = 0; i < rows; ++i) {
    const int y = i % 2;
    const double cx = y ? 0.75 : 0.25;
    d.features(i, 0) = std::clamp(cx + 0.07 * rng.normal(), 0.0, 1.0);
    d.features(i, 1) = std::clamp(1.0 - cx + 0.07 * rng.normal(), 0.0, 1.0);
    d.labels.push_back(y);
  }
  return d;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(toy_spec({4}, 1).validate(), ContractError);
  auto s = toy_spec({4, 3, 2}, 1);
  s.activations.clear();
  CHECK_THROWS_AS(s.validate(), ContractError);
  CHECK_THROWS_AS(toy_spec({4, 0, 2}, 1).validate(), ContractError);
}

TEST_CASE("initialisation") {
  const auto spec = toy_spec({4, 3, 2}, 17);
  const auto a = init_params(spec), b = init_params(spec);
  CHECK(a.parameter_count() == 23);
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    CHECK(a.layers[l].weights == b.layers[l].weights);
    CHECK(a.layers[l].bias.isZero());
  }
  std::vector<double> w;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = init_params(toy_spec({50, 20, 3}, seed));
    for (Eigen::Index i = 0; i < p.layers[0].weights.size(); ++i) w.push_back(p.layers[0].weights.data()[i]);
  }
  CHECK(std::abs(oracle::summarize(w).variance - 2.0 / 50.0) <= 0.1 * 2.0 / 50.0);
}

TEST_CASE("forward passes") {
  const auto relu = toy_spec({5, 7, 6, 3}, 3);
  const auto quiet = toy_spec({5, 7, 6, 3}, 3, BrownianSpec(4, 1.0, 0.0));
  const auto params = init_params(relu);
  const auto data = make_data(9, 5, 3, 1);
  RandomStream r1(1), r2(2), r3(3);
  const auto a = forward(params, data.features, relu, Mode::train, r1);
  const auto b = forward(params, data.features, relu, Mode::eval, r2);
  const auto c = forward(params, data.features, quiet, Mode::train, r3);
  CHECK(a.logits == b.logits);
  CHECK(a.logits == c.logits);
  CHECK_THROWS_AS(forward(params, make_data(2, 4, 3, 1).features, relu, Mode::eval, r1), ContractError);

  const auto noisy = toy_spec({5, 7, 6, 3}, 3, BrownianSpec(4, 1.0, 0.3));
  RandomStream r4(4);
  CHECK(forward(params, data.features, noisy, Mode::eval, r4).logits == a.logits);
  CHECK(forward(params, data.features, noisy, Mode::train, r4).logits != a.logits);
  CHECK(forward(params, data.features, noisy, Mode::eval, r4, true).logits != a.logits);
}

TEST_CASE("forward noise law of one unit") {
  const double alpha = 0.2;
  auto spec = toy_spec({1, 1, 1}, 0, BrownianSpec(4, 1.0, alpha));
  auto params = init_params(spec);
  params.layers[0].weights(0, 0) = 1.0;
  params.layers[0].bias(0) = 0.0;
  RandomStream rng(9);
  for (double z : {2.0, -3.0}) {
    Eigen::MatrixXd batch(1, 1);
    batch(0, 0) = z;
    std::vector<double> out(10000);
    for (auto& o : out) o = forward(params, batch, spec, Mode::train, rng).inputs[1](0, 0);
    const auto s = oracle::summarize(out);
    CHECK(std::abs(s.mean - std::max(z, 0.0)) <= 4.0 * s.mean_se);
    CHECK(std::abs(s.variance - alpha * alpha * std::abs(z)) <= 0.05 * alpha * alpha * std::abs(z));
  }
}

TEST_CASE("gradient check against central differences") {
  const auto spec = toy_spec({4, 6, 5, 3}, 8);
  auto params = init_params(spec);
  for (auto& layer : params.layers) layer.bias.setConstant(0.05);
  const auto data = make_data(7, 4, 3, 2);
  RandomStream rng(0);
  const auto cache = forward(params, data.features, spec, Mode::train, rng);
  const auto grads = backward(params, cache, data.labels, spec, rng);
  auto loss = [&](const MlpParams& p) {
    RandomStream r(0);
    return softmax_cross_entropy(forward(p, data.features, spec, Mode::eval, r).logits, data.labels);
  };
  RandomStream pick(3);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t l = pick.next_u64() % params.layers.size();
    const bool bias = pick.uniform() < 0.3;
    double* data = bias ? params.layers[l].bias.data() : params.layers[l].weights.data();
    const auto size = bias ? params.layers[l].bias.size() : params.layers[l].weights.size();
    const Eigen::Index i = static_cast<Eigen::Index>(pick.next_u64() % size);
    const double orig = data[i];
    const double h = 1e-5;
    data[i] = orig + h;
    const double up = loss(params);
    data[i] = orig - h;
    const double down = loss(params);
    data[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = bias ? grads[l].bias.data()[i] : grads[l].weights.data()[i];
    if (std::abs(numeric) < 1e-7 && std::abs(analytic) < 1e-7) continue;
    worst = std::max(worst, std::abs(numeric - analytic) / std::max(std::abs(numeric), std::abs(analytic)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("brownian backward multiplier is unbiased") {
  const auto spec = toy_spec({1, 1, 2}, 1, BrownianSpec(3, 1.0, 0.5));
  auto params = init_params(spec);
  params.layers[0].weights(0, 0) = 1.0;
  params.layers[0].bias(0) = 0.0;
  Eigen::MatrixXd batch(1, 1);
  batch(0, 0) = 0.8;
  RandomStream rng(2);
  const auto relu_spec = toy_spec({1, 1, 2}, 1);
  const auto cache = forward(params, batch, relu_spec, Mode::eval, rng);
  const std::vector<int> labels{1};
  const double exact = backward(params, cache, labels, relu_spec, rng)[0].weights(0, 0);
  std::vector<double> samples(10000);
  for (auto& s : samples) s = backward(params, cache, labels, spec, rng)[0].weights(0, 0);
  const auto s = oracle::summarize(samples);
  CHECK(std::abs(s.mean - exact) <= 4.0 * s.mean_se);
}

TEST_CASE("zero upstream gradient annihilates everything below") {
  const auto spec = toy_spec({3, 4, 4, 2}, 5, BrownianSpec(2, 1.0, 0.1));
  const auto params = init_params(spec);
  const auto data = make_data(5, 3, 2, 4);
  RandomStream rng(1);
  const auto cache = forward(params, data.features, spec, Mode::train, rng);
  const auto grads = backward_from_logits(params, cache, Eigen::MatrixXd::Zero(5, 2), spec, rng);
  for (const auto& g : grads) {
    CHECK(g.weights.isZero());
    CHECK(g.bias.isZero());
  }
  CHECK_THROWS_AS(backward_from_logits(params, cache, Eigen::MatrixXd::Zero(4, 2), spec, rng), ContractError);
}

TEST_CASE("backward noise scales as 2^(n+1)") {
  RandomStream rng(4);
  std::vector<double> vars;
  for (int n : {1, 2, 3}) {
    const BrownianSpec spec(n, 1.0, 1.0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = backward_activation(1.0, spec, rng);
    vars.push_back(oracle::summarize(xs).variance);
  }
  CHECK(vars[1] / vars[0] == doctest::Approx(2.0).epsilon(0.1));
  CHECK(vars[2] / vars[1] == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("scoring") {
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(4, 5);
  const std::vector<int> labels{0, 3, 4, 1};
  for (int i = 0; i < 4; ++i) onehot(i, labels[i]) = 5.0;
  auto m = score_logits(onehot, labels);
  CHECK(m.top1 == 1.0);
  CHECK(m.top3 == 1.0);

  // uniform logits: ties go to classes 0, 1, 2
  RandomStream rng(1);
  std::vector<int> uniform_labels(3000);
  for (auto& y : uniform_labels) y = static_cast<int>(rng.next_u64() % 10);
  m = score_logits(Eigen::MatrixXd::Zero(3000, 10), uniform_labels);
  double expect1 = 0.0, expect3 = 0.0;
  for (int y : uniform_labels) {
    expect1 += y == 0;
    expect3 += y < 3;
  }
  CHECK(m.top1 == doctest::Approx(expect1 / 3000.0));
  CHECK(m.top3 == doctest::Approx(expect3 / 3000.0));
  CHECK(m.top3 == doctest::Approx(0.3).epsilon(0.1));

  const auto data = make_data(50, 6, 4, 9);
  const auto spec = toy_spec({6, 8, 4}, 2);
  const auto e = evaluate(init_params(spec), data, spec);
  CHECK(e.top3 >= e.top1);
}

TEST_CASE("training") {
  const auto train_set = blobs(200, 1), test_set = blobs(100, 2);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.1;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = train(toy_spec({2, 16, 2}, seed), train_set, test_set, cfg);
    CHECK(r.trace.size() == 20);
    CHECK(r.trace.back().top1 >= 0.95);
  }

  // alpha = 0 reproduces the plain network bit for bit
  const auto a = train(toy_spec({2, 16, 8, 2}, 7), train_set, test_set, cfg);
  const auto b = train(toy_spec({2, 16, 8, 2}, 7, BrownianSpec(4, 1.0, 0.0)), train_set, test_set, cfg);
  for (std::size_t e = 0; e < a.trace.size(); ++e) {
    CHECK(a.trace[e].train_loss == b.trace[e].train_loss);
    CHECK(a.trace[e].top1 == b.trace[e].top1);
    CHECK(a.trace[e].top3 == b.trace[e].top3);
  }

  cfg.data_pct = 0.1;
  cfg.epochs = 1;
  const auto part = train(toy_spec({2, 4, 2}, 1), train_set, test_set, cfg);
  CHECK(part.train_examples == 20);
  cfg.data_pct = 0.0;
  CHECK_THROWS_AS(train(toy_spec({2, 4, 2}, 1), train_set, test_set, cfg), ContractError);
}

TEST_CASE("divergence aborts with the epoch") {
  const auto train_set = blobs(64, 1);
  TrainConfig cfg;
  cfg.epochs = 50;
  try {
    train(toy_spec({2, 32, 32, 32, 2}, 1, BrownianSpec(4, 1.0, 1e300)), train_set, train_set, cfg);
    FAIL("expected divergence");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "brownne_ckpt_test";
  std::filesystem::create_directories(dir);
  auto spec = toy_spec({3, 5, 4, 2}, 11);
  spec.activations[1] = LayerActivation::brownian_relu(BrownianSpec(6, -0.5, 0.02));
  const auto params = init_params(spec);
  const auto path = (dir / "m.brwn").string();
  save_checkpoint(path, spec, params);
  const auto [spec2, params2] = load_checkpoint(path);
  CHECK(spec2.layer_widths == spec.layer_widths);
  CHECK(spec2.activations[0].kind == ActivationKind::relu);
  CHECK(spec2.activations[1].kind == ActivationKind::brownian);
  CHECK(spec2.activations[1].brownian.n == 6);
  CHECK(spec2.activations[1].brownian.v == -0.5);
  CHECK(spec2.activations[1].brownian.alpha == 0.02);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    CHECK(params2.layers[l].weights == params.layers[l].weights);
    CHECK(params2.layers[l].bias == params.layers[l].bias);
  }
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "BRWN");

  std::ofstream(dir / "bad.brwn", std::ios::binary) << "NOPE";
  CHECK_THROWS_AS(load_checkpoint((dir / "bad.brwn").string()), ParseError);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  CHECK_THROWS_AS(load_checkpoint((dir / "none.brwn").string()), IoError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
