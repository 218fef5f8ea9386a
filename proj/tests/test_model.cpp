#include <cmath>
#include <cstring>

#include "doctest.h"
#include "test_support.hpp"
#include "zongd/errors.hpp"
#include "zongd/model.hpp"

using namespace zongd;
using zongd::testing::TempFile;

namespace {

MlpModel two_layer_fixture(uint64_t seed) {
  Rng rng(seed);
  return random_mlp(4, {6}, 3, 1.0, rng);
}

bool same_weights(const MlpModel& a, const MlpModel& b) {
  if (a.layers().size() != b.layers().size()) return false;
  for (size_t l = 0; l < a.layers().size(); ++l) {
    if (a.layers()[l].weights.data != b.layers()[l].weights.data) return false;
    if (a.layers()[l].bias != b.layers()[l].bias) return false;
    if (a.layers()[l].activation != b.layers()[l].activation) return false;
  }
  return true;
}

// independent straight-line oracle: matrix multiply + softmax, no shared code
Vec oracle_forward(const MlpModel& model, const Vec& x) {
  Vec current = x;
  for (const Layer& layer : model.layers()) {
    Vec next(layer.weights.rows, 0.0);
    for (int i = 0; i < layer.weights.rows; ++i) {
      double acc = layer.bias[i];
      for (int j = 0; j < layer.weights.cols; ++j) acc += layer.weights.at(i, j) * current[j];
      next[i] = layer.activation == Activation::Relu ? std::max(0.0, acc) : acc;
    }
    current = next;
  }
  double mx = current[0];
  for (double v : current) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : current) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : current) v /= sum;
  return current;
}

}  // namespace

TEST_CASE("forward: zero-weight network is uniform") {
  std::vector<Layer> layers(1);
  layers[0].weights = Matrix(4, 3);
  layers[0].bias.assign(4, 0.0);
  MlpModel model(std::move(layers));
  const ProbVector p = model.forward({0.3, 0.9, 0.1});
  for (size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("forward: identity layer with zero logits splits evenly") {
  std::vector<Layer> layers(1);
  layers[0].weights = Matrix(2, 2);
  layers[0].weights.at(0, 0) = 1.0;
  layers[0].weights.at(1, 1) = 1.0;
  layers[0].bias.assign(2, 0.0);
  MlpModel model(std::move(layers));
  const ProbVector p = model.forward({0.0, 0.0});
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);
}

TEST_CASE("forward matches the hand-rolled oracle") {
  const MlpModel model = two_layer_fixture(17);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x(4);
    for (double& v : x) v = rng.uniform01();
    const ProbVector p = model.forward(x);
    const Vec expected = oracle_forward(model, x);
    for (size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(expected[i]).epsilon(1e-9));
  }
}

TEST_CASE("forward output sums to one and stays in (0,1]") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    MlpModel model = random_mlp(5, {7}, 4, 1.5, rng);
    Vec x(5);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    const ProbVector p = model.forward(x);
    double sum = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      CHECK(p[i] > 0.0);
      CHECK(p[i] <= 1.0);
      sum += p[i];
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("argmax is invariant to a constant shift of the final biases") {
  MlpModel model = two_layer_fixture(29);
  MlpModel shifted = model;
  for (double& b : shifted.mutable_layers().back().bias) b += 7.25;
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Vec x(4);
    for (double& v : x) v = rng.uniform01();
    CHECK(model.forward(x).argmax() == shifted.forward(x).argmax());
  }
}

TEST_CASE("forward rejects dimension mismatch") {
  const MlpModel model = two_layer_fixture(3);
  CHECK_THROWS_AS(model.forward({0.1, 0.2}), DimensionError);
}

TEST_CASE("model file round-trips bit-identically") {
  const MlpModel model = two_layer_fixture(41);
  TempFile file("roundtrip.mlp");
  save_model(model, file.path());
  const MlpModel loaded = load_model(file.path());
  CHECK(loaded.input_dim() == 4);
  CHECK(loaded.num_classes() == 3);
  CHECK(same_weights(model, loaded));
}

TEST_CASE("load_model rejects a broken dimension chain") {
  TempFile file("badchain.mlp");
  file.write(
      "mlp v1 2 2 2\n"
      "layer 3 2 relu\n"
      "1 0\n0 1\n0 0\n"
      "0 0 0\n"
      "layer 2 4 identity\n"  // expects 3 inputs, declares 4
      "1 0 0 0\n0 1 0 0\n"
      "0 0\n");
  CHECK_THROWS_AS(load_model(file.path()), DimensionError);
}

TEST_CASE("load_model reports truncation with a line number") {
  TempFile file("truncated.mlp");
  file.write(
      "mlp v1 2 2 1\n"
      "layer 2 2 identity\n"
      "1 0\n");
  try {
    load_model(file.path());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 3);
  }
}

TEST_CASE("load_model rejects header/layer dimension disagreement") {
  TempFile file("badheader.mlp");
  file.write(
      "mlp v1 3 2 1\n"
      "layer 2 2 identity\n"
      "1 0\n0 1\n"
      "0 0\n");
  CHECK_THROWS_AS(load_model(file.path()), DimensionError);
}

TEST_CASE("query increments the ledger and enforces the budget") {
  const MlpModel model = two_layer_fixture(7);
  QueryLedger ledger(std::optional<uint64_t>(5));
  const Vec x = {0.1, 0.2, 0.3, 0.4};
  CHECK(ledger.count() == 0);
  const ProbVector first = query(model, ledger, x);
  CHECK(ledger.count() == 1);
  const ProbVector second = query(model, ledger, x);
  CHECK(ledger.count() == 2);
  for (size_t i = 0; i < first.size(); ++i) CHECK(first[i] == second[i]);
  query(model, ledger, x);
  query(model, ledger, x);
  query(model, ledger, x);
  CHECK(ledger.count() == 5);
  CHECK_THROWS_AS(query(model, ledger, x), BudgetExhausted);
  CHECK(ledger.count() == 5);
}

TEST_CASE("ledger count equals forward evaluations made through query") {
  const MlpModel model = two_layer_fixture(11);
  QueryLedger ledger;
  Rng rng(13);
  const uint64_t base_evals = model.eval_count();
  for (int i = 0; i < 37; ++i) {
    Vec x(4);
    for (double& v : x) v = rng.uniform01();
    query(model, ledger, x);
    if (i % 5 == 0) model.grad_logp(x, 0);  // gradient passes are not black-box queries
  }
  CHECK(ledger.count() == 37);
  CHECK(model.eval_count() - base_evals == 37);
}

TEST_CASE("grad_logp of a constant network is zero") {
  std::vector<Layer> layers(1);
  layers[0].weights = Matrix(3, 4);
  layers[0].bias = {0.5, -0.2, 0.1};
  MlpModel model(std::move(layers));
  const Vec g = model.grad_logp({0.1, 0.9, 0.4, 0.2}, 1);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("grad_logp matches the closed form for a single linear layer") {
  // log p_0(x) for softmax(Wx): gradient = (e_0 - p)^T W
  std::vector<Layer> layers(1);
  layers[0].weights = Matrix(2, 2);
  layers[0].weights.at(0, 0) = 1.2;
  layers[0].weights.at(0, 1) = -0.4;
  layers[0].weights.at(1, 0) = 0.3;
  layers[0].weights.at(1, 1) = 0.9;
  layers[0].bias.assign(2, 0.0);
  MlpModel model(std::move(layers));
  const Vec x = {0.7, 0.25};
  const ProbVector p = model.forward(x);
  const Vec g = model.grad_logp(x, 0);
  const double p1 = p[1];
  CHECK(g[0] == doctest::Approx(p1 * (1.2 - 0.3)).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(p1 * (-0.4 - 0.9)).epsilon(1e-12));
}

TEST_CASE("grad_logp agrees with central finite differences") {
  Rng rng(71);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 3 + static_cast<int>(rng.below(6));
    const int classes = 2 + static_cast<int>(rng.below(3));
    MlpModel model = random_mlp(d, {8}, classes, 1.0, rng);
    Vec x(d);
    for (double& v : x) v = rng.uniform01();
    const int t = static_cast<int>(rng.below(classes));
    const Vec g = model.grad_logp(x, t);

    Vec fd(d, 0.0);
    for (int i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (std::log(model.forward(xp)[t]) - std::log(model.forward(xm)[t])) / (2.0 * h);
    }
    const double denom = std::max(norm2(fd), 1e-12);
    CHECK(norm2(sub(g, fd)) / denom <= 1e-4);
  }
}

TEST_CASE("train_mlp separates toy blobs and passes its gate") {
  Rng rng(5);
  std::vector<Sample> data;
  for (int i = 0; i < 200; ++i) {
    Sample s;
    s.label = i % 2;
    const double center = s.label == 0 ? 0.25 : 0.75;
    s.x.assign(4, 0.0);
    for (double& v : s.x) v = std::min(1.0, std::max(0.0, center + 0.05 * rng.gaussian()));
    data.push_back(std::move(s));
  }
  TrainConfig config;
  config.hidden = {8};
  config.epochs = 40;
  config.learning_rate = 0.5;
  config.seed = 9;
  const TrainResult result = train_mlp(data, config);
  CHECK(result.holdout_accuracy >= 0.99);
}

TEST_CASE("train_mlp rejects an empty dataset") {
  CHECK_THROWS_AS(train_mlp({}, TrainConfig{}), DataError);
}

TEST_CASE("train_mlp is bit-reproducible under a fixed seed") {
  Rng rng(55);
  std::vector<Sample> data;
  for (int i = 0; i < 60; ++i) {
    Sample s;
    s.label = i % 3;
    s.x = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    s.x[s.label] = 0.9;
    data.push_back(std::move(s));
  }
  TrainConfig config;
  config.hidden = {6};
  config.epochs = 12;
  config.seed = 77;
  config.min_holdout_accuracy = 0.0;
  const TrainResult a = train_mlp(data, config);
  const TrainResult b = train_mlp(data, config);
  CHECK(same_weights(a.model, b.model));
}

TEST_CASE("train_mlp reports a missed accuracy gate") {
  Rng rng(3);
  std::vector<Sample> data;
  for (int i = 0; i < 80; ++i) {
    Sample s;
    s.label = static_cast<int>(rng.below(2));  // labels independent of features
    s.x = {rng.uniform01(), rng.uniform01()};
    data.push_back(std::move(s));
  }
  TrainConfig config;
  config.hidden = {4};
  config.epochs = 5;
  config.min_holdout_accuracy = 0.95;
  CHECK_THROWS_AS(train_mlp(data, config), DataError);
}

TEST_CASE("committed desk model clears the accuracy gate on the test split") {
  const double acc = accuracy(zongd::testing::desk_model(), zongd::testing::desk_test_set());
  CHECK(acc >= 0.9);
}
