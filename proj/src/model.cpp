#include "zongd/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "zongd/errors.hpp"

namespace zongd {

std::string activation_name(Activation a) {
  return a == Activation::Relu ? "relu" : "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "identity") return Activation::Identity;
  throw DataError("unknown activation: " + name);
}

int ProbVector::argmax() const {
  int best = 0;
  for (size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = static_cast<int>(i);
  return best;
}

MlpModel::MlpModel(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("model needs at least one layer");
  for (size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weights.rows <= 0 || layer.weights.cols <= 0)
      throw DimensionError("layer " + std::to_string(l) + " has empty weight matrix");
    if (static_cast<int>(layer.bias.size()) != layer.weights.rows)
      throw DimensionError("layer " + std::to_string(l) + " bias length does not match rows");
    if (l > 0 && layer.weights.cols != layers_[l - 1].weights.rows)
      throw DimensionError("layer " + std::to_string(l) + " input width " +
                           std::to_string(layer.weights.cols) + " does not chain from previous output " +
                           std::to_string(layers_[l - 1].weights.rows));
  }
  if (num_classes() < 2) throw DimensionError("model needs at least two output classes");
}

MlpModel::MlpModel(const MlpModel& other) : layers_(other.layers_) {
  evals_.store(other.evals_.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

MlpModel& MlpModel::operator=(const MlpModel& other) {
  if (this != &other) {
    layers_ = other.layers_;
    evals_.store(other.evals_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  }
  return *this;
}

MlpModel::MlpModel(MlpModel&& other) noexcept : layers_(std::move(other.layers_)) {
  evals_.store(other.evals_.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

MlpModel& MlpModel::operator=(MlpModel&& other) noexcept {
  layers_ = std::move(other.layers_);
  evals_.store(other.evals_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  return *this;
}

MlpModel::ForwardCache MlpModel::run_layers(const Vec& x) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw DimensionError("input length " + std::to_string(x.size()) + " does not match model dim " +
                         std::to_string(input_dim()));
  ForwardCache cache;
  cache.pre.reserve(layers_.size());
  cache.post.reserve(layers_.size());
  const Vec* current = &x;
  for (const Layer& layer : layers_) {
    Vec z = matvec(layer.weights, *current);
    for (int i = 0; i < layer.weights.rows; ++i) z[i] += layer.bias[i];
    cache.pre.push_back(z);
    if (layer.activation == Activation::Relu)
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    cache.post.push_back(std::move(z));
    current = &cache.post.back();
  }
  return cache;
}

Vec MlpModel::logits(const Vec& x) const { return run_layers(x).post.back(); }

ProbVector MlpModel::forward(const Vec& x) const {
  const Vec z = logits(x);
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  Vec p(z.size());
  double sum = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  for (double& v : p) {
    v /= sum;
    if (v < kProbFloor) v = kProbFloor;
  }
  evals_.fetch_add(1, std::memory_order_relaxed);
  return ProbVector{std::move(p)};
}

Vec MlpModel::backprop_input(const Vec& x, const Vec& logit_seed) const {
  const ForwardCache cache = run_layers(x);
  if (logit_seed.size() != static_cast<size_t>(num_classes()))
    throw DimensionError("logit seed length does not match class count");

  Vec grad = logit_seed;  // gradient w.r.t. pre-activation of current layer
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const Layer& layer = layers_[l];
    if (layer.activation == Activation::Relu) {
      const Vec& pre = cache.pre[l];
      for (size_t i = 0; i < grad.size(); ++i)
        if (pre[i] <= 0.0) grad[i] = 0.0;
    }
    Vec below(layer.weights.cols, 0.0);
    for (int i = 0; i < layer.weights.rows; ++i) {
      const double g = grad[i];
      if (g == 0.0) continue;
      for (int j = 0; j < layer.weights.cols; ++j) below[j] += layer.weights.at(i, j) * g;
    }
    grad = std::move(below);
  }
  return grad;
}

Vec MlpModel::grad_logp(const Vec& x, int label) const {
  if (label < 0 || label >= num_classes()) throw DimensionError("label out of range");
  const Vec z = logits(x);
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  Vec p(z.size());
  double sum = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  Vec seed(z.size());
  for (size_t i = 0; i < z.size(); ++i) seed[i] = (static_cast<int>(i) == label ? 1.0 : 0.0) - p[i] / sum;
  return backprop_input(x, seed);
}

Vec MlpModel::grad_logit_seed(const Vec& x, const Vec& seed) const { return backprop_input(x, seed); }

void QueryLedger::take() {
  uint64_t current = count_.load(std::memory_order_relaxed);
  for (;;) {
    if (budget_ && current >= *budget_) throw BudgetExhausted();
    if (count_.compare_exchange_weak(current, current + 1, std::memory_order_relaxed)) return;
  }
}

ProbVector query(const MlpModel& model, QueryLedger& ledger, const Vec& x) {
  ledger.take();
  return model.forward(x);
}

namespace {

void write_double_row(std::FILE* f, const double* values, int n) {
  char buf[64];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    std::fputs(buf, f);
    std::fputc(i + 1 == n ? '\n' : ' ', f);
  }
}

struct LineReader {
  std::ifstream in;
  int line_no = 0;

  explicit LineReader(const std::string& path) : in(path) {}

  std::string next(const char* what) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    throw ParseError(std::string("unexpected end of file, expected ") + what, line_no);
  }
};

Vec parse_double_row(const std::string& line, int expected, int line_no) {
  Vec out;
  out.reserve(expected);
  const char* cursor = line.c_str();
  for (int i = 0; i < expected; ++i) {
    char* end = nullptr;
    const double v = std::strtod(cursor, &end);
    if (end == cursor)
      throw ParseError("expected number at token " + std::to_string(i + 1), line_no);
    out.push_back(v);
    cursor = end;
  }
  while (*cursor == ' ' || *cursor == '\t') ++cursor;
  if (*cursor != '\0')
    throw ParseError("trailing content after " + std::to_string(expected) + " numbers", line_no);
  return out;
}

}  // namespace

void save_model(const MlpModel& model, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "mlp v1 %d %d %d\n", model.input_dim(), model.num_classes(),
               static_cast<int>(model.layers().size()));
  for (const Layer& layer : model.layers()) {
    std::fprintf(f, "layer %d %d %s\n", layer.weights.rows, layer.weights.cols,
                 activation_name(layer.activation).c_str());
    for (int r = 0; r < layer.weights.rows; ++r)
      write_double_row(f, &layer.weights.data[static_cast<size_t>(r) * layer.weights.cols],
                       layer.weights.cols);
    write_double_row(f, layer.bias.data(), static_cast<int>(layer.bias.size()));
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

MlpModel load_model(const std::string& path) {
  LineReader reader(path);
  if (!reader.in.is_open()) throw IoError("cannot open model file: " + path);

  std::istringstream header(reader.next("header"));
  std::string magic, version;
  int dim = 0, classes = 0, num_layers = 0;
  if (!(header >> magic >> version >> dim >> classes >> num_layers) || magic != "mlp" || version != "v1")
    throw ParseError("expected header 'mlp v1 <d> <T> <L>'", reader.line_no);
  if (dim < 1 || classes < 2 || num_layers < 1)
    throw ParseError("header dimensions out of range", reader.line_no);

  std::vector<Layer> layers;
  layers.reserve(num_layers);
  for (int l = 0; l < num_layers; ++l) {
    std::istringstream meta(reader.next("layer header"));
    std::string tag, act;
    int out = 0, in = 0;
    if (!(meta >> tag >> out >> in >> act) || tag != "layer")
      throw ParseError("expected 'layer <out> <in> <activation>'", reader.line_no);
    if (out < 1 || in < 1) throw ParseError("layer dimensions out of range", reader.line_no);
    Layer layer;
    layer.activation = activation_from_name(act);
    layer.weights = Matrix(out, in);
    for (int r = 0; r < out; ++r) {
      const Vec row = parse_double_row(reader.next("weight row"), in, reader.line_no);
      std::copy(row.begin(), row.end(), layer.weights.data.begin() + static_cast<size_t>(r) * in);
    }
    layer.bias = parse_double_row(reader.next("bias row"), out, reader.line_no);
    layers.push_back(std::move(layer));
  }

  MlpModel model(std::move(layers));  // throws DimensionError on a broken chain
  if (model.input_dim() != dim || model.num_classes() != classes)
    throw DimensionError("header dims (" + std::to_string(dim) + "," + std::to_string(classes) +
                         ") do not match layers (" + std::to_string(model.input_dim()) + "," +
                         std::to_string(model.num_classes()) + ")");
  return model;
}

MlpModel random_mlp(int input_dim, const std::vector<int>& hidden, int num_classes,
                    double weight_scale, Rng& rng) {
  std::vector<int> widths;
  widths.push_back(input_dim);
  for (int h : hidden) widths.push_back(h);
  widths.push_back(num_classes);

  std::vector<Layer> layers;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    const int in = widths[l];
    const int out = widths[l + 1];
    layer.weights = Matrix(out, in);
    const double scale = weight_scale / std::sqrt(static_cast<double>(in));
    for (double& w : layer.weights.data) w = scale * rng.gaussian();
    layer.bias.assign(out, 0.0);
    layer.activation = (l + 2 < widths.size()) ? Activation::Relu : Activation::Identity;
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

double accuracy(const MlpModel& model, const std::vector<Sample>& data) {
  if (data.empty()) return 0.0;
  int hits = 0;
  for (const Sample& s : data)
    if (model.forward(s.x).argmax() == s.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

struct LayerGrads {
  Matrix dw;
  Vec db;
};

}  // namespace

TrainResult train_mlp(const std::vector<Sample>& data, const TrainConfig& config) {
  if (data.empty()) throw DataError("training dataset is empty");
  const int dim = static_cast<int>(data.front().x.size());
  int max_label = 0;
  for (const Sample& s : data) {
    if (static_cast<int>(s.x.size()) != dim) throw DataError("inconsistent feature width in dataset");
    if (s.label < 0) throw DataError("negative label in dataset");
    max_label = std::max(max_label, s.label);
  }
  const int classes = config.num_classes > 0 ? config.num_classes : max_label + 1;
  if (max_label >= classes) throw DataError("label exceeds configured class count");
  if (classes < 2) throw DataError("training needs at least two classes");
  if (config.epochs < 1 || config.batch_size < 1 || config.learning_rate <= 0.0)
    throw DataError("bad training hyperparameters");

  Rng rng(config.seed);

  // deterministic holdout split
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(i + 1)]);
  size_t holdout_n = static_cast<size_t>(config.holdout_fraction * static_cast<double>(data.size()));
  if (holdout_n >= data.size()) holdout_n = data.size() - 1;
  std::vector<Sample> train_set, holdout_set;
  for (size_t i = 0; i < order.size(); ++i)
    (i < data.size() - holdout_n ? train_set : holdout_set).push_back(data[order[i]]);

  MlpModel model = random_mlp(dim, config.hidden, classes, std::sqrt(2.0), rng);
  auto& layers = model.mutable_layers();

  std::vector<size_t> idx(train_set.size());
  std::iota(idx.begin(), idx.end(), 0);

  std::vector<LayerGrads> grads(layers.size());
  for (size_t l = 0; l < layers.size(); ++l) {
    grads[l].dw = Matrix(layers[l].weights.rows, layers[l].weights.cols);
    grads[l].db.assign(layers[l].bias.size(), 0.0);
  }

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.below(i + 1)]);

    for (size_t start = 0; start < idx.size(); start += config.batch_size) {
      const size_t stop = std::min(idx.size(), start + config.batch_size);
      for (auto& g : grads) {
        std::fill(g.dw.data.begin(), g.dw.data.end(), 0.0);
        std::fill(g.db.begin(), g.db.end(), 0.0);
      }

      for (size_t pos = start; pos < stop; ++pos) {
        const Sample& sample = train_set[idx[pos]];

        // forward with caches
        std::vector<Vec> pre(layers.size()), post(layers.size());
        const Vec* current = &sample.x;
        for (size_t l = 0; l < layers.size(); ++l) {
          Vec z = matvec(layers[l].weights, *current);
          for (size_t i = 0; i < z.size(); ++i) z[i] += layers[l].bias[i];
          pre[l] = z;
          if (layers[l].activation == Activation::Relu)
            for (double& v : z) v = v > 0.0 ? v : 0.0;
          post[l] = std::move(z);
          current = &post[l];
        }

        // softmax cross-entropy seed: p - y
        const Vec& z_out = post.back();
        double zmax = z_out[0];
        for (double v : z_out) zmax = std::max(zmax, v);
        Vec delta(z_out.size());
        double sum = 0.0;
        for (size_t i = 0; i < z_out.size(); ++i) {
          delta[i] = std::exp(z_out[i] - zmax);
          sum += delta[i];
        }
        for (size_t i = 0; i < delta.size(); ++i) {
          delta[i] /= sum;
          if (static_cast<int>(i) == sample.label) delta[i] -= 1.0;
        }

        for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
          if (layers[l].activation == Activation::Relu)
            for (size_t i = 0; i < delta.size(); ++i)
              if (pre[l][i] <= 0.0) delta[i] = 0.0;
          const Vec& input = (l == 0) ? sample.x : post[l - 1];
          Matrix& dw = grads[l].dw;
          for (int r = 0; r < dw.rows; ++r) {
            const double g = delta[r];
            grads[l].db[r] += g;
            if (g == 0.0) continue;
            for (int c = 0; c < dw.cols; ++c) dw.at(r, c) += g * input[c];
          }
          if (l > 0) {
            Vec below(layers[l].weights.cols, 0.0);
            for (int r = 0; r < layers[l].weights.rows; ++r) {
              const double g = delta[r];
              if (g == 0.0) continue;
              for (int c = 0; c < layers[l].weights.cols; ++c)
                below[c] += layers[l].weights.at(r, c) * g;
            }
            delta = std::move(below);
          }
        }
      }

      const double step = config.learning_rate / static_cast<double>(stop - start);
      for (size_t l = 0; l < layers.size(); ++l) {
        for (size_t i = 0; i < layers[l].weights.data.size(); ++i)
          layers[l].weights.data[i] -= step * grads[l].dw.data[i];
        for (size_t i = 0; i < layers[l].bias.size(); ++i)
          layers[l].bias[i] -= step * grads[l].db[i];
      }
    }
  }

  TrainResult result{std::move(model), 0.0, 0.0};
  result.train_accuracy = accuracy(result.model, train_set);
  result.holdout_accuracy = holdout_set.empty() ? result.train_accuracy
                                                : accuracy(result.model, holdout_set);
  if (result.holdout_accuracy < config.min_holdout_accuracy) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "training missed the accuracy gate: %.4f < %.4f",
                  result.holdout_accuracy, config.min_holdout_accuracy);
    throw DataError(buf);
  }
  return result;
}

}  // namespace zongd
