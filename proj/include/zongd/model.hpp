#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zongd/dataset.hpp"
#include "zongd/linalg.hpp"
#include "zongd/rng.hpp"

namespace zongd {

enum class Activation { Relu, Identity };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct Layer {
  Matrix weights;  // out x in, row-major
  Vec bias;        // out
  Activation activation = Activation::Identity;
};

/// Categorical distribution over the T classes. Entries are floored at
/// MlpModel::kProbFloor so downstream logs stay finite.
struct ProbVector {
  Vec probs;

  size_t size() const { return probs.size(); }
  double operator[](size_t i) const { return probs[i]; }

  /// Ties broken toward the smallest index.
  int argmax() const;
};

/// Feed-forward softmax classifier. The attack side only ever sees it
/// through the counted query() path; analytic gradients exist for the
/// white-box baselines and the verification suites.
///
/// forward() and the gradient entry points are const and safe to call
/// concurrently on a shared model.
class MlpModel {
 public:
  static constexpr double kProbFloor = 1e-12;

  explicit MlpModel(std::vector<Layer> layers);

  MlpModel(const MlpModel& other);
  MlpModel& operator=(const MlpModel& other);
  MlpModel(MlpModel&& other) noexcept;
  MlpModel& operator=(MlpModel&& other) noexcept;

  int input_dim() const { return layers_.front().weights.cols; }
  int num_classes() const { return layers_.back().weights.rows; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  Vec logits(const Vec& x) const;

  /// Stable softmax of the final logits, floored at kProbFloor.
  /// Bumps the evaluation counter; this is the black-box surface.
  ProbVector forward(const Vec& x) const;

  /// Exact gradient of log p(label | x) with respect to x.
  Vec grad_logp(const Vec& x, int label) const;

  /// Exact gradient of seed^T z where z are the final logits. The log-prob
  /// margin used by the attack loss is a logit difference, so its gradient
  /// is this with seed = e_t - e_j.
  Vec grad_logit_seed(const Vec& x, const Vec& seed) const;

  /// Total forward() evaluations since construction. Test instrumentation
  /// for the query-accounting contract; gradient calls do not count.
  uint64_t eval_count() const { return evals_.load(std::memory_order_relaxed); }

 private:
  struct ForwardCache {
    std::vector<Vec> pre;   // pre-activation per layer
    std::vector<Vec> post;  // post-activation per layer
  };

  ForwardCache run_layers(const Vec& x) const;
  Vec backprop_input(const Vec& x, const Vec& logit_seed) const;

  std::vector<Layer> layers_;
  mutable std::atomic<uint64_t> evals_{0};
};

MlpModel load_model(const std::string& path);

/// Full-precision decimal serialization; load(save(m)) is bit-identical.
void save_model(const MlpModel& model, const std::string& path);

/// Monotone counter of black-box model evaluations, the attack cost metric.
/// Increments are atomic; this is the only mutable state shared by a
/// fanned-out estimation batch.
class QueryLedger {
 public:
  QueryLedger() = default;
  explicit QueryLedger(std::optional<uint64_t> budget) : budget_(budget) {}

  uint64_t count() const { return count_.load(std::memory_order_relaxed); }
  std::optional<uint64_t> budget() const { return budget_; }

  /// Consumes one query or throws BudgetExhausted.
  void take();

 private:
  std::atomic<uint64_t> count_{0};
  std::optional<uint64_t> budget_;
};

/// The black-box interface: one forward pass, one ledger tick.
ProbVector query(const MlpModel& model, QueryLedger& ledger, const Vec& x);

struct TrainConfig {
  std::vector<int> hidden = {64, 64};
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 0.1;
  uint64_t seed = 1;
  double holdout_fraction = 0.2;
  double min_holdout_accuracy = 0.9;
  int num_classes = 0;  // 0 = infer as max label + 1
};

struct TrainResult {
  MlpModel model;
  double train_accuracy = 0.0;
  double holdout_accuracy = 0.0;
};

/// Plain seeded mini-batch SGD on softmax cross-entropy. Throws DataError
/// when the held-out accuracy gate is missed, so a weak model never slips
/// through silently.
TrainResult train_mlp(const std::vector<Sample>& data, const TrainConfig& config);

/// Random model with layer weights ~ N(0, scale^2/in), used throughout the
/// verification suites.
MlpModel random_mlp(int input_dim, const std::vector<int>& hidden, int num_classes,
                    double weight_scale, Rng& rng);

double accuracy(const MlpModel& model, const std::vector<Sample>& data);

}  // namespace zongd
