#include "zongd/loss.hpp"

#include <algorithm>
#include <cmath>

#include "zongd/errors.hpp"

namespace zongd {

void AttackSpec::validate(int num_classes) const {
  if (label < 0 || label >= num_classes) throw DataError("attack label out of range");
  if (epsilon <= 0.0) throw DataError("epsilon must be positive");
  if (kappa < 0.0) throw DataError("kappa must be nonnegative");
  for (double v : x)
    if (v < 0.0 || v > 1.0) throw DataError("attack input must lie in [0,1]^d");
}

namespace {

void check_label(const ProbVector& p, int t) {
  if (p.size() < 2) throw DimensionError("need at least two classes");
  if (t < 0 || t >= static_cast<int>(p.size())) throw DimensionError("label out of range");
}

int best_other_index(const ProbVector& p, int t) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(p.size()); ++i) {
    if (i == t) continue;
    if (best < 0 || p[i] > p[best]) best = i;
  }
  return best;
}

}  // namespace

double attack_loss(const ProbVector& p, int t, double kappa) {
  check_label(p, t);
  const int other = best_other_index(p, t);
  const double margin = std::log(p[t]) - std::log(p[other]);
  return std::max(margin, -kappa);
}

bool is_success(const ProbVector& p, int t) {
  check_label(p, t);
  return p.argmax() != t;
}

Vec project(const Vec& delta, const Vec& x, double epsilon) {
  if (delta.size() != x.size()) throw DimensionError("project: length mismatch");
  if (epsilon <= 0.0) throw DataError("project: epsilon must be positive");
  Vec out(delta.size());
  for (size_t i = 0; i < delta.size(); ++i) {
    const double lo = std::max(-epsilon, -x[i]);
    const double hi = std::min(epsilon, 1.0 - x[i]);
    out[i] = std::min(std::max(delta[i], lo), hi);
  }
  return out;
}

Vec attack_loss_gradient(const MlpModel& model, const Vec& point, int t, double kappa) {
  if (t < 0 || t >= model.num_classes()) throw DimensionError("label out of range");
  const Vec z = model.logits(point);
  int other = -1;
  for (int i = 0; i < static_cast<int>(z.size()); ++i) {
    if (i == t) continue;
    if (other < 0 || z[i] > z[other]) other = i;
  }
  // log p_t - log p_i is the logit difference z_t - z_i; the softmax
  // normalizer cancels.
  const double margin = z[t] - z[other];
  if (margin <= -kappa) return Vec(point.size(), 0.0);
  Vec seed(z.size(), 0.0);
  seed[t] = 1.0;
  seed[other] = -1.0;
  return model.grad_logit_seed(point, seed);
}

}  // namespace zongd
