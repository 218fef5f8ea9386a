#pragma once

#include "zongd/linalg.hpp"
#include "zongd/model.hpp"

namespace zongd {

/// One attack instance: the image, its true label, and the perturbation
/// constraints that define the feasible set.
struct AttackSpec {
  Vec x;
  int label = 0;
  double epsilon = 0.0;  // L-infinity radius
  double kappa = 0.0;    // confidence margin

  void validate(int num_classes) const;
};

/// Clamped log-probability margin: max{ log p_t - max_{i != t} log p_i, -kappa }.
/// Zero (at kappa = 0) exactly when the true label no longer strictly wins.
double attack_loss(const ProbVector& p, int t, double kappa);

/// True iff argmax(p) != t, ties broken toward the smallest index.
bool is_success(const ProbVector& p, int t);

/// Exact Euclidean projection onto { delta : ||delta||_inf <= eps, x+delta in [0,1]^d }.
/// The set is an axis-aligned box intersection, so the projection is an
/// elementwise clamp.
Vec project(const Vec& delta, const Vec& x, double epsilon);

/// Exact gradient of attack_loss at x+delta w.r.t. the input; the zero
/// vector when the loss sits on its -kappa clamp.
Vec attack_loss_gradient(const MlpModel& model, const Vec& point, int t, double kappa);

}  // namespace zongd
