#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zongd/model.hpp"
#include "zongd/zograd.hpp"

namespace zongd {

enum class AttackMethod { ZoNgd, ZoPgd, WbNgd, WbPgd };

std::string attack_method_name(AttackMethod m);
AttackMethod attack_method_from_name(const std::string& name);
bool is_whitebox(AttackMethod m);

struct AttackConfig {
  AttackMethod method = AttackMethod::ZoNgd;
  double epsilon = 0.2;
  double mu = 1.0;
  double gamma = 0.01;
  double lambda = 0.05;  // step size; PGD variants read their own tuned value here
  double kappa = 0.0;
  int samples_r = 40;
  int max_iters = 200;
  std::optional<uint64_t> max_queries = 20000;
  DirectionMode direction_mode = DirectionMode::Gaussian;
  uint64_t seed = 1;

  void validate() const;

  bool operator==(const AttackConfig&) const = default;
};

struct AttackResult {
  bool success = false;
  uint64_t queries = 0;
  int iterations = 0;
  Vec delta;
  std::vector<double> loss_trace;  // attack loss at each iteration's base query
  int final_prediction = -1;

  bool operator==(const AttackResult&) const = default;
};

/// Black-box natural-gradient attack: per iteration one base query plus R
/// direction queries feed the joint gradient/score estimate, the damped
/// rank-one Fisher preconditions the step, and the iterate is projected
/// back onto the feasible box. Stops on the first misclassified base query.
AttackResult zo_ngd_attack(const MlpModel& model, const Vec& x, int t, const AttackConfig& config);

/// First-order baseline: same estimator, same accounting, same stopping
/// rule, plain projected step.
AttackResult zo_pgd_baseline(const MlpModel& model, const Vec& x, int t, const AttackConfig& config);

/// White-box variants using exact gradients; one forward+backward pair
/// counts as a single query.
AttackResult whitebox_ngd(const MlpModel& model, const Vec& x, int t, const AttackConfig& config);
AttackResult whitebox_pgd(const MlpModel& model, const Vec& x, int t, const AttackConfig& config);

/// Dispatch on config.method.
AttackResult run_attack(const MlpModel& model, const Vec& x, int t, const AttackConfig& config);

}  // namespace zongd
