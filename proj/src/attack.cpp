#include "zongd/attack.hpp"

#include <cassert>
#include <cmath>

#include "zongd/errors.hpp"
#include "zongd/fim.hpp"
#include "zongd/loss.hpp"
#include "zongd/rng.hpp"

namespace zongd {

std::string attack_method_name(AttackMethod m) {
  switch (m) {
    case AttackMethod::ZoNgd: return "zo-ngd";
    case AttackMethod::ZoPgd: return "zo-pgd";
    case AttackMethod::WbNgd: return "wb-ngd";
    case AttackMethod::WbPgd: return "wb-pgd";
  }
  return "?";
}

AttackMethod attack_method_from_name(const std::string& name) {
  if (name == "zo-ngd") return AttackMethod::ZoNgd;
  if (name == "zo-pgd") return AttackMethod::ZoPgd;
  if (name == "wb-ngd") return AttackMethod::WbNgd;
  if (name == "wb-pgd") return AttackMethod::WbPgd;
  throw UsageError("unknown attack method: " + name);
}

bool is_whitebox(AttackMethod m) { return m == AttackMethod::WbNgd || m == AttackMethod::WbPgd; }

void AttackConfig::validate() const {
  if (epsilon <= 0.0) throw DataError("epsilon must be positive");
  if (mu <= 0.0) throw DataError("mu must be positive");
  if (gamma <= 0.0) throw DataError("gamma must be positive");
  if (lambda <= 0.0) throw DataError("step size must be positive");
  if (kappa < 0.0) throw DataError("kappa must be nonnegative");
  if (samples_r < 1) throw DataError("samples-R must be at least 1");
  if (max_iters < 1) throw DataError("max-iters must be at least 1");
  if (max_queries && *max_queries == 0) throw DataError("max-queries must be positive when set");
}

namespace {

void check_inputs(const MlpModel& model, const Vec& x, int t) {
  if (static_cast<int>(x.size()) != model.input_dim())
    throw DimensionError("attack input length does not match model");
  if (t < 0 || t >= model.num_classes()) throw DimensionError("attack label out of range");
}

#ifndef NDEBUG
bool feasible(const Vec& delta, const Vec& x, double epsilon) {
  for (size_t i = 0; i < delta.size(); ++i) {
    if (std::fabs(delta[i]) > epsilon + 1e-12) return false;
    const double v = x[i] + delta[i];
    if (v < -1e-12 || v > 1.0 + 1e-12) return false;
  }
  return true;
}
#endif

AttackResult run_zo(const MlpModel& model, const Vec& x, int t, const AttackConfig& config,
                    bool natural) {
  config.validate();
  check_inputs(model, x, t);
  const int d = static_cast<int>(x.size());

  QueryLedger ledger(config.max_queries);
  Rng rng(config.seed);
  AttackResult result;
  result.delta.assign(d, 0.0);
  Vec point(d);

  try {
    for (int k = 0; k < config.max_iters; ++k) {
      for (int i = 0; i < d; ++i) point[i] = x[i] + result.delta[i];
      const ProbVector base = query(model, ledger, point);
      result.loss_trace.push_back(attack_loss(base, t, config.kappa));
      result.final_prediction = base.argmax();
      if (is_success(base, t)) {
        result.success = true;
        result.iterations = k;
        result.queries = ledger.count();
        return result;
      }

      const DirectionBatch batch =
          sample_directions(config.samples_r, d, config.direction_mode, rng.next_u64());
      const GradEstimate est = estimate_gradients_from_base(model, ledger, x, result.delta, t,
                                                            config.mu, batch, config.kappa, base);
      Vec step;
      if (natural) {
        const RankOneFisher fisher = RankOneFisher::from_score(est.score, config.gamma);
        step = natural_gradient_step(fisher, est.grad_f, config.lambda);
      } else {
        step = scaled(est.grad_f, config.lambda);
      }
      result.delta = project(sub(result.delta, step), x, config.epsilon);
      assert(feasible(result.delta, x, config.epsilon));
      result.iterations = k + 1;
    }
  } catch (const BudgetExhausted&) {
    // treated as attack failure; the partial iteration stays uncounted
  }
  result.success = false;
  result.queries = ledger.count();
  return result;
}

AttackResult run_whitebox(const MlpModel& model, const Vec& x, int t, const AttackConfig& config,
                          bool natural) {
  config.validate();
  check_inputs(model, x, t);
  const int d = static_cast<int>(x.size());

  QueryLedger ledger(config.max_queries);
  AttackResult result;
  result.delta.assign(d, 0.0);
  Vec point(d);

  try {
    for (int k = 0; k < config.max_iters; ++k) {
      for (int i = 0; i < d; ++i) point[i] = x[i] + result.delta[i];
      // one forward + one backpropagation = one white-box query
      const ProbVector base = query(model, ledger, point);
      result.loss_trace.push_back(attack_loss(base, t, config.kappa));
      result.final_prediction = base.argmax();
      if (is_success(base, t)) {
        result.success = true;
        result.iterations = k;
        result.queries = ledger.count();
        return result;
      }

      const Vec grad = attack_loss_gradient(model, point, t, config.kappa);
      Vec step;
      if (natural) {
        const RankOneFisher fisher = RankOneFisher::from_score(model.grad_logp(point, t), config.gamma);
        step = natural_gradient_step(fisher, grad, config.lambda);
      } else {
        step = scaled(grad, config.lambda);
      }
      result.delta = project(sub(result.delta, step), x, config.epsilon);
      assert(feasible(result.delta, x, config.epsilon));
      result.iterations = k + 1;
    }
  } catch (const BudgetExhausted&) {
  }
  result.success = false;
  result.queries = ledger.count();
  return result;
}

}  // namespace

AttackResult zo_ngd_attack(const MlpModel& model, const Vec& x, int t, const AttackConfig& config) {
  return run_zo(model, x, t, config, true);
}

AttackResult zo_pgd_baseline(const MlpModel& model, const Vec& x, int t, const AttackConfig& config) {
  return run_zo(model, x, t, config, false);
}

AttackResult whitebox_ngd(const MlpModel& model, const Vec& x, int t, const AttackConfig& config) {
  return run_whitebox(model, x, t, config, true);
}

AttackResult whitebox_pgd(const MlpModel& model, const Vec& x, int t, const AttackConfig& config) {
  return run_whitebox(model, x, t, config, false);
}

AttackResult run_attack(const MlpModel& model, const Vec& x, int t, const AttackConfig& config) {
  switch (config.method) {
    case AttackMethod::ZoNgd: return zo_ngd_attack(model, x, t, config);
    case AttackMethod::ZoPgd: return zo_pgd_baseline(model, x, t, config);
    case AttackMethod::WbNgd: return whitebox_ngd(model, x, t, config);
    case AttackMethod::WbPgd: return whitebox_pgd(model, x, t, config);
  }
  throw UsageError("unknown attack method");
}

}  // namespace zongd
