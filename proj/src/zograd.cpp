#include "zongd/zograd.hpp"

#include <cmath>

#include "zongd/errors.hpp"
#include "zongd/loss.hpp"
#include "zongd/rng.hpp"

namespace zongd {

std::string direction_mode_name(DirectionMode m) {
  return m == DirectionMode::Gaussian ? "gaussian" : "unit-sphere";
}

DirectionMode direction_mode_from_name(const std::string& name) {
  if (name == "gaussian") return DirectionMode::Gaussian;
  if (name == "unit-sphere") return DirectionMode::UnitSphere;
  throw UsageError("unknown direction mode: " + name);
}

DirectionBatch sample_directions(int r, int d, DirectionMode mode, uint64_t seed) {
  if (r < 1) throw DimensionError("sample_directions: R must be at least 1");
  if (d < 1) throw DimensionError("sample_directions: d must be at least 1");
  Rng rng(seed);
  DirectionBatch batch;
  batch.mode = mode;
  batch.seed = seed;
  batch.directions.reserve(r);
  for (int j = 0; j < r; ++j) {
    Vec u(d);
    double norm = 0.0;
    do {
      for (double& v : u) v = rng.gaussian();
      norm = norm2(u);
    } while (mode == DirectionMode::UnitSphere && norm == 0.0);
    if (mode == DirectionMode::UnitSphere)
      for (double& v : u) v /= norm;
    batch.directions.push_back(std::move(u));
  }
  return batch;
}

GradEstimate estimate_gradients_from_base(const MlpModel& model, QueryLedger& ledger, const Vec& x,
                                          const Vec& delta, int t, double mu,
                                          const DirectionBatch& batch, double kappa,
                                          const ProbVector& base) {
  if (mu <= 0.0) throw DataError("estimate_gradients: mu must be positive");
  const int d = model.input_dim();
  if (static_cast<int>(x.size()) != d || static_cast<int>(delta.size()) != d)
    throw DimensionError("estimate_gradients: input length mismatch");
  if (batch.directions.empty()) throw DimensionError("estimate_gradients: empty direction batch");

  const double base_loss = attack_loss(base, t, kappa);
  const double base_logp = std::log(base[t]);

  GradEstimate est;
  est.grad_f.assign(d, 0.0);
  est.score.assign(d, 0.0);
  est.base_loss = base_loss;
  est.base_prob = base;

  Vec point(d);
  for (const Vec& u : batch.directions) {
    if (static_cast<int>(u.size()) != d) throw DimensionError("estimate_gradients: direction length mismatch");
    for (int k = 0; k < d; ++k) point[k] = x[k] + delta[k] + mu * u[k];
    const ProbVector p = query(model, ledger, point);
    const double df = (attack_loss(p, t, kappa) - base_loss) / mu;
    const double dlp = (std::log(p[t]) - base_logp) / mu;
    for (int k = 0; k < d; ++k) {
      est.grad_f[k] += df * u[k];
      est.score[k] += dlp * u[k];
    }
  }
  const double inv_r = 1.0 / static_cast<double>(batch.directions.size());
  for (int k = 0; k < d; ++k) {
    est.grad_f[k] *= inv_r;
    est.score[k] *= inv_r;
  }
  est.queries_used = batch.directions.size();
  return est;
}

GradEstimate estimate_gradients(const MlpModel& model, QueryLedger& ledger, const Vec& x,
                                const Vec& delta, int t, double mu, const DirectionBatch& batch,
                                double kappa) {
  if (mu <= 0.0) throw DataError("estimate_gradients: mu must be positive");
  const ProbVector base = query(model, ledger, add(x, delta));
  GradEstimate est = estimate_gradients_from_base(model, ledger, x, delta, t, mu, batch, kappa, base);
  est.queries_used += 1;
  return est;
}

}  // namespace zongd
