#include "zongd/geometry.hpp"

#include <cmath>

#include "zongd/errors.hpp"
#include "zongd/loss.hpp"

namespace zongd {

double kl_divergence(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw DimensionError("kl_divergence: length mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) sum += p[i] * std::log(p[i] / q[i]);
  // Gibbs' inequality holds exactly; a negative sum can only be rounding.
  return sum < 0.0 ? 0.0 : sum;
}

double check_score_expectation(const MlpModel& model, const Vec& x, const Vec& delta) {
  const Vec point = add(x, delta);
  const ProbVector p = model.forward(point);
  Vec acc(x.size(), 0.0);
  for (int t = 0; t < model.num_classes(); ++t) {
    const Vec s = model.grad_logp(point, t);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += p[t] * s[i];
  }
  return norm_inf(acc);
}

Matrix exact_fim_at(const MlpModel& model, const Vec& x, const Vec& delta) {
  const Vec point = add(x, delta);
  const ProbVector p = model.forward(point);
  std::vector<Vec> scores;
  scores.reserve(model.num_classes());
  for (int t = 0; t < model.num_classes(); ++t) scores.push_back(model.grad_logp(point, t));
  return fim_exact(p, scores);
}

namespace {

double kl_at_displacement(const MlpModel& model, const Vec& point, const ProbVector& base,
                          const Vec& displacement) {
  return kl_divergence(base, model.forward(add(point, displacement)));
}

}  // namespace

std::optional<double> check_kl_hessian_equals_fim(const KlProbe& probe) {
  const MlpModel& model = *probe.model;
  const int d = model.input_dim();
  if (d > 64) throw DimensionError("check_kl_hessian_equals_fim: dense Hessian guard (d <= 64)");
  const Vec point = add(probe.x, probe.delta);
  const ProbVector base = model.forward(point);
  const Matrix fisher = exact_fim_at(model, probe.x, probe.delta);
  const double fisher_norm = frobenius_norm(fisher);
  if (fisher_norm < 1e-12) return std::nullopt;

  const double h = probe.h;
  Matrix hessian(d, d);
  Vec e(d, 0.0);
  for (int i = 0; i < d; ++i) {
    e.assign(d, 0.0);
    e[i] = h;
    const double plus = kl_at_displacement(model, point, base, e);
    e[i] = -h;
    const double minus = kl_at_displacement(model, point, base, e);
    hessian.at(i, i) = (plus + minus) / (h * h);  // KL at zero displacement is exactly 0
  }
  Vec eij(d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      eij.assign(d, 0.0);
      eij[i] = h;
      eij[j] = h;
      const double pp = kl_at_displacement(model, point, base, eij);
      eij[j] = -h;
      const double pm = kl_at_displacement(model, point, base, eij);
      eij[i] = -h;
      eij[j] = h;
      const double mp = kl_at_displacement(model, point, base, eij);
      eij[j] = -h;
      const double mm = kl_at_displacement(model, point, base, eij);
      const double value = (pp - pm - mp + mm) / (4.0 * h * h);
      hessian.at(i, j) = value;
      hessian.at(j, i) = value;
    }
  }
  return frobenius_distance(hessian, fisher) / fisher_norm;
}

std::optional<double> check_kl_taylor(const KlProbe& probe) {
  const MlpModel& model = *probe.model;
  const Vec point = add(probe.x, probe.delta);
  const Matrix fisher = exact_fim_at(model, probe.x, probe.delta);
  const double quad = 0.5 * dot(probe.alpha, matvec(fisher, probe.alpha));
  if (!(quad > 1e-30)) return std::nullopt;
  const ProbVector base = model.forward(point);
  const double kl = kl_at_displacement(model, point, base, probe.alpha);
  return kl / quad;
}

std::optional<double> steepest_descent_cosine(const Vec& grad_f, const Vec& score, double gamma,
                                              double m) {
  if (grad_f.size() != score.size()) throw DimensionError("steepest_descent_cosine: length mismatch");
  const int d = static_cast<int>(grad_f.size());
  if (d > 32) throw DimensionError("steepest_descent_cosine: dense guard (d <= 32)");
  if (gamma <= 0.0) throw DataError("damping gamma must be positive");
  if (m <= 0.0) throw DataError("constraint level m must be positive");
  if (norm2(grad_f) == 0.0) return std::nullopt;

  Matrix fisher(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) fisher.at(i, j) = score[i] * score[j];
    fisher.at(i, i) += gamma;
  }

  // Whitened constrained minimization: with F = L L^T and b = L^T a, the
  // problem becomes min (L^{-1}g)^T b over the sphere ||b||^2 = 2m.
  const Matrix lower = cholesky(fisher);
  const Vec w = solve_lower(lower, grad_f);
  const double wn = norm2(w);
  if (wn == 0.0) return std::nullopt;
  const double radius = std::sqrt(2.0 * m);
  Vec b(d);
  for (int i = 0; i < d; ++i) b[i] = -radius * w[i] / wn;
  const Vec minimizer = solve_lower_transposed(lower, b);

  const Vec natural = dense_inverse_oracle(score, gamma, grad_f);
  const Vec neg_natural = scaled(natural, -1.0);
  return cosine(minimizer, neg_natural);
}

std::optional<double> check_steepest_descent_direction(const MlpModel& model, const Vec& x,
                                                       const Vec& delta, int t, double gamma,
                                                       double m) {
  const Vec point = add(x, delta);
  const Vec grad_f = attack_loss_gradient(model, point, t, 0.0);
  if (norm2(grad_f) == 0.0) return std::nullopt;
  const Vec score = model.grad_logp(point, t);
  return steepest_descent_cosine(grad_f, score, gamma, m);
}

}  // namespace zongd
