#include "zongd/fim.hpp"

#include <cmath>

#include "zongd/errors.hpp"

namespace zongd {

RankOneFisher RankOneFisher::from_score(Vec score, double gamma) {
  if (gamma <= 0.0) throw DataError("damping gamma must be positive");
  RankOneFisher fisher;
  fisher.c = norm2(score);
  fisher.s = std::move(score);
  fisher.gamma = gamma;
  return fisher;
}

Vec RankOneFisher::apply(const Vec& v) const {
  const double along = dot(s, v);
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = s[i] * along + gamma * v[i];
  return out;
}

Vec OuterProductFisher::apply(const Vec& v) const {
  const double along = dot(s, v);
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = s[i] * along;
  return out;
}

OuterProductFisher fim_outer_product(Vec score_true) { return OuterProductFisher{std::move(score_true)}; }

Matrix fim_exact(const ProbVector& p, const std::vector<Vec>& scores) {
  if (scores.size() != p.size()) throw DimensionError("fim_exact: one score per class required");
  if (scores.empty()) throw DimensionError("fim_exact: empty input");
  const int d = static_cast<int>(scores.front().size());
  if (d > kDenseDimGuard) throw DimensionError("fim_exact: dimension guard exceeded");
  Matrix f(d, d);
  for (size_t t = 0; t < scores.size(); ++t) {
    const Vec& s = scores[t];
    if (static_cast<int>(s.size()) != d) throw DimensionError("fim_exact: score length mismatch");
    const double w = p[t];
    for (int i = 0; i < d; ++i) {
      const double wi = w * s[i];
      if (wi == 0.0) continue;
      for (int j = 0; j < d; ++j) f.at(i, j) += wi * s[j];
    }
  }
  return f;
}

Matrix fim_monte_carlo(const std::vector<Vec>& sampled_scores) {
  if (sampled_scores.empty()) throw DimensionError("fim_monte_carlo: n_MC must be at least 1");
  const int d = static_cast<int>(sampled_scores.front().size());
  if (d > kDenseDimGuard) throw DimensionError("fim_monte_carlo: dimension guard exceeded");
  Matrix f(d, d);
  for (const Vec& s : sampled_scores) {
    if (static_cast<int>(s.size()) != d) throw DimensionError("fim_monte_carlo: score length mismatch");
    for (int i = 0; i < d; ++i) {
      if (s[i] == 0.0) continue;
      for (int j = 0; j < d; ++j) f.at(i, j) += s[i] * s[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(sampled_scores.size());
  for (double& v : f.data) v *= inv;
  return f;
}

Vec natural_gradient_step(const RankOneFisher& fisher, const Vec& g, double lambda) {
  if (lambda <= 0.0) throw DataError("step size lambda must be positive");
  if (fisher.s.size() != g.size()) throw DimensionError("natural_gradient_step: length mismatch");
  const double c2 = fisher.c * fisher.c;
  const double inv_gamma = 1.0 / fisher.gamma;
  Vec out(g.size());
  if (c2 < kScoreNormEps) {
    for (size_t i = 0; i < g.size(); ++i) out[i] = lambda * inv_gamma * g[i];
    return out;
  }
  const double coef = ((1.0 / (c2 + fisher.gamma)) - inv_gamma) / c2 * dot(fisher.s, g);
  for (size_t i = 0; i < g.size(); ++i)
    out[i] = lambda * (coef * fisher.s[i] + inv_gamma * g[i]);
  return out;
}

Vec dense_inverse_oracle(const Vec& s, double gamma, const Vec& g) {
  if (s.size() != g.size()) throw DimensionError("dense_inverse_oracle: length mismatch");
  const int d = static_cast<int>(s.size());
  if (d > kDenseDimGuard) throw DimensionError("dense_inverse_oracle: dimension guard exceeded");
  if (gamma <= 0.0) throw DataError("damping gamma must be positive");
  Matrix f(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) f.at(i, j) = s[i] * s[j];
    f.at(i, i) += gamma;
  }
  return solve_dense(std::move(f), g);
}

}  // namespace zongd
