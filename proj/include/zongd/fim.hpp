#pragma once

#include <vector>

#include "zongd/linalg.hpp"
#include "zongd/model.hpp"

namespace zongd {

/// Below this squared score norm the rank-one term is dropped and the step
/// degenerates to lambda/gamma * g; the closed-form inverse divides by c^2.
inline constexpr double kScoreNormEps = 1e-20;

/// Matrices above this edge are refused by the dense verification paths.
inline constexpr int kDenseDimGuard = 512;

/// Damped Fisher information in implicit form: F = s s^T + gamma I, stored
/// as the score vector s, its norm c, and the damping gamma. Never
/// materialized; every consumer works through inner products.
struct RankOneFisher {
  Vec s;
  double c = 0.0;
  double gamma = 0.0;

  static RankOneFisher from_score(Vec score, double gamma);

  /// (s s^T + gamma I) v without forming the matrix.
  Vec apply(const Vec& v) const;
};

/// Undamped rank-one factor s s^T built from the true label's score alone.
struct OuterProductFisher {
  Vec s;

  Vec apply(const Vec& v) const;
};

OuterProductFisher fim_outer_product(Vec score_true);

/// Full-expectation Fisher matrix: sum_t p_t * s_t s_t^T over all classes.
/// Verification only; guarded to small d.
Matrix fim_exact(const ProbVector& p, const std::vector<Vec>& scores);

/// Empirical Fisher from n_MC class draws: (1/n) sum_i s_{t_i} s_{t_i}^T.
Matrix fim_monte_carlo(const std::vector<Vec>& sampled_scores);

/// The natural-gradient step lambda * F^{-1} g through the closed-form
/// rank-one inverse: only inner products and vector adds, O(d) time and
/// memory, no d x d object anywhere.
Vec natural_gradient_step(const RankOneFisher& fisher, const Vec& g, double lambda);

/// Dense route for the same solve: materializes s s^T + gamma I and runs a
/// direct solver. Test oracle for the closed-form inverse.
Vec dense_inverse_oracle(const Vec& s, double gamma, const Vec& g);

}  // namespace zongd
