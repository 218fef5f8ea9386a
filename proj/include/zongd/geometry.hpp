#pragma once

#include <optional>

#include "zongd/fim.hpp"
#include "zongd/linalg.hpp"
#include "zongd/model.hpp"

namespace zongd {

/// KL divergence between two categorical distributions over the same
/// classes. Inputs are already probability-floored, so the result is finite.
double kl_divergence(const ProbVector& p, const ProbVector& q);

/// Max absolute coordinate of sum_t p(t) * grad log p(t) at x+delta. The
/// expected score is identically zero; anything beyond float noise is a bug.
double check_score_expectation(const MlpModel& model, const Vec& x, const Vec& delta);

/// Full-expectation Fisher matrix at x+delta from exact per-class scores.
Matrix exact_fim_at(const MlpModel& model, const Vec& x, const Vec& delta);

struct KlProbe {
  const MlpModel* model = nullptr;
  Vec x;
  Vec delta;
  double h = 1e-3;  // finite-difference step
  Vec alpha;        // displacement for the Taylor check
};

/// Relative Frobenius error between the numerical Hessian of
/// alpha -> KL(p(.|x+delta) || p(.|x+delta+alpha)) at alpha = 0 and the
/// exact Fisher matrix. nullopt when the Fisher matrix vanishes
/// (constant model) and the ratio is undefined.
std::optional<double> check_kl_hessian_equals_fim(const KlProbe& probe);

/// Ratio KL(p(delta) || p(delta+alpha)) / (alpha^T F alpha / 2); tends to 1
/// as alpha shrinks. nullopt when the quadratic form vanishes.
std::optional<double> check_kl_taylor(const KlProbe& probe);

/// Cosine between the constrained minimizer of g^T a subject to
/// a^T F a / 2 = m (dense whitened solve) and the dense-solve natural
/// direction -F^{-1} g, for F = s s^T + gamma I. nullopt when g = 0.
std::optional<double> steepest_descent_cosine(const Vec& grad_f, const Vec& score, double gamma,
                                              double m = 1e-4);

/// Same check instantiated at a model point: s and grad f taken from exact
/// gradients of log p(t|.) and the attack loss at x+delta.
std::optional<double> check_steepest_descent_direction(const MlpModel& model, const Vec& x,
                                                       const Vec& delta, int t, double gamma,
                                                       double m = 1e-4);

}  // namespace zongd
