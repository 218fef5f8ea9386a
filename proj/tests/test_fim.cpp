#include <cmath>

#include "doctest.h"
#include "zongd/errors.hpp"
#include "zongd/fim.hpp"
#include "zongd/geometry.hpp"
#include "zongd/rng.hpp"

using namespace zongd;

namespace {

Vec random_vec(int d, double scale, Rng& rng) {
  Vec v(d);
  for (double& e : v) e = scale * rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("fim_exact: all-zero scores give the zero matrix") {
  const ProbVector p{{0.3, 0.7}};
  const Matrix f = fim_exact(p, {Vec(4, 0.0), Vec(4, 0.0)});
  for (double v : f.data) CHECK(v == 0.0);
}

TEST_CASE("fim_exact: two orthonormal scores at half weight") {
  const ProbVector p{{0.5, 0.5}};
  const Matrix f = fim_exact(p, {Vec{1.0, 0.0}, Vec{0.0, 1.0}});
  CHECK(f.at(0, 0) == 0.5);
  CHECK(f.at(1, 1) == 0.5);
  CHECK(f.at(0, 1) == 0.0);
  CHECK(f.at(1, 0) == 0.0);
}

TEST_CASE("fim_exact is positive semidefinite") {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    MlpModel model = random_mlp(6, {8}, 3, 1.0, rng);
    Vec x(6);
    for (double& v : x) v = rng.uniform01();
    const Matrix f = exact_fim_at(model, x, Vec(6, 0.0));
    const Vec eig = symmetric_eigenvalues(f);
    CHECK(eig.front() >= -1e-10);
  }
}

TEST_CASE("fim_outer_product applies s s^T against basis vectors") {
  const OuterProductFisher op = fim_outer_product({1.0, 0.0});
  const Vec col0 = op.apply({1.0, 0.0});
  const Vec col1 = op.apply({0.0, 1.0});
  CHECK(col0 == Vec{1.0, 0.0});
  CHECK(col1 == Vec{0.0, 0.0});

  const OuterProductFisher zero = fim_outer_product(Vec(3, 0.0));
  CHECK(zero.apply({1.0, 2.0, 3.0}) == Vec(3, 0.0));
}

TEST_CASE("outer-product drift against the exact FIM is measured, not asserted") {
  // confident prediction: the true-label term dominates the expectation
  Rng rng(8);
  MlpModel model = random_mlp(6, {10}, 3, 2.0, rng);
  Vec x(6);
  double best_conf = -1.0;
  for (int scan = 0; scan < 50; ++scan) {
    Vec candidate(6);
    for (double& v : candidate) v = rng.uniform01();
    const ProbVector q = model.forward(candidate);
    if (q[q.argmax()] > best_conf) {
      best_conf = q[q.argmax()];
      x = candidate;
    }
  }
  const ProbVector p = model.forward(x);
  const int t = p.argmax();
  const Matrix exact = exact_fim_at(model, x, Vec(6, 0.0));
  const Vec score = model.grad_logp(x, t);
  Matrix op(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) op.at(i, j) = score[i] * score[j];
  const double drift = frobenius_distance(op, exact) / std::max(frobenius_norm(exact), 1e-300);
  CHECK(std::isfinite(drift));
  CHECK(drift >= 0.0);
  MESSAGE("outer-product relative drift at p_t=", p[t], ": ", drift);
}

TEST_CASE("fim_monte_carlo with the true label matches the outer product") {
  const Vec s = {0.4, -1.2, 0.7};
  const Matrix mc = fim_monte_carlo({s});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(mc.at(i, j) == s[i] * s[j]);
}

TEST_CASE("fim_monte_carlo distance to the exact FIM shrinks with sample count") {
  Rng rng(21);
  MlpModel model = random_mlp(8, {10}, 4, 1.0, rng);
  Vec x(8);
  for (double& v : x) v = rng.uniform01();
  const ProbVector p = model.forward(x);
  std::vector<Vec> scores;
  for (int t = 0; t < 4; ++t) scores.push_back(model.grad_logp(x, t));
  const Matrix exact = fim_exact(p, scores);

  auto sample_class = [&](Rng& r) {
    double u = r.uniform01(), acc = 0.0;
    for (size_t t = 0; t < p.size(); ++t) {
      acc += p[t];
      if (u < acc) return static_cast<int>(t);
    }
    return static_cast<int>(p.size()) - 1;
  };

  const int reps = 10;
  double prev = -1.0;
  for (int n_mc : {1, 10, 100, 1000}) {
    double mean_dist = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      std::vector<Vec> draws;
      draws.reserve(n_mc);
      for (int i = 0; i < n_mc; ++i) draws.push_back(scores[sample_class(rng)]);
      mean_dist += frobenius_distance(fim_monte_carlo(draws), exact);
    }
    mean_dist /= reps;
    if (prev >= 0.0) CHECK(mean_dist <= prev);
    prev = mean_dist;
  }
}

TEST_CASE("fim_monte_carlo rejects zero samples, keeps zero scores") {
  CHECK_THROWS_AS(fim_monte_carlo({}), DimensionError);
  const Matrix z = fim_monte_carlo({Vec(3, 0.0), Vec(3, 0.0)});
  for (double v : z.data) CHECK(v == 0.0);
}

TEST_CASE("natural_gradient_step degenerates to lambda/gamma * g") {
  const Vec g = {1.0, -2.0, 0.5};

  SUBCASE("zero score") {
    const RankOneFisher f = RankOneFisher::from_score(Vec(3, 0.0), 0.25);
    const Vec step = natural_gradient_step(f, g, 2.0);
    for (int i = 0; i < 3; ++i) CHECK(step[i] == 2.0 / 0.25 * g[i]);
  }

  SUBCASE("gradient orthogonal to the score") {
    const RankOneFisher f = RankOneFisher::from_score({0.0, 0.0, 3.0}, 0.5);
    const Vec orth = {1.0, -1.0, 0.0};
    const Vec step = natural_gradient_step(f, orth, 1.5);
    for (int i = 0; i < 3; ++i) CHECK(step[i] == doctest::Approx(3.0 * orth[i]).epsilon(1e-14));
  }
}

TEST_CASE("natural_gradient_step matches the dense solve") {
  Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(64));
    const double gamma = std::pow(10.0, rng.uniform(-2.0, 0.0));
    const Vec s = random_vec(d, rng.uniform(0.1, 3.0), rng);
    const Vec g = random_vec(d, 1.0, rng);
    const double lambda = rng.uniform(0.1, 2.0);
    const Vec fast = natural_gradient_step(RankOneFisher::from_score(s, gamma), g, lambda);
    const Vec dense = scaled(dense_inverse_oracle(s, gamma, g), lambda);
    CHECK(norm2(sub(fast, dense)) / std::max(norm2(dense), 1e-300) <= 1e-10);
  }
}

TEST_CASE("natural_gradient_step validates lambda and gamma") {
  const RankOneFisher f = RankOneFisher::from_score({1.0}, 0.1);
  CHECK_THROWS_AS(natural_gradient_step(f, {1.0}, 0.0), DataError);
  CHECK_THROWS_AS(RankOneFisher::from_score({1.0}, 0.0), DataError);
}

TEST_CASE("damped fisher is positive definite through the implicit multiply") {
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(16));
    const double gamma = std::pow(10.0, rng.uniform(-3.0, 0.0));
    const RankOneFisher f = RankOneFisher::from_score(random_vec(d, 1.0, rng), gamma);
    const Vec v = random_vec(d, 1.0, rng);
    CHECK(dot(v, f.apply(v)) >= gamma * dot(v, v) * (1.0 - 1e-12));
  }
}

TEST_CASE("damping bounds the step norm") {
  Rng rng(50);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(30));
    const double gamma = std::pow(10.0, rng.uniform(-2.0, 0.0));
    const double lambda = rng.uniform(0.05, 1.0);
    const Vec s = random_vec(d, rng.uniform(0.0, 2.0), rng);
    const Vec g = random_vec(d, 1.0, rng);
    const Vec step = natural_gradient_step(RankOneFisher::from_score(s, gamma), g, lambda);
    CHECK(norm2(step) <= lambda / gamma * norm2(g) * (1.0 + 1e-12));
  }
}

TEST_CASE("rank-one fisher keeps its norm invariant") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(20));
    const Vec s = random_vec(d, rng.uniform(0.1, 4.0), rng);
    const RankOneFisher f = RankOneFisher::from_score(s, 0.01);
    CHECK(std::fabs(f.c - norm2(f.s)) <= 1e-12);
  }
}

TEST_CASE("dense_inverse_oracle scalar and zero-score cases") {
  CHECK(dense_inverse_oracle({2.0}, 1.0, {5.0}) == Vec{1.0});
  const Vec g = {3.0, -1.0, 0.4};
  const Vec y = dense_inverse_oracle(Vec(3, 0.0), 2.0, g);
  for (int i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(g[i] / 2.0).epsilon(1e-15));
}

TEST_CASE("dense_inverse_oracle residual is tiny") {
  Rng rng(70);
  const int d = 32;
  const Vec s = random_vec(d, 1.0, rng);
  const Vec g = random_vec(d, 1.0, rng);
  const double gamma = 0.05;
  const Vec y = dense_inverse_oracle(s, gamma, g);
  const double along = dot(s, y);
  Vec residual(d);
  for (int i = 0; i < d; ++i) residual[i] = s[i] * along + gamma * y[i] - g[i];
  CHECK(norm_inf(residual) <= 1e-10);
}

TEST_CASE("dense paths enforce the dimension guard") {
  const Vec big(513, 0.1);
  CHECK_THROWS_AS(dense_inverse_oracle(big, 0.1, big), DimensionError);
}
