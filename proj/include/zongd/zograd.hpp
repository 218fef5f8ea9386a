#pragma once

#include <cstdint>
#include <vector>

#include "zongd/linalg.hpp"
#include "zongd/model.hpp"

namespace zongd {

enum class DirectionMode { Gaussian, UnitSphere };

std::string direction_mode_name(DirectionMode m);
DirectionMode direction_mode_from_name(const std::string& name);

struct DirectionBatch {
  std::vector<Vec> directions;
  DirectionMode mode = DirectionMode::Gaussian;
  uint64_t seed = 0;
};

/// R i.i.d. random directions of length d. Gaussian mode draws standard
/// normal entries; unit-sphere mode normalizes those draws to unit L2 norm.
DirectionBatch sample_directions(int r, int d, DirectionMode mode, uint64_t seed);

/// Joint estimate of the loss gradient and the score function, read off the
/// same batch of query outputs.
struct GradEstimate {
  Vec grad_f;            // estimated gradient of the attack loss
  Vec score;             // estimated gradient of log p(t | x, delta)
  uint64_t queries_used = 0;
  double base_loss = 0.0;
  ProbVector base_prob;
};

/// One base query at x+delta plus R queries at x+delta+mu*u_j; both
/// estimates come out of those same R+1 probability vectors, so the score
/// (and with it the Fisher information) costs no queries beyond what the
/// loss gradient already needs.
GradEstimate estimate_gradients(const MlpModel& model, QueryLedger& ledger, const Vec& x,
                                const Vec& delta, int t, double mu, const DirectionBatch& batch,
                                double kappa);

/// The R-direction phase on its own, for callers that already hold the base
/// query output of the current iterate (the attack loop's success check).
/// Consumes exactly R queries; queries_used reports R.
GradEstimate estimate_gradients_from_base(const MlpModel& model, QueryLedger& ledger, const Vec& x,
                                          const Vec& delta, int t, double mu,
                                          const DirectionBatch& batch, double kappa,
                                          const ProbVector& base);

}  // namespace zongd
