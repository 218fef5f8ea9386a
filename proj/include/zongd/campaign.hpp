#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zongd/attack.hpp"
#include "zongd/dataset.hpp"
#include "zongd/model.hpp"

namespace zongd {

struct ImageOutcome {
  int dataset_index = 0;
  int label = 0;
  AttackResult result;

  bool operator==(const ImageOutcome&) const = default;
};

struct CdfPoint {
  uint64_t queries = 0;
  double fraction = 0.0;

  bool operator==(const CdfPoint&) const = default;
};

/// Aggregated outcome of one attack campaign. Aggregates over successful
/// attacks are null when there are no successes; success_rate is null when
/// nothing was attempted.
struct CampaignReport {
  std::string method;
  AttackConfig config;
  uint64_t seed = 0;
  int requested_images = 0;
  int attempted = 0;
  int successes = 0;
  bool short_of_images = false;
  std::optional<double> success_rate;
  std::optional<double> avg_queries_successful;
  std::optional<double> median_queries;
  uint64_t total_queries = 0;
  std::vector<CdfPoint> query_cdf;  // over successful attacks; ends at 1.0
  std::vector<ImageOutcome> results;

  bool operator==(const CampaignReport&) const = default;
};

/// Runs the configured attack over the first n_images correctly classified
/// samples under a seeded shuffle, each with an independent ledger and an
/// index-derived seed, so results do not depend on execution order.
/// skip_eligible reserves a disjoint prefix (the tuning pool).
CampaignReport run_campaign(const MlpModel& model, const std::vector<Sample>& dataset,
                            const AttackConfig& config, int n_images, int skip_eligible = 0);

/// Mean attack loss at a fixed iteration index across a campaign's traces;
/// the damping ablation compares gamma settings by early loss reduction.
double mean_loss_at_iteration(const CampaignReport& report, int iteration);

struct AblationPoint {
  double mu = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;
  double mean_loss_after_two_iters = 0.0;
  CampaignReport report;
};

/// One campaign per grid point over the cartesian product of the three
/// parameter lists. Empty lists are rejected.
std::vector<AblationPoint> run_ablation(const MlpModel& model, const std::vector<Sample>& dataset,
                                        const AttackConfig& base, const std::vector<double>& mus,
                                        const std::vector<double>& epsilons,
                                        const std::vector<double>& gammas, int n_images);

struct TuningRow {
  double lambda = 0.0;
  std::optional<double> success_rate;
  std::optional<double> median_queries;
};

struct TuningOutcome {
  double chosen_lambda = 0.0;
  std::vector<TuningRow> rows;
};

/// Picks the best step size from the grid on the first n_tune eligible
/// images: highest success rate, ties broken by lower median queries, then
/// by grid order.
TuningOutcome tune_step_size(const MlpModel& model, const std::vector<Sample>& dataset,
                             const AttackConfig& base, const std::vector<double>& grid, int n_tune);

struct ComparisonReport {
  std::vector<double> grid_a;
  std::vector<double> grid_b;
  TuningOutcome tuning_a;
  TuningOutcome tuning_b;
  CampaignReport campaign_a;
  CampaignReport campaign_b;
};

/// Multiplier grid for the fairness protocol, applied to each method's
/// default step size.
inline const std::vector<double> kStepMultipliers = {0.25, 0.5, 1.0, 2.0, 4.0};

/// Fairness protocol for method comparisons: both step sizes tuned over the
/// same multiplier grid (anchored at each config's own step size) on the
/// same tuning pool, then both campaigns run on the next n_images eligible
/// samples, disjoint from the pool.
ComparisonReport run_tuned_comparison(const MlpModel& model, const std::vector<Sample>& dataset,
                                      AttackConfig config_a, AttackConfig config_b,
                                      const std::vector<double>& step_multipliers, int n_tune,
                                      int n_images);

}  // namespace zongd
