#include "zongd/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "zongd/errors.hpp"
#include "zongd/loss.hpp"
#include "zongd/rng.hpp"

namespace zongd {

namespace {

std::vector<int> eligible_indices(const MlpModel& model, const std::vector<Sample>& dataset,
                                  uint64_t seed) {
  std::vector<int> eligible;
  for (size_t i = 0; i < dataset.size(); ++i) {
    const Sample& s = dataset[i];
    if (static_cast<int>(s.x.size()) != model.input_dim())
      throw DataError("dataset feature width does not match model");
    if (s.label < 0 || s.label >= model.num_classes())
      throw DataError("dataset label out of model range");
    if (model.forward(s.x).argmax() == s.label) eligible.push_back(static_cast<int>(i));
  }
  Rng rng(Rng::derive(seed, 0x5ca77e5u));
  for (size_t i = eligible.size(); i > 1; --i)
    std::swap(eligible[i - 1], eligible[rng.below(i)]);
  return eligible;
}

}  // namespace

CampaignReport run_campaign(const MlpModel& model, const std::vector<Sample>& dataset,
                            const AttackConfig& config, int n_images, int skip_eligible) {
  if (dataset.empty()) throw DataError("campaign needs a non-empty dataset");
  if (n_images < 0 || skip_eligible < 0) throw DataError("image counts must be nonnegative");
  config.validate();

  CampaignReport report;
  report.method = attack_method_name(config.method);
  report.config = config;
  report.seed = config.seed;
  report.requested_images = n_images;

  std::vector<int> eligible = eligible_indices(model, dataset, config.seed);
  if (skip_eligible < static_cast<int>(eligible.size()))
    eligible.erase(eligible.begin(), eligible.begin() + skip_eligible);
  else
    eligible.clear();

  const int selected = std::min<int>(n_images, static_cast<int>(eligible.size()));
  report.short_of_images = selected < n_images;
  report.attempted = selected;
  report.results.resize(selected);

  // Images are independent: per-image seeds come from the dataset index, so
  // the slot order (and thread schedule) cannot change any outcome.
  std::atomic<int> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const int slot = cursor.fetch_add(1);
      if (slot >= selected) return;
      const int index = eligible[slot];
      const Sample& sample = dataset[index];
      AttackConfig per_image = config;
      per_image.seed = Rng::derive(config.seed, static_cast<uint64_t>(index));
      ImageOutcome outcome;
      outcome.dataset_index = index;
      outcome.label = sample.label;
      outcome.result = run_attack(model, sample.x, sample.label, per_image);
      report.results[slot] = std::move(outcome);
    }
  };

  unsigned n_threads = std::min<unsigned>(std::thread::hardware_concurrency(),
                                          static_cast<unsigned>(std::max(selected, 1)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<uint64_t> success_queries;
  for (const ImageOutcome& outcome : report.results) {
    report.total_queries += outcome.result.queries;
    if (outcome.result.success) {
      ++report.successes;
      success_queries.push_back(outcome.result.queries);
    }
  }
  if (report.attempted > 0)
    report.success_rate = static_cast<double>(report.successes) / report.attempted;
  if (!success_queries.empty()) {
    std::sort(success_queries.begin(), success_queries.end());
    double sum = 0.0;
    for (uint64_t q : success_queries) sum += static_cast<double>(q);
    report.avg_queries_successful = sum / static_cast<double>(success_queries.size());
    const size_t n = success_queries.size();
    report.median_queries = (n % 2 == 1)
                                ? static_cast<double>(success_queries[n / 2])
                                : 0.5 * (static_cast<double>(success_queries[n / 2 - 1]) +
                                         static_cast<double>(success_queries[n / 2]));
    size_t seen = 0;
    for (size_t i = 0; i < n;) {
      size_t j = i;
      while (j < n && success_queries[j] == success_queries[i]) ++j;
      seen = j;
      report.query_cdf.push_back(
          {success_queries[i], static_cast<double>(seen) / static_cast<double>(n)});
      i = j;
    }
  }
  return report;
}

double mean_loss_at_iteration(const CampaignReport& report, int iteration) {
  if (report.results.empty()) return 0.0;
  double sum = 0.0;
  for (const ImageOutcome& outcome : report.results) {
    const auto& trace = outcome.result.loss_trace;
    if (trace.empty()) continue;
    const size_t idx = std::min<size_t>(iteration, trace.size() - 1);
    sum += trace[idx];
  }
  return sum / static_cast<double>(report.results.size());
}

std::vector<AblationPoint> run_ablation(const MlpModel& model, const std::vector<Sample>& dataset,
                                        const AttackConfig& base, const std::vector<double>& mus,
                                        const std::vector<double>& epsilons,
                                        const std::vector<double>& gammas, int n_images) {
  if (mus.empty() || epsilons.empty() || gammas.empty())
    throw DataError("ablation grid must not be empty");
  std::vector<AblationPoint> points;
  for (double mu : mus) {
    for (double eps : epsilons) {
      for (double gamma : gammas) {
        AttackConfig config = base;
        config.mu = mu;
        config.epsilon = eps;
        config.gamma = gamma;
        AblationPoint point;
        point.mu = mu;
        point.epsilon = eps;
        point.gamma = gamma;
        point.report = run_campaign(model, dataset, config, n_images);
        point.mean_loss_after_two_iters = mean_loss_at_iteration(point.report, 2);
        points.push_back(std::move(point));
      }
    }
  }
  return points;
}

TuningOutcome tune_step_size(const MlpModel& model, const std::vector<Sample>& dataset,
                             const AttackConfig& base, const std::vector<double>& grid, int n_tune) {
  if (grid.empty()) throw DataError("step-size grid must not be empty");
  TuningOutcome outcome;
  for (size_t i = 0; i < grid.size(); ++i) {
    AttackConfig config = base;
    config.lambda = grid[i];
    const CampaignReport report = run_campaign(model, dataset, config, n_tune);
    TuningRow row;
    row.lambda = grid[i];
    row.success_rate = report.success_rate;
    row.median_queries = report.median_queries;
    outcome.rows.push_back(row);
  }
  // best success rate, then lowest median queries; exact ties resolve toward
  // the anchor step (base.lambda, normally the method default), then smaller
  const auto key = [&](const TuningRow& r) {
    const double sr = r.success_rate.value_or(-1.0);
    const double med = r.median_queries.value_or(std::numeric_limits<double>::infinity());
    return std::tuple<double, double, double, double>(-sr, med, std::fabs(r.lambda - base.lambda),
                                                      r.lambda);
  };
  int best = 0;
  for (size_t i = 1; i < grid.size(); ++i)
    if (key(outcome.rows[i]) < key(outcome.rows[best])) best = static_cast<int>(i);
  outcome.chosen_lambda = grid[best];
  return outcome;
}

ComparisonReport run_tuned_comparison(const MlpModel& model, const std::vector<Sample>& dataset,
                                      AttackConfig config_a, AttackConfig config_b,
                                      const std::vector<double>& step_multipliers, int n_tune,
                                      int n_images) {
  if (step_multipliers.empty()) throw DataError("step multiplier grid must not be empty");
  ComparisonReport cmp;
  for (double m : step_multipliers) {
    cmp.grid_a.push_back(m * config_a.lambda);
    cmp.grid_b.push_back(m * config_b.lambda);
  }
  cmp.tuning_a = tune_step_size(model, dataset, config_a, cmp.grid_a, n_tune);
  cmp.tuning_b = tune_step_size(model, dataset, config_b, cmp.grid_b, n_tune);
  config_a.lambda = cmp.tuning_a.chosen_lambda;
  config_b.lambda = cmp.tuning_b.chosen_lambda;
  cmp.campaign_a = run_campaign(model, dataset, config_a, n_images, n_tune);
  cmp.campaign_b = run_campaign(model, dataset, config_b, n_images, n_tune);
  return cmp;
}

}  // namespace zongd
