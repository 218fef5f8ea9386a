#include <set>

#include "doctest.h"
#include "test_support.hpp"
#include "zongd/campaign.hpp"
#include "zongd/errors.hpp"
#include "zongd/report.hpp"
#include "zongd/verify.hpp"

using namespace zongd;
using zongd::testing::desk_model;
using zongd::testing::desk_test_set;
using zongd::testing::TempFile;

namespace {

AttackConfig quick_config() {
  AttackConfig config;
  config.method = AttackMethod::ZoNgd;
  config.samples_r = 10;
  config.max_iters = 40;
  config.seed = 21;
  return config;
}

MlpModel constant_model(int d, int classes) {
  std::vector<Layer> layers(1);
  layers[0].weights = Matrix(classes, d);
  layers[0].bias.assign(classes, 0.0);
  layers[0].bias[0] = 1.0;
  return MlpModel(std::move(layers));
}

}  // namespace

TEST_CASE("load_dataset accepts valid rows") {
  TempFile file("ds_ok.csv");
  file.write("0,0.1,0.2\n2,1,0\n1,0.5,0.75\n");
  const auto samples = load_dataset(file.path());
  REQUIRE(samples.size() == 3);
  CHECK(samples[1].label == 2);
  CHECK(samples[2].x == Vec{0.5, 0.75});
}

TEST_CASE("load_dataset names the offending row on a range violation") {
  TempFile file("ds_range.csv");
  file.write("0,0.1,0.2\n1,1.2,0.0\n");
  try {
    load_dataset(file.path());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("load_dataset on an empty file yields an empty list") {
  TempFile file("ds_empty.csv");
  file.write("");
  CHECK(load_dataset(file.path()).empty());
}

TEST_CASE("load_dataset rejects malformed rows and width changes") {
  TempFile bad("ds_bad.csv");
  bad.write("0,0.1,x\n");
  CHECK_THROWS_AS(load_dataset(bad.path()), ParseError);
  TempFile widths("ds_width.csv");
  widths.write("0,0.1,0.2\n1,0.3\n");
  CHECK_THROWS_AS(load_dataset(widths.path()), DataError);
}

TEST_CASE("run_campaign with zero images keeps the rate undefined") {
  const CampaignReport report = run_campaign(desk_model(), desk_test_set(), quick_config(), 0);
  CHECK(report.attempted == 0);
  CHECK_FALSE(report.success_rate.has_value());
  CHECK_FALSE(report.avg_queries_successful.has_value());
  CHECK(report.results.empty());
}

TEST_CASE("run_campaign rejects an empty dataset") {
  CHECK_THROWS_AS(run_campaign(desk_model(), {}, quick_config(), 5), DataError);
}

TEST_CASE("run_campaign flags a shortfall of eligible images") {
  std::vector<Sample> tiny(desk_test_set().begin(), desk_test_set().begin() + 6);
  const CampaignReport report = run_campaign(desk_model(), tiny, quick_config(), 50);
  CHECK(report.short_of_images);
  CHECK(report.attempted <= 6);
  CHECK(report.requested_images == 50);
}

TEST_CASE("campaign aggregates are consistent") {
  const CampaignReport report = run_campaign(desk_model(), desk_test_set(), quick_config(), 12);
  CHECK(report.attempted == 12);

  uint64_t total = 0;
  int successes = 0;
  for (const ImageOutcome& o : report.results) {
    total += o.result.queries;
    if (o.result.success) ++successes;
  }
  CHECK(report.total_queries == total);
  CHECK(report.successes == successes);
  CHECK(*report.success_rate == doctest::Approx(successes / 12.0));

  // CDF is a valid empirical distribution over successful query counts
  double prev_fraction = 0.0;
  uint64_t prev_queries = 0;
  for (const CdfPoint& p : report.query_cdf) {
    CHECK(p.queries > prev_queries);
    CHECK(p.fraction > prev_fraction);
    prev_queries = p.queries;
    prev_fraction = p.fraction;
  }
  if (successes > 0) CHECK(report.query_cdf.back().fraction == 1.0);
}

TEST_CASE("campaigns are deterministic and disjoint from the tuning pool") {
  const CampaignReport a = run_campaign(desk_model(), desk_test_set(), quick_config(), 10);
  const CampaignReport b = run_campaign(desk_model(), desk_test_set(), quick_config(), 10);
  CHECK(a == b);

  const CampaignReport pool = run_campaign(desk_model(), desk_test_set(), quick_config(), 10, 0);
  const CampaignReport rest = run_campaign(desk_model(), desk_test_set(), quick_config(), 10, 10);
  std::set<int> pool_idx, rest_idx;
  for (const auto& o : pool.results) pool_idx.insert(o.dataset_index);
  for (const auto& o : rest.results) rest_idx.insert(o.dataset_index);
  for (int idx : rest_idx) CHECK(pool_idx.count(idx) == 0);
}

TEST_CASE("single-point ablation equals a plain campaign") {
  const AttackConfig base = quick_config();
  const auto points = run_ablation(desk_model(), desk_test_set(), base, {base.mu}, {base.epsilon},
                                   {base.gamma}, 8);
  REQUIRE(points.size() == 1);
  const CampaignReport direct = run_campaign(desk_model(), desk_test_set(), base, 8);
  CHECK(points[0].report == direct);
}

TEST_CASE("ablation rejects an empty grid") {
  CHECK_THROWS_AS(
      run_ablation(desk_model(), desk_test_set(), quick_config(), {}, {0.2}, {0.01}, 4), DataError);
}

TEST_CASE("tuning records one row per grid point and picks a grid member") {
  const std::vector<double> grid = {0.01, 0.05, 0.2};
  const TuningOutcome outcome = tune_step_size(desk_model(), desk_test_set(), quick_config(), grid, 6);
  CHECK(outcome.rows.size() == 3);
  CHECK((outcome.chosen_lambda == 0.01 || outcome.chosen_lambda == 0.05 ||
         outcome.chosen_lambda == 0.2));
}

TEST_CASE("report round-trips through both formats") {
  const CampaignReport report = run_campaign(desk_model(), desk_test_set(), quick_config(), 6);
  for (ReportFormat format : {ReportFormat::JsonLines, ReportFormat::Csv}) {
    TempFile file(format == ReportFormat::JsonLines ? "report.jsonl" : "report.csv");
    emit_report(report, file.path(), format);
    const CampaignReport back = read_report(file.path(), format);
    CHECK(back == report);
  }
}

TEST_CASE("report rendering is byte-stable") {
  const CampaignReport a = run_campaign(desk_model(), desk_test_set(), quick_config(), 5);
  const CampaignReport b = run_campaign(desk_model(), desk_test_set(), quick_config(), 5);
  CHECK(render_report(a, ReportFormat::JsonLines) == render_report(b, ReportFormat::JsonLines));
  CHECK(render_report(a, ReportFormat::Csv) == render_report(b, ReportFormat::Csv));
}

TEST_CASE("zero-success reports carry explicit nulls") {
  const MlpModel hopeless = constant_model(4, 3);
  std::vector<Sample> samples;
  for (int i = 0; i < 4; ++i) {
    Sample s;
    s.label = 0;  // correctly classified, but the constant model never flips
    s.x.assign(4, 0.25 * i);
    samples.push_back(std::move(s));
  }
  AttackConfig config = quick_config();
  config.max_iters = 3;
  const CampaignReport report = run_campaign(hopeless, samples, config, 4);
  CHECK(report.successes == 0);
  CHECK_FALSE(report.avg_queries_successful.has_value());
  CHECK_FALSE(report.median_queries.has_value());

  const std::string jsonl = render_report(report, ReportFormat::JsonLines);
  CHECK(jsonl.find("\"avg_queries_successful\":null") != std::string::npos);
  const std::string csv = render_report(report, ReportFormat::Csv);
  CHECK(csv.find(",null,") != std::string::npos);

  const CampaignReport back = parse_report(jsonl, ReportFormat::JsonLines);
  CHECK_FALSE(back.avg_queries_successful.has_value());
  CHECK(back == report);
}

TEST_CASE("unsupported report format is a usage error") {
  CHECK_THROWS_AS(report_format_from_name("yaml"), UsageError);
}

TEST_CASE("emit_report surfaces unwritable paths") {
  const CampaignReport report = run_campaign(desk_model(), desk_test_set(), quick_config(), 2);
  CHECK_THROWS_AS(emit_report(report, "/nonexistent-dir/report.jsonl", ReportFormat::Csv), IoError);
}

TEST_CASE("math verification suite passes end to end") {
  for (const CheckResult& check : run_math_suite(1)) {
    INFO(check.name, ": ", check.detail);
    CHECK(check.pass);
  }
}
