#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zongd/attack.hpp"
#include "zongd/campaign.hpp"
#include "zongd/dataset.hpp"
#include "zongd/errors.hpp"
#include "zongd/model.hpp"
#include "zongd/report.hpp"
#include "zongd/verify.hpp"

namespace {

using namespace zongd;

std::vector<double> parse_grid(const std::string& csv, const char* flag) {
  std::vector<double> values;
  std::string token;
  for (size_t i = 0; i <= csv.size(); ++i) {
    if (i == csv.size() || csv[i] == ',') {
      if (token.empty()) throw UsageError(std::string("empty value in ") + flag);
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0')
        throw UsageError(std::string("bad number '") + token + "' in " + flag);
      values.push_back(v);
      token.clear();
    } else {
      token += csv[i];
    }
  }
  if (values.empty()) throw UsageError(std::string(flag) + " must list at least one value");
  return values;
}

double default_step(AttackMethod method, double epsilon) {
  return (method == AttackMethod::ZoPgd || method == AttackMethod::WbPgd) ? 0.01 * epsilon : 0.05;
}

struct AttackFlags {
  std::string model_path;
  std::string dataset_path;
  std::string method = "zo-ngd";
  std::string eps = "0.2";
  std::string mu = "1";
  std::string gamma = "0.01";
  std::optional<double> lr;
  int samples_r = 40;
  double kappa = 0.0;
  int max_iters = 200;
  uint64_t max_queries = 20000;
  std::string direction_mode = "gaussian";
  uint64_t seed = 1;
  int n_images = 100;
  std::string out;
  std::string format = "json-lines";
};

void add_attack_flags(CLI::App* cmd, AttackFlags& f, bool grids) {
  cmd->add_option("--model", f.model_path, "model weight file")->required();
  cmd->add_option("--dataset", f.dataset_path, "CSV dataset")->required();
  cmd->add_option("--method", f.method, "zo-ngd | zo-pgd | wb-ngd | wb-pgd");
  cmd->add_option("--eps", f.eps, grids ? "L-inf radius (comma list for the grid)" : "L-inf radius");
  cmd->add_option("--mu", f.mu, grids ? "sampling step (comma list for the grid)" : "sampling step");
  cmd->add_option("--gamma", f.gamma, grids ? "damping (comma list for the grid)" : "FIM damping");
  cmd->add_option("--lr", f.lr, "step size (default: 0.05 for ngd, 0.01*eps for pgd)");
  cmd->add_option("--samples-R", f.samples_r, "random directions per iteration");
  cmd->add_option("--kappa", f.kappa, "confidence margin");
  cmd->add_option("--max-iters", f.max_iters, "iteration cap");
  cmd->add_option("--max-queries", f.max_queries, "query budget per image");
  cmd->add_option("--direction-mode", f.direction_mode, "gaussian | unit-sphere");
  cmd->add_option("--seed", f.seed, "campaign seed");
  cmd->add_option("--n-images", f.n_images, "images to attack");
  cmd->add_option("--out", f.out, "report output path");
  cmd->add_option("--format", f.format, "json-lines | csv");
}

AttackConfig config_from_flags(const AttackFlags& f, double eps, double mu, double gamma) {
  AttackConfig config;
  config.method = attack_method_from_name(f.method);
  config.epsilon = eps;
  config.mu = mu;
  config.gamma = gamma;
  config.lambda = f.lr ? *f.lr : default_step(config.method, eps);
  config.kappa = f.kappa;
  config.samples_r = f.samples_r;
  config.max_iters = f.max_iters;
  config.max_queries = f.max_queries;
  config.direction_mode = direction_mode_from_name(f.direction_mode);
  config.seed = f.seed;
  return config;
}

double parse_single(const std::string& value, const char* flag) {
  const auto values = parse_grid(value, flag);
  if (values.size() != 1) throw UsageError(std::string(flag) + " takes a single value here");
  return values[0];
}

int cmd_train(const std::string& dataset_path, const std::string& out_path, uint64_t seed) {
  const auto data = load_dataset(dataset_path);
  TrainConfig config;
  config.seed = seed;
  const TrainResult result = train_mlp(data, config);
  save_model(result.model, out_path);
  std::printf("trained on %zu samples: train acc %.4f, holdout acc %.4f\n", data.size(),
              result.train_accuracy, result.holdout_accuracy);
  std::printf("model written to %s\n", out_path.c_str());
  return 0;
}

int cmd_attack(const AttackFlags& f) {
  const ReportFormat format = report_format_from_name(f.format);
  const MlpModel model = load_model(f.model_path);
  const auto dataset = load_dataset(f.dataset_path);
  const AttackConfig config = config_from_flags(f, parse_single(f.eps, "--eps"),
                                                parse_single(f.mu, "--mu"),
                                                parse_single(f.gamma, "--gamma"));
  const CampaignReport report = run_campaign(model, dataset, config, f.n_images);
  std::fputs(summarize_report(report).c_str(), stdout);
  if (!f.out.empty()) {
    emit_report(report, f.out, format);
    std::printf("report written to %s\n", f.out.c_str());
  }
  return 0;
}

int cmd_ablate(const AttackFlags& f) {
  const MlpModel model = load_model(f.model_path);
  const auto dataset = load_dataset(f.dataset_path);
  const auto mus = parse_grid(f.mu, "--mu");
  const auto epsilons = parse_grid(f.eps, "--eps");
  const auto gammas = parse_grid(f.gamma, "--gamma");
  AttackConfig base = config_from_flags(f, epsilons[0], mus[0], gammas[0]);
  const auto points = run_ablation(model, dataset, base, mus, epsilons, gammas, f.n_images);

  std::string table = "mu,epsilon,gamma,success_rate,avg_queries_successful,median_queries,"
                      "loss_after_2_iters\n";
  const AblationPoint* best = nullptr;
  char buf[256];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%s,%s,%s,%.17g\n", p.mu, p.epsilon, p.gamma,
                  p.report.success_rate ? std::to_string(*p.report.success_rate).c_str() : "null",
                  p.report.avg_queries_successful
                      ? std::to_string(*p.report.avg_queries_successful).c_str()
                      : "null",
                  p.report.median_queries ? std::to_string(*p.report.median_queries).c_str() : "null",
                  p.mean_loss_after_two_iters);
    table += buf;
    if (!best || p.mean_loss_after_two_iters < best->mean_loss_after_two_iters) best = &p;
  }
  std::fputs(table.c_str(), stdout);
  if (best)
    std::printf("best point by loss after 2 iterations: mu=%g eps=%g gamma=%g (loss %.6g)\n",
                best->mu, best->epsilon, best->gamma, best->mean_loss_after_two_iters);
  if (!f.out.empty()) {
    std::FILE* file = std::fopen(f.out.c_str(), "w");
    if (!file) throw IoError("cannot open for writing: " + f.out);
    std::fputs(table.c_str(), file);
    std::fclose(file);
    std::printf("ablation table written to %s\n", f.out.c_str());
  }
  return 0;
}

int cmd_verify(uint64_t seed) {
  bool all_pass = true;
  for (const CheckResult& check : run_math_suite(seed)) {
    std::printf("[%s] %s: %s\n", check.pass ? "PASS" : "FAIL", check.name.c_str(),
                check.detail.c_str());
    all_pass = all_pass && check.pass;
  }
  return all_pass ? 0 : 4;
}

int cmd_report(const std::string& path, const std::string& format, const std::string& out) {
  const ReportFormat fmt = report_format_from_name(format);
  const CampaignReport report = read_report(path, fmt);
  std::fputs(summarize_report(report).c_str(), stdout);
  if (!report.query_cdf.empty()) {
    std::printf("query CDF (successful attacks):\n");
    for (const CdfPoint& p : report.query_cdf)
      std::printf("  %llu,%.6f\n", static_cast<unsigned long long>(p.queries), p.fraction);
  }
  if (!out.empty()) {
    emit_report(report, out, fmt);
    std::printf("report re-emitted to %s\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"query-efficient black-box adversarial attacks via zeroth-order natural gradient descent"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train the desk classifier");
  std::string train_dataset, train_out;
  uint64_t train_seed = 1;
  train->add_option("--dataset", train_dataset, "training CSV")->required();
  train->add_option("--out", train_out, "where to write the model")->required();
  train->add_option("--seed", train_seed, "training seed");

  // attack
  auto* attack = app.add_subcommand("attack", "run an attack campaign");
  AttackFlags attack_flags;
  add_attack_flags(attack, attack_flags, false);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "sweep mu / eps / gamma grids");
  AttackFlags ablate_flags;
  add_attack_flags(ablate, ablate_flags, true);

  // verify
  auto* verify = app.add_subcommand("verify", "run the numeric verification suite");
  uint64_t verify_seed = 1;
  verify->add_option("--seed", verify_seed, "suite seed");

  // report
  auto* report = app.add_subcommand("report", "summarize an emitted report");
  std::string report_path, report_format = "json-lines", report_out;
  report->add_option("path", report_path, "report file")->required();
  report->add_option("--format", report_format, "json-lines | csv");
  report->add_option("--out", report_out, "re-emit the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(train_dataset, train_out, train_seed);
    if (*attack) return cmd_attack(attack_flags);
    if (*ablate) return cmd_ablate(ablate_flags);
    if (*verify) return cmd_verify(verify_seed);
    if (*report) return cmd_report(report_path, report_format, report_out);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
