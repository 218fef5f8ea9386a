#include "zongd/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "zongd/errors.hpp"

namespace zongd {

using ojson = nlohmann::ordered_json;

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "json-lines") return ReportFormat::JsonLines;
  if (name == "csv") return ReportFormat::Csv;
  throw UsageError("unsupported report format: " + name + " (expected json-lines or csv)");
}

std::string report_format_name(ReportFormat f) {
  return f == ReportFormat::JsonLines ? "json-lines" : "csv";
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ojson opt_to_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

ojson config_to_json(const AttackConfig& c) {
  ojson j;
  j["method"] = attack_method_name(c.method);
  j["epsilon"] = c.epsilon;
  j["mu"] = c.mu;
  j["gamma"] = c.gamma;
  j["lambda"] = c.lambda;
  j["kappa"] = c.kappa;
  j["samples_r"] = c.samples_r;
  j["max_iters"] = c.max_iters;
  if (c.max_queries)
    j["max_queries"] = *c.max_queries;
  else
    j["max_queries"] = nullptr;
  j["direction_mode"] = direction_mode_name(c.direction_mode);
  j["seed"] = c.seed;
  return j;
}

AttackConfig config_from_json(const ojson& j) {
  AttackConfig c;
  c.method = attack_method_from_name(j.at("method").get<std::string>());
  c.epsilon = j.at("epsilon").get<double>();
  c.mu = j.at("mu").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.kappa = j.at("kappa").get<double>();
  c.samples_r = j.at("samples_r").get<int>();
  c.max_iters = j.at("max_iters").get<int>();
  if (j.at("max_queries").is_null())
    c.max_queries = std::nullopt;
  else
    c.max_queries = j.at("max_queries").get<uint64_t>();
  c.direction_mode = direction_mode_from_name(j.at("direction_mode").get<std::string>());
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

std::string render_json_lines(const CampaignReport& r) {
  std::string out;
  ojson meta;
  meta["record"] = "meta";
  meta["method"] = r.method;
  meta["seed"] = r.seed;
  meta["requested_images"] = r.requested_images;
  meta["attempted"] = r.attempted;
  meta["successes"] = r.successes;
  meta["short_of_images"] = r.short_of_images;
  meta["success_rate"] = opt_to_json(r.success_rate);
  meta["avg_queries_successful"] = opt_to_json(r.avg_queries_successful);
  meta["median_queries"] = opt_to_json(r.median_queries);
  meta["total_queries"] = r.total_queries;
  meta["config"] = config_to_json(r.config);
  out += meta.dump();
  out += '\n';

  for (const ImageOutcome& o : r.results) {
    ojson line;
    line["record"] = "result";
    line["index"] = o.dataset_index;
    line["label"] = o.label;
    line["success"] = o.result.success;
    line["queries"] = o.result.queries;
    line["iterations"] = o.result.iterations;
    line["final_prediction"] = o.result.final_prediction;
    line["delta"] = o.result.delta;
    line["loss_trace"] = o.result.loss_trace;
    out += line.dump();
    out += '\n';
  }
  for (const CdfPoint& p : r.query_cdf) {
    ojson line;
    line["record"] = "cdf";
    line["queries"] = p.queries;
    line["fraction"] = p.fraction;
    out += line.dump();
    out += '\n';
  }
  return out;
}

CampaignReport parse_json_lines(const std::string& text) {
  CampaignReport r;
  std::istringstream in(text);
  std::string line;
  bool seen_meta = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ojson j = ojson::parse(line, nullptr, true);
    const std::string record = j.at("record").get<std::string>();
    if (record == "meta") {
      seen_meta = true;
      r.method = j.at("method").get<std::string>();
      r.seed = j.at("seed").get<uint64_t>();
      r.requested_images = j.at("requested_images").get<int>();
      r.attempted = j.at("attempted").get<int>();
      r.successes = j.at("successes").get<int>();
      r.short_of_images = j.at("short_of_images").get<bool>();
      r.success_rate = j.at("success_rate").is_null()
                           ? std::nullopt
                           : std::optional<double>(j.at("success_rate").get<double>());
      r.avg_queries_successful =
          j.at("avg_queries_successful").is_null()
              ? std::nullopt
              : std::optional<double>(j.at("avg_queries_successful").get<double>());
      r.median_queries = j.at("median_queries").is_null()
                             ? std::nullopt
                             : std::optional<double>(j.at("median_queries").get<double>());
      r.total_queries = j.at("total_queries").get<uint64_t>();
      r.config = config_from_json(j.at("config"));
    } else if (record == "result") {
      ImageOutcome o;
      o.dataset_index = j.at("index").get<int>();
      o.label = j.at("label").get<int>();
      o.result.success = j.at("success").get<bool>();
      o.result.queries = j.at("queries").get<uint64_t>();
      o.result.iterations = j.at("iterations").get<int>();
      o.result.final_prediction = j.at("final_prediction").get<int>();
      o.result.delta = j.at("delta").get<Vec>();
      o.result.loss_trace = j.at("loss_trace").get<std::vector<double>>();
      r.results.push_back(std::move(o));
    } else if (record == "cdf") {
      r.query_cdf.push_back({j.at("queries").get<uint64_t>(), j.at("fraction").get<double>()});
    } else {
      throw DataError("unknown record type in report: " + record);
    }
  }
  if (!seen_meta) throw DataError("report has no meta record");
  return r;
}

void csv_join(std::string& out, const Vec& values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += fmt_double(values[i]);
  }
}

std::string render_csv(const CampaignReport& r) {
  std::string out;
  out += "meta," + r.method + ',' + std::to_string(r.seed) + ',' + std::to_string(r.requested_images) +
         ',' + std::to_string(r.attempted) + ',' + std::to_string(r.successes) + ',' +
         (r.short_of_images ? "1" : "0") + ',' +
         (r.success_rate ? fmt_double(*r.success_rate) : "null") + ',' +
         (r.avg_queries_successful ? fmt_double(*r.avg_queries_successful) : "null") + ',' +
         (r.median_queries ? fmt_double(*r.median_queries) : "null") + ',' +
         std::to_string(r.total_queries) + '\n';
  const AttackConfig& c = r.config;
  out += "config," + attack_method_name(c.method) + ',' + fmt_double(c.epsilon) + ',' +
         fmt_double(c.mu) + ',' + fmt_double(c.gamma) + ',' + fmt_double(c.lambda) + ',' +
         fmt_double(c.kappa) + ',' + std::to_string(c.samples_r) + ',' + std::to_string(c.max_iters) +
         ',' + (c.max_queries ? std::to_string(*c.max_queries) : "null") + ',' +
         direction_mode_name(c.direction_mode) + ',' + std::to_string(c.seed) + '\n';
  for (const ImageOutcome& o : r.results) {
    out += "result," + std::to_string(o.dataset_index) + ',' + std::to_string(o.label) + ',' +
           (o.result.success ? "1" : "0") + ',' + std::to_string(o.result.queries) + ',' +
           std::to_string(o.result.iterations) + ',' + std::to_string(o.result.final_prediction) + ',';
    csv_join(out, o.result.delta);
    out += ',';
    csv_join(out, o.result.loss_trace);
    out += '\n';
  }
  for (const CdfPoint& p : r.query_cdf)
    out += "cdf," + std::to_string(p.queries) + ',' + fmt_double(p.fraction) + '\n';
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == sep) {
      fields.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_double_field(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw DataError("bad numeric field in report: " + s);
  return v;
}

std::optional<double> parse_opt_field(const std::string& s) {
  if (s == "null") return std::nullopt;
  return parse_double_field(s);
}

Vec parse_joined(const std::string& s) {
  Vec out;
  if (s.empty()) return out;
  for (const std::string& tok : split(s, ';')) out.push_back(parse_double_field(tok));
  return out;
}

CampaignReport parse_csv(const std::string& text) {
  CampaignReport r;
  std::istringstream in(text);
  std::string line;
  bool seen_meta = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f[0] == "meta") {
      if (f.size() != 11) throw DataError("bad meta row in csv report");
      seen_meta = true;
      r.method = f[1];
      r.seed = std::strtoull(f[2].c_str(), nullptr, 10);
      r.requested_images = std::atoi(f[3].c_str());
      r.attempted = std::atoi(f[4].c_str());
      r.successes = std::atoi(f[5].c_str());
      r.short_of_images = f[6] == "1";
      r.success_rate = parse_opt_field(f[7]);
      r.avg_queries_successful = parse_opt_field(f[8]);
      r.median_queries = parse_opt_field(f[9]);
      r.total_queries = std::strtoull(f[10].c_str(), nullptr, 10);
    } else if (f[0] == "config") {
      if (f.size() != 12) throw DataError("bad config row in csv report");
      AttackConfig c;
      c.method = attack_method_from_name(f[1]);
      c.epsilon = parse_double_field(f[2]);
      c.mu = parse_double_field(f[3]);
      c.gamma = parse_double_field(f[4]);
      c.lambda = parse_double_field(f[5]);
      c.kappa = parse_double_field(f[6]);
      c.samples_r = std::atoi(f[7].c_str());
      c.max_iters = std::atoi(f[8].c_str());
      c.max_queries = f[9] == "null" ? std::nullopt
                                     : std::optional<uint64_t>(std::strtoull(f[9].c_str(), nullptr, 10));
      c.direction_mode = direction_mode_from_name(f[10]);
      c.seed = std::strtoull(f[11].c_str(), nullptr, 10);
      r.config = c;
    } else if (f[0] == "result") {
      if (f.size() != 9) throw DataError("bad result row in csv report");
      ImageOutcome o;
      o.dataset_index = std::atoi(f[1].c_str());
      o.label = std::atoi(f[2].c_str());
      o.result.success = f[3] == "1";
      o.result.queries = std::strtoull(f[4].c_str(), nullptr, 10);
      o.result.iterations = std::atoi(f[5].c_str());
      o.result.final_prediction = std::atoi(f[6].c_str());
      o.result.delta = parse_joined(f[7]);
      o.result.loss_trace = parse_joined(f[8]);
      r.results.push_back(std::move(o));
    } else if (f[0] == "cdf") {
      if (f.size() != 3) throw DataError("bad cdf row in csv report");
      r.query_cdf.push_back({std::strtoull(f[1].c_str(), nullptr, 10), parse_double_field(f[2])});
    } else {
      throw DataError("unknown record type in csv report: " + f[0]);
    }
  }
  if (!seen_meta) throw DataError("report has no meta record");
  return r;
}

}  // namespace

std::string render_report(const CampaignReport& report, ReportFormat format) {
  return format == ReportFormat::JsonLines ? render_json_lines(report) : render_csv(report);
}

void emit_report(const CampaignReport& report, const std::string& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw IoError("cannot open report for writing: " + path);
  out << render_report(report, format);
  if (!out.good()) throw IoError("write failed: " + path);
}

CampaignReport parse_report(const std::string& text, ReportFormat format) {
  try {
    return format == ReportFormat::JsonLines ? parse_json_lines(text) : parse_csv(text);
  } catch (const ojson::exception& e) {
    throw DataError(std::string("malformed json-lines report: ") + e.what());
  }
}

CampaignReport read_report(const std::string& path, ReportFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw IoError("cannot open report: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_report(buffer.str(), format);
}

std::string summarize_report(const CampaignReport& report) {
  std::ostringstream out;
  out << "method " << report.method << ", seed " << report.seed << "\n";
  out << "attempted " << report.attempted << " (requested " << report.requested_images << ")";
  if (report.short_of_images) out << " [short of correctly classified images]";
  out << "\n";
  out << "successes " << report.successes;
  if (report.success_rate) out << " (rate " << fmt_double(*report.success_rate) << ")";
  out << "\n";
  out << "avg queries (successful) "
      << (report.avg_queries_successful ? fmt_double(*report.avg_queries_successful) : "n/a") << "\n";
  out << "median queries "
      << (report.median_queries ? fmt_double(*report.median_queries) : "n/a") << "\n";
  out << "total queries " << report.total_queries << "\n";
  return out.str();
}

}  // namespace zongd
