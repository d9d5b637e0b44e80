#include "fgl/cli/cli.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "CLI11.hpp"

#include "fgl/cli/config_json.h"
#include "fgl/common/error.h"
#include "fgl/common/log.h"

namespace fgl {
namespace {

using nlohmann::json;

json OptionalJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json MetricsJson(const Metrics& m) {
  if (m.regression) return {{"mse", m.reg.mse}, {"rmse", m.reg.rmse}};
  return {{"accuracy", m.cls.accuracy},
          {"precision", m.cls.precision},
          {"recall", m.cls.recall},
          {"f1", m.cls.f1}};
}

json RoundJson(const RoundRecord& r) {
  return {{"round", r.round},
          {"sampled_clients", r.sampled},
          {"val", r.val ? MetricsJson(*r.val) : json(nullptr)},
          {"test", MetricsJson(r.test)},
          {"uplink_bytes", r.uplink_bytes},
          {"downlink_bytes", r.downlink_bytes},
          {"wall_ms", r.wall_ms}};
}

json RoundsJson(const std::vector<RoundRecord>& rounds) {
  json out = json::array();
  for (const auto& r : rounds) out.push_back(RoundJson(r));
  return out;
}

json DpJson(const DpSummary& dp, const DpConfig& cfg) {
  json clients = json::array();
  for (const auto& c : dp.clients) {
    clients.push_back({{"client", c.client},
                       {"d_max", c.d_max},
                       {"sigma", c.sigma},
                       {"sensitivity", c.sensitivity},
                       {"releases", c.releases},
                       {"epsilon", OptionalJson(c.epsilon)}});
  }
  return {{"epsilon_target", cfg.epsilon},
          {"delta", cfg.delta},
          {"epsilon_achieved", OptionalJson(dp.epsilon_max)},
          {"clients", clients}};
}

std::string Timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

void WriteJson(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

json ReadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

json PartitionJson(const ExperimentConfig& cfg, const FederatedData& data) {
  return {{"scenario", ScenarioName(cfg.scenario)},
          {"strategy", StrategyName(cfg.partition.strategy)},
          {"num_clients", data.assignment.num_clients},
          {"owner", data.assignment.owner},
          {"sizes", data.assignment.Sizes()},
          {"dropped_edges", data.stats.dropped_edges}};
}

int ReportError(const Error& e, std::ostream& err) {
  err << "error_code=" << ErrorCodeName(e.code()) << '\n' << e.what() << '\n';
  return ErrorExitStatus(e.code());
}

struct CommandArgs {
  std::string config;
  std::string out = ".";
  int workers = 1;
  uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> reports;
};

ExperimentConfig LoadConfig(const CommandArgs& a) {
  ExperimentConfig cfg = ParseConfigFile(a.config);
  if (a.seed_given) cfg.seed = a.seed;
  return cfg;
}

std::filesystem::path OutDir(const CommandArgs& a) {
  std::filesystem::path dir(a.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

int CmdPartition(const CommandArgs& a, bool write_partition, std::ostream& out) {
  const ExperimentConfig cfg = LoadConfig(a);
  const FederatedData data = PrepareFederatedData(cfg, LoadData(cfg));
  const auto dir = OutDir(a);
  if (write_partition) {
    WriteJson(dir / "partition.json", PartitionJson(cfg, data));
    out << (dir / "partition.json").string() << '\n';
  }
  WriteJson(dir / "stats.json", StatsToJson(data.stats));
  out << (dir / "stats.json").string() << '\n';
  return 0;
}

int CmdRun(const CommandArgs& a, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = LoadConfig(a);
  const FederatedData data = PrepareFederatedData(cfg, LoadData(cfg));
  RunOptions options;
  options.workers = a.workers;
  const RunReport report = RunExperiment(cfg, data, options);
  const auto path = OutDir(a) / "report.json";
  WriteJson(path, ReportToJson(cfg, data, report));
  out << path.string() << '\n';
  if (report.aborted) {
    return ReportError(Error(report.aborted->code, report.aborted->message), err);
  }
  return 0;
}

int CmdReport(const CommandArgs& a, std::ostream& out) {
  std::vector<json> reports;
  for (const auto& p : a.reports) reports.push_back(ReadJson(p));
  out << ReportTable(reports);
  return 0;
}

std::string Csv(std::string field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

}  // namespace

json StatsToJson(const HeterogeneityReport& stats) {
  json kl = json::array();
  for (size_t i = 0; i < stats.feature_kl.rows(); ++i) {
    json row = json::array();
    for (size_t j = 0; j < stats.feature_kl.cols(); ++j) row.push_back(stats.feature_kl(i, j));
    kl.push_back(row);
  }
  json edge = json::array(), node = json::array(), topo = json::array();
  for (const auto& h : stats.edge_homophily) edge.push_back(OptionalJson(h));
  for (const auto& h : stats.node_homophily) node.push_back(OptionalJson(h));
  for (const auto& t : stats.topology) {
    topo.push_back({{"degree_mean", t.degree_mean},
                    {"degree_std", t.degree_std},
                    {"degree_max", t.degree_max},
                    {"centrality_mean", t.centrality_mean},
                    {"largest_component_fraction", t.largest_component_fraction}});
  }
  return {{"num_clients", stats.label_histograms.size()},
          {"label_histograms", stats.label_histograms},
          {"feature_kl", kl},
          {"edge_homophily", edge},
          {"node_homophily", node},
          {"topology", topo},
          {"dropped_edges", stats.dropped_edges}};
}

json ReportToJson(const ExperimentConfig& cfg, const FederatedData& data,
                  const RunReport& report) {
  json repeats = json::array();
  int64_t up = 0, down = 0;
  double wall = 0.0;
  for (const auto& r : report.repeats) {
    json rep = {{"repeat", r.repeat},
                {"seed", r.seed},
                {"best_round", r.best_round},
                {"best_test", MetricsJson(r.best_test)},
                {"uplink_bytes", r.uplink_bytes},
                {"downlink_bytes", r.downlink_bytes},
                {"rounds", RoundsJson(r.rounds)},
                {"dp", r.dp ? DpJson(*r.dp, *cfg.dp) : json(nullptr)}};
    repeats.push_back(std::move(rep));
    up += r.uplink_bytes;
    down += r.downlink_bytes;
    for (const auto& rec : r.rounds) wall += rec.wall_ms;
  }
  std::vector<int64_t> train_sizes;
  for (const auto& d : data.clients) train_sizes.push_back(static_cast<int64_t>(d.train.size()));

  json doc = {
      {"environment", {{"version", kVersion}, {"timestamp", Timestamp()}}},
      {"config", SerializeConfig(cfg)},
      {"metric", data.regression ? "mse" : "accuracy"},
      {"data",
       {{"num_clients", data.assignment.num_clients},
        {"client_sizes", data.assignment.Sizes()},
        {"train_samples", train_sizes},
        {"d_max", data.d_max},
        {"edge_shortfall", data.edge_shortfall}}},
      {"stats", StatsToJson(data.stats)},
      {"repeats", repeats},
      {"communication",
       {{"uplink_bytes", up}, {"downlink_bytes", down}, {"total_bytes", up + down}}},
      {"wall_ms", wall},
  };
  if (report.summary) {
    json best_rounds = json::array();
    for (const auto& r : report.repeats) best_rounds.push_back(r.best_round);
    doc["summary"] = {{"metric", report.summary->metric},
                      {"mean", report.summary->mean},
                      {"std", report.summary->std},
                      {"completed_repeats", report.summary->completed},
                      {"best_rounds", best_rounds}};
  } else {
    doc["summary"] = nullptr;
  }
  if (report.aborted) {
    doc["aborted"] = {{"error_code", ErrorCodeName(report.aborted->code)},
                      {"message", report.aborted->message},
                      {"repeat", report.aborted->repeat},
                      {"rounds", RoundsJson(report.aborted->partial_rounds)}};
  } else {
    doc["aborted"] = nullptr;
  }
  return doc;
}

json StripVolatile(const json& report) {
  if (report.is_object()) {
    json out = json::object();
    for (auto it = report.begin(); it != report.end(); ++it) {
      if (it.key() == "timestamp" || it.key() == "wall_ms") continue;
      out[it.key()] = StripVolatile(it.value());
    }
    return out;
  }
  if (report.is_array()) {
    json out = json::array();
    for (const auto& v : report) out.push_back(StripVolatile(v));
    return out;
  }
  return report;
}

std::string ReportTable(const std::vector<json>& reports) {
  struct Row {
    std::string algorithm, dataset, partition;
    bool aborted = false;
    double mean = 0.0, std = 0.0, wall = 0.0;
    int64_t up = 0, down = 0;
  };
  std::string metric;
  std::vector<Row> rows;
  for (size_t i = 0; i < reports.size(); ++i) {
    const json& r = reports[i];
    try {
      const std::string m = r.at("metric").get<std::string>();
      if (metric.empty()) metric = m;
      if (m != metric) {
        throw Error(ErrorCode::kComparison, "report " + std::to_string(i + 1) + " uses metric " +
                                                m + ", report 1 uses " + metric);
      }
      const json& cfg = r.at("config");
      Row row;
      row.algorithm = cfg.at("algorithm").get<std::string>();
      row.dataset = cfg.at("dataset").at("name").get<std::string>();
      if (row.dataset.empty() && !cfg.at("dataset").at("paths").empty()) {
        row.dataset = cfg.at("dataset").at("paths").at(0).get<std::string>();
      }
      row.partition = cfg.at("partition").at("strategy").get<std::string>();
      row.aborted = !r.at("aborted").is_null();
      if (!r.at("summary").is_null()) {
        row.mean = r.at("summary").at("mean").get<double>();
        row.std = r.at("summary").at("std").get<double>();
      } else {
        row.aborted = true;
      }
      row.up = r.at("communication").at("uplink_bytes").get<int64_t>();
      row.down = r.at("communication").at("downlink_bytes").get<int64_t>();
      row.wall = r.value("wall_ms", 0.0);
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, "report " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  const bool lower_better = metric == "mse";
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    if (a.aborted != b.aborted) return b.aborted;
    if (a.aborted) return false;
    return lower_better ? a.mean < b.mean : a.mean > b.mean;
  });
  std::string out = "algorithm,dataset,partition,metric,mean,std,uplink_bytes,downlink_bytes,"
                    "wall_ms,status\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{:.1f},{}\n", Csv(r.algorithm), Csv(r.dataset),
                       Csv(r.partition), metric,
                       r.aborted && r.mean == 0.0 ? "" : fmt::format("{:.6f}", r.mean),
                       r.aborted && r.std == 0.0 ? "" : fmt::format("{:.6f}", r.std), r.up,
                       r.down, r.wall, r.aborted ? "ABORTED" : "OK");
  }
  return out;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  InitLogging();
  CLI::App app{"Federated graph learning simulator", "fgl"};
  app.require_subcommand(1);
  CommandArgs a;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", a.config, "Experiment config (JSON)")->required();
    sub->add_option("--out", a.out, "Output directory");
    sub->add_option("--seed", a.seed, "Master seed, overrides the config");
  };
  CLI::App* partition = app.add_subcommand("partition", "Partition a dataset and write stats");
  common(partition);
  CLI::App* stats = app.add_subcommand("stats", "Write heterogeneity statistics");
  common(stats);
  CLI::App* run = app.add_subcommand("run", "Run an experiment and write report.json");
  common(run);
  run->add_option("--workers", a.workers, "Clients trained in parallel")
      ->check(CLI::PositiveNumber);
  CLI::App* report = app.add_subcommand("report", "Summarise run reports as CSV");
  report->add_option("reports", a.reports, "report.json files")->required();

  std::vector<const char*> argv{"fgl"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return ReportError(Error(ErrorCode::kConfig, e.what()), err);
  }
  for (CLI::App* sub : {partition, stats, run}) {
    if (sub->parsed() && sub->count("--seed") > 0) a.seed_given = true;
  }
  try {
    if (partition->parsed()) return CmdPartition(a, true, out);
    if (stats->parsed()) return CmdPartition(a, false, out);
    if (run->parsed()) return CmdRun(a, out, err);
    return CmdReport(a, out);
  } catch (const Error& e) {
    return ReportError(e, err);
  }
}

}  // namespace fgl
