#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rolegraph/csv.hpp"
#include "rolegraph/error.hpp"
#include "rolegraph/pipeline.hpp"

using namespace rolegraph;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / ("rolegraph_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig simulated(const fs::path& dir) {
  run_simulate(ScenarioConfig::load(FIXTURE_DIR "/scenario_small.ini"), dir / "sim");
  PipelineConfig cfg;
  cfg.jsonl = {dir / "sim" / "alerts.jsonl"};
  cfg.hostmap = dir / "sim" / "hostmap.txt";
  cfg.origin = parse_time("2016-11-09");
  cfg.training_days = 3;
  cfg.r_max = 4;
  cfg.b_max = 3;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(R"(
[input]
jsonl = a.jsonl, b.jsonl
hostmap = hosts.txt
source = ossec
[window]
origin = 2016-11-09T00:00:00Z
hours = 4
[score]
threshold = 0.1
layer = ip
[run]
seed = 42
)");
  auto cfg = PipelineConfig::parse(in, "/base");
  CHECK(cfg.jsonl == std::vector<fs::path>{"/base/a.jsonl", "/base/b.jsonl"});
  CHECK(cfg.hostmap == fs::path("/base/hosts.txt"));
  CHECK(cfg.source == "ossec");
  CHECK(cfg.origin == 1478649600);
  CHECK(cfg.window_seconds() == 4 * 3600);
  CHECK(cfg.threshold == 0.1);
  CHECK(cfg.layer == "ip");
  CHECK(cfg.seed == 42);

  CHECK_THROWS_AS(cfg.set("window.nonsense", "1"), Error);
  CHECK_THROWS_AS(cfg.set("score.threshold", "abc"), Error);
  cfg.set("score.threshold", "-1");
  CHECK_THROWS_AS(cfg.validate(), Error);
  std::istringstream bad("[input]\nsource = both\n");
  CHECK_THROWS_AS(PipelineConfig::parse(bad).validate(), Error);
  std::istringstream snort("[input]\nsnort = fast.log\n");
  CHECK_THROWS_AS(PipelineConfig::parse(snort).validate(), Error);  // needs snort_year
  CHECK_THROWS_AS(PipelineConfig::load("/nonexistent/pipeline.ini"), Error);
}

TEST_CASE("time parsing") {
  CHECK(parse_time("1478649600") == 1478649600);
  CHECK(parse_time("2016-11-09") == 1478649600);
  CHECK(parse_time("2016-11-09T08:00Z") == 1478649600 + 8 * 3600);
  CHECK(parse_time("2016-11-09T08:00:30") == 1478649600 + 8 * 3600 + 30);
  CHECK_THROWS_AS(parse_time("2016-13-01"), Error);
  CHECK_THROWS_AS(parse_time("yesterday"), Error);
}

TEST_CASE("csv round trip and strictness") {
  std::vector<CsvRow> rows{{"a", "b,c", "say \"hi\""}, {"", "line\nbreak", "x"}};
  std::ostringstream out;
  for (const auto& r : rows) write_csv_row(out, r);
  std::istringstream in(out.str());
  CHECK(read_csv(in) == rows);
  std::istringstream crlf("a,b\r\nc,d\r\n");
  CHECK(read_csv(crlf) == std::vector<CsvRow>{{"a", "b"}, {"c", "d"}});
  std::istringstream open("a,\"b\n");
  CHECK_THROWS_AS(read_csv(open), Error);
  std::istringstream stray("a,\"b\"c\n");
  CHECK_THROWS_AS(read_csv(stray), Error);
}

TEST_CASE("train, save, load, score") {
  Workspace ws("pipeline");
  auto cfg = simulated(ws.dir);
  auto alerts = load_alerts(cfg);
  REQUIRE(!alerts.records.empty());
  CHECK(alerts.skipped == 0);

  auto t1 = run_train(cfg, ws.dir / "m1");
  auto t2 = run_train(cfg, ws.dir / "m2");
  CHECK(t1.num_roles >= 1);
  CHECK(t1.features >= 4);
  for (const char* f : {"F.csv", "schema.txt", "meta.txt", "grid.csv"}) {
    CHECK(slurp(ws.dir / "m1" / f) == slurp(ws.dir / "m2" / f));
  }

  auto bundle = load_model(ws.dir / "m1");
  CHECK(bundle.model.num_roles == t1.num_roles);
  CHECK(static_cast<std::size_t>(bundle.model.F.cols()) == t1.features);
  CHECK(bundle.model.grid.size() == 4 * 3);
  CHECK(bundle.window_seconds == 8 * 3600);

  SUBCASE("scored windows carry one value per schema column") {
    WindowSpec spec{bundle.window_origin, bundle.window_seconds, bundle.model.train_end};
    auto run = score_stream(alerts.records, bundle.model, spec, spec.first_scored_window());
    REQUIRE(!run.windows.empty());
    CHECK(run.windows.front().window == spec.first_scored_window());
    CHECK(run.windows.front().scored);
    for (const auto& w : run.windows) {
      CHECK(w.detail.score >= 0.0);
      CHECK(w.detail.score <= 1.0);
    }
    auto part = window_partition(alerts.records, spec);
    for (const auto& w : part.windows) {
      auto m = apply_schema(build_graph(w.records), bundle.model.schema);
      CHECK(static_cast<std::size_t>(m.values.cols()) == bundle.model.schema.size());
    }
    CHECK_THROWS_AS(score_stream(alerts.records, bundle.model, spec, 9, "colour"), Error);
  }

  SUBCASE("attack window is flagged in the score files") {
    auto s = run_score(cfg, ws.dir / "m1", ws.dir / "score");
    CHECK(s.windows == 9);
    CHECK(std::find(s.flagged.begin(), s.flagged.end(), 12) != s.flagged.end());
    std::ifstream in(ws.dir / "score" / "scores.csv");
    auto rows = read_csv(in);
    CHECK(rows.front() == score_csv_header());
    CHECK(rows.size() == 10);
    for (const auto& r : rows) CHECK(r.size() == score_csv_header().size());
    CHECK(fs::exists(ws.dir / "score" / "anomalies.json"));

    auto r1 = run_report(ws.dir / "score" / "scores.csv", ws.dir / "rep1");
    auto r2 = run_report(ws.dir / "score" / "scores.csv", ws.dir / "rep2");
    CHECK(r1.rows == 9);
    CHECK(r1.flagged == s.flagged.size());
    CHECK(slurp(ws.dir / "rep1" / "summary.txt") == slurp(ws.dir / "rep2" / "summary.txt"));
    CHECK(slurp(ws.dir / "rep1" / "plot.dat") == slurp(ws.dir / "rep2" / "plot.dat"));
  }

  SUBCASE("training windows can be included") {
    auto c = cfg;
    c.include_training = true;
    auto s = run_score(c, ws.dir / "m1", ws.dir / "all");
    CHECK(s.windows == 18);
    CHECK(s.scored == 17);
  }

  SUBCASE("no post-training alerts gives a header-only table") {
    std::ofstream(ws.dir / "early.jsonl") << to_jsonl(alerts.records.front()) << '\n';
    auto c = cfg;
    c.jsonl = {ws.dir / "early.jsonl"};
    auto s = run_score(c, ws.dir / "m1", ws.dir / "empty");
    CHECK(s.windows == 0);
    std::ifstream in(ws.dir / "empty" / "scores.csv");
    CHECK(read_csv(in).size() == 1);
  }

  SUBCASE("tampered models are rejected") {
    fs::copy(ws.dir / "m1", ws.dir / "bad");
    {
      std::ofstream out(ws.dir / "bad" / "schema.txt", std::ios::app);
      out << "\n";
    }
    auto meta = slurp(ws.dir / "bad" / "meta.txt");
    auto pos = meta.find("schema_id=");
    REQUIRE(pos != std::string::npos);
    meta[pos + 10] = meta[pos + 10] == '0' ? '1' : '0';
    std::ofstream(ws.dir / "bad" / "meta.txt", std::ios::binary) << meta;
    try {
      load_model(ws.dir / "bad");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaMismatch);
    }
    CHECK_THROWS_AS(load_model(ws.dir / "missing"), Error);
  }
}

TEST_CASE("report rejects malformed tables") {
  Workspace ws("report");
  std::ofstream(ws.dir / "bad.csv") << "not,a,score,table\n";
  CHECK_THROWS_AS(run_report(ws.dir / "bad.csv", ws.dir / "out"), Error);
  std::string header;
  for (const auto& h : score_csv_header()) header += (header.empty() ? "" : ",") + h;
  std::ofstream(ws.dir / "short.csv") << header << "\n2016-11-09T00:00:00Z,1\n";
  CHECK_THROWS_AS(run_report(ws.dir / "short.csv", ws.dir / "out"), Error);
  std::ofstream(ws.dir / "ok.csv") << header << "\n";
  CHECK(run_report(ws.dir / "ok.csv", ws.dir / "out").rows == 0);
}

TEST_CASE("scoring the training stream raises no flags") {
  // Self-consistency on the full scenario: the model scores the very windows
  // it was trained on, attack and spike switched off.
  auto scenario = ScenarioConfig::load(FIXTURE_DIR "/scenario_apt.ini");
  scenario.attack.enabled = false;
  scenario.spike.enabled = false;
  std::stringstream hm;
  write_host_map(scenario, hm);
  const auto hosts = HostMap::parse(hm);
  std::vector<AlertRecord> records;
  for (const auto& r : generate_scenario(scenario)) records.push_back(normalize_record(r, hosts));

  const auto spec = scenario.window_spec();
  auto trained = train_model(records, spec, {});
  auto run = score_stream(records, trained.bundle.model, spec, 0);
  auto report = detect_anomalies(run.windows, 0.05);
  std::size_t training = 0;
  for (const auto& w : report.windows) {
    if (w.window >= spec.first_scored_window()) continue;
    ++training;
    CHECK(w.score <= 0.05);
  }
  CHECK(training == 20);
}

TEST_CASE("training needs alerts") {
  WindowSpec spec{1478649600, 28800, 1478649600 + 86400};
  CHECK_THROWS_AS(train_model({}, spec, {}), Error);
}
