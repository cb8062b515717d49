#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "rolegraph/artifact_graph.hpp"
#include "rolegraph/error.hpp"
#include "rolegraph/scenario.hpp"

using namespace rolegraph;

namespace {

const char* kSmall = R"(
[scenario]
start = 2016-11-09T00:00:00Z
duration_days = 21
window_hours = 8
training_days = 7
seed = 5

[hosts]
web01 = 10.0.0.80

[pools]
inside = 10.0.0.1, 10.0.0.2, 10.0.0.3

[background.scan]
source = snort
rate = 10
sig_id = 2000001, 2000002
src_ip = 192.0.2.1
dst_ip = @inside

[background.auth]
source = ossec
rate = 4
rule_id = 5503
logfile = /var/log/auth.log
hostname = web01

[attack]
start_window = 40
alerts = 30

[attack.probe]
source = snort
weight = 2
sig_id = 2999999
src_ip = 198.51.100.9
dst_ip = 10.0.0.80

[attack.host]
source = ossec
weight = 1
offset = 1
rule_id = 31103
logfile = access.log
src_ip = 198.51.100.9

[spike]
window = 30
multiplier = 10
)";

ScenarioConfig small() {
  std::istringstream in(kSmall);
  return ScenarioConfig::parse(in);
}

std::size_t count_in(const std::vector<AlertRecord>& s, const WindowSpec& spec, std::int64_t w) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [&](const AlertRecord& r) { return spec.index_of(r.timestamp) == w; }));
}

std::vector<AlertRecord> in_window(const std::vector<AlertRecord>& s, const WindowSpec& spec, std::int64_t w) {
  std::vector<AlertRecord> out;
  for (const auto& r : s) {
    if (spec.index_of(r.timestamp) == w) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("parse reads every section") {
  auto cfg = small();
  CHECK(cfg.start_utc == 1478649600);
  CHECK(cfg.window_count() == 63);
  CHECK(cfg.window_spec().first_scored_window() == 21);
  CHECK(cfg.background.size() == 2);
  CHECK(cfg.background[0].pools.size() == 3);
  auto dst = std::find_if(cfg.background[0].pools.begin(), cfg.background[0].pools.end(),
                          [](const auto& p) { return p.first == "dst_ip"; });
  REQUIRE(dst != cfg.background[0].pools.end());
  CHECK(dst->second.size() == 3);
  CHECK(cfg.attack.enabled);
  CHECK(cfg.attack.phases.size() == 2);
  CHECK(cfg.attack.duration_windows() == 2);
  CHECK(cfg.spike.window == 30);
  CHECK(cfg.hosts.at("web01") == "10.0.0.80");
}

TEST_CASE("background counts follow the rate") {
  // A rate-10 template over 63 windows has mean 630; the average of 30
  // seeds should sit well inside 5%.
  auto cfg = small();
  cfg.background.resize(1);
  double total = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) total += static_cast<double>(generate_background(cfg, seed).size());
  CHECK(std::abs(total / 30.0 - 630.0) < 0.05 * 630.0);
}

TEST_CASE("generation is deterministic and sorted") {
  auto cfg = small();
  auto a = generate_scenario(cfg);
  auto b = generate_scenario(cfg);
  CHECK(a == b);
  CHECK(std::is_sorted(a.begin(), a.end(),
                       [](const AlertRecord& x, const AlertRecord& y) { return x.timestamp < y.timestamp; }));
  auto other = cfg;
  other.seed = 6;
  CHECK(generate_scenario(other) != a);
}

TEST_CASE("no templates gives an empty stream") {
  auto cfg = small();
  cfg.background.clear();
  cfg.attack.enabled = false;
  cfg.spike.enabled = false;
  CHECK(generate_scenario(cfg).empty());
}

TEST_CASE("attack injection") {
  auto cfg = small();
  cfg.spike.enabled = false;
  const auto spec = cfg.window_spec();
  auto background = generate_background(cfg, cfg.seed);
  auto full = inject_attack(background, cfg);
  CHECK(full.size() == background.size() + 30);
  // 2:1 weights split 30 alerts 20/10 across the two phase windows.
  CHECK(count_in(full, spec, 40) - count_in(background, spec, 40) == 20);
  CHECK(count_in(full, spec, 41) - count_in(background, spec, 41) == 10);

  // The attacker appears for the first time in the attack window.
  const VertexKey attacker{"ip", "198.51.100.9"};
  for (std::int64_t w = 0; w < 40; ++w) CHECK_FALSE(build_graph(in_window(full, spec, w)).find(attacker));
  CHECK(build_graph(in_window(full, spec, 40)).find(attacker));

  // Taking the injected alerts back out leaves the background untouched.
  std::vector<AlertRecord> removed;
  std::copy_if(full.begin(), full.end(), std::back_inserter(removed), [&](const AlertRecord& r) {
    auto it = r.fields.find("src_ip");
    return it == r.fields.end() || it->second != attacker.value;
  });
  CHECK(removed == background);
}

TEST_CASE("fixture attack is a tiny fraction of the stream") {
  auto cfg = ScenarioConfig::load(FIXTURE_DIR "/scenario_apt.ini");
  auto off = cfg;
  off.attack.enabled = false;
  auto all = generate_scenario(cfg);
  auto without = generate_scenario(off);
  const auto injected = all.size() - without.size();
  CHECK(injected == cfg.attack.total_alerts);
  CHECK(static_cast<double>(injected) <= 0.001 * static_cast<double>(all.size()));
}

TEST_CASE("volume spike multiplies counts and keeps the graph") {
  auto cfg = small();
  cfg.attack.enabled = false;
  const auto spec = cfg.window_spec();
  auto base = generate_background(cfg, cfg.seed);
  auto spiked = inject_volume_spike(base, cfg);
  const auto before = count_in(base, spec, 30);
  CHECK(count_in(spiked, spec, 30) == 10 * before);
  for (std::int64_t w : {29, 31}) CHECK(count_in(spiked, spec, w) == count_in(base, spec, w));

  auto g0 = build_graph(in_window(base, spec, 30));
  auto g1 = build_graph(in_window(spiked, spec, 30));
  CHECK(g0.vertices() == g1.vertices());
  REQUIRE(g0.edge_count() == g1.edge_count());
  for (std::size_t i = 0; i < g0.edge_count(); ++i) {
    CHECK(g0.edges()[i].u == g1.edges()[i].u);
    CHECK(g0.edges()[i].v == g1.edges()[i].v);
    CHECK(g1.edges()[i].weight == 10 * g0.edges()[i].weight);
  }
}

TEST_CASE("injections must stay out of training and apart") {
  auto cfg = small();
  cfg.spike.window = 5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  try {
    cfg.validate();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Span);
  }
  cfg = small();
  cfg.attack.start_window = 20;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small();
  cfg.attack.start_window = 62;  // second phase would land in window 63
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small();
  cfg.spike.window = 41;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("ini errors") {
  auto parse = [](std::string text) {
    std::istringstream in(text);
    return ScenarioConfig::parse(in);
  };
  CHECK_THROWS_AS(parse("[scenario]\nbogus = 1\n"), Error);
  CHECK_THROWS_AS(parse("[weird]\nx = 1\n"), Error);
  CHECK_THROWS_AS(parse("[background.a]\nsource = snort\nrate = 1\nsig_id = 1\nsrc_ip = a\n"), Error);
  CHECK_THROWS_AS(parse("[background.a]\nsource = snort\nrate = 0\nsig_id = 1\nsrc_ip = a\ndst_ip = b\n"), Error);
  CHECK_THROWS_AS(parse("[background.a]\nsource = ossec\nrate = 1\nrule_id = 1\nlogfile = x\ncolour = red\n"), Error);
  CHECK_THROWS_AS(parse("[background.a]\nsource = ossec\nrate = 1\nrule_id = @missing\nlogfile = x\n"), Error);
  CHECK_THROWS_AS(parse("[scenario]\nwindow_hours = -1\n"), Error);
  CHECK_THROWS_AS(ScenarioConfig::load("/nonexistent/scenario.ini"), Error);
}

TEST_CASE("host map output") {
  std::ostringstream out;
  write_host_map(small(), out);
  std::istringstream in(out.str());
  auto hosts = HostMap::parse(in);
  CHECK(hosts.resolve("web01") == "10.0.0.80");
}
