#include "rolegraph/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "rolegraph/config.hpp"
#include "rolegraph/error.hpp"
#include "rolegraph/nmf.hpp"

namespace rolegraph {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> keys = {"sig_id", "src_ip", "dst_ip", "rule_id", "logfile",
                                             "hostname"};
  return keys;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

AlertTemplate parse_template(const std::string& name, const pt::ptree& section,
                             const std::map<std::string, std::vector<std::string>>& pools,
                             bool attack) {
  AlertTemplate t;
  t.name = name;
  for (const auto& [key, node] : section) {
    const auto value = node.get_value<std::string>();
    if (key == "source") {
      auto src = parse_source(value);
      if (!src) throw Error(ErrorCode::Config, fmt::format("{}: unknown source '{}'", name, value));
      t.source = *src;
    } else if (key == (attack ? "weight" : "rate")) {
      t.rate = parse_double(value, name + "." + key);
    } else if (attack && key == "offset") {
      t.offset = parse_int(value, name + ".offset");
    } else {
      std::vector<std::string> values;
      for (const auto& item : split_list(value)) {
        if (item.size() > 1 && item.front() == '@') {
          auto it = pools.find(item.substr(1));
          if (it == pools.end()) {
            throw Error(ErrorCode::Config, fmt::format("{}: unknown pool '{}'", name, item));
          }
          values.insert(values.end(), it->second.begin(), it->second.end());
        } else {
          values.push_back(item);
        }
      }
      t.pools.emplace_back(canonical_key(key), std::move(values));
    }
  }
  return t;
}

void check_template(const AlertTemplate& t) {
  if (!(t.rate > 0.0) || !std::isfinite(t.rate)) {
    throw Error(ErrorCode::Config, fmt::format("template '{}' needs a positive rate/weight", t.name));
  }
  std::set<std::string> keys;
  for (const auto& [key, values] : t.pools) {
    if (!known_fields().contains(key)) {
      throw Error(ErrorCode::Config, fmt::format("template '{}' uses undeclared field '{}'", t.name, key));
    }
    if (values.empty()) {
      throw Error(ErrorCode::Config, fmt::format("template '{}' has an empty pool for {}", t.name, key));
    }
    keys.insert(key);
  }
  const std::vector<std::string> needed =
      t.source == AlertSource::Snort ? std::vector<std::string>{"sig_id", "src_ip", "dst_ip"}
                                     : std::vector<std::string>{"rule_id", "logfile"};
  for (const auto& k : needed) {
    if (!keys.contains(k)) {
      throw Error(ErrorCode::Config, fmt::format("template '{}' lacks field {}", t.name, k));
    }
  }
}

AlertRecord sample(const AlertTemplate& t, std::int64_t ts, std::mt19937_64& rng) {
  AlertRecord r;
  r.source = t.source;
  r.timestamp = ts;
  for (const auto& [key, values] : t.pools) {
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    r.fields[key] = values[pick(rng)];
  }
  return r;
}

std::vector<AlertRecord> merge_sorted(std::vector<AlertRecord> base, std::vector<AlertRecord> extra) {
  auto by_time = [](const AlertRecord& a, const AlertRecord& b) { return a.timestamp < b.timestamp; };
  std::stable_sort(extra.begin(), extra.end(), by_time);
  std::vector<AlertRecord> out;
  out.reserve(base.size() + extra.size());
  std::merge(std::make_move_iterator(base.begin()), std::make_move_iterator(base.end()),
             std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()),
             std::back_inserter(out), by_time);
  return out;
}

}  // namespace

std::int64_t AttackSpec::duration_windows() const {
  std::int64_t last = 0;
  for (const auto& p : phases) last = std::max(last, p.offset);
  return phases.empty() ? 0 : last + 1;
}

std::int64_t ScenarioConfig::window_seconds() const {
  return static_cast<std::int64_t>(std::llround(window_hours * 3600.0));
}

std::int64_t ScenarioConfig::window_count() const {
  const auto total = static_cast<std::int64_t>(std::llround(duration_days * 86400.0));
  return (total + window_seconds() - 1) / window_seconds();
}

std::int64_t ScenarioConfig::training_cutoff() const {
  return start_utc + static_cast<std::int64_t>(std::llround(training_days * 86400.0));
}

WindowSpec ScenarioConfig::window_spec() const {
  return WindowSpec{start_utc, window_seconds(), training_cutoff()};
}

void ScenarioConfig::validate() const {
  if (!(duration_days > 0.0)) throw Error(ErrorCode::Config, "duration_days must be positive");
  if (!(window_hours > 0.0) || window_seconds() <= 0) {
    throw Error(ErrorCode::Config, "window_hours must be positive");
  }
  if (training_days < 0.0 || training_days > duration_days) {
    throw Error(ErrorCode::Config, "training_days must lie within the scenario");
  }
  if (start_utc <= 0) throw Error(ErrorCode::Config, "start must be after the epoch");
  for (const auto& t : background) check_template(t);

  const auto spec = window_spec();
  const auto count = window_count();
  if (attack.enabled) {
    if (attack.phases.empty()) throw Error(ErrorCode::Config, "attack has no phases");
    for (const auto& p : attack.phases) {
      check_template(p);
      if (p.offset < 0) throw Error(ErrorCode::Config, "attack phase offset must be >= 0");
    }
    if (spec.start_of(attack.start_window) < spec.training_cutoff) {
      throw Error(ErrorCode::Span, "attack starts inside the training period");
    }
    if (attack.start_window + attack.duration_windows() > count) {
      throw Error(ErrorCode::Span, "attack runs past the end of the scenario");
    }
  }
  if (spike.enabled) {
    if (spike.multiplier < 1) throw Error(ErrorCode::Config, "spike multiplier must be >= 1");
    if (spec.start_of(spike.window) < spec.training_cutoff) {
      throw Error(ErrorCode::Span, "volume spike inside the training period");
    }
    if (spike.window >= count) throw Error(ErrorCode::Span, "volume spike past the scenario end");
    if (attack.enabled && spike.window >= attack.start_window &&
        spike.window < attack.start_window + attack.duration_windows()) {
      throw Error(ErrorCode::Span, "volume spike overlaps the attack");
    }
  }
}

ScenarioConfig ScenarioConfig::parse(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  ScenarioConfig cfg;
  std::map<std::string, std::vector<std::string>> pools;
  if (auto p = tree.get_child_optional(pt::ptree::path_type("pools", '/'))) {
    for (const auto& [name, node] : *p) pools[name] = split_list(node.get_value<std::string>());
  }
  for (const auto& [section, body] : tree) {
    auto dot = section.find('.');
    const std::string head = section.substr(0, dot);
    const std::string tail = dot == std::string::npos ? "" : section.substr(dot + 1);
    if (section == "scenario") {
      for (const auto& [key, node] : body) {
        const auto value = node.get_value<std::string>();
        if (key == "start") cfg.start_utc = parse_time(value);
        else if (key == "duration_days") cfg.duration_days = parse_double(value, key);
        else if (key == "window_hours") cfg.window_hours = parse_double(value, key);
        else if (key == "training_days") cfg.training_days = parse_double(value, key);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, key));
        else throw Error(ErrorCode::Config, fmt::format("unknown [scenario] key '{}'", key));
      }
    } else if (section == "hosts") {
      for (const auto& [name, node] : body) cfg.hosts[name] = node.get_value<std::string>();
    } else if (section == "pools") {
      continue;
    } else if (head == "background" && !tail.empty()) {
      cfg.background.push_back(parse_template(tail, body, pools, false));
    } else if (section == "attack") {
      cfg.attack.enabled = true;
      for (const auto& [key, node] : body) {
        const auto value = node.get_value<std::string>();
        if (key == "start_window") cfg.attack.start_window = parse_int(value, key);
        else if (key == "alerts") cfg.attack.total_alerts = static_cast<std::size_t>(parse_int(value, key));
        else if (key == "enabled") cfg.attack.enabled = parse_bool(value, key);
        else throw Error(ErrorCode::Config, fmt::format("unknown [attack] key '{}'", key));
      }
    } else if (head == "attack" && !tail.empty()) {
      cfg.attack.phases.push_back(parse_template(tail, body, pools, true));
    } else if (section == "spike") {
      cfg.spike.enabled = true;
      for (const auto& [key, node] : body) {
        const auto value = node.get_value<std::string>();
        if (key == "window") cfg.spike.window = parse_int(value, key);
        else if (key == "multiplier") cfg.spike.multiplier = static_cast<int>(parse_int(value, key));
        else if (key == "enabled") cfg.spike.enabled = parse_bool(value, key);
        else throw Error(ErrorCode::Config, fmt::format("unknown [spike] key '{}'", key));
      }
    } else {
      throw Error(ErrorCode::Config, fmt::format("unknown section [{}]", section));
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open scenario {}", path));
  return parse(in);
}

std::vector<AlertRecord> generate_background(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<AlertRecord> out;
  if (cfg.background.empty()) return out;
  std::mt19937_64 rng(derive_seed(seed, 0));
  const auto spec = cfg.window_spec();
  const auto end = cfg.start_utc + static_cast<std::int64_t>(std::llround(cfg.duration_days * 86400.0));
  for (std::int64_t w = 0; w < cfg.window_count(); ++w) {
    const auto lo = spec.start_of(w);
    const auto hi = std::min(spec.end_of(w), end);
    std::uniform_int_distribution<std::int64_t> when(lo, hi - 1);
    for (const auto& t : cfg.background) {
      std::poisson_distribution<long> count(t.rate * static_cast<double>(hi - lo) /
                                            static_cast<double>(spec.length));
      const auto k = count(rng);
      for (long i = 0; i < k; ++i) out.push_back(sample(t, when(rng), rng));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AlertRecord& a, const AlertRecord& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::vector<AlertRecord> inject_attack(std::vector<AlertRecord> stream, const ScenarioConfig& cfg) {
  cfg.validate();
  if (!cfg.attack.enabled) return stream;
  const auto& phases = cfg.attack.phases;
  double weight_sum = 0.0;
  for (const auto& p : phases) weight_sum += p.rate;

  // Largest-remainder split of the alert budget across phases.
  std::vector<std::size_t> counts(phases.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double exact = static_cast<double>(cfg.attack.total_alerts) * phases[i].rate / weight_sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < cfg.attack.total_alerts; ++i, ++assigned) {
    ++counts[remainders[i % remainders.size()].second];
  }

  std::mt19937_64 rng(derive_seed(cfg.seed, 1000));
  const auto spec = cfg.window_spec();
  std::vector<AlertRecord> extra;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto w = cfg.attack.start_window + phases[i].offset;
    std::uniform_int_distribution<std::int64_t> when(spec.start_of(w), spec.end_of(w) - 1);
    for (std::size_t k = 0; k < counts[i]; ++k) extra.push_back(sample(phases[i], when(rng), rng));
  }
  return merge_sorted(std::move(stream), std::move(extra));
}

std::vector<AlertRecord> inject_volume_spike(std::vector<AlertRecord> stream,
                                             const ScenarioConfig& cfg) {
  cfg.validate();
  if (!cfg.spike.enabled || cfg.spike.multiplier <= 1) return stream;
  const auto spec = cfg.window_spec();
  std::mt19937_64 rng(derive_seed(cfg.seed, 2000));
  std::uniform_int_distribution<std::int64_t> when(spec.start_of(cfg.spike.window),
                                                   spec.end_of(cfg.spike.window) - 1);
  std::vector<AlertRecord> extra;
  for (const auto& r : stream) {
    if (spec.index_of(r.timestamp) != cfg.spike.window) continue;
    for (int c = 1; c < cfg.spike.multiplier; ++c) {
      AlertRecord copy = r;
      copy.timestamp = when(rng);
      extra.push_back(std::move(copy));
    }
  }
  return merge_sorted(std::move(stream), std::move(extra));
}

std::vector<AlertRecord> generate_scenario(const ScenarioConfig& cfg) {
  auto stream = generate_background(cfg, cfg.seed);
  stream = inject_volume_spike(std::move(stream), cfg);
  return inject_attack(std::move(stream), cfg);
}

void write_host_map(const ScenarioConfig& cfg, std::ostream& out) {
  out << "# hostname ip\n";
  for (const auto& [host, ip] : cfg.hosts) out << host << ' ' << ip << '\n';
}

}  // namespace rolegraph
