#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rolegraph/ingest.hpp"

namespace rolegraph {

/// An alert shape: every generated alert draws each field uniformly from
/// that field's value pool.
struct AlertTemplate {
  std::string name;
  AlertSource source = AlertSource::Snort;
  double rate = 0.0;  // mean alerts per window (background) or relative weight (attack)
  std::int64_t offset = 0;  // attack phases: windows after the attack start
  std::vector<std::pair<std::string, std::vector<std::string>>> pools;
};

struct AttackSpec {
  bool enabled = false;
  std::int64_t start_window = 0;
  std::size_t total_alerts = 300;
  std::vector<AlertTemplate> phases;

  std::int64_t duration_windows() const;
};

struct SpikeSpec {
  bool enabled = false;
  std::int64_t window = 0;
  int multiplier = 10;
};

struct ScenarioConfig {
  std::int64_t start_utc = 1478649600;  // 2016-11-09T00:00:00Z
  double duration_days = 21.0;
  double window_hours = 8.0;
  double training_days = 7.0;
  std::uint64_t seed = 1;
  std::map<std::string, std::string> hosts;  // hostname -> ip, emitted as a host map
  std::vector<AlertTemplate> background;
  AttackSpec attack;
  SpikeSpec spike;

  std::int64_t window_seconds() const;
  std::int64_t window_count() const;
  std::int64_t training_cutoff() const;
  WindowSpec window_spec() const;

  // Throws Error(Config) for bad rates/sizes and Error(Span) for injections
  // that overlap training or each other.
  void validate() const;

  // INI text: [scenario], [hosts], [pools], [background.NAME], [attack],
  // [attack.NAME], [spike].
  static ScenarioConfig parse(std::istream& in);
  static ScenarioConfig load(const std::string& path);
};

std::vector<AlertRecord> generate_background(const ScenarioConfig& cfg, std::uint64_t seed);
std::vector<AlertRecord> inject_attack(std::vector<AlertRecord> stream, const ScenarioConfig& cfg);
std::vector<AlertRecord> inject_volume_spike(std::vector<AlertRecord> stream,
                                             const ScenarioConfig& cfg);

// Background, then spike, then attack; sorted by timestamp.
std::vector<AlertRecord> generate_scenario(const ScenarioConfig& cfg);

void write_host_map(const ScenarioConfig& cfg, std::ostream& out);

}  // namespace rolegraph
