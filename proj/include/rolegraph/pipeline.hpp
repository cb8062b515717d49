#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rolegraph/artifact_graph.hpp"
#include "rolegraph/config.hpp"
#include "rolegraph/dynamics.hpp"
#include "rolegraph/ingest.hpp"
#include "rolegraph/model_io.hpp"
#include "rolegraph/roles.hpp"
#include "rolegraph/scenario.hpp"

namespace rolegraph {

struct LoadedAlerts {
  std::vector<AlertRecord> records;  // normalized, source-filtered, sorted by time
  std::size_t total = 0;             // lines/blocks seen
  std::size_t skipped = 0;           // malformed
  std::size_t filtered = 0;          // dropped by the source filter
  NormalizeStats normalize;
};

// Reads every configured input. Missing files raise Error(Io).
LoadedAlerts load_alerts(const PipelineConfig& cfg);

// Default origin: the earliest record's UTC day.
std::int64_t default_origin(std::span<const AlertRecord> records);

struct TrainOptions {
  int max_depth = 3;
  double prune_tolerance = 0.01;
  SelectOptions select;
  std::uint64_t seed = 1;
};

struct TrainResult {
  ModelBundle bundle;
  ArtifactGraph graph;
  FeatureMatrix features;
  Membership memberships;
  RoleDescription roles;
  std::size_t alerts = 0;
};

// Fuses every record in [spec.origin, spec.training_cutoff) into one graph and
// learns the role model from it. Throws Error(EmptyGraph) without training data.
TrainResult train_model(std::span<const AlertRecord> records, const WindowSpec& spec,
                        const TrainOptions& opts);

struct ScoreRun {
  std::vector<WindowScore> windows;  // one per emitted window, in order
  MembershipSeries series;
};

// Scores every window from `first` to the last occupied one. The window
// before `first` (when it exists) is processed as the unscored baseline.
// `layer` restricts the score to one layer's nodes (empty: all).
ScoreRun score_stream(std::span<const AlertRecord> records, const RoleModel& model,
                      const WindowSpec& spec, std::int64_t first, const std::string& layer = {});

struct TrainSummary {
  std::size_t alerts = 0;
  std::size_t skipped = 0;
  std::size_t warnings = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::int64_t total_weight = 0;
  std::size_t features = 0;
  int num_roles = 0;
  int num_bits = 0;
};

TrainSummary run_train(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

struct ScoreSummary {
  std::size_t windows = 0;
  std::size_t scored = 0;
  std::vector<std::int64_t> flagged;  // window indices
  double max_score = 0.0;
};

ScoreSummary run_score(const PipelineConfig& cfg, const std::filesystem::path& model_dir,
                       const std::filesystem::path& out_dir);

struct ReportSummary {
  std::size_t rows = 0;
  std::size_t flagged = 0;
  std::string text;  // contents of summary.txt
};

// Malformed CSV raises Error(MalformedLine).
ReportSummary run_report(const std::filesystem::path& scores_csv, const std::filesystem::path& out_dir);

struct SimulateSummary {
  std::size_t alerts = 0;
  std::size_t attack_alerts = 0;
  std::int64_t windows = 0;
};

SimulateSummary run_simulate(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// Column names of the score CSV, in order.
const std::vector<std::string>& score_csv_header();

}  // namespace rolegraph
