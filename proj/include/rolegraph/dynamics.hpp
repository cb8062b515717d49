#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rolegraph/artifact_graph.hpp"
#include "rolegraph/roles.hpp"

namespace rolegraph {

/// Append-only set of node identities; indices never change once assigned.
class NodeRegistry {
 public:
  std::size_t intern(const VertexKey& key);
  std::optional<std::size_t> find(const VertexKey& key) const;
  const VertexKey& key(std::size_t index) const { return keys_[index]; }
  std::size_t size() const { return keys_.size(); }

  // Window in which the node first received a membership, or nullopt.
  std::optional<std::int64_t> first_seen(std::size_t index) const { return first_seen_[index]; }
  void mark_seen(std::size_t index, std::int64_t window);

 private:
  std::vector<VertexKey> keys_;
  std::vector<std::optional<std::int64_t>> first_seen_;
  std::map<VertexKey, std::size_t> index_;
};

/// Arg-max role and its probability; ties go to the lowest role id.
std::pair<int, double> max_membership(const Eigen::Ref<const Eigen::RowVectorXd>& row);

struct SeriesStep {
  std::int64_t window = 0;
  // Indexed by registry id; entries past the end are null.
  std::vector<std::optional<double>> prob;
  std::vector<std::optional<int>> role;
  std::vector<bool> appeared;  // node present in this window's graph
};

/// Per-node maximum role-membership probability over scored windows, with
/// forward fill for absent nodes.
struct MembershipSeries {
  NodeRegistry registry;
  std::vector<SeriesStep> steps;

  std::optional<double> prob(std::size_t step, std::size_t node) const;
  std::optional<int> role(std::size_t step, std::size_t node) const;
};

/// Appends window `window`: appeared nodes take their fresh P, registered but
/// absent nodes copy the previous step, new nodes are registered.
void update_series(MembershipSeries& series, std::int64_t window, const Membership& memberships);

struct Contribution {
  std::size_t node = 0;
  VertexKey key;
  double delta = 0.0;
};

struct ScoreDetail {
  double score = 0.0;
  std::size_t denominator = 0;  // nodes with P defined at this step
  std::vector<Contribution> contributions;  // nonzero, sorted descending
  std::size_t argmax_flips = 0;  // auxiliary: nodes whose arg-max role changed
};

using NodeFilter = std::function<bool(const VertexKey&)>;

/// Mean absolute change of P between `step` and `step - 1`. A first
/// appearance contributes P itself. Only nodes accepted by `filter` count.
ScoreDetail role_change_score(const MembershipSeries& series, std::size_t step,
                              const NodeFilter& filter = {});

struct WindowScore {
  std::int64_t window = 0;
  std::int64_t start_utc = 0;
  std::int64_t end_utc = 0;
  std::size_t alert_count = 0;
  bool scored = false;  // the first step has no predecessor
  ScoreDetail detail;
};

struct AnomalyWindow {
  std::int64_t window = 0;
  std::int64_t start_utc = 0;
  std::int64_t end_utc = 0;
  double score = 0.0;
  bool flagged = false;
  std::size_t alert_count = 0;
  std::vector<Contribution> top;
};

struct AnomalyReport {
  double threshold = 0.0;
  std::vector<AnomalyWindow> windows;  // every scored window

  std::vector<std::int64_t> flagged_windows() const;
};

/// Flags scored windows whose score exceeds `threshold` and keeps the
/// `top_k` largest contributions of each for triage.
AnomalyReport detect_anomalies(const std::vector<WindowScore>& scores, double threshold,
                               std::size_t top_k = 5);

}  // namespace rolegraph
