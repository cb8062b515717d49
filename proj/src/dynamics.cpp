#include "rolegraph/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "rolegraph/error.hpp"

namespace rolegraph {

std::size_t NodeRegistry::intern(const VertexKey& key) {
  auto [it, inserted] = index_.try_emplace(key, keys_.size());
  if (inserted) {
    keys_.push_back(key);
    first_seen_.emplace_back();
  }
  return it->second;
}

std::optional<std::size_t> NodeRegistry::find(const VertexKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void NodeRegistry::mark_seen(std::size_t index, std::int64_t window) {
  if (!first_seen_[index]) first_seen_[index] = window;
}

std::pair<int, double> max_membership(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() == 0) throw Error(ErrorCode::Dimension, "empty membership row");
  int best = 0;
  for (Eigen::Index a = 1; a < row.size(); ++a) {
    if (row(a) > row(best)) best = static_cast<int>(a);
  }
  return {best, row(best)};
}

std::optional<double> MembershipSeries::prob(std::size_t step, std::size_t node) const {
  const auto& s = steps.at(step);
  return node < s.prob.size() ? s.prob[node] : std::nullopt;
}

std::optional<int> MembershipSeries::role(std::size_t step, std::size_t node) const {
  const auto& s = steps.at(step);
  return node < s.role.size() ? s.role[node] : std::nullopt;
}

void update_series(MembershipSeries& series, std::int64_t window, const Membership& memberships) {
  if (static_cast<Eigen::Index>(memberships.nodes.size()) != memberships.G.rows()) {
    throw Error(ErrorCode::Dimension, "membership rows differ from node count");
  }
  if (!series.steps.empty() && window <= series.steps.back().window) {
    throw Error(ErrorCode::InvalidArgument, "series windows must increase");
  }
  SeriesStep step;
  step.window = window;
  if (!series.steps.empty()) {
    const auto& prev = series.steps.back();
    step.prob = prev.prob;
    step.role = prev.role;
  }
  for (std::size_t i = 0; i < memberships.nodes.size(); ++i) {
    const auto id = series.registry.intern(memberships.nodes[i]);
    if (id >= step.prob.size()) {
      step.prob.resize(id + 1);
      step.role.resize(id + 1);
    }
    auto [role, p] = max_membership(memberships.G.row(static_cast<Eigen::Index>(i)));
    step.prob[id] = p;
    step.role[id] = role;
    series.registry.mark_seen(id, window);
  }
  step.prob.resize(series.registry.size());
  step.role.resize(series.registry.size());
  step.appeared.assign(series.registry.size(), false);
  for (const auto& key : memberships.nodes) step.appeared[*series.registry.find(key)] = true;
  series.steps.push_back(std::move(step));
}

ScoreDetail role_change_score(const MembershipSeries& series, std::size_t step,
                              const NodeFilter& filter) {
  if (step == 0 || step >= series.steps.size()) {
    throw Error(ErrorCode::InvalidArgument, "score needs a step with a predecessor");
  }
  ScoreDetail d;
  double total = 0.0;
  const auto n = series.steps[step].prob.size();
  for (std::size_t node = 0; node < n; ++node) {
    const auto& key = series.registry.key(node);
    if (filter && !filter(key)) continue;
    auto now = series.prob(step, node);
    if (!now) continue;  // null at both times: excluded
    ++d.denominator;
    auto before = series.prob(step - 1, node);
    const double delta = std::abs(*now - before.value_or(0.0));
    auto role_before = series.role(step - 1, node);
    if (role_before && *role_before != *series.role(step, node)) ++d.argmax_flips;
    if (delta > 0.0) {
      total += delta;
      d.contributions.push_back({node, key, delta});
    }
  }
  std::stable_sort(d.contributions.begin(), d.contributions.end(),
                   [](const Contribution& a, const Contribution& b) { return a.delta > b.delta; });
  d.score = d.denominator > 0 ? total / static_cast<double>(d.denominator) : 0.0;
  return d;
}

std::vector<std::int64_t> AnomalyReport::flagged_windows() const {
  std::vector<std::int64_t> out;
  for (const auto& w : windows) {
    if (w.flagged) out.push_back(w.window);
  }
  return out;
}

AnomalyReport detect_anomalies(const std::vector<WindowScore>& scores, double threshold,
                               std::size_t top_k) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  AnomalyReport report;
  report.threshold = threshold;
  for (const auto& s : scores) {
    if (!s.scored) continue;
    AnomalyWindow w;
    w.window = s.window;
    w.start_utc = s.start_utc;
    w.end_utc = s.end_utc;
    w.score = s.detail.score;
    w.flagged = s.detail.score > threshold;
    w.alert_count = s.alert_count;
    const auto k = std::min(top_k, s.detail.contributions.size());
    w.top.assign(s.detail.contributions.begin(), s.detail.contributions.begin() + static_cast<long>(k));
    report.windows.push_back(std::move(w));
  }
  return report;
}

}  // namespace rolegraph
