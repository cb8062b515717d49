#include "rolegraph/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "rolegraph/csv.hpp"
#include "rolegraph/error.hpp"
#include "rolegraph/features.hpp"
#include "rolegraph/graph_properties.hpp"

namespace rolegraph {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open input {}", p.string()));
  return in;
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write {}", p.string()));
  return out;
}

void check_layer(const std::string& layer) {
  static const std::set<std::string> layers = {"ip", "signature", "rule", "logfile"};
  if (!layer.empty() && !layers.contains(layer)) {
    throw Error(ErrorCode::Config, fmt::format("unknown layer '{}'", layer));
  }
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

void write_roles_csv(const RoleDescription& d, std::ostream& out) {
  CsvRow header{"role", "kind"};
  header.insert(header.end(), d.properties.begin(), d.properties.end());
  write_csv_row(out, header);
  for (Eigen::Index r = 0; r < d.E.rows(); ++r) {
    for (auto [kind, m] : {std::pair{"E", &d.E}, std::pair{"ratio", &d.ratio}, std::pair{"display", &d.display}}) {
      CsvRow row{std::to_string(r), kind};
      for (Eigen::Index p = 0; p < m->cols(); ++p) row.push_back(fmt_double((*m)(r, p)));
      write_csv_row(out, row);
    }
  }
  CsvRow single{"all", "E1"};
  for (Eigen::Index p = 0; p < d.E1.size(); ++p) single.push_back(fmt_double(d.E1(p)));
  write_csv_row(out, single);
}

void write_membership_csv(const Membership& m, std::ostream& out) {
  CsvRow header{"layer", "value", "role", "probability"};
  for (Eigen::Index r = 0; r < m.G.cols(); ++r) header.push_back(fmt::format("g{}", r));
  write_csv_row(out, header);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const auto row_g = m.G.row(static_cast<Eigen::Index>(i));
    auto [role, p] = max_membership(row_g);
    CsvRow row{m.nodes[i].layer, m.nodes[i].value, std::to_string(role), fmt_double(p)};
    for (Eigen::Index r = 0; r < row_g.size(); ++r) row.push_back(fmt_double(row_g(r)));
    write_csv_row(out, row);
  }
}

std::string contributions_field(const std::vector<Contribution>& top) {
  std::string s;
  for (const auto& c : top) {
    if (!s.empty()) s += ';';
    s += fmt::format("{}:{}:{:.6g}", c.key.layer, c.key.value, c.delta);
  }
  return s;
}

WindowSpec spec_for(const PipelineConfig& cfg, std::span<const AlertRecord> records) {
  WindowSpec spec;
  spec.length = cfg.window_seconds();
  spec.origin = cfg.origin ? *cfg.origin : default_origin(records);
  spec.training_cutoff =
      cfg.training_cutoff ? *cfg.training_cutoff
                          : spec.origin + static_cast<std::int64_t>(std::llround(cfg.training_days * 86400.0));
  spec.validate();
  return spec;
}

}  // namespace

const std::vector<std::string>& score_csv_header() {
  static const std::vector<std::string> h = {"window_start_utc", "window_end_utc", "alert_count",
                                             "scored",           "score",          "flagged",
                                             "argmax_flips",     "top_contributions"};
  return h;
}

LoadedAlerts load_alerts(const PipelineConfig& cfg) {
  cfg.validate();
  LoadedAlerts out;
  std::vector<AlertRecord> raw;
  auto take = [&](ParseResult r) {
    out.total += r.total;
    out.skipped += r.skipped;
    for (auto& rec : r.records) raw.push_back(std::move(rec));
  };
  for (const auto& p : cfg.snort) {
    auto in = open_input(p);
    take(parse_snort_stream(in, *cfg.snort_year));
  }
  for (const auto& p : cfg.ossec) {
    auto in = open_input(p);
    take(parse_ossec_stream(in));
  }
  for (const auto& p : cfg.jsonl) {
    auto in = open_input(p);
    take(parse_jsonl_stream(in));
  }
  HostMap hosts;
  if (cfg.hostmap) hosts = HostMap::load(cfg.hostmap->string());

  const auto wanted = parse_source(cfg.source);
  out.records.reserve(raw.size());
  for (const auto& r : raw) {
    if (wanted && r.source != *wanted) {
      ++out.filtered;
      continue;
    }
    out.records.push_back(normalize_record(r, hosts, &out.normalize));
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const AlertRecord& a, const AlertRecord& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::int64_t default_origin(std::span<const AlertRecord> records) {
  if (records.empty()) return 0;
  std::int64_t first = records.front().timestamp;
  for (const auto& r : records) first = std::min(first, r.timestamp);
  return first - first % 86400;
}

TrainResult train_model(std::span<const AlertRecord> records, const WindowSpec& spec,
                        const TrainOptions& opts) {
  spec.validate();
  if (spec.training_cutoff - spec.origin < spec.length) {
    throw Error(ErrorCode::Config, "training span must cover at least one window");
  }
  std::vector<AlertRecord> train;
  for (const auto& r : records) {
    if (r.timestamp >= spec.origin && r.timestamp < spec.training_cutoff) train.push_back(r);
  }
  TrainResult res;
  res.alerts = train.size();
  res.graph = build_graph(train);
  if (res.graph.vertex_count() == 0) {
    throw Error(ErrorCode::EmptyGraph, "no alerts inside the training span");
  }
  auto fit = fit_schema(res.graph, opts.max_depth, opts.prune_tolerance);
  auto sel = select_model(fit.matrix.values, opts.select, opts.seed);

  auto& m = res.bundle.model;
  m.num_roles = sel.num_roles;
  m.num_bits = sel.num_bits;
  m.F = sel.F;
  m.schema = fit.schema;
  m.train_start = spec.origin;
  m.train_end = spec.training_cutoff;
  m.seed = opts.seed;
  m.grid = sel.grid;
  m.validate();
  res.bundle.window_origin = spec.origin;
  res.bundle.window_seconds = spec.length;

  res.features = std::move(fit.matrix);
  res.memberships = memberships_fixed_F(res.features, m);
  res.roles = role_descriptions(res.memberships.G, node_properties(res.graph), node_property_names());
  return res;
}

ScoreRun score_stream(std::span<const AlertRecord> records, const RoleModel& model,
                      const WindowSpec& spec, std::int64_t first, const std::string& layer) {
  spec.validate();
  check_layer(layer);
  ScoreRun run;
  if (records.empty()) return run;
  auto part = window_partition(records, spec);
  if (part.windows.empty()) return run;
  const auto last = part.windows.back().index;
  if (last < first) return run;
  const auto base = std::max<std::int64_t>(first - 1, 0);

  NodeFilter filter;
  if (!layer.empty()) filter = [layer](const VertexKey& k) { return k.layer == layer; };

  std::size_t next = 0;
  const std::vector<AlertRecord> none;
  for (std::int64_t w = base; w <= last; ++w) {
    while (next < part.windows.size() && part.windows[next].index < w) ++next;
    const auto& recs = next < part.windows.size() && part.windows[next].index == w
                           ? part.windows[next].records
                           : none;
    auto graph = build_graph(recs);
    auto features = apply_schema(graph, model.schema, &run.series.registry);
    update_series(run.series, w, memberships_fixed_F(features, model));
    if (w < first) continue;

    WindowScore s;
    s.window = w;
    s.start_utc = spec.start_of(w);
    s.end_utc = spec.end_of(w);
    s.alert_count = recs.size();
    if (run.series.steps.size() >= 2) {
      s.scored = true;
      s.detail = role_change_score(run.series, run.series.steps.size() - 1, filter);
    }
    run.windows.push_back(std::move(s));
  }
  return run;
}

TrainSummary run_train(const PipelineConfig& cfg, const fs::path& out_dir) {
  auto alerts = load_alerts(cfg);
  if (alerts.records.empty()) throw Error(ErrorCode::EmptyGraph, "no alerts in the configured inputs");
  const auto spec = spec_for(cfg, alerts.records);

  TrainOptions opts;
  opts.max_depth = cfg.max_depth;
  opts.prune_tolerance = cfg.prune_tolerance;
  opts.select.r_min = cfg.r_min;
  opts.select.r_max = cfg.r_max;
  opts.select.b_min = cfg.b_min;
  opts.select.b_max = cfg.b_max;
  opts.select.nmf.max_iter = cfg.nmf_max_iter;
  opts.select.nmf.tol = cfg.nmf_tol;
  opts.seed = cfg.seed;
  auto res = train_model(alerts.records, spec, opts);
  res.bundle.source = cfg.source;

  save_model(res.bundle, out_dir);
  {
    auto out = open_output(out_dir / "roles.csv");
    write_roles_csv(res.roles, out);
  }
  {
    auto out = open_output(out_dir / "nodes.csv");
    write_membership_csv(res.memberships, out);
  }
  {
    auto out = open_output(out_dir / "features.csv");
    write_feature_csv(res.features, res.bundle.model.schema, out);
  }
  if (cfg.export_graphs) {
    auto out = open_output(out_dir / "train.dot");
    write_dot(res.graph, out);
  }

  const auto gs = graph_summary(res.graph);
  std::size_t before_origin = 0;
  for (const auto& r : alerts.records) before_origin += r.timestamp < spec.origin;
  const auto& m = res.bundle.model;
  auto best = std::find_if(m.grid.begin(), m.grid.end(), [&](const GridPoint& g) {
    return g.roles == m.num_roles && g.bits == m.num_bits;
  });

  TrainSummary s;
  s.alerts = res.alerts;
  s.skipped = alerts.skipped;
  s.warnings = alerts.normalize.warnings();
  s.nodes = gs.node_count;
  s.edges = gs.edge_count;
  s.total_weight = gs.total_weight;
  s.features = m.schema.size();
  s.num_roles = m.num_roles;
  s.num_bits = m.num_bits;

  auto out = open_output(out_dir / "summary.txt");
  out << "inputs_seen=" << alerts.total << '\n'
      << "skipped_malformed=" << alerts.skipped << '\n'
      << "filtered_by_source=" << alerts.filtered << '\n'
      << "dropped_before_origin=" << before_origin << '\n'
      << "warnings=" << s.warnings << '\n'
      << "unresolved_hostnames=" << alerts.normalize.unresolved_hostnames << '\n'
      << "hostname_collisions=" << alerts.normalize.collisions << '\n'
      << "training_alerts=" << s.alerts << '\n'
      << "training_span=" << format_utc(spec.origin) << '/' << format_utc(spec.training_cutoff) << '\n'
      << "nodes=" << gs.node_count << '\n'
      << "edges=" << gs.edge_count << '\n'
      << "total_weight=" << gs.total_weight << '\n';
  for (const auto& [layer, n] : gs.per_layer) out << "layer_" << layer << '=' << n << '\n';
  out << "features=" << s.features << '\n'
      << "num_roles=" << s.num_roles << '\n'
      << "num_bits=" << s.num_bits << '\n';
  if (best != m.grid.end()) out << "description_length=" << fmt_double(best->total) << '\n';
  return s;
}

ScoreSummary run_score(const PipelineConfig& cfg, const fs::path& model_dir, const fs::path& out_dir) {
  check_layer(cfg.layer);
  const auto bundle = load_model(model_dir);
  auto alerts = load_alerts(cfg);

  WindowSpec spec;
  spec.origin = cfg.origin ? *cfg.origin : bundle.window_origin;
  spec.length = cfg.window_seconds();
  spec.training_cutoff = std::max(bundle.model.train_end, spec.origin);
  spec.validate();
  const auto first = cfg.include_training ? std::int64_t{0} : spec.first_scored_window();
  auto run = score_stream(alerts.records, bundle.model, spec, first, cfg.layer);
  const auto report = detect_anomalies(run.windows, cfg.threshold, cfg.top_k);

  fs::create_directories(out_dir);
  ScoreSummary summary;
  {
    auto out = open_output(out_dir / "scores.csv");
    write_csv_row(out, score_csv_header());
    for (const auto& w : run.windows) {
      const bool flagged = w.scored && w.detail.score > cfg.threshold;
      const auto k = std::min(cfg.top_k, w.detail.contributions.size());
      write_csv_row(out, {format_utc(w.start_utc), format_utc(w.end_utc), std::to_string(w.alert_count),
                          w.scored ? "1" : "0", fmt_double(w.detail.score), flagged ? "1" : "0",
                          std::to_string(w.detail.argmax_flips),
                          contributions_field({w.detail.contributions.begin(),
                                               w.detail.contributions.begin() + static_cast<long>(k)})});
      ++summary.windows;
      summary.scored += w.scored;
      summary.max_score = std::max(summary.max_score, w.detail.score);
    }
  }

  nlohmann::ordered_json j;
  j["threshold"] = cfg.threshold;
  j["layer"] = cfg.layer.empty() ? "all" : cfg.layer;
  j["source"] = cfg.source;
  j["windows_scored"] = summary.scored;
  j["flagged"] = nlohmann::ordered_json::array();
  for (const auto& w : report.windows) {
    if (!w.flagged) continue;
    summary.flagged.push_back(w.window);
    nlohmann::ordered_json entry;
    entry["window"] = w.window;
    entry["start"] = format_utc(w.start_utc);
    entry["end"] = format_utc(w.end_utc);
    entry["score"] = w.score;
    entry["alert_count"] = w.alert_count;
    entry["top"] = nlohmann::ordered_json::array();
    for (const auto& c : w.top) {
      entry["top"].push_back({{"layer", c.key.layer}, {"value", c.key.value}, {"delta", c.delta}});
    }
    j["flagged"].push_back(std::move(entry));
  }
  {
    auto out = open_output(out_dir / "anomalies.json");
    out << j.dump(2) << '\n';
  }

  if (cfg.export_graphs || cfg.describe_windows) {
    auto part = window_partition(alerts.records, spec);
    for (const auto& w : part.windows) {
      if (w.index < first || w.records.empty()) continue;
      auto g = build_graph(w.records);
      if (cfg.export_graphs) {
        auto out = open_output(out_dir / fmt::format("window_{:04d}.dot", w.index));
        write_dot(g, out);
      }
      if (cfg.describe_windows) {
        auto mem = memberships_fixed_F(apply_schema(g, bundle.model.schema), bundle.model);
        auto d = role_descriptions(mem.G, node_properties(g), node_property_names());
        auto out = open_output(out_dir / fmt::format("roles_{:04d}.csv", w.index));
        write_roles_csv(d, out);
      }
    }
  }
  return summary;
}

ReportSummary run_report(const fs::path& scores_csv, const fs::path& out_dir) {
  std::vector<CsvRow> rows;
  {
    auto in = open_input(scores_csv);
    rows = read_csv(in);
  }
  const auto& header = score_csv_header();
  if (rows.empty() || rows.front() != header) {
    throw Error(ErrorCode::MalformedLine, "score CSV header is missing or unexpected");
  }
  struct Row {
    std::int64_t start, end;
    std::size_t alerts;
    bool scored, flagged;
    double score;
    std::string start_text, end_text;
  };
  std::vector<Row> data;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != header.size()) {
      throw Error(ErrorCode::MalformedLine, fmt::format("row {} has {} fields, expected {}", i + 1,
                                                        r.size(), header.size()));
    }
    try {
      Row row{parse_time(r[0]), parse_time(r[1]), static_cast<std::size_t>(parse_int(r[2], "alert_count")),
              parse_bool(r[3], "scored"), parse_bool(r[5], "flagged"), parse_double(r[4], "score"),
              r[0], r[1]};
      data.push_back(std::move(row));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedLine, fmt::format("row {}: {}", i + 1, e.what()));
    }
  }

  fs::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "plot.dat");
    out << "# index window_start_epoch score alert_count flagged\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      out << fmt::format("{} {} {:.17g} {} {}\n", i, data[i].start, data[i].score, data[i].alerts,
                         data[i].flagged ? 1 : 0);
    }
  }

  ReportSummary s;
  s.rows = data.size();
  std::string text = fmt::format("windows: {}\n", data.size());
  std::size_t scored = 0;
  double peak = 0.0;
  for (const auto& d : data) {
    scored += d.scored;
    peak = std::max(peak, d.score);
    s.flagged += d.flagged;
  }
  text += fmt::format("scored: {}\nflagged: {}\nmax_score: {:.6g}\n", scored, s.flagged, peak);
  if (s.flagged > 0) text += "\nflagged windows:\n";
  for (const auto& d : data) {
    if (d.flagged) text += fmt::format("  {} -- {}  score {:.6f}  alerts {}\n", d.start_text, d.end_text, d.score, d.alerts);
  }
  {
    auto out = open_output(out_dir / "summary.txt");
    out << text;
  }
  s.text = std::move(text);
  return s;
}

SimulateSummary run_simulate(const ScenarioConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const auto background = generate_background(cfg, cfg.seed);
  const auto spiked = inject_volume_spike(background, cfg);
  const auto stream = inject_attack(spiked, cfg);

  fs::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "alerts.jsonl");
    for (const auto& r : stream) out << to_jsonl(r) << '\n';
  }
  {
    auto out = open_output(out_dir / "hostmap.txt");
    write_host_map(cfg, out);
  }
  SimulateSummary s;
  s.alerts = stream.size();
  s.attack_alerts = stream.size() - spiked.size();
  s.windows = cfg.window_count();

  auto out = open_output(out_dir / "truth.txt");
  out << "start=" << format_utc(cfg.start_utc) << '\n'
      << "window_seconds=" << cfg.window_seconds() << '\n'
      << "windows=" << s.windows << '\n'
      << "training_cutoff=" << format_utc(cfg.training_cutoff()) << '\n'
      << "alerts=" << s.alerts << '\n'
      << "attack_alerts=" << s.attack_alerts << '\n';
  if (cfg.attack.enabled) {
    std::set<std::int64_t> windows;
    for (const auto& p : cfg.attack.phases) windows.insert(cfg.attack.start_window + p.offset);
    out << "attack_windows=";
    bool first = true;
    for (auto w : windows) {
      out << (first ? "" : ",") << w;
      first = false;
    }
    out << '\n';
  }
  if (cfg.spike.enabled) out << "spike_window=" << cfg.spike.window << '\n';
  return s;
}

}  // namespace rolegraph
