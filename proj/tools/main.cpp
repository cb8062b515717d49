// Command-line front end. Talks to the library only through rolegraph.h.
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rolegraph/rolegraph.h"

namespace {

int report_failure(rg_status s) {
  std::fprintf(stderr, "rolegraph: %s: %s\n", rg_status_string(s), rg_last_error_message());
  return static_cast<int>(s);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Overrides {
  std::optional<double> window_hours;
  std::optional<double> threshold;
  std::optional<std::string> layer;
  std::optional<std::string> source;
  std::optional<std::uint64_t> seed;
};

rg_status make_config(const std::string& path, const Overrides& o, rg_config** out) {
  rg_status s = path.empty() ? rg_config_new(out) : rg_config_load(path.c_str(), out);
  if (s != RG_OK) return s;
  std::vector<std::pair<std::string, std::string>> sets;
  if (o.window_hours) sets.emplace_back("window.hours", num(*o.window_hours));
  if (o.threshold) sets.emplace_back("score.threshold", num(*o.threshold));
  if (o.layer) sets.emplace_back("score.layer", *o.layer);
  if (o.source) sets.emplace_back("input.source", *o.source);
  if (o.seed) sets.emplace_back("run.seed", std::to_string(*o.seed));
  for (const auto& [k, v] : sets) {
    s = rg_config_set(*out, k.c_str(), v.c_str());
    if (s != RG_OK) {
      rg_config_free(*out);
      *out = nullptr;
      return s;
    }
  }
  return RG_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IDS alert fusion and role-change anomaly detection"};
  app.set_version_flag("--version", std::string(rg_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string model_dir;
  std::string scores_csv;
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Pipeline config (INI)")->check(CLI::ExistingFile);
    sub->add_option("--window-hours", o.window_hours, "Window length in hours (default 8)");
    sub->add_option("--source", o.source, "Restrict input to one IDS: all, snort or ossec");
    sub->add_option("--seed", o.seed, "Master random seed");
    sub->add_option("--out", out_dir, "Output directory");
  };

  auto* train = app.add_subcommand("train", "Learn role definitions from the training span");
  add_common(train);

  auto* score = app.add_subcommand("score", "Score post-training windows against a model");
  add_common(score);
  score->add_option("--model", model_dir, "Model bundle directory")->required();
  score->add_option("--threshold", o.threshold, "Anomaly threshold on the role-change score (default 0.05)");
  score->add_option("--layer", o.layer, "Only score nodes of this layer (ip, signature, rule, logfile)");

  auto* report = app.add_subcommand("report", "Plot data and a text summary from a score CSV");
  report->add_option("scores", scores_csv, "scores.csv written by 'score'")->required();
  report->add_option("--out", out_dir, "Output directory");

  std::string scenario_path;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic alert stream");
  simulate->add_option("--config", scenario_path, "Scenario config (INI)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", o.seed, "Override the scenario seed");
  simulate->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  if (*train || *score) {
    rg_config* cfg = nullptr;
    rg_status s = make_config(config_path, o, &cfg);
    if (s != RG_OK) return report_failure(s);
    if (*train) {
      rg_train_summary t{};
      s = rg_train(cfg, out_dir.c_str(), &t);
      if (s == RG_OK) {
        std::printf("training alerts %zu (skipped %zu, warnings %zu)\n", t.alerts, t.skipped, t.warnings);
        std::printf("graph: %zu nodes, %zu edges, total weight %lld\n", t.nodes, t.edges,
                    static_cast<long long>(t.total_weight));
        std::printf("features %zu, roles %d, bits %d\n", t.features, t.num_roles, t.num_bits);
        std::printf("model written to %s\n", out_dir.c_str());
      }
    } else {
      rg_score_summary r{};
      s = rg_score(cfg, model_dir.c_str(), out_dir.c_str(), &r);
      if (s == RG_OK) {
        std::printf("windows %zu, scored %zu, flagged %zu, max score %.6f\n", r.windows, r.scored,
                    r.flagged, r.max_score);
        std::printf("scores written to %s/scores.csv\n", out_dir.c_str());
      }
    }
    rg_config_free(cfg);
    return s == RG_OK ? 0 : report_failure(s);
  }

  if (*report) {
    char* text = nullptr;
    rg_status s = rg_report(scores_csv.c_str(), out_dir.c_str(), &text);
    if (s != RG_OK) return report_failure(s);
    std::fputs(text, stdout);
    rg_string_free(text);
    return 0;
  }

  rg_simulate_summary sim{};
  rg_status s = rg_simulate(scenario_path.c_str(), out_dir.c_str(), o.seed.has_value(),
                            o.seed.value_or(0), &sim);
  if (s != RG_OK) return report_failure(s);
  std::printf("%zu alerts (%zu attack) over %lld windows written to %s/alerts.jsonl\n", sim.alerts,
              sim.attack_alerts, static_cast<long long>(sim.windows), out_dir.c_str());
  return 0;
}
