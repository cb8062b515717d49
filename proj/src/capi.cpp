#include "rolegraph/rolegraph.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "rolegraph/artifact_graph.hpp"
#include "rolegraph/config.hpp"
#include "rolegraph/error.hpp"
#include "rolegraph/ingest.hpp"
#include "rolegraph/model_io.hpp"
#include "rolegraph/pipeline.hpp"
#include "rolegraph/scenario.hpp"

struct rg_config {
  rolegraph::PipelineConfig cfg;
};

struct rg_graph {
  std::vector<rolegraph::AlertRecord> records;
  std::optional<rolegraph::ArtifactGraph> cache;

  const rolegraph::ArtifactGraph& graph() {
    if (!cache) cache = rolegraph::build_graph(records);
    return *cache;
  }
};

struct rg_model {
  rolegraph::ModelBundle bundle;
};

namespace {

thread_local std::string last_error;

rg_status status_of(rolegraph::ErrorCode code) {
  using rolegraph::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return RG_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return RG_ERR_IO;
    case ErrorCode::MalformedLine:
    case ErrorCode::MalformedBlock: return RG_ERR_MALFORMED;
    case ErrorCode::Config: return RG_ERR_CONFIG;
    case ErrorCode::SchemaMismatch: return RG_ERR_SCHEMA_MISMATCH;
    case ErrorCode::Span: return RG_ERR_SPAN;
    case ErrorCode::EmptyGraph: return RG_ERR_EMPTY_GRAPH;
    case ErrorCode::Dimension:
    case ErrorCode::NonNegativity: return RG_ERR_DIMENSION;
  }
  return RG_ERR_INTERNAL;
}

rg_status fail(rg_status s, const char* what) {
  last_error = what;
  return s;
}

template <class F>
rg_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return RG_OK;
  } catch (const rolegraph::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RG_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RG_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(RG_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RG_ERR_INTERNAL, "unknown exception");
  }
}

void need(const void* p, const char* name) {
  if (!p) throw rolegraph::Error(rolegraph::ErrorCode::InvalidArgument, std::string(name) + " is null");
}

}  // namespace

extern "C" {

RG_API const char* rg_status_string(rg_status status) {
  switch (status) {
    case RG_OK: return "ok";
    case RG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RG_ERR_IO: return "i/o error";
    case RG_ERR_MALFORMED: return "malformed input";
    case RG_ERR_CONFIG: return "configuration error";
    case RG_ERR_SCHEMA_MISMATCH: return "schema mismatch";
    case RG_ERR_SPAN: return "span error";
    case RG_ERR_EMPTY_GRAPH: return "empty graph";
    case RG_ERR_DIMENSION: return "dimension error";
    case RG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

RG_API const char* rg_last_error_message(void) { return last_error.c_str(); }

RG_API const char* rg_version(void) { return "0.1.0"; }

RG_API rg_status rg_config_new(rg_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rg_config{};
  });
}

RG_API rg_status rg_config_load(const char* path, rg_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto cfg = rolegraph::PipelineConfig::load(path);
    *out = new rg_config{std::move(cfg)};
  });
}

RG_API rg_status rg_config_set(rg_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    auto copy = cfg->cfg;
    copy.set(key, value);
    copy.validate();
    cfg->cfg = std::move(copy);
  });
}

RG_API void rg_config_free(rg_config* cfg) { delete cfg; }

RG_API rg_status rg_train(const rg_config* cfg, const char* out_dir, rg_train_summary* summary) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out_dir, "out_dir");
    auto s = rolegraph::run_train(cfg->cfg, out_dir);
    if (summary) {
      *summary = rg_train_summary{s.alerts, s.skipped, s.warnings,  s.nodes,   s.edges,
                                  s.total_weight, s.features, s.num_roles, s.num_bits};
    }
  });
}

RG_API rg_status rg_score(const rg_config* cfg, const char* model_dir, const char* out_dir,
                          rg_score_summary* summary) {
  return guarded([&] {
    need(cfg, "cfg");
    need(model_dir, "model_dir");
    need(out_dir, "out_dir");
    auto s = rolegraph::run_score(cfg->cfg, model_dir, out_dir);
    if (summary) *summary = rg_score_summary{s.windows, s.scored, s.flagged.size(), s.max_score};
  });
}

RG_API rg_status rg_report(const char* scores_csv, const char* out_dir, char** text) {
  if (text) *text = nullptr;
  return guarded([&] {
    need(scores_csv, "scores_csv");
    need(out_dir, "out_dir");
    auto s = rolegraph::run_report(scores_csv, out_dir);
    if (text) {
      *text = new char[s.text.size() + 1];
      std::memcpy(*text, s.text.c_str(), s.text.size() + 1);
    }
  });
}

RG_API rg_status rg_simulate(const char* scenario_path, const char* out_dir, int has_seed,
                             uint64_t seed, rg_simulate_summary* summary) {
  return guarded([&] {
    need(scenario_path, "scenario_path");
    need(out_dir, "out_dir");
    auto cfg = rolegraph::ScenarioConfig::load(scenario_path);
    if (has_seed) cfg.seed = seed;
    auto s = rolegraph::run_simulate(cfg, out_dir);
    if (summary) *summary = rg_simulate_summary{s.alerts, s.attack_alerts, s.windows};
  });
}

RG_API void rg_string_free(char* text) { delete[] text; }

RG_API rg_status rg_graph_new(rg_graph** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rg_graph{};
  });
}

RG_API rg_status rg_graph_add_alert(rg_graph* g, const char* const* keys, const char* const* values,
                                    size_t n) {
  return guarded([&] {
    need(g, "graph");
    if (n == 0) throw rolegraph::Error(rolegraph::ErrorCode::InvalidArgument, "alert has no fields");
    need(keys, "keys");
    need(values, "values");
    rolegraph::AlertRecord r;
    r.timestamp = 1;
    for (size_t i = 0; i < n; ++i) {
      need(keys[i], "key");
      need(values[i], "value");
      if (!*keys[i] || !*values[i]) {
        throw rolegraph::Error(rolegraph::ErrorCode::InvalidArgument, "empty field key or value");
      }
      r.fields[rolegraph::canonical_key(keys[i])] = values[i];
    }
    r.source = r.fields.contains("sig_id") ? rolegraph::AlertSource::Snort : rolegraph::AlertSource::Ossec;
    rolegraph::validate(r);
    g->records.push_back(rolegraph::normalize_record(r, rolegraph::HostMap{}));
    g->cache.reset();
  });
}

RG_API rg_status rg_graph_summary_get(rg_graph* g, rg_graph_summary* out) {
  return guarded([&] {
    need(g, "graph");
    need(out, "out");
    auto s = rolegraph::graph_summary(g->graph());
    *out = rg_graph_summary{s.node_count, s.edge_count, s.total_weight, s.per_layer.size()};
  });
}

RG_API rg_status rg_graph_write(rg_graph* g, const char* path, int dot) {
  return guarded([&] {
    need(g, "graph");
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rolegraph::Error(rolegraph::ErrorCode::Io, std::string("cannot write ") + path);
    if (dot) rolegraph::write_dot(g->graph(), out);
    else rolegraph::write_edge_list(g->graph(), out);
  });
}

RG_API void rg_graph_free(rg_graph* g) { delete g; }

RG_API rg_status rg_model_load(const char* dir, rg_model** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = nullptr;
    auto b = rolegraph::load_model(dir);
    *out = new rg_model{std::move(b)};
  });
}

RG_API int rg_model_num_roles(const rg_model* m) { return m ? m->bundle.model.num_roles : 0; }

RG_API int rg_model_num_bits(const rg_model* m) { return m ? m->bundle.model.num_bits : 0; }

RG_API size_t rg_model_num_features(const rg_model* m) { return m ? m->bundle.model.schema.size() : 0; }

RG_API double rg_model_role_value(const rg_model* m, int role, size_t feature) {
  if (!m || role < 0 || role >= m->bundle.model.F.rows() ||
      feature >= static_cast<size_t>(m->bundle.model.F.cols())) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return m->bundle.model.F(role, static_cast<Eigen::Index>(feature));
}

RG_API void rg_model_free(rg_model* m) { delete m; }

}  // extern "C"
