#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rolegraph {

// Value parsers shared by the INI readers. `what` names the key in errors.
double parse_double(const std::string& text, const std::string& what);
std::int64_t parse_int(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
// Integer epoch seconds, or "YYYY-MM-DD[THH:MM[:SS]][Z]" in UTC.
std::int64_t parse_time(const std::string& text);

struct PipelineConfig {
  // [input]
  std::vector<std::filesystem::path> snort;
  std::vector<std::filesystem::path> ossec;
  std::vector<std::filesystem::path> jsonl;
  std::optional<std::filesystem::path> hostmap;
  std::optional<int> snort_year;
  std::string source = "all";  // all | snort | ossec

  // [window]
  std::optional<std::int64_t> origin;  // default: earliest record, floored to a UTC day
  double window_hours = 8.0;
  double training_days = 7.0;
  std::optional<std::int64_t> training_cutoff;  // overrides training_days

  // [features]
  int max_depth = 3;
  double prune_tolerance = 0.01;

  // [roles]
  int r_min = 1;
  int r_max = 10;
  int b_min = 1;
  int b_max = 6;
  int nmf_max_iter = 1000;
  double nmf_tol = 1e-7;

  // [score]
  double threshold = 0.05;
  std::string layer;  // empty: all layers
  std::size_t top_k = 5;
  bool describe_windows = false;  // role descriptions per scored window
  bool include_training = false;  // also score the training windows

  // [run]
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  bool export_graphs = false;

  // Relative paths in the file resolve against `base`.
  static PipelineConfig parse(std::istream& in, const std::filesystem::path& base = {});
  static PipelineConfig load(const std::filesystem::path& path);

  // Applies one "section.key" = value override, same rules as the file.
  void set(const std::string& dotted_key, const std::string& value,
           const std::filesystem::path& base = {});

  std::int64_t window_seconds() const;

  // Throws Error(Config) on a broken invariant.
  void validate() const;
};

}  // namespace rolegraph
