#include "rolegraph/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "rolegraph/error.hpp"
#include "rolegraph/ingest.hpp"

namespace rolegraph {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<fs::path> path_list(const std::string& text, const fs::path& base) {
  std::vector<fs::path> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    fs::path p(item);
    out.push_back(p.is_relative() && !base.empty() ? base / p : p);
  }
  return out;
}

fs::path one_path(const std::string& text, const fs::path& base) {
  fs::path p(trim(text));
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const auto t = trim(text);
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used == t.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::Config, fmt::format("{}: expected a number, got '{}'", what, text));
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  const auto t = trim(text);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw Error(ErrorCode::Config, fmt::format("{}: expected an integer, got '{}'", what, text));
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  auto t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw Error(ErrorCode::Config, fmt::format("{}: expected a boolean, got '{}'", what, text));
}

std::int64_t parse_time(const std::string& text) {
  const auto t = trim(text);
  if (!t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return parse_int(t, "time");
  }
  static const std::regex iso(R"((\d{4})-(\d{2})-(\d{2})(?:[T ](\d{2}):(\d{2})(?::(\d{2}))?)?Z?)");
  std::smatch m;
  if (!std::regex_match(t, m, iso)) {
    throw Error(ErrorCode::Config, fmt::format("unrecognized time '{}'", text));
  }
  auto num = [&](int i) { return m[i].matched ? std::stoi(m[i].str()) : 0; };
  try {
    return utc_from_civil(num(1), static_cast<unsigned>(num(2)), static_cast<unsigned>(num(3)),
                          num(4), num(5), num(6));
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

void PipelineConfig::set(const std::string& dotted_key, const std::string& value,
                         const fs::path& base) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    throw Error(ErrorCode::Config, fmt::format("key '{}' needs a section", dotted_key));
  }
  const auto section = dotted_key.substr(0, dot);
  const auto key = dotted_key.substr(dot + 1);
  const auto& k = dotted_key;
  auto unknown = [&]() {
    throw Error(ErrorCode::Config, fmt::format("unknown config key '{}'", dotted_key));
  };
  auto as_int = [&](int lo) {
    auto v = parse_int(value, k);
    if (v < lo || v > 1'000'000'000) throw Error(ErrorCode::Config, fmt::format("{} out of range", k));
    return static_cast<int>(v);
  };

  if (section == "input") {
    if (key == "snort") snort = path_list(value, base);
    else if (key == "ossec") ossec = path_list(value, base);
    else if (key == "jsonl") jsonl = path_list(value, base);
    else if (key == "hostmap") {
      if (trim(value).empty()) hostmap.reset();
      else hostmap = one_path(value, base);
    } else if (key == "snort_year") snort_year = as_int(1970);
    else if (key == "source") {
      source = trim(value);
      std::transform(source.begin(), source.end(), source.begin(),
                     [](unsigned char c) { return std::tolower(c); });
    } else unknown();
  } else if (section == "window") {
    if (key == "origin") origin = parse_time(value);
    else if (key == "hours") window_hours = parse_double(value, k);
    else if (key == "training_days") training_days = parse_double(value, k);
    else if (key == "training_cutoff") training_cutoff = parse_time(value);
    else unknown();
  } else if (section == "features") {
    if (key == "max_depth") max_depth = as_int(0);
    else if (key == "prune_tolerance") prune_tolerance = parse_double(value, k);
    else unknown();
  } else if (section == "roles") {
    if (key == "r_min") r_min = as_int(1);
    else if (key == "r_max") r_max = as_int(1);
    else if (key == "b_min") b_min = as_int(1);
    else if (key == "b_max") b_max = as_int(1);
    else if (key == "nmf_max_iter") nmf_max_iter = as_int(1);
    else if (key == "nmf_tol") nmf_tol = parse_double(value, k);
    else unknown();
  } else if (section == "score") {
    if (key == "threshold") threshold = parse_double(value, k);
    else if (key == "layer") layer = trim(value);
    else if (key == "top_k") top_k = static_cast<std::size_t>(as_int(0));
    else if (key == "describe_windows") describe_windows = parse_bool(value, k);
    else if (key == "include_training") include_training = parse_bool(value, k);
    else unknown();
  } else if (section == "run") {
    if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value, k));
    else if (key == "out") out = one_path(value, base);
    else if (key == "export_graphs") export_graphs = parse_bool(value, k);
    else unknown();
  } else {
    unknown();
  }
}

PipelineConfig PipelineConfig::parse(std::istream& in, const fs::path& base) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  PipelineConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorCode::Config, fmt::format("key '{}' outside any section", section));
    }
    for (const auto& [key, node] : body) {
      cfg.set(section + "." + key, node.get_value<std::string>(), base);
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open config {}", path.string()));
  return parse(in, path.parent_path());
}

std::int64_t PipelineConfig::window_seconds() const {
  return static_cast<std::int64_t>(std::llround(window_hours * 3600.0));
}

void PipelineConfig::validate() const {
  if (!(window_hours > 0.0) || window_seconds() <= 0) {
    throw Error(ErrorCode::Config, "window.hours must be positive");
  }
  if (!training_cutoff && !(training_days * 86400.0 >= static_cast<double>(window_seconds()))) {
    throw Error(ErrorCode::Config, "training span must cover at least one window");
  }
  if (training_cutoff && origin && *training_cutoff - *origin < window_seconds()) {
    throw Error(ErrorCode::Config, "training span must cover at least one window");
  }
  if (!(threshold > 0.0)) throw Error(ErrorCode::Config, "score.threshold must be positive");
  if (source != "all" && source != "snort" && source != "ossec") {
    throw Error(ErrorCode::Config, fmt::format("input.source must be all, snort or ossec, not '{}'", source));
  }
  if (r_min > r_max) throw Error(ErrorCode::Config, "roles.r_min exceeds roles.r_max");
  if (b_min > b_max || b_max > 16) throw Error(ErrorCode::Config, "roles bit range must lie in 1..16");
  if (!(prune_tolerance >= 0.0 && prune_tolerance < 1.0)) {
    throw Error(ErrorCode::Config, "features.prune_tolerance must lie in [0, 1)");
  }
  if (!(nmf_tol >= 0.0)) throw Error(ErrorCode::Config, "roles.nmf_tol must be >= 0");
  if (!snort.empty() && !snort_year) {
    throw Error(ErrorCode::Config, "input.snort_year is required with Snort fast logs");
  }
}

}  // namespace rolegraph
