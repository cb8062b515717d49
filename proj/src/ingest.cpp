#include "rolegraph/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "rolegraph/error.hpp"

namespace rolegraph {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Strips a trailing ":port" from an address token. Bare IPv6 addresses
// (several colons) are left alone; "[addr]:port" loses brackets and port.
std::string strip_port(std::string_view token) {
  if (!token.empty() && token.front() == '[') {
    auto close = token.find(']');
    if (close != std::string_view::npos) return std::string(token.substr(1, close - 1));
  }
  if (std::count(token.begin(), token.end(), ':') == 1) {
    return std::string(token.substr(0, token.find(':')));
  }
  return std::string(token);
}

int month_from_abbrev(std::string_view m) {
  static constexpr std::string_view names[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                               "jul", "aug", "sep", "oct", "nov", "dec"};
  auto l = lower(m);
  for (int i = 0; i < 12; ++i) {
    if (l == names[i]) return i + 1;
  }
  return 0;
}

}  // namespace

const char* to_string(AlertSource source) {
  return source == AlertSource::Snort ? "snort" : "ossec";
}

std::optional<AlertSource> parse_source(std::string_view name) {
  auto l = lower(name);
  if (l == "snort") return AlertSource::Snort;
  if (l == "ossec") return AlertSource::Ossec;
  return std::nullopt;
}

std::int64_t utc_from_civil(int year, unsigned month, unsigned day, int hour, int minute,
                            int second) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("invalid calendar date {}-{}-{}", year, month, day));
  }
  auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_utc(std::int64_t ts) {
  using namespace std::chrono;
  auto day_count = ts >= 0 ? ts / 86400 : (ts - 86399) / 86400;
  auto secs = ts - day_count * 86400;
  year_month_day ymd{sys_days{days{day_count}}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", int(ymd.year()),
                     unsigned(ymd.month()), unsigned(ymd.day()), secs / 3600, (secs / 60) % 60,
                     secs % 60);
}

void validate(const AlertRecord& record) {
  if (record.timestamp <= 0) {
    throw Error(ErrorCode::InvalidArgument, "alert timestamp must be positive");
  }
  if (record.fields.empty()) throw Error(ErrorCode::InvalidArgument, "alert has no fields");
  for (const auto& [key, value] : record.fields) {
    if (key.empty() || value.empty()) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("empty key or value for '{}'", key));
    }
  }
  auto require = [&](const char* key) {
    if (!record.fields.contains(key)) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("{} alert lacks field {}", to_string(record.source), key));
    }
  };
  if (record.source == AlertSource::Snort) {
    require("sig_id");
    require("src_ip");
    require("dst_ip");
  } else {
    require("rule_id");
    require("logfile");
  }
}

// ---------------------------------------------------------------------------
// HostMap

bool is_ipv4(std::string_view text) {
  int parts = 0;
  while (true) {
    auto dot = text.find('.');
    auto part = text.substr(0, dot);
    if (part.empty() || part.size() > 3) return false;
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || value > 255) return false;
    ++parts;
    if (dot == std::string_view::npos) break;
    text.remove_prefix(dot + 1);
  }
  return parts == 4;
}

void HostMap::add(std::string_view hostname, std::string_view ip) {
  if (hostname.empty()) throw Error(ErrorCode::Config, "empty hostname in host map");
  if (!is_ipv4(ip)) {
    throw Error(ErrorCode::Config, fmt::format("'{}' is not an IPv4 address", ip));
  }
  auto [it, inserted] = entries_.emplace(lower(hostname), std::string(ip));
  if (!inserted) {
    throw Error(ErrorCode::Config, fmt::format("duplicate hostname '{}' in host map", hostname));
  }
}

std::optional<std::string> HostMap::resolve(std::string_view hostname) const {
  auto it = entries_.find(lower(hostname));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

HostMap HostMap::parse(std::istream& in) {
  HostMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string host, ip, extra;
    if (!(fields >> host)) continue;
    if (!(fields >> ip) || (fields >> extra)) {
      throw Error(ErrorCode::Config, fmt::format("host map line {}: expected 'hostname ip'", lineno));
    }
    map.add(host, ip);
  }
  return map;
}

HostMap HostMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open host map {}", path));
  return parse(in);
}

// ---------------------------------------------------------------------------
// WindowSpec

void WindowSpec::validate() const {
  if (length <= 0) throw Error(ErrorCode::Config, "window length must be positive");
  if (training_cutoff < origin) {
    throw Error(ErrorCode::Config, "training cutoff precedes window origin");
  }
}

std::int64_t WindowSpec::index_of(std::int64_t ts) const {
  auto delta = ts - origin;
  auto q = delta / length;
  if (delta % length != 0 && delta < 0) --q;
  return q;
}

std::int64_t WindowSpec::first_scored_window() const {
  auto delta = training_cutoff - origin;
  return (delta + length - 1) / length;
}

// ---------------------------------------------------------------------------
// Snort fast format

AlertRecord parse_snort_fast(std::string_view line, int year) {
  static const std::regex ts_re(
      R"(^\s*(\d{1,2})/(\d{1,2})(?:/(\d{2,4}))?-(\d{1,2}):(\d{2}):(\d{2})(?:\.\d+)?)");
  static const std::regex gsr_re(R"(\[(\d+):(\d+):(\d+)\])");
  static const std::regex pair_re(R"((\S+)\s+->\s+(\S+)\s*$)");

  std::string text(trim(line));
  std::smatch m;
  if (!std::regex_search(text, m, ts_re)) {
    throw Error(ErrorCode::MalformedLine, "no leading timestamp");
  }
  int y = year;
  if (m[3].matched) {
    y = std::stoi(m[3].str());
    if (y < 100) y += 2000;
  }
  AlertRecord record;
  record.source = AlertSource::Snort;
  try {
    record.timestamp =
        utc_from_civil(y, static_cast<unsigned>(std::stoi(m[1].str())),
                       static_cast<unsigned>(std::stoi(m[2].str())), std::stoi(m[4].str()),
                       std::stoi(m[5].str()), std::stoi(m[6].str()));
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedLine, e.what());
  }
  if (record.timestamp <= 0) throw Error(ErrorCode::MalformedLine, "timestamp before epoch");

  std::smatch g;
  if (!std::regex_search(text, g, gsr_re)) {
    throw Error(ErrorCode::MalformedLine, "no [gid:sid:rev] triple");
  }
  record.fields["sig_id"] = g[2].str();

  // Addresses follow the {PROTO} tag when present.
  auto brace = text.rfind('}');
  std::string tail = brace == std::string::npos ? text : text.substr(brace + 1);
  std::smatch p;
  if (!std::regex_search(tail, p, pair_re)) {
    throw Error(ErrorCode::MalformedLine, "no source -> destination pair");
  }
  auto src = strip_port(p[1].str());
  auto dst = strip_port(p[2].str());
  if (src.empty() || dst.empty()) throw Error(ErrorCode::MalformedLine, "empty address");
  record.fields["src_ip"] = src;
  record.fields["dst_ip"] = dst;
  return record;
}

ParseResult parse_snort_stream(std::istream& in, int year) {
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++result.total;
    try {
      result.records.push_back(parse_snort_fast(line, year));
    } catch (const Error&) {
      ++result.skipped;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// OSSEC alerts.log

AlertRecord parse_ossec_block(std::string_view block) {
  AlertRecord record;
  record.source = AlertSource::Ossec;

  std::istringstream in{std::string(block)};
  std::string line;
  bool have_epoch = false;
  bool have_rule = false;
  bool have_location = false;
  while (std::getline(in, line)) {
    std::string_view l = trim(line);
    if (starts_with(l, "** Alert ")) {
      auto rest = l.substr(9);
      std::int64_t epoch = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), epoch);
      if (ec == std::errc{} && ptr != rest.data() && epoch > 0) {
        record.timestamp = epoch;
        have_epoch = true;
      }
    } else if (have_epoch && !have_location && l.size() > 4 && std::isdigit(static_cast<unsigned char>(l[0]))) {
      // "2016 Nov 30 20:00:01 location"
      std::istringstream fields{std::string(l)};
      std::string yr, mon, day, clock;
      fields >> yr >> mon >> day >> clock;
      if (month_from_abbrev(mon) == 0) continue;
      std::string location;
      std::getline(fields, location);
      std::string_view loc = trim(location);
      if (loc.empty()) continue;
      have_location = true;
      auto arrow = loc.find("->");
      if (arrow == std::string_view::npos) {
        record.fields["logfile"] = std::string(loc);
        continue;
      }
      auto host = trim(loc.substr(0, arrow));
      auto file = trim(loc.substr(arrow + 2));
      // Agent form: "(name) ip->location".
      if (!host.empty() && host.front() == '(') {
        auto close = host.find(')');
        if (close != std::string_view::npos) host = trim(host.substr(1, close - 1));
      }
      if (!host.empty()) record.fields["hostname"] = std::string(host);
      if (!file.empty()) record.fields["logfile"] = std::string(file);
    } else if (starts_with(l, "Rule:")) {
      std::istringstream fields{std::string(l.substr(5))};
      std::string id;
      fields >> id;
      if (!id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isdigit(c); })) {
        record.fields["rule_id"] = id;
        have_rule = true;
      }
    } else if (starts_with(l, "Src IP:")) {
      auto ip = trim(l.substr(7));
      if (!ip.empty() && ip != "(none)") record.fields["src_ip"] = std::string(ip);
    }
  }
  if (!have_epoch) throw Error(ErrorCode::MalformedBlock, "missing alert epoch");
  if (!have_rule) throw Error(ErrorCode::MalformedBlock, "missing Rule: line");
  if (!record.fields.contains("logfile")) {
    throw Error(ErrorCode::MalformedBlock, "missing location line");
  }
  return record;
}

std::vector<std::string> split_ossec_blocks(std::istream& in) {
  std::vector<std::string> blocks;
  std::string line;
  std::string current;
  bool open = false;
  while (std::getline(in, line)) {
    if (starts_with(line, "** Alert")) {
      if (open) blocks.push_back(std::move(current));
      current = line + '\n';
      open = true;
    } else if (open) {
      if (trim(line).empty()) {
        blocks.push_back(std::move(current));
        current.clear();
        open = false;
      } else {
        current += line;
        current += '\n';
      }
    } else if (!trim(line).empty()) {
      // Stray text outside an entry counts as its own malformed block.
      blocks.push_back(line + '\n');
    }
  }
  if (open) blocks.push_back(std::move(current));
  return blocks;
}

ParseResult parse_ossec_stream(std::istream& in) {
  ParseResult result;
  for (const auto& block : split_ossec_blocks(in)) {
    ++result.total;
    try {
      result.records.push_back(parse_ossec_block(block));
    } catch (const Error&) {
      ++result.skipped;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// JSONL interchange

std::string to_jsonl(const AlertRecord& record) {
  nlohmann::ordered_json j;
  j["source"] = to_string(record.source);
  j["ts"] = record.timestamp;
  j["fields"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : record.fields) j["fields"][k] = v;
  return j.dump();
}

AlertRecord from_jsonl(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedLine, e.what());
  }
  if (!j.is_object() || !j.contains("source") || !j.contains("ts") || !j.contains("fields") ||
      !j["fields"].is_object() || !j["source"].is_string() || !j["ts"].is_number_integer()) {
    throw Error(ErrorCode::MalformedLine, "expected {\"source\",\"ts\",\"fields\"}");
  }
  auto source = parse_source(j["source"].get<std::string>());
  if (!source) throw Error(ErrorCode::MalformedLine, "unknown source");
  AlertRecord record;
  record.source = *source;
  record.timestamp = j["ts"].get<std::int64_t>();
  for (const auto& [key, value] : j["fields"].items()) {
    if (value.is_string()) {
      record.fields[canonical_key(key)] = value.get<std::string>();
    } else if (value.is_number()) {
      record.fields[canonical_key(key)] = value.dump();
    } else {
      throw Error(ErrorCode::MalformedLine, fmt::format("field '{}' is not a scalar", key));
    }
  }
  try {
    // Hostname-only OSSEC records are legal until normalization.
    validate(record);
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedLine, e.what());
  }
  return record;
}

ParseResult parse_jsonl_stream(std::istream& in) {
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++result.total;
    try {
      result.records.push_back(from_jsonl(line));
    } catch (const Error&) {
      ++result.skipped;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Normalization

std::string canonical_key(std::string_view key) {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"sid", "sig_id"},        {"signature_id", "sig_id"}, {"rule", "rule_id"},
      {"ruleid", "rule_id"},    {"src", "src_ip"},          {"srcip", "src_ip"},
      {"dst", "dst_ip"},        {"dstip", "dst_ip"},        {"location", "logfile"},
      {"log_file", "logfile"},  {"host", "hostname"},
  };
  auto l = lower(key);
  auto it = aliases.find(l);
  return it == aliases.end() ? l : it->second;
}

std::string layer_of(std::string_view key) {
  if (key == "src_ip" || key == "dst_ip" || key == "host_ip" || key == "hostname") return "ip";
  if (key == "sig_id") return "signature";
  if (key == "rule_id") return "rule";
  if (key == "logfile") return "logfile";
  return std::string(key);
}

AlertRecord normalize_record(const AlertRecord& record, const HostMap& hosts,
                             NormalizeStats* stats) {
  AlertRecord out;
  out.source = record.source;
  out.timestamp = record.timestamp;
  for (const auto& [key, value] : record.fields) {
    out.fields.insert_or_assign(canonical_key(key), value);
  }

  auto host_it = out.fields.find("hostname");
  if (host_it == out.fields.end()) return out;

  std::string host = host_it->second;
  out.fields.erase(host_it);
  std::string ip = host;
  if (auto resolved = hosts.resolve(host)) {
    ip = *resolved;
  } else if (!is_ipv4(host)) {
    if (stats) ++stats->unresolved_hostnames;
  }

  auto src_it = out.fields.find("src_ip");
  if (src_it == out.fields.end()) {
    out.fields["src_ip"] = ip;
  } else if (src_it->second != ip) {
    // Both the attacker-side address and the reporting host land in the ip
    // layer; the host keeps its own key so the pair still yields an edge.
    auto [it, inserted] = out.fields.emplace("host_ip", ip);
    if (stats && (inserted || it->second != ip)) ++stats->collisions;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Windowing

Partition window_partition(std::span<const AlertRecord> records, const WindowSpec& spec) {
  spec.validate();
  Partition part;
  std::map<std::int64_t, std::vector<AlertRecord>> buckets;
  for (const auto& r : records) {
    if (r.timestamp < spec.origin) {
      ++part.dropped_before_origin;
      continue;
    }
    buckets[spec.index_of(r.timestamp)].push_back(r);
  }
  if (buckets.empty()) return part;
  auto first = buckets.begin()->first;
  auto last = buckets.rbegin()->first;
  part.windows.reserve(static_cast<std::size_t>(last - first + 1));
  for (auto k = first; k <= last; ++k) {
    Window w;
    w.index = k;
    if (auto it = buckets.find(k); it != buckets.end()) w.records = std::move(it->second);
    part.windows.push_back(std::move(w));
  }
  return part;
}

}  // namespace rolegraph
