#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rolegraph {

enum class AlertSource { Snort, Ossec };

const char* to_string(AlertSource source);
std::optional<AlertSource> parse_source(std::string_view name);

/// One IDS alert reduced to the fields that carry graph information.
///
/// Snort records carry sig_id, src_ip and dst_ip. OSSEC records carry
/// rule_id and logfile, optionally src_ip, and (before normalization) the
/// hostname taken from the alert location.
struct AlertRecord {
  AlertSource source = AlertSource::Snort;
  std::int64_t timestamp = 0;  // UTC seconds
  std::map<std::string, std::string> fields;

  friend bool operator==(const AlertRecord&, const AlertRecord&) = default;
};

// Throws Error(InvalidArgument) if the record breaks the AlertRecord invariants.
void validate(const AlertRecord& record);

/// hostname -> IPv4 lookup used to fold OSSEC hostnames into the ip layer.
/// Hostnames compare case-insensitively.
class HostMap {
 public:
  // "hostname ip" per line, '#' starts a comment.
  static HostMap parse(std::istream& in);
  static HostMap load(const std::string& path);

  void add(std::string_view hostname, std::string_view ip);
  std::optional<std::string> resolve(std::string_view hostname) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, std::string> entries_;
};

bool is_ipv4(std::string_view text);

/// Non-overlapping, contiguous windows: window k covers
/// [origin + k*length, origin + (k+1)*length).
struct WindowSpec {
  std::int64_t origin = 0;
  std::int64_t length = 28800;
  std::int64_t training_cutoff = 0;

  void validate() const;
  std::int64_t index_of(std::int64_t ts) const;
  std::int64_t start_of(std::int64_t index) const { return origin + index * length; }
  std::int64_t end_of(std::int64_t index) const { return origin + (index + 1) * length; }
  // First window that starts at or after the training cutoff.
  std::int64_t first_scored_window() const;
};

// Snort "fast" alert lines omit the year unless snort ran with -y; `year`
// fills it in when absent.
AlertRecord parse_snort_fast(std::string_view line, int year);

// One OSSEC alerts.log entry, from the "** Alert" header to the blank line.
AlertRecord parse_ossec_block(std::string_view block);

struct ParseResult {
  std::vector<AlertRecord> records;
  std::size_t skipped = 0;
  std::size_t total = 0;  // lines or blocks seen
};

ParseResult parse_snort_stream(std::istream& in, int year);
ParseResult parse_ossec_stream(std::istream& in);
ParseResult parse_jsonl_stream(std::istream& in);

// Splits an alerts.log text into entries starting with "** Alert".
std::vector<std::string> split_ossec_blocks(std::istream& in);

std::string to_jsonl(const AlertRecord& record);
AlertRecord from_jsonl(std::string_view line);

struct NormalizeStats {
  std::size_t unresolved_hostnames = 0;
  std::size_t collisions = 0;

  std::size_t warnings() const { return unresolved_hostnames + collisions; }
};

// Maps a (possibly aliased) field key to its canonical name, e.g. "sid" -> "sig_id".
std::string canonical_key(std::string_view key);

// Graph layer for a canonical field key.
std::string layer_of(std::string_view key);

/// Canonicalizes keys and folds the hostname field into the ip layer through
/// `hosts`. Unresolvable hostnames are kept verbatim as ip-layer values and
/// counted in `stats`. Idempotent.
AlertRecord normalize_record(const AlertRecord& record, const HostMap& hosts,
                             NormalizeStats* stats = nullptr);

struct Window {
  std::int64_t index = 0;
  std::vector<AlertRecord> records;
};

struct Partition {
  std::vector<Window> windows;  // ordered, gap windows included as empty
  std::size_t dropped_before_origin = 0;
};

Partition window_partition(std::span<const AlertRecord> records, const WindowSpec& spec);

std::string format_utc(std::int64_t ts);
std::int64_t utc_from_civil(int year, unsigned month, unsigned day, int hour, int minute,
                            int second);

}  // namespace rolegraph
