#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "weblog/errors.hpp"
#include "weblog/log_entry.hpp"

namespace weblog {

struct LogSource {
  std::string server_name;
  std::vector<LogEntry> entries;
  std::int64_t clock_skew_seconds = 0; // operator-supplied correction
};

// The joint log: every server's entries, time-ordered, server field set.
struct JointLog {
  std::vector<LogEntry> entries;
  std::size_t source_count = 0;
};

inline LogEntry apply_skew(LogEntry entry, std::int64_t skew_seconds) {
  entry.time.utc_epoch_seconds += skew_seconds;
  return entry;
}

// (time, server, line_no) — the deterministic merge order.
inline bool merge_order(const LogEntry &a, const LogEntry &b) {
  if (a.time.utc_epoch_seconds != b.time.utc_epoch_seconds)
    return a.time.utc_epoch_seconds < b.time.utc_epoch_seconds;
  if (a.server != b.server)
    return a.server < b.server;
  return a.line_no < b.line_no;
}

// Merges per-server logs into one joint log sorted ascending by normalized
// UTC time, each entry tagged with its server name and shifted by its
// source's clock skew. Output is the exact multiset union of the inputs.
inline JointLog merge(std::vector<LogSource> sources) {
  std::set<std::string> names;
  std::size_t total = 0;
  for (const auto &s : sources) {
    if (s.server_name.empty())
      throw Error("a log source needs a server name");
    if (!names.insert(s.server_name).second)
      throw DuplicateServerName(s.server_name);
    total += s.entries.size();
  }

  JointLog joint;
  joint.source_count = sources.size();
  joint.entries.reserve(total);
  for (auto &s : sources) {
    for (auto &e : s.entries) {
      e.server = s.server_name;
      e.time.utc_epoch_seconds += s.clock_skew_seconds;
      joint.entries.push_back(std::move(e));
    }
  }
  std::sort(joint.entries.begin(), joint.entries.end(), merge_order);
  return joint;
}

} // namespace weblog
