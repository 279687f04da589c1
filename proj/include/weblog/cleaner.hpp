#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "weblog/merger.hpp"
#include "weblog/parser.hpp"
#include "weblog/url.hpp"

namespace weblog {

enum class AnonymizeMode { off, hash };

struct CleaningConfig {
  // extensions of non-analyzed resources: images, multimedia, page style files
  std::set<std::string> drop_extensions = {"jpg", "jpeg", "gif", "png", "bmp", "ico", "css", "js",
                                           "swf", "mp3", "mp4", "avi", "mpg", "wav", "zip", "gz"};
  std::set<std::string> keep_methods = {"GET", "POST"}; // everything else is dropped
  int keep_status_lo = 200;
  int keep_status_hi = 399;
  std::set<std::string> robot_agent_keywords = {"bot", "crawler", "spider", "slurp", "archiver"};
  bool robots_txt_rule = true;
  AnonymizeMode anonymize = AnonymizeMode::off;
};

struct CleaningReport {
  std::uint64_t input_count = 0;
  std::uint64_t kept_count = 0;
  std::uint64_t dropped_by_extension = 0;
  std::uint64_t dropped_by_method = 0;
  std::uint64_t dropped_by_status = 0;
  std::uint64_t dropped_as_robot = 0;
  std::uint64_t input_bytes = 0; // canonical-line byte totals, newline included
  std::uint64_t kept_bytes = 0;
  double reduction_percent = 0.0; // meaningful only when input_bytes > 0
};

// A client as seen by robot detection: the (ip, agent) pair.
struct ClientKey {
  std::string ip;
  std::optional<std::string> agent;
  auto operator<=>(const ClientKey &) const = default;
};

inline bool is_irrelevant_resource(std::string_view url, const CleaningConfig &config) {
  const std::string ext = url_extension(url);
  return !ext.empty() && config.drop_extensions.count(ext) > 0;
}

// Flags clients whose agent contains a robot keyword or, with the
// robots.txt rule on, who ever requested /robots.txt.
inline std::set<ClientKey> detect_robots(const JointLog &log, const CleaningConfig &config) {
  std::set<ClientKey> flagged;
  for (const auto &e : log.entries) {
    bool robot = false;
    if (e.agent) {
      for (const auto &kw : config.robot_agent_keywords) {
        if (contains_ci(*e.agent, kw)) {
          robot = true;
          break;
        }
      }
    }
    if (!robot && config.robots_txt_rule &&
        strip_query(url_path_and_query(e.url)) == "/robots.txt")
      robot = true;
    if (robot)
      flagged.insert(ClientKey{e.ip, e.agent});
  }
  return flagged;
}

namespace detail {
inline std::uint64_t canonical_line_bytes(const LogEntry &e) {
  return canonicalize(e, LogFormat::combined).size() + 1;
}
} // namespace detail

// Removes robot clients, irrelevant resources, dropped methods and
// out-of-range statuses, in that order of attribution. Kept entries retain
// their relative order.
inline std::pair<JointLog, CleaningReport> clean(const JointLog &log,
                                                 const CleaningConfig &config) {
  const auto robots = detect_robots(log, config);

  JointLog kept;
  kept.source_count = log.source_count;
  CleaningReport report;
  for (const auto &e : log.entries) {
    const std::uint64_t bytes = detail::canonical_line_bytes(e);
    ++report.input_count;
    report.input_bytes += bytes;
    if (robots.count(ClientKey{e.ip, e.agent})) {
      ++report.dropped_as_robot;
    } else if (is_irrelevant_resource(e.url, config)) {
      ++report.dropped_by_extension;
    } else if (config.keep_methods.count(e.method) == 0) {
      ++report.dropped_by_method;
    } else if (e.status < config.keep_status_lo || e.status > config.keep_status_hi) {
      ++report.dropped_by_status;
    } else {
      ++report.kept_count;
      report.kept_bytes += bytes;
      kept.entries.push_back(e);
    }
  }
  if (report.input_bytes > 0)
    report.reduction_percent =
        100.0 * (1.0 - double(report.kept_bytes) / double(report.input_bytes));
  return {std::move(kept), report};
}

// Replaces each distinct ip with a stable opaque token assigned in
// first-appearance order ("u0001", "u0002", ...). All other fields are
// left unchanged, so downstream identity and sessionization are renamed,
// never merged or split.
inline JointLog anonymize(JointLog log, AnonymizeMode mode) {
  if (mode == AnonymizeMode::off)
    return log;
  std::map<std::string, std::string> tokens;
  for (auto &e : log.entries) {
    auto it = tokens.find(e.ip);
    if (it == tokens.end()) {
      std::string idx = std::to_string(tokens.size() + 1);
      while (idx.size() < 4)
        idx.insert(idx.begin(), '0');
      it = tokens.emplace(e.ip, "u" + idx).first;
    }
    e.ip = it->second;
  }
  return log;
}

} // namespace weblog
