#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "weblog/timestamp.hpp"

namespace weblog {

// CLF carries no referrer and no agent, ECLF adds the referrer, Combined
// adds referrer and agent.
enum class LogFormat { clf, eclf, combined };

constexpr bool format_has_referrer(LogFormat f) { return f != LogFormat::clf; }
constexpr bool format_has_agent(LogFormat f) { return f == LogFormat::combined; }

constexpr const char *format_name(LogFormat f) {
  switch (f) {
  case LogFormat::clf:
    return "clf";
  case LogFormat::eclf:
    return "eclf";
  case LogFormat::combined:
    return "combined";
  }
  return "?";
}

// One parsed access-log record. Optional fields are absent when the source
// field was "-" or the format omits them.
struct LogEntry {
  std::string server; // assigned at merge time, empty before
  std::string ip;
  std::optional<std::string> ident;
  std::optional<std::string> login;
  Timestamp time;
  std::string method;
  std::string url;
  std::string protocol;
  int status = 0;
  std::optional<std::uint64_t> bytes;
  std::optional<std::string> referrer;
  std::optional<std::string> agent;
  std::uint64_t line_no = 0; // 1-based position in the source file
  std::uint64_t user_id = 0; // 0 until assign_users has run

  bool operator==(const LogEntry &) const = default;
};

// Field-level equality ignoring provenance and annotations (server, line_no,
// user_id). This is the "same record" notion used by round-trip checks.
inline bool same_record(const LogEntry &a, const LogEntry &b) {
  return a.ip == b.ip && a.ident == b.ident && a.login == b.login && a.time == b.time &&
         a.method == b.method && a.url == b.url && a.protocol == b.protocol &&
         a.status == b.status && a.bytes == b.bytes && a.referrer == b.referrer &&
         a.agent == b.agent;
}

} // namespace weblog
