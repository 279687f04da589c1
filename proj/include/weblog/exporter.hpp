#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "weblog/cleaner.hpp"
#include "weblog/csv.hpp"
#include "weblog/errors.hpp"
#include "weblog/identity.hpp"
#include "weblog/merger.hpp"
#include "weblog/sessionizer.hpp"
#include "weblog/summarizer.hpp"

namespace weblog {

// Everything the relational export needs: the kept annotated log, the visit
// id of each request, and the derived tables.
struct ExportBundle {
  JointLog log;
  std::vector<std::uint64_t> visit_ids; // parallel to log.entries
  UserTable users;
  SessionSet sessions;
  std::vector<SessionAggregate> session_aggregates;
  std::vector<PeriodAggregate> period_aggregates;
  std::vector<ServerShare> server_shares;
};

inline ExportBundle make_bundle(JointLog log, UserTable users, SessionSet sessions,
                                Granularity granularity) {
  ExportBundle b;
  b.visit_ids.assign(log.entries.size(), 0);
  for (const auto &v : sessions.visits)
    for (const std::size_t idx : v.entry_indices) {
      if (idx >= b.visit_ids.size())
        throw RefIntegrityViolation("visit references an entry outside the log");
      b.visit_ids[idx] = v.visit_id;
    }
  b.session_aggregates = weblog::session_aggregates(sessions);
  b.period_aggregates = weblog::period_aggregates(log, sessions, granularity);
  b.server_shares = weblog::server_shares(log);
  b.log = std::move(log);
  b.users = std::move(users);
  b.sessions = std::move(sessions);
  return b;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string opt_str(const std::optional<std::string> &v) { return v ? *v : std::string(); }

inline std::string opt_bytes(const std::optional<std::uint64_t> &v) {
  return v ? std::to_string(*v) : std::string();
}

inline void check_integrity(const ExportBundle &b) {
  if (b.visit_ids.size() != b.log.entries.size())
    throw RefIntegrityViolation("visit id column does not cover every request");
  for (std::size_t i = 0; i < b.log.entries.size(); ++i) {
    const auto &e = b.log.entries[i];
    if (e.user_id == 0 || e.user_id > b.users.rows.size())
      throw RefIntegrityViolation("request " + std::to_string(i + 1) +
                                  " references unknown user " + std::to_string(e.user_id));
    if (b.visit_ids[i] == 0 || b.visit_ids[i] > b.sessions.visits.size())
      throw RefIntegrityViolation("request " + std::to_string(i + 1) +
                                  " references unknown visit " + std::to_string(b.visit_ids[i]));
  }
  for (const auto &v : b.sessions.visits)
    if (v.user_id == 0 || v.user_id > b.users.rows.size())
      throw RefIntegrityViolation("visit " + std::to_string(v.visit_id) +
                                  " references unknown user " + std::to_string(v.user_id));
}

class TableWriter {
public:
  TableWriter(const std::filesystem::path &dir, const std::string &name) : path_(dir / name) {
    out_.open(path_, std::ios::binary);
    if (!out_)
      throw IoFailure("cannot open " + path_.string() + " for writing");
  }

  void row(std::initializer_list<std::string> fields) {
    csv_row(out_, std::vector<std::string>(fields));
  }

  std::filesystem::path close() {
    out_.close();
    if (!out_)
      throw IoFailure("write error on " + path_.string());
    return path_;
  }

private:
  std::filesystem::path path_;
  std::ofstream out_;
};

} // namespace detail

// requests, users, visits and session_detail — the per-record relations.
inline std::vector<std::filesystem::path>
export_entity_tables(const ExportBundle &b, const std::filesystem::path &out_dir) {
  detail::check_integrity(b);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<std::filesystem::path> written;

  {
    detail::TableWriter t(out_dir, "requests.csv");
    t.row({"request_id", "server", "user_id", "visit_id", "timestamp_utc", "method", "url",
           "protocol", "status", "bytes", "referrer", "agent"});
    for (std::size_t i = 0; i < b.log.entries.size(); ++i) {
      const auto &e = b.log.entries[i];
      t.row({std::to_string(i + 1), e.server, std::to_string(e.user_id),
             std::to_string(b.visit_ids[i]), format_iso8601(e.time.utc_epoch_seconds), e.method,
             e.url, e.protocol, std::to_string(e.status), detail::opt_bytes(e.bytes),
             detail::opt_str(e.referrer), detail::opt_str(e.agent)});
    }
    written.push_back(t.close());
  }
  {
    detail::TableWriter t(out_dir, "users.csv");
    t.row({"user_id", "kind", "login", "ip", "agent", "first_seen", "request_count"});
    for (const auto &u : b.users.rows) {
      const bool is_login = std::holds_alternative<LoginKey>(u.key);
      t.row({std::to_string(u.user_id), is_login ? "login" : "ip_agent",
             is_login ? std::get<LoginKey>(u.key).login : std::string(),
             is_login ? std::string() : std::get<IpAgentKey>(u.key).ip,
             is_login ? std::string() : detail::opt_str(std::get<IpAgentKey>(u.key).agent),
             format_iso8601(u.first_seen.utc_epoch_seconds), std::to_string(u.request_count)});
    }
    written.push_back(t.close());
  }
  {
    detail::TableWriter t(out_dir, "visits.csv");
    t.row({"visit_id", "user_id", "start", "end", "page_views"});
    for (const auto &v : b.sessions.visits)
      t.row({std::to_string(v.visit_id), std::to_string(v.user_id),
             format_iso8601(v.start.utc_epoch_seconds), format_iso8601(v.end.utc_epoch_seconds),
             std::to_string(v.page_views)});
    written.push_back(t.close());
  }
  {
    // one row per request, grouped by session id
    detail::TableWriter t(out_dir, "session_detail.csv");
    t.row({"session_id", "ip", "datetime", "url"});
    for (const auto &v : b.sessions.visits)
      for (const std::size_t idx : v.entry_indices) {
        const auto &e = b.log.entries[idx];
        t.row({std::to_string(v.visit_id), e.ip, format_datetime(e.time.utc_epoch_seconds),
               e.url});
      }
    written.push_back(t.close());
  }
  return written;
}

// session_aggregates, period_aggregates and server_shares.
inline std::vector<std::filesystem::path>
export_aggregate_tables(const ExportBundle &b, const std::filesystem::path &out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<std::filesystem::path> written;
  {
    detail::TableWriter t(out_dir, "session_aggregates.csv");
    t.row({"user_id", "visit_count", "length_seconds", "page_views", "first", "last"});
    for (const auto &a : b.session_aggregates)
      t.row({std::to_string(a.user_id), std::to_string(a.visit_count),
             std::to_string(a.length_seconds), std::to_string(a.page_views),
             format_iso8601(a.first.utc_epoch_seconds), format_iso8601(a.last.utc_epoch_seconds)});
    written.push_back(t.close());
  }
  {
    detail::TableWriter t(out_dir, "period_aggregates.csv");
    t.row({"granularity", "bucket", "unique_visitors", "unique_agents", "visit_count",
           "request_count"});
    for (const auto &p : b.period_aggregates)
      t.row({granularity_name(p.granularity), format_iso8601(p.bucket_start),
             std::to_string(p.unique_visitors), std::to_string(p.unique_agents),
             std::to_string(p.visit_count), std::to_string(p.request_count)});
    written.push_back(t.close());
  }
  {
    detail::TableWriter t(out_dir, "server_shares.csv");
    t.row({"server", "request_count", "percent"});
    for (const auto &s : b.server_shares)
      t.row({s.server_name, std::to_string(s.request_count), detail::format_double(s.percent)});
    written.push_back(t.close());
  }
  return written;
}

// Writes the whole relational model as CSV files with header rows, UTF-8,
// LF line endings. Returns the written paths.
inline std::vector<std::filesystem::path> export_tables(const ExportBundle &b,
                                                        const std::filesystem::path &out_dir) {
  auto written = export_entity_tables(b, out_dir);
  for (auto &p : export_aggregate_tables(b, out_dir))
    written.push_back(std::move(p));
  return written;
}

struct RunCounts {
  std::string website;
  std::optional<std::pair<std::int64_t, std::int64_t>> duration; // joint log time range
  std::uint64_t sessions = 0;
  std::uint64_t users = 0;
  nlohmann::json config = nlohmann::json::object();
};

struct Report {
  std::string human;
  nlohmann::json machine;
};

// Published preprocessing results for comparable corpora, printed for
// comparison next to the measured row.
struct ReferenceResult {
  const char *corpus;
  double reduction_percent;
  std::uint64_t sessions;
  std::uint64_t users;
};

inline constexpr ReferenceResult kReferenceResults[] = {
    {"NASA 1-10 Aug 1995", 72.98, 6821, 5421},
    {"NASA 20-24 Jul 1995", 72.22, 16810, 12525},
    {"Academic site 12-28 May 2001", 82.5, 1645, 936},
};

inline std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

// Builds the run summary: the measured size-reduction row, the session and
// user counts, the configuration echo and the reference results.
inline Report render_report(const CleaningReport &cleaning, const RunCounts &counts) {
  const bool have_bytes = cleaning.input_bytes > 0;
  const std::string reduction =
      have_bytes ? format_percent(cleaning.reduction_percent) : std::string("n/a");
  const std::string duration =
      counts.duration ? format_iso8601(counts.duration->first) + " .. " +
                            format_iso8601(counts.duration->second)
                      : std::string("n/a");

  Report r;
  std::string &h = r.human;
  h += "Website                  : " + (counts.website.empty() ? "n/a" : counts.website) + "\n";
  h += "Duration                 : " + duration + "\n";
  h += "Original Size            : " + std::to_string(cleaning.input_bytes) + " bytes\n";
  h += "Size after Preprocessing : " + std::to_string(cleaning.kept_bytes) + " bytes\n";
  h += "% Reduction in Size      : " + reduction + "\n";
  h += "No. of Sessions          : " + std::to_string(counts.sessions) + "\n";
  h += "No. of Users             : " + std::to_string(counts.users) + "\n";
  h += "Requests                 : input=" + std::to_string(cleaning.input_count) +
       " kept=" + std::to_string(cleaning.kept_count) +
       " robot=" + std::to_string(cleaning.dropped_as_robot) +
       " extension=" + std::to_string(cleaning.dropped_by_extension) +
       " method=" + std::to_string(cleaning.dropped_by_method) +
       " status=" + std::to_string(cleaning.dropped_by_status) + "\n";
  h += "Config                   : " + counts.config.dump() + "\n";
  h += "Reference results for comparable corpora:\n";
  for (const auto &ref : kReferenceResults) {
    h += "  " + std::string(ref.corpus) + ": " + format_percent(ref.reduction_percent) +
         " reduction, " + std::to_string(ref.sessions) + " sessions, " +
         std::to_string(ref.users) + " users\n";
  }

  nlohmann::json &m = r.machine;
  m["website"] = counts.website;
  if (counts.duration)
    m["duration"] = {{"start", format_iso8601(counts.duration->first)},
                     {"end", format_iso8601(counts.duration->second)}};
  else
    m["duration"] = nullptr;
  m["original_size_bytes"] = cleaning.input_bytes;
  m["preprocessed_size_bytes"] = cleaning.kept_bytes;
  if (have_bytes)
    m["reduction_percent"] = cleaning.reduction_percent;
  else
    m["reduction_percent"] = nullptr;
  m["reduction_formatted"] = reduction;
  m["sessions"] = counts.sessions;
  m["users"] = counts.users;
  m["requests"] = {{"input", cleaning.input_count},
                   {"kept", cleaning.kept_count},
                   {"dropped_as_robot", cleaning.dropped_as_robot},
                   {"dropped_by_extension", cleaning.dropped_by_extension},
                   {"dropped_by_method", cleaning.dropped_by_method},
                   {"dropped_by_status", cleaning.dropped_by_status}};
  m["config"] = counts.config;
  auto refs = nlohmann::json::array();
  for (const auto &ref : kReferenceResults)
    refs.push_back({{"corpus", ref.corpus},
                    {"reduction_percent", ref.reduction_percent},
                    {"sessions", ref.sessions},
                    {"users", ref.users}});
  m["reference_results"] = refs;
  return r;
}

} // namespace weblog
