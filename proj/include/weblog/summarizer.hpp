#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "weblog/merger.hpp"
#include "weblog/sessionizer.hpp"
#include "weblog/url.hpp"

namespace weblog {

// Per-user statistics over the whole analyzed log (the user session).
struct SessionAggregate {
  std::uint64_t user_id = 0;
  std::uint64_t visit_count = 0;
  std::int64_t length_seconds = 0; // last - first
  std::uint64_t page_views = 0;
  Timestamp first;
  Timestamp last;
};

enum class Granularity { hour, day, week, month };

constexpr const char *granularity_name(Granularity g) {
  switch (g) {
  case Granularity::hour:
    return "hour";
  case Granularity::day:
    return "day";
  case Granularity::week:
    return "week";
  case Granularity::month:
    return "month";
  }
  return "?";
}

struct PeriodAggregate {
  Granularity granularity = Granularity::day;
  std::int64_t bucket_start = 0; // UTC calendar-aligned period start
  std::uint64_t unique_visitors = 0;
  std::uint64_t unique_agents = 0;
  std::uint64_t visit_count = 0; // visits starting in the bucket
  std::uint64_t request_count = 0;
};

struct ServerShare {
  std::string server_name;
  std::uint64_t request_count = 0;
  double percent = 0.0;
};

// UTC calendar-aligned bucket start; weeks start Monday, months on day 1.
inline std::int64_t bucket_start(std::int64_t utc_epoch_seconds, Granularity g) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{utc_epoch_seconds}};
  switch (g) {
  case Granularity::hour:
    return duration_cast<seconds>(floor<hours>(tp).time_since_epoch()).count();
  case Granularity::day:
    return duration_cast<seconds>(floor<days>(tp).time_since_epoch()).count();
  case Granularity::week: {
    const sys_days d = floor<days>(tp);
    const weekday wd{d};
    return duration_cast<seconds>((d - days{wd.iso_encoding() - 1}).time_since_epoch()).count();
  }
  case Granularity::month: {
    const year_month_day ymd{floor<days>(tp)};
    const sys_days first{year_month_day{ymd.year(), ymd.month(), std::chrono::day{1}}};
    return duration_cast<seconds>(first.time_since_epoch()).count();
  }
  }
  return 0;
}

// One aggregate per user, ordered by user_id.
inline std::vector<SessionAggregate> session_aggregates(const SessionSet &sessions) {
  std::map<std::uint64_t, SessionAggregate> by_user;
  for (const auto &v : sessions.visits) {
    auto [it, inserted] = by_user.try_emplace(v.user_id);
    SessionAggregate &agg = it->second;
    if (inserted) {
      agg.user_id = v.user_id;
      agg.first = v.start;
      agg.last = v.end;
    }
    ++agg.visit_count;
    agg.page_views += v.page_views;
    if (v.start.utc_epoch_seconds < agg.first.utc_epoch_seconds)
      agg.first = v.start;
    if (v.end.utc_epoch_seconds > agg.last.utc_epoch_seconds)
      agg.last = v.end;
  }
  std::vector<SessionAggregate> out;
  out.reserve(by_user.size());
  for (auto &[id, agg] : by_user) {
    agg.length_seconds = agg.last.utc_epoch_seconds - agg.first.utc_epoch_seconds;
    out.push_back(agg);
  }
  return out;
}

// Bucketed counts; a visit counts in the bucket of its start time, empty
// buckets are omitted.
inline std::vector<PeriodAggregate> period_aggregates(const JointLog &log,
                                                      const SessionSet &sessions, Granularity g) {
  struct Acc {
    std::set<std::uint64_t> visitors;
    std::set<std::string> agents;
    std::uint64_t visits = 0;
    std::uint64_t requests = 0;
  };
  std::map<std::int64_t, Acc> buckets;
  for (const auto &e : log.entries) {
    Acc &acc = buckets[bucket_start(e.time.utc_epoch_seconds, g)];
    ++acc.requests;
    acc.visitors.insert(e.user_id);
    if (e.agent)
      acc.agents.insert(*e.agent);
  }
  for (const auto &v : sessions.visits)
    ++buckets[bucket_start(v.start.utc_epoch_seconds, g)].visits;

  std::vector<PeriodAggregate> out;
  out.reserve(buckets.size());
  for (const auto &[start, acc] : buckets)
    out.push_back(PeriodAggregate{g, start, acc.visitors.size(), acc.agents.size(), acc.visits,
                                  acc.requests});
  return out;
}

// Request share per server, ordered by server name. Percentages sum to 100
// for any nonempty log.
inline std::vector<ServerShare> server_shares(const JointLog &log) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto &e : log.entries)
    ++counts[e.server];
  std::vector<ServerShare> out;
  out.reserve(counts.size());
  for (const auto &[name, count] : counts)
    out.push_back(
        ServerShare{name, count, 100.0 * double(count) / double(log.entries.size())});
  return out;
}

// Path-prefix generalization: query removed, path truncated to the first
// `depth` segments with a trailing "/" marking the cut. Idempotent; never
// lengthens the path.
inline std::string generalize_url(std::string_view url, unsigned depth) {
  const std::string_view path = strip_query(url);
  std::vector<std::string_view> segments;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto next = path.find('/', pos);
    if (next == std::string_view::npos) {
      if (pos < path.size())
        segments.push_back(path.substr(pos));
      break;
    }
    if (next > pos)
      segments.push_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  if (depth >= segments.size())
    return std::string(path);
  std::string out;
  for (unsigned i = 0; i < depth; ++i) {
    out += '/';
    out += segments[i];
  }
  out += '/';
  return out;
}

} // namespace weblog
