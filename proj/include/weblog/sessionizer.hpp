#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "weblog/errors.hpp"
#include "weblog/merger.hpp"
#include "weblog/url.hpp"

namespace weblog {

struct SessionizerConfig {
  std::int64_t timeout_seconds = 1800; // the session timeout
  // With the rule off (CLF logs have no referrers) splitting is purely
  // timeout driven.
  bool referrer_rule = true;
};

// One visit: a directed list of page accesses by one user. Entries are
// indices into the log the visit was built from.
struct Visit {
  std::uint64_t visit_id = 0; // global, dense, in creation order
  std::uint64_t user_id = 0;
  std::vector<std::size_t> entry_indices;
  Timestamp start;
  Timestamp end;
  std::uint64_t page_views = 0;
};

struct SessionSet {
  std::vector<Visit> visits;
  std::map<std::uint64_t, std::vector<std::uint64_t>> per_user_visits;
};

// The history that most recently accessed the referrer: the index of the
// history containing the max-timestamp entry whose url equals the referrer
// path; ties go to the largest history index.
inline std::size_t find_referrer_history(const JointLog &log, std::span<const Visit> histories,
                                         std::string_view referrer_path) {
  bool found = false;
  std::size_t best_index = 0;
  std::int64_t best_time = 0;
  for (std::size_t h = 0; h < histories.size(); ++h) {
    for (const std::size_t idx : histories[h].entry_indices) {
      const LogEntry &e = log.entries[idx];
      if (e.url != referrer_path)
        continue;
      const std::int64_t t = e.time.utc_epoch_seconds;
      if (!found || t > best_time || (t == best_time && h >= best_index)) {
        found = true;
        best_time = t;
        best_index = h;
      }
    }
  }
  if (!found)
    throw ReferrerNotFound(std::string(referrer_path));
  return best_index;
}

namespace detail {

struct UserSessionState {
  std::vector<std::size_t> history_positions; // positions in SessionSet::visits
  // url -> (latest access time, largest history index at that time)
  std::unordered_map<std::string, std::pair<std::int64_t, std::size_t>> last_access;
  std::int64_t prev_time = 0;
  bool has_prev = false;
};

} // namespace detail

// Splits each user's time-ordered entries into visits: an entry opens a new
// history when the gap to the user's previous entry exceeds the timeout or
// its referrer is not the url of any entry already in one of that user's
// histories; otherwise it joins the history that most recently accessed the
// referrer. Requires a cleaned, user-annotated log.
inline SessionSet sessionize(const JointLog &log, const SessionizerConfig &config) {
  SessionSet set;
  std::map<std::uint64_t, detail::UserSessionState> states;

  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    const LogEntry &e = log.entries[i];
    if (e.user_id == 0)
      throw std::logic_error("sessionize requires a user-annotated log");
    auto &st = states[e.user_id];
    const std::int64_t t = e.time.utc_epoch_seconds;

    bool open_new = false;
    std::size_t target_history = 0;
    if (!st.has_prev) {
      open_new = true; // the user's first entry always opens H_0
    } else if (t - st.prev_time > config.timeout_seconds) {
      open_new = true;
    } else if (config.referrer_rule) {
      if (!e.referrer) {
        open_new = true;
      } else {
        const std::string ref(url_path_and_query(*e.referrer));
        const auto hit = st.last_access.find(ref);
        if (hit == st.last_access.end())
          open_new = true;
        else
          target_history = hit->second.second;
      }
    } else {
      target_history = st.history_positions.size() - 1; // latest history
    }

    if (open_new) {
      Visit v;
      v.visit_id = set.visits.size() + 1;
      v.user_id = e.user_id;
      v.start = v.end = e.time;
      v.entry_indices.push_back(i);
      v.page_views = 1;
      st.history_positions.push_back(set.visits.size());
      set.per_user_visits[e.user_id].push_back(v.visit_id);
      set.visits.push_back(std::move(v));
      target_history = st.history_positions.size() - 1;
    } else {
      Visit &v = set.visits[st.history_positions[target_history]];
      v.entry_indices.push_back(i);
      v.end = e.time;
      ++v.page_views;
    }

    // keep the (max time, max history index) access per url
    auto [slot, inserted] = st.last_access.try_emplace(e.url, t, target_history);
    if (!inserted && (t > slot->second.first ||
                      (t == slot->second.first && target_history > slot->second.second)))
      slot->second = {t, target_history};
    st.prev_time = t;
    st.has_prev = true;
  }
  return set;
}

} // namespace weblog
