#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "weblog/merger.hpp"

namespace weblog {

// A user is the login when the site records one, else the (ip, agent) pair.
// CLF logs carry no agent, so they degrade to pure-IP users.
struct LoginKey {
  std::string login;
  auto operator<=>(const LoginKey &) const = default;
};

struct IpAgentKey {
  std::string ip;
  std::optional<std::string> agent;
  auto operator<=>(const IpAgentKey &) const = default;
};

using UserKey = std::variant<LoginKey, IpAgentKey>;

inline UserKey user_key(const LogEntry &entry) {
  if (entry.login)
    return LoginKey{*entry.login};
  return IpAgentKey{entry.ip, entry.agent};
}

struct UserRecord {
  std::uint64_t user_id = 0; // dense from 1 in first-appearance order
  UserKey key;
  Timestamp first_seen;
  std::uint64_t request_count = 0;
};

struct UserTable {
  std::vector<UserRecord> rows;
};

// Annotates every entry with its user_id and returns the user table.
inline UserTable assign_users(JointLog &log) {
  UserTable table;
  std::map<UserKey, std::uint64_t> ids;
  for (auto &e : log.entries) {
    const UserKey key = user_key(e);
    auto it = ids.find(key);
    if (it == ids.end()) {
      const std::uint64_t id = table.rows.size() + 1;
      it = ids.emplace(key, id).first;
      table.rows.push_back(UserRecord{id, key, e.time, 0});
    }
    e.user_id = it->second;
    ++table.rows[it->second - 1].request_count;
  }
  return table;
}

} // namespace weblog
