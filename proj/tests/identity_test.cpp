#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"
#include "weblog/identity.hpp"

using namespace weblog;

TEST_CASE("user keys: login wins, else ip plus agent") {
  const auto lines = testutil::vanuatu_sample_lines();
  const auto second = parse_line(lines[1], LogFormat::combined);
  REQUIRE(second);
  const UserKey key = user_key(*second);
  REQUIRE(std::holds_alternative<IpAgentKey>(key));
  CHECK(std::get<IpAgentKey>(key).ip == "83.77.134.184");
  CHECK(std::get<IpAgentKey>(key).agent->starts_with("Mozilla/4.0 (compatible; MSIE 6.0"));

  LogEntry with_login = *second;
  with_login.login = "alice";
  CHECK(user_key(with_login) == UserKey{LoginKey{"alice"}});

  // same ip, different agents -> different users
  LogEntry a = *second, b = *second;
  b.agent = "entirely different browser";
  CHECK(user_key(a) != user_key(b));

  // absent agent is still a valid key component
  LogEntry c = *second;
  c.agent.reset();
  CHECK(user_key(a) != user_key(c));
}

TEST_CASE("the shuttle fixture resolves to two users") {
  auto joint = testutil::joint_from_lines(testutil::shuttle_log_lines(), LogFormat::clf);
  const UserTable table = assign_users(joint);
  REQUIRE(table.rows.size() == 2);
  // first appearance: the 07-20 evening client comes first in time order
  CHECK(std::get<IpAgentKey>(table.rows[0].key).ip == "128.102.210.40");
  CHECK(std::get<IpAgentKey>(table.rows[1].key).ip == "128.102.204.243");
  CHECK(table.rows[0].request_count == 7);
  CHECK(table.rows[1].request_count == 7);
  for (const auto &e : joint.entries)
    CHECK(e.user_id != 0);
}

TEST_CASE("an empty log yields an empty user table") {
  JointLog empty;
  CHECK(assign_users(empty).rows.empty());
}

TEST_CASE("user count equals the distinct key count and ids are stable") {
  testutil::Rng rng(37);
  for (int round = 0; round < 30; ++round) {
    auto joint = testutil::random_session_log(rng, 80, 8);
    auto again = joint;
    const UserTable table = assign_users(joint);
    const UserTable repeat = assign_users(again);

    std::set<UserKey> distinct;
    std::uint64_t total = 0;
    for (const auto &e : joint.entries)
      distinct.insert(user_key(e));
    for (const auto &row : table.rows) {
      total += row.request_count;
      CHECK(row.user_id == std::uint64_t(&row - table.rows.data()) + 1);
    }
    CHECK(table.rows.size() == distinct.size());
    CHECK(total == joint.entries.size());

    REQUIRE(repeat.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < joint.entries.size(); ++i)
      CHECK(joint.entries[i].user_id == again.entries[i].user_id);
  }
}
