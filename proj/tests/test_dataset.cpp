#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "offeval/interaction_log.hpp"
#include "offeval/snapshot.hpp"
#include "oracle.hpp"

using namespace offeval;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "offeval_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("log enforces its universe and ordering") {
  auto log = InteractionLog::with_universe(2, 3);
  CHECK(log.n_users() == 2);
  CHECK(log.n_items() == 3);
  CHECK(log.user_label(1) == "1");
  CHECK(log.find_item("2").value() == 2);
  CHECK_FALSE(log.find_item("9").has_value());

  CHECK(log.add(0, 1, 1.0, Source::organic()));
  CHECK(log.add(1, 1, 2.0, Source::campaign(4)));
  CHECK_FALSE(log.add(0, 1, 3.0, Source::organic()));  // duplicate edge
  CHECK(log.size() == 2);
  CHECK(log.has_edge(0, 1));
  CHECK_FALSE(log.has_edge(0, 0));
  CHECK(log.last_timestamp() == 2.0);

  CHECK_THROWS_AS(log.add(0, 0, 1.5, Source::organic()),
                  std::invalid_argument);  // going back in time
  CHECK_THROWS_AS(log.add(5, 0, 9.0, Source::organic()), std::out_of_range);
  CHECK_THROWS_AS(log.add(0, -1, 9.0, Source::organic()), std::out_of_range);
}

TEST_CASE("load_log parses, sorts and deduplicates") {
  std::istringstream in(
      "# a comment\n"
      "user_id,item_id,timestamp,source,campaign_id\n"
      "alice,x,5.0,organic\n"
      "bob,x,2.0,campaign,1\n"
      "alice,y,3.5,organic\n"
      "alice,x,1.0,organic\n");  // duplicate pair, earlier timestamp
  const InteractionLog log = load_log(in, "test.csv");
  CHECK(log.n_users() == 2);
  CHECK(log.n_items() == 2);
  CHECK(log.size() == 3);

  auto rows = log.interactions();
  CHECK(rows[0].timestamp == 1.0);  // the duplicate kept the earliest time
  CHECK(log.user_label(rows[0].user) == "alice");
  CHECK(log.item_label(rows[0].item) == "x");
  CHECK(rows[1].timestamp == 2.0);
  CHECK(rows[1].source.is_campaign());
  CHECK(rows[1].source.campaign_id == 1);
  CHECK(rows[2].timestamp == 3.5);
}

TEST_CASE("load_log reports malformed input with line numbers") {
  auto expect_error = [](const std::string& body, const std::string& needle) {
    std::istringstream in(body);
    try {
      load_log(in, "bad.csv");
      FAIL("expected a parse error for: " << body);
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK_MESSAGE(msg.find(needle) != std::string::npos,
                    "message '" << msg << "' misses '" << needle << "'");
      CHECK(msg.find("bad.csv:") == 0);
    }
  };
  const std::string header = "user_id,item_id,timestamp,source,campaign_id\n";
  expect_error("u,i,1.0,organic\n", "header");
  expect_error(header + "u,i,1.0\n", "expected 4 or 5 fields");
  expect_error(header + "u,i,-1.0,organic\n", "timestamp");
  expect_error(header + "u,i,abc,organic\n", "timestamp");
  expect_error(header + "u,i,1.0,paid\n", "unknown source");
  expect_error(header + "u,i,1.0,campaign\n", "campaign_id");
  expect_error(header + "u,i,1.0,campaign,x\n", "campaign_id");
  expect_error(header + ",i,1.0,organic\n", "empty user");

  // the line number points at the offending row
  std::istringstream in(header + "u,i,1.0,organic\nu,j,zz,organic\n");
  try {
    load_log(in, "bad.csv");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("bad.csv:3:") == 0);
  }
}

TEST_CASE("log round-trips through its CSV form") {
  auto log = InteractionLog::with_universe(3, 3);
  log.add(0, 0, 0.5, Source::organic());
  log.add(1, 2, 1.25, Source::campaign(7));
  log.add(2, 1, 2.0, Source::organic());

  std::ostringstream out;
  save_log(log, out);
  CHECK(out.str().rfind("# offeval-log v1\n", 0) == 0);

  std::istringstream in(out.str());
  const InteractionLog back = load_log(in, "roundtrip");
  REQUIRE(back.size() == log.size());
  for (std::size_t idx = 0; idx < log.size(); ++idx) {
    const Interaction& a = log.interactions()[idx];
    const Interaction& b = back.interactions()[idx];
    CHECK(log.user_label(a.user) == back.user_label(b.user));
    CHECK(log.item_label(a.item) == back.item_label(b.item));
    CHECK(a.timestamp == b.timestamp);
    CHECK(a.source == b.source);
  }
}

TEST_CASE("load_log swallows a bulk file at realistic scale") {
  // 652 complete rows of 180 items plus 16 extras: 117376 distinct pairs.
  std::ostringstream body;
  body << "user_id,item_id,timestamp,source,campaign_id\n";
  double t = 0.0;
  for (int u = 0; u < 652; ++u)
    for (int i = 0; i < 180; ++i)
      body << 'u' << u << ",i" << i << ',' << (t += 0.001) << ",organic\n";
  for (int i = 0; i < 16; ++i)
    body << "u652,i" << i << ',' << (t += 0.001) << ",organic\n";

  std::istringstream in(body.str());
  const InteractionLog log = load_log(in, "bulk.csv");
  CHECK(log.size() == 117376);
  CHECK(log.n_users() == 653);
  CHECK(log.n_items() == 180);

  const Snapshot s = snapshot_at(log, 1e9);
  CHECK(s.n_edges() == 117376);
  CHECK(s.n_users() == 653);
  CHECK(s.n_items() == 180);
}

TEST_CASE("snapshot_at takes the inclusive time prefix") {
  auto log = oracle::make_log(3, 3, {{0, 0}, {1, 0}, {1, 1}, {2, 2}});
  // timestamps run 1, 2, 3, 4

  const Snapshot s0 = snapshot_at(log, 0.0);
  CHECK(s0.n_edges() == 0);
  CHECK(s0.n_users() == 0);
  CHECK(s0.n_items() == 0);
  CHECK(s0.n_user_slots() == 3);   // ids stay addressable
  CHECK(s0.profile(2).empty());    // empty profile, not an error

  const Snapshot s2 = snapshot_at(log, 2.0);
  CHECK(s2.n_edges() == 2);
  CHECK(s2.n_users() == 2);
  CHECK(s2.n_items() == 1);
  CHECK(s2.has_edge(1, 0));
  CHECK_FALSE(s2.has_edge(1, 1));

  const Snapshot s4 = snapshot_at(log, 10.0);
  CHECK(s4.n_edges() == 4);
  CHECK(s4.users_of(0).size() == 2);
  CHECK(s4.items_of(1).size() == 2);
}

TEST_CASE("profile views hide exactly one item") {
  auto log = oracle::make_log(2, 4, {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}});
  const Snapshot s = snapshot_at(log, 100.0);

  for (ItemId hidden : {0, 1, 2, 3}) {
    const ProfileView v = remove_item_view(s, 0, hidden);
    CHECK(v.size() == 3);
    CHECK(v.excluded_item().value() == hidden);
    CHECK_FALSE(v.contains(hidden));
    std::vector<ItemId> got = v.items();
    CHECK(got.size() == 3);
    for (ItemId i : got) CHECK(i != hidden);
  }

  const ProfileView full = s.profile(0);
  CHECK(full.size() == 4);
  CHECK_FALSE(full.excluded_item().has_value());
  CHECK(full.contains(2));

  CHECK_THROWS_AS(remove_item_view(s, 1, 0), std::invalid_argument);
}

TEST_CASE("views leave the snapshot untouched") {
  auto log = oracle::make_log(3, 3, {{0, 0}, {0, 1}, {1, 1}, {2, 2}});
  const Snapshot s = snapshot_at(log, 100.0);
  const std::uint64_t before = s.content_hash();

  for (UserId u : s.users())
    for (ItemId i : s.items_of(u)) {
      const ProfileView v = remove_item_view(s, u, i);
      (void)v.items();
      (void)v.contains(0);
    }
  CHECK(s.content_hash() == before);

  auto log2 = oracle::make_log(3, 3, {{0, 0}, {0, 1}, {1, 1}, {2, 2}});
  CHECK(snapshot_at(log2, 100.0).content_hash() == before);
  CHECK(snapshot_at(log2, 1.0).content_hash() != before);
}

TEST_CASE("degree histogram counts present users only") {
  auto log = oracle::make_log(4, 3, {{0, 0}, {1, 0}, {1, 1}, {2, 2}});
  const Snapshot s = snapshot_at(log, 100.0);
  const auto hist = degree_histogram(s);
  REQUIRE(hist.size() == 2);
  CHECK(hist.at(1) == 2);  // users 0 and 2
  CHECK(hist.at(2) == 1);  // user 1; user 3 never shows up
}

TEST_CASE("snapshot round-trips through its edge-list file") {
  auto log = oracle::make_log(3, 4, {{0, 0}, {0, 3}, {1, 1}, {2, 1}});
  const Snapshot s = snapshot_at(log, 2.5);

  const auto path = temp_file("snapshot_roundtrip.csv");
  save_snapshot(s, path.string());
  const Snapshot back = load_snapshot(path.string());
  CHECK(back.time() == s.time());
  CHECK(back.n_user_slots() == s.n_user_slots());
  CHECK(back.n_item_slots() == s.n_item_slots());
  CHECK(back.content_hash() == s.content_hash());
}

TEST_CASE("snapshot loader rejects foreign files") {
  const auto path = temp_file("not_a_snapshot.csv");
  std::ofstream(path) << "# some other format v9\nuser,item\n0,0\n";
  CHECK_THROWS_AS(load_snapshot(path.string()), std::runtime_error);

  const auto path2 = temp_file("bad_edge.csv");
  std::ofstream(path2) << "# offeval-snapshot v1\n"
                          "# time=1 user_slots=2 item_slots=2\n"
                          "user,item\n5,0\n";
  CHECK_THROWS_AS(load_snapshot(path2.string()), std::runtime_error);

  CHECK_THROWS_AS(load_snapshot("/nonexistent/snapshot.csv"),
                  std::runtime_error);
}
