#include "mpqkd/tally_io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

using namespace mpqkd;

namespace {

TallySnapshot sample(bool box7) {
  ProtocolConfig c;
  c.mode = Mode::MonteCarlo;
  c.rounds = 20000;
  c.distance_km = 20.0;
  c.strategy = box7 ? Strategy::Box7 : Strategy::Box2;
  TallySnapshot s;
  s.config = c;
  s.seed = 99;
  s.tallies = protosim::simulate(c, s.seed);
  return s;
}

}  // namespace

TEST(TallyIo, RoundTrip) {
  for (const bool box7 : {true, false}) {
    const auto s = sample(box7);
    ASSERT_GT(s.tallies.box2.pairs, 0u);
    const auto text = write_snapshot(s);
    const auto back = read_snapshot(text);
    EXPECT_EQ(back, s);
    EXPECT_EQ(write_snapshot(back), text);
  }
}

TEST(TallyIo, HeaderFields) {
  const auto doc = nlohmann::json::parse(write_snapshot(sample(true)));
  EXPECT_EQ(doc["schema"], "mpqkd.tallies");
  EXPECT_EQ(doc["version"], 1);
  EXPECT_EQ(doc["rounds"], 20000);
  EXPECT_EQ(doc["seed"], 99);
  EXPECT_TRUE(doc.contains("box7"));
}

TEST(TallyIo, RejectsDamagedSnapshots) {
  const auto good = nlohmann::json::parse(write_snapshot(sample(true)));
  auto damaged = [&](auto edit) {
    nlohmann::json d = good;
    edit(d);
    return d.dump();
  };
  EXPECT_THROW(read_snapshot("{"), SnapshotError);
  EXPECT_THROW(read_snapshot(damaged([](auto& d) { d["schema"] = "other"; })), SnapshotError);
  EXPECT_THROW(read_snapshot(damaged([](auto& d) { d["version"] = 2; })), SnapshotError);
  EXPECT_THROW(read_snapshot(damaged([](auto& d) { d.erase("box2"); })), SnapshotError);
  EXPECT_THROW(read_snapshot(damaged([](auto& d) { d["round_counts"].erase(0); })), SnapshotError);
  EXPECT_THROW(read_snapshot(damaged([](auto& d) { d["round_counts"][3] = -1; })), SnapshotError);
  EXPECT_THROW(read_snapshot(damaged([](auto& d) { d["box7"].erase("z_errors"); })), SnapshotError);
  EXPECT_THROW(read_snapshot(damaged([](auto& d) { d["config"]["mu"] = 0.038; })), ConfigError);
}
