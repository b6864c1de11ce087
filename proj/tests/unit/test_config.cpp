#include "mpqkd/config.hpp"

#include <gtest/gtest.h>

using namespace mpqkd;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  const ProtocolConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(parse_config("{}"), c);
  EXPECT_DOUBLE_EQ(c.mu, 0.429);
  EXPECT_DOUBLE_EQ(c.nu, 0.038);
}

TEST(Config, RoundTrip) {
  ProtocolConfig c;
  c.mu = 0.5;
  c.nu = 0.01;
  c.l = 20000000;
  c.distance_km = 123.25;
  c.dark_count = 3e-9;
  c.rounds = 1000;
  c.strategy = Strategy::Box2;
  c.mode = Mode::MonteCarlo;
  c.seed = 18446744073709551615ull;
  c.phase_slices = 8;
  EXPECT_EQ(parse_config(to_json(c)), c);
  EXPECT_EQ(parse_config(to_json(ProtocolConfig{})), ProtocolConfig{});
}

TEST(Config, ChannelSplitsDistance) {
  ProtocolConfig c;
  c.distance_km = 100.0;
  EXPECT_DOUBLE_EQ(c.channel().distance_km, 50.0);
  EXPECT_DOUBLE_EQ(c.channel().visibility, c.visibility);
}

TEST(Config, RejectsWithFieldName) {
  EXPECT_EQ(field_of(R"({"bogus": 1})"), "bogus");
  EXPECT_EQ(field_of(R"({"mu": "high"})"), "mu");
  EXPECT_EQ(field_of(R"({"p_z": 1.0})"), "p_z");
  EXPECT_EQ(field_of(R"({"l": 0})"), "l");
  EXPECT_EQ(field_of(R"({"l": 2.5})"), "l");
  EXPECT_EQ(field_of(R"({"rounds": -3})"), "rounds");
  EXPECT_EQ(field_of(R"({"nu": 0.5})"), "nu");
  EXPECT_EQ(field_of(R"({"phase_slices": 7})"), "phase_slices");
  EXPECT_EQ(field_of(R"({"strategy": "box3"})"), "strategy");
  EXPECT_EQ(field_of(R"({"mode": "montecarlo"})"), "rounds");
  EXPECT_EQ(field_of(R"({"mu": 30.0})"), "cutoff");
  EXPECT_EQ(field_of("[1, 2]"), "");
  EXPECT_EQ(field_of("{not json"), "");
  EXPECT_EQ(field_of(R"({"l": 2e7})"), "<accepted>");
}

TEST(Config, EqualIntensitiesAreDegenerate) {
  try {
    parse_config(R"({"mu": 0.2, "nu": 0.2})");
    FAIL() << "accepted mu == nu";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "nu");
    EXPECT_NE(std::string(e.what()).find("degenerate decoy system"), std::string::npos);
  }
}
