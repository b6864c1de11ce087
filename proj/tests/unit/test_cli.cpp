#include "mpqkd/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mpqkd;

namespace {

struct Run {
  int code;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mpqkd");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  testing::internal::CaptureStdout();
  testing::internal::CaptureStderr();
  const int code = cli::run(static_cast<int>(argv.size()), argv.data());
  testing::internal::GetCapturedStdout();
  return {code, testing::internal::GetCapturedStderr()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mpqkd_cli_" + std::to_string(::getpid()) + "_" +
                                        testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ScanMatchesGoldenFile) {
  const auto cfg = write("c.json", R"({"l": 2000})");
  const auto out = dir_ / "out";
  const auto r = invoke({"scan", "--config", cfg.string(), "--out", out.string(), "--grid", "0:200:100", "--l",
                         "2000,20000000"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(slurp(out / "scan.csv"), slurp(fs::path(MPQKD_GOLDEN_DIR) / "scan_small.csv"));
}

TEST_F(CliTest, CsvHeaderAndRowOrder) {
  ProtocolConfig c;
  const std::vector<double> d{300.0, 0.0};
  const std::vector<std::uint64_t> l{7, 2000};
  const auto rows = cli::run_scan(c, d, l, 3);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_DOUBLE_EQ(rows[0].distance_km, 300.0);
  EXPECT_EQ(rows[0].l, 7u);
  EXPECT_EQ(rows[1].l, 2000u);
  EXPECT_DOUBLE_EQ(rows[2].distance_km, 0.0);
  std::ostringstream csv;
  cli::write_scan_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "distance_km,l,R,R_star,ratio,e11x,Ez,q11z,r_p,r_z,s11z");
  EXPECT_EQ(cli::run_scan(c, d, l, 1).size(), 4u);
  std::ostringstream again;
  cli::write_scan_csv(again, cli::run_scan(c, d, l, 1));
  EXPECT_EQ(again.str(), csv.str());
}

TEST_F(CliTest, SingleDistanceRatioAboveOne) {
  const auto rows = cli::run_scan(ProtocolConfig{}, std::vector<double>{0.0}, std::vector<std::uint64_t>{2000});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GT(rows[0].report.ratio(), 1.0);
}

TEST_F(CliTest, DegenerateIntensitiesRejectedWithoutOutput) {
  const auto cfg = write("c.json", R"({"mu": 0.1, "nu": 0.1})");
  const auto out = dir_ / "out";
  const auto r = invoke({"scan", "--config", cfg.string(), "--out", out.string()});
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_NE(r.err.find("error[config]"), std::string::npos);
  EXPECT_NE(r.err.find("degenerate decoy system"), std::string::npos);
  EXPECT_NE(r.err.find("'nu'"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(invoke({}).code, cli::kUsageError);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kUsageError);
  EXPECT_EQ(invoke({"scan", "--config", (dir_ / "missing.json").string()}).code, cli::kUsageError);
  const auto unknown = write("u.json", R"({"colour": 3})");
  const auto r = invoke({"scan", "--config", unknown.string(), "--out", (dir_ / "o").string()});
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_NE(r.err.find("'colour'"), std::string::npos);
  EXPECT_EQ(invoke({"scan", "--grid", "5:1:1", "--out", (dir_ / "o").string()}).code, cli::kUsageError);
  const auto cfg = write("s.json", R"({"rounds": 0})");
  EXPECT_EQ(invoke({"simulate", "--config", cfg.string(), "--out", (dir_ / "o").string()}).code, cli::kConfigError);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
  // An output path that is a regular file.
  const auto blocker = write("blocker", "x");
  EXPECT_EQ(invoke({"scan", "--out", blocker.string()}).code, cli::kIoError);
}

TEST_F(CliTest, SimulateWritesSnapshotAndReport) {
  const auto cfg = write("c.json", R"({"rounds": 200000, "distance_km": 20, "seed": 4})");
  const auto out = dir_ / "sim";
  const auto r = invoke({"simulate", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto snap = read_snapshot(slurp(out / "tallies.json"));
  EXPECT_EQ(snap.seed, 4u);
  EXPECT_EQ(snap.tallies.rounds, 200000u);
  // The config echo re-parses to the configuration that ran.
  ProtocolConfig ran = parse_config(slurp(cfg));
  ran.mode = Mode::MonteCarlo;
  EXPECT_EQ(snap.config, ran);
  EXPECT_NE(slurp(out / "report.json").find("\"R_star\""), std::string::npos);
  for (const auto& e : fs::directory_iterator(out)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST_F(CliTest, AtomicWrite) {
  const auto p = dir_ / "f.txt";
  cli::write_file_atomic(p, "first");
  cli::write_file_atomic(p, "second");
  EXPECT_EQ(slurp(p), "second");
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(dir_)) {
    (void)e;
    ++entries;
  }
  EXPECT_EQ(entries, 1u);
  EXPECT_THROW(cli::write_file_atomic(dir_ / "no" / "such" / "f", "x"), std::exception);
}

TEST(Cli, ParseGrid) {
  EXPECT_EQ(cli::parse_grid("0:500:50").size(), 11u);
  EXPECT_EQ(cli::parse_grid("0:1:0.1").size(), 11u);
  EXPECT_DOUBLE_EQ(cli::parse_grid("10:10:1").front(), 10.0);
  EXPECT_THROW(cli::parse_grid("0:5"), std::invalid_argument);
  EXPECT_THROW(cli::parse_grid("0:5:x"), std::invalid_argument);
  EXPECT_THROW(cli::parse_grid("0:5:-1"), std::invalid_argument);
}

TEST(Cli, AppendixSmallGrid) {
  const std::vector<double> mus{0.1};
  const std::vector<double> nus{0.038};
  const std::vector<double> deltas{0.0, 1.0};
  const auto rep = cli::verify_appendix(8, 128, mus, nus, deltas, 1e-8);
  EXPECT_EQ(rep.cases.size(), 4u);
  EXPECT_TRUE(rep.passed());
  EXPECT_NE(cli::appendix_json(rep).find("\"passed\": true"), std::string::npos);
}
