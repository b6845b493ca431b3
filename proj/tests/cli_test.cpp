#include "wseq/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = wseq::cli::run_cli(std::move(args), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
public:
  TempDir() : path_(fs::temp_directory_path() / ("wseq_cli_test_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

private:
  fs::path path_;
};

wseq::cli::json first_record(const std::string& out) {
  return wseq::cli::json::parse(out.substr(0, out.find('\n')));
}

} // namespace

TEST(Cli, CheckExamples) {
  auto r = run({"check", "2", "3", "4", "5"});
  EXPECT_EQ(r.code, 0);
  const auto j = first_record(r.out);
  EXPECT_EQ(j["w_numbers"], (wseq::cli::json{3, 5}));
  EXPECT_EQ(j["w_indices"], (wseq::cli::json{1, 3}));

  EXPECT_EQ(run({"check", "2", "4", "6"}).code, 1);
  EXPECT_EQ(run({"check", "--method", "oracle", "2", "3", "4", "5"}).out, r.out);
  EXPECT_EQ(run({"check", "3", "2"}).code, 2);
  EXPECT_EQ(run({"check", "2", "x"}).code, 2);
  EXPECT_EQ(run({"check", "5"}).code, 2);
  EXPECT_EQ(run({"check"}).code, 2);
  EXPECT_EQ(run({"check", "--method", "magic", "2", "3"}).code, 2);
}

TEST(Cli, CheckReadsFiles) {
  TempDir dir;
  std::ofstream(dir / "seq.txt") << "# a comment\n2, 3\n4\t5\n";
  auto r = run({"check", "--file", (dir / "seq.txt").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(first_record(r.out)["w_numbers"], (wseq::cli::json{3, 5}));
  EXPECT_EQ(run({"check", "--file", (dir / "missing.txt").string()}).code, 2);
}

TEST(Cli, LargeNumbersAreStrings) {
  auto r = run({"check", "9007199254740993", "9007199254740995"});
  EXPECT_EQ(r.code, 0);
  const auto j = first_record(r.out);
  EXPECT_EQ(j["elements"][0], "9007199254740993");
  EXPECT_EQ(j["elements"][1], "9007199254740995");
  r = run({"check", "9007199254740992", "9007199254740994"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(first_record(r.out)["elements"][0].is_number());
}

TEST(Cli, WindowAndSearches) {
  auto r = run({"window", "--m", "2183", "--n", "17"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(first_record(r.out)["is_w"].get<bool>());
  EXPECT_EQ(run({"window", "--m", "2182", "--n", "17"}).code, 0);
  EXPECT_EQ(run({"window", "--m", "5", "--n", "1"}).code, 2);
  EXPECT_EQ(run({"window", "--m", "-1", "--n", "3"}).code, 2);
  EXPECT_EQ(run({"window", "--m", "18446744073709551615", "--n", "3"}).code, 2);

  r = run({"min-nonw", "--n", "2", "--m-max", "1000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "none\n");
  r = run({"min-nonw", "--n", "17", "--m-max", "10000"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(first_record(r.out)["m"], 2183);

  r = run({"hscan", "--m", "2183", "--n-max", "30"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(first_record(r.out)["nonw_lengths"], (wseq::cli::json{17}));
  EXPECT_EQ(run({"hscan", "--m", "10", "--n-max", "16"}).code, 0);
  EXPECT_EQ(run({"hscan", "--m", "10", "--n-max", "1"}).code, 2);
}

TEST(Cli, IntervalScans) {
  auto r = run({"theorem2", "--m-max", "100"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 101);
  EXPECT_EQ(run({"theorem2", "--m-max", "0"}).code, 2);

  EXPECT_EQ(run({"theorem3", "--m-from", "1000", "--m-to", "3000"}).code, 0);
  r = run({"theorem3", "--m-from", "1", "--m-to", "200", "--fail-from", "1"});
  EXPECT_EQ(r.code, 1);
  const auto s = wseq::cli::json::parse(r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1));
  EXPECT_EQ(s["mismatches"], (wseq::cli::json{7, 23, 113}));
  EXPECT_EQ(run({"theorem3", "--m-from", "1", "--m-to", "200"}).code, 0);
  EXPECT_EQ(run({"theorem3", "--eps", "0.05", "--m-from", "1", "--m-to", "200"}).out,
            run({"theorem3", "--eps", "1/20", "--m-from", "1", "--m-to", "200"}).out);
  EXPECT_EQ(run({"theorem3", "--eps", "1/2"}).code, 2);
  EXPECT_EQ(run({"theorem3", "--eps", "a/b"}).code, 2);
}

TEST(Cli, Families) {
  EXPECT_EQ(run({"q1", "--m-to", "200"}).code, 0);
  auto r = run({"q1", "--m-from", "2", "--m-to", "10", "--only-failures"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(first_record(r.out)["parameters"]["m"], 3);
  EXPECT_EQ(run({"q1", "--m-from", "1", "--m-to", "3"}).code, 2);

  EXPECT_EQ(run({"q2", "--a", "2", "--b", "5"}).code, 0);
  EXPECT_EQ(run({"q2", "--a", "2", "--b", "4"}).code, 2);
  EXPECT_EQ(run({"q2", "--a", "2"}).code, 2);
  EXPECT_EQ(run({"q2", "--b-max", "40", "--only-failures"}).code, 0);

  EXPECT_EQ(run({"q3", "--m-to", "300"}).code, 0);
  EXPECT_EQ(run({"q3", "--m-from", "1"}).code, 2);

  r = run({"fib", "--m", "5", "--n", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(first_record(r.out)["has_prime"].get<bool>());
  r = run({"fib", "--m", "100", "--n", "3"});
  EXPECT_EQ(first_record(r.out)["family_id"], "fibonacci");
  EXPECT_EQ(run({"fib", "--max-sum", "80"}).code, 0);
  EXPECT_EQ(run({"fib", "--m", "0", "--n", "3"}).code, 2);
  EXPECT_EQ(run({"fib", "--m", "3"}).code, 2);
  EXPECT_EQ(run({"fib", "--m", "3", "--n", "3", "--max-sum", "10"}).code, 2);
}

TEST(Cli, GrimmAndEstimate) {
  auto r = run({"grimm", "--limit", "30"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(R"({"m":23,"n":5,"pairs":[{"element":24,"prime":2},{"element":25,"prime":5},)"
                       R"({"element":26,"prime":13},{"element":27,"prime":3},{"element":28,"prime":7}]})"),
            std::string::npos);
  EXPECT_EQ(run({"grimm", "--limit", "3"}).code, 2);

  EXPECT_EQ(run({"estimate", "--kind", "pairwise"}).code, 2); // seed is mandatory
  r = run({"estimate", "--kind", "exists", "--size", "3", "--bound", "1000", "--trials", "20000", "--seed", "5"});
  EXPECT_EQ(r.code, 0);
  const auto j = first_record(r.out);
  EXPECT_EQ(j["trials"], 20000);
  EXPECT_NEAR(j["deviation"].get<double>(), j["estimate"].get<double>() - j["claimed"].get<double>(), 1e-15);
  r = run({"estimate", "--kind", "pairwise", "--bound", "2", "--seed", "1"});
  EXPECT_TRUE(first_record(r.out)["exhaustive"].get<bool>());
  EXPECT_DOUBLE_EQ(first_record(r.out)["estimate"].get<double>(), 0.75);
  EXPECT_EQ(run({"estimate", "--kind", "pairwise", "--size", "1", "--seed", "1"}).code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({"check", "--bogus", "2", "3"}).code, 2);
  EXPECT_EQ(run({"--format", "xml", "check", "2", "3"}).code, 2);
  r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("scan"), std::string::npos);
}

TEST(Cli, CsvProjection) {
  auto r = run({"--format", "csv", "theorem2", "--m-max", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "m,has_prime,is_w\n1,true,true\n2,true,true\n3,true,true\n"
            "summary,m_max,mismatches\ntheorem2,3,[]\n");
}

TEST(Cli, ThreadEnvironment) {
  ::setenv("WSEQ_THREADS", "0", 1);
  EXPECT_EQ(run({"scan", "--m-to", "100", "--n", "5"}).code, 2);
  ::setenv("WSEQ_THREADS", "3", 1);
  const auto env = run({"scan", "--m-to", "20000", "--n", "7", "--chunk", "1000"});
  ::unsetenv("WSEQ_THREADS");
  EXPECT_EQ(env.code, 0);
  EXPECT_EQ(env.out, run({"--threads", "1", "scan", "--m-to", "20000", "--n", "7", "--chunk", "1000"}).out);
}

TEST(Cli, ScanReportsAndValidates) {
  auto r = run({"scan", "--m-from", "10", "--m-to", "19", "--n", "5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 11);
  EXPECT_EQ(first_record(r.out)["m"], 10);
  EXPECT_EQ(first_record(r.out)["elapsed_nanos"], 0);
  EXPECT_EQ(run({"scan", "--m-to", "10", "--n", "1"}).code, 2);
  EXPECT_EQ(run({"scan", "--m-from", "5", "--m-to", "4", "--n", "3"}).code, 2);
  EXPECT_EQ(run({"scan", "--m-to", "10", "--n", "3", "--chunk", "0"}).code, 2);
  EXPECT_EQ(run({"scan", "--m-to", "10", "--n", "3", "--checkpoint", "x.ckpt"}).code, 2);
}

class CheckpointTest : public ::testing::TestWithParam<std::string> {};

TEST_P(CheckpointTest, InterruptedScanResumesByteIdentical) {
  TempDir dir;
  const std::string format = GetParam();
  const std::vector<std::string> base{"--format", format, "scan", "--m-to", "99999", "--n", "10"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };
  const auto full = dir / "full.out", part = dir / "part.out", ckpt = dir / "part.ckpt";

  ASSERT_EQ(run(with({"--out", full.string()})).code, 0);

  // 25 chunks of 4096; stop after 10 (40%).
  auto r = run(with({"--out", part.string(), "--checkpoint", ckpt.string(), "--max-chunks", "10"}));
  ASSERT_EQ(r.code, 0);
  auto saved = wseq::cli::json::parse(slurp(ckpt));
  EXPECT_EQ(saved["last_completed_chunk"], 9);
  EXPECT_EQ(saved["records_written"], 40960);
  EXPECT_EQ(saved["output_bytes"].get<std::uint64_t>(), fs::file_size(part));

  // A crash after writing past the checkpoint leaves trailing bytes.
  std::ofstream(part, std::ios::app) << "partial garbage";

  const std::string before = slurp(part);
  auto changed = with({"--out", part.string(), "--checkpoint", ckpt.string()});
  changed[6] = "11";
  EXPECT_EQ(run(changed).code, 2);
  EXPECT_EQ(slurp(part), before);

  ASSERT_EQ(run(with({"--out", part.string(), "--checkpoint", ckpt.string(), "--threads", "2"})).code, 0);
  EXPECT_EQ(slurp(part), slurp(full));
  saved = wseq::cli::json::parse(slurp(ckpt));
  EXPECT_EQ(saved["last_completed_chunk"], 24);
  EXPECT_EQ(saved["records_written"], 100000);

  // Rerunning a finished job reproduces the same file.
  ASSERT_EQ(run(with({"--out", part.string(), "--checkpoint", ckpt.string()})).code, 0);
  EXPECT_EQ(slurp(part), slurp(full));
}

INSTANTIATE_TEST_SUITE_P(Formats, CheckpointTest, ::testing::Values("jsonl", "csv"));

TEST(Checkpoint, FreshJobWithEmptyCheckpoint) {
  TempDir dir;
  const auto out = dir / "o.jsonl", ckpt = dir / "o.ckpt";
  std::ofstream(ckpt).close();
  ASSERT_EQ(run({"scan", "--m-to", "9999", "--n", "6", "--chunk", "1000", "--out", out.string(), "--checkpoint",
                 ckpt.string()})
                .code,
            0);
  const auto saved = wseq::cli::json::parse(slurp(ckpt));
  EXPECT_EQ(saved["last_completed_chunk"], 9);
  EXPECT_EQ(saved["total_chunks"], 10);
  EXPECT_EQ(saved["records_written"], 10000);
  EXPECT_FALSE(fs::exists(dir / "o.ckpt.tmp"));
}

TEST(Determinism, RepeatedInvocationsAreByteIdentical) {
  const std::vector<std::vector<std::string>> matrix{
      {"check", "6", "10", "15"},
      {"window", "--m", "2183", "--n", "17"},
      {"scan", "--m-to", "5000", "--n", "20", "--threads", "2", "--chunk", "512"},
      {"theorem2", "--m-max", "200"},
      {"--format", "csv", "theorem3", "--m-from", "1", "--m-to", "500"},
      {"q1", "--m-from", "2", "--m-to", "60"},
      {"q2", "--b-max", "25"},
      {"q3", "--m-to", "80"},
      {"fib", "--m", "20", "--n", "9"},
      {"grimm", "--limit", "2000"},
      {"estimate", "--kind", "exists", "--size", "3", "--trials", "50000", "--seed", "11", "--threads", "3"},
  };
  for (const auto& args : matrix) {
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(a.out.empty());
  }
}
