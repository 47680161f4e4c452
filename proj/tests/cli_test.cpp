#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "uscc/cli.hpp"

namespace uscc {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> with_fixture(std::vector<std::string> args, const std::string& name) {
  for (const auto& f : testing::fixture_files(name)) args.push_back(f);
  return args;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("uscc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out_dir() const { return dir_.string(); }
  fs::path dir_;
};

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

TEST_F(CliTest, BuildWritesShadersAndManifest) {
  CliRun r = run(with_fixture({"build", "-o", out_dir()}, "filter"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "shaders" / "FilterShader.hlsl"));
  EXPECT_TRUE(fs::exists(dir_ / "manifest.json"));
  EXPECT_EQ(load_manifest(slurp(dir_ / "manifest.json")).entry_points[0].variants.size(), 12u);
}

TEST_F(CliTest, EmitSelectsOutputs) {
  ASSERT_EQ(run(with_fixture({"build", "-o", out_dir(), "--emit", "manifest"}, "filter")).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "manifest.json"));
  EXPECT_FALSE(fs::exists(dir_ / "shaders"));
  fs::remove_all(dir_);
  ASSERT_EQ(run(with_fixture({"build", "-o", out_dir(), "--emit", "shaders"}, "filter")).code, 0);
  EXPECT_FALSE(fs::exists(dir_ / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir_ / "shaders" / "FilterShader.hlsl"));
  EXPECT_EQ(run(with_fixture({"build", "-o", out_dir(), "--emit", "binaries"}, "filter")).code, 2);
}

TEST_F(CliTest, RebuildIsByteIdentical) {
  ASSERT_EQ(run(with_fixture({"build", "-o", out_dir()}, "temporal")).code, 0);
  const std::string shader = slurp(dir_ / "shaders" / "TemporalShader.hlsl");
  const std::string manifest = slurp(dir_ / "manifest.json");
  auto files = testing::fixture_files("temporal");
  std::vector<std::string> args{"build", "-o", out_dir()};
  args.insert(args.end(), files.rbegin(), files.rend());
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(slurp(dir_ / "shaders" / "TemporalShader.hlsl"), shader);
  EXPECT_EQ(slurp(dir_ / "manifest.json"), manifest);
}

TEST_F(CliTest, CheckReportsDiagnostics) {
  CliRun ok = run(with_fixture({"build", "--check"}, "filter"));
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(ok.err.empty());
  CliRun bad = run({"build", "--check", testing::fixture_root() + "/mutations/R2.usl"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("error[R2]"), std::string::npos) << bad.err;
  EXPECT_NE(bad.err.find("R2.usl:"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(CliTest, ListVariants) {
  CliRun r = run(with_fixture({"build", "--list-variants"}, "filter"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 12);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "0  0  filterMethod=HighQualityFilter  IterationCount=2");
  CliRun t = run(with_fixture({"build", "--list-variants"}, "temporal"));
  EXPECT_EQ(count_lines(t.out), 30);
  EXPECT_NE(t.out.find("quality=High"), std::string::npos);
  EXPECT_NE(t.out.find("cache.UseClamp=true"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"build"}).code, 2);
  EXPECT_EQ(run(with_fixture({"build"}, "filter")).code, 2);
  EXPECT_EQ(run(with_fixture({"build", "-o", out_dir(), "--max-variants", "0"}, "filter")).code, 2);
  EXPECT_EQ(run(with_fixture({"build", "-o", out_dir(), "--frobnicate"}, "filter")).code, 2);
  EXPECT_EQ(run({"build", "-o", out_dir(), "/nonexistent/x.usl"}).code, 1);
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(CliTest, VariantBudgetFailureWritesNothing) {
  CliRun r = run(with_fixture({"build", "-o", out_dir(), "--max-variants", "5"}, "filter"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("VariantExplosion"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(CliTest, VerifyWritesReport) {
  CliRun r = run(with_fixture({"build", "-o", out_dir(), "--verify", "--trials", "10", "--seed", "3"}, "filter"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = slurp(dir_ / "verify_report.json");
  EXPECT_EQ(report.front(), '[');
  EXPECT_NE(report.find("FilterShader"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "manifest.json"));
}

TEST_F(CliTest, VerifyRefusesPassthrough) {
  CliRun r = run(with_fixture({"build", "-o", out_dir(), "--verify", "--trials", "1"}, "passthrough"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Passthrough"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_));
  EXPECT_EQ(run(with_fixture({"build", "-o", out_dir()}, "passthrough")).code, 0);
}

TEST_F(CliTest, DumpAst) {
  CliRun r = run(with_fixture({"build", "--dump-ast"}, "filter"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("// " + testing::fixture_files("filter")[0]), std::string::npos);
  EXPECT_NE(r.out.find("FilterShader"), std::string::npos);
  EXPECT_NE(r.out.find("doFiltering"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_));
}

}  // namespace
}  // namespace uscc
