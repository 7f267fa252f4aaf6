#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <json.hpp>

#include <string>

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome run_scv(const std::string& args) {
  std::string cmd = std::string(SCV_BINARY) + " " + args + " 2>&1";
  FILE* f = popen(cmd.c_str(), "r");
  Outcome r{-1, ""};
  if (!f) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  int status = pclose(f);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string program(const std::string& file) { return std::string(SCV_PROGRAMS_DIR) + "/" + file; }

}  // namespace

TEST(Cli, VerifiedProgramExitsZero) {
  Outcome r = run_scv("verify " + program("e2o.scv") + " --solver none");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("e2o: VERIFIED"), std::string::npos) << r.out;
}

TEST(Cli, VerifyIsTheDefaultCommand) {
  Outcome r = run_scv(program("e2o.scv") + " --solver none");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("e2o: VERIFIED"), std::string::npos) << r.out;
}

TEST(Cli, BlamedProgramExitsOneWithTrace) {
  Outcome r = run_scv("verify " + program("bad-pos.scv"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("f: BLAMED"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("1. "), std::string::npos) << r.out;
}

TEST(Cli, ExhaustedRunExitsTwo) {
  Outcome r = run_scv("verify " + program("fact.scv") + " --no-summarize --budget 1000");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("UNKNOWN"), std::string::npos) << r.out;
}

TEST(Cli, UsageAndParseErrorsExitThree) {
  EXPECT_EQ(run_scv("verify /nonexistent/file.scv").code, 3);
  EXPECT_EQ(run_scv("verify " + program("e2o.scv") + " --budget nope").code, 3);
  std::string bad = testing::TempDir() + "/bad.scv";
  std::ofstream(bad) << "(top (car))\n";
  Outcome r = run_scv("verify " + bad);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("1:"), std::string::npos) << r.out;
}

TEST(Cli, JsonReportIsDeterministic) {
  Outcome a = run_scv("verify " + program("bad-pos.scv") + " --json --solver none");
  Outcome b = run_scv("verify " + program("bad-pos.scv") + " --json --solver none");
  EXPECT_EQ(a.code, 1);
  EXPECT_EQ(a.out, b.out);
  auto j = nlohmann::json::parse(a.out);
  ASSERT_TRUE(j.contains("modules"));
  ASSERT_EQ(j["modules"].size(), 1u);
  EXPECT_EQ(j["modules"][0]["name"], "f");
  EXPECT_EQ(j["modules"][0]["verdict"], "BLAMED");
  EXPECT_EQ(j["modules"][0]["blame"]["pos"], "f");
  EXPECT_FALSE(j["modules"][0]["trace"].empty());
  EXPECT_TRUE(j["checks"].is_number());
}

TEST(Cli, RunUsesTheConcreteInterpreter) {
  Outcome ok = run_scv("run " + program("e2o.scv"));
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "3\n");
  Outcome bad = run_scv("run " + program("bad-pos.scv"));
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("blame f"), std::string::npos);
}

TEST(Cli, SoundnessCommand) {
  Outcome r = run_scv("soundness --seed 3 --count 20");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("violations: 0"), std::string::npos) << r.out;
}
