#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SOLITONLAB_EXE) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (auto n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

bool has(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("classify") {
  auto r = run("classify --n 3 --s0 1 --w0 -2");
  CHECK(r.code == 0);
  CHECK(has(r.out, "GammaMinusBlowup"));
  CHECK(has(r.out, "blow-up bound"));
  r = run("classify --n 3 --s0 1 --w0 1");
  CHECK(r.code == 0);
  CHECK(has(r.out, "ConstantPlus"));
  r = run("classify --n 3 --s0 0 --w0 0");
  CHECK(r.code == 2);
  CHECK(has(r.out, "s0 must be positive"));
}

TEST_CASE("configuration errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("classify --s0 1").code == 2);
  CHECK(run("classify --s0 1 --w0 0 --action boost --region strip").code == 2);
  CHECK(run("classify --s0 1 --w0 0 --config /nonexistent.json").code == 2);
}

TEST_CASE("config file with flag override") {
  const std::string path = "cli_test_config.json";
  std::ofstream(path) << R"({"n": 3, "s0": 1, "w0": -2})";
  CHECK(has(run("classify --config " + path).out, "GammaMinusBlowup"));
  CHECK(has(run("classify --config " + path + " --w0 1").out, "ConstantPlus"));
  std::remove(path.c_str());
}

TEST_CASE("portrait to stdout") {
  const auto r = run("portrait --ns 0 --nw 0");
  CHECK(r.code == 0);
  CHECK(r.out == "trajectory_id,s0,w0,class,s,w,status\n");
}

TEST_CASE("verify") {
  auto r = run("verify bowl --n 2 --h 0.02,0.01,0.005");
  CHECK(r.code == 0);
  CHECK(has(r.out, "order p = "));
  CHECK(has(r.out, "PASS"));
  r = run("verify hybrid --order 2");
  CHECK(r.code == 0);
  CHECK(has(r.out, "jumps by order"));
  r = run("verify hybrid --order 2 --mismatched");
  CHECK(r.code == 1);
  r = run("verify const");
  CHECK(r.code == 1);
  CHECK(has(r.out, "FAIL"));
  CHECK(has(r.out, "R in [-1, -1]"));
}

TEST_CASE("mesh") {
  const std::string obj = "cli_test_bowl.obj";
  auto r = run("mesh --target bowl --angular 64 --profile-samples 200 --out " + obj);
  CHECK(r.code == 0);
  CHECK(has(r.out, "12800 vertices"));
  std::remove(obj.c_str());
  r = run("mesh --target bowl --n 3 --out cli_test_bowl3.obj");
  CHECK(r.code == 0);
  std::ifstream csv("cli_test_bowl3.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "s,f,fprime,fsecond");
  std::remove("cli_test_bowl3.csv");
}
