// Exit-code contract of the command line: 0 when every check passes, 1 when
// a suite reports failures, 2 on configuration errors.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(PRODSYS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("suite runs exit with the pass code") {
  CHECK(run("run --suite powers --k 1 --level 2 --seed 5") == 0);
  CHECK(run("roots --system ccr --k 2 --level 2") == 0);
  CHECK(run("ccr --k 1 --level 2 --suite vacuum-roots") == 0);
}

TEST_CASE("configuration errors exit with code two") {
  CHECK(run("run --suite no-such-suite") == 2);
  CHECK(run("run --suite cluster --level 2 --coarse 2") == 2);
  CHECK(run("roots --system heat-bath") == 2);
  CHECK(run("check-system --input /nonexistent.json") == 2);
  CHECK(run("definitely-not-a-command") == 2);
}

TEST_CASE("reports land in files and round trip") {
  std::string path = "cli_report_test.json";
  CHECK(run("run --suite powers --k 1 --level 2 --out " + path) == 0);
  std::ifstream f(path);
  REQUIRE(f.good());
  nlohmann::json j = nlohmann::json::parse(f);
  CHECK(j.at("passed").get<bool>());
  CHECK(j.at("suite") == "powers");
  std::remove(path.c_str());

  std::string sys_path = "cli_system_test.json";
  CHECK(run("dump --object truncated-system --k 1 --level 2 --out " + sys_path) == 0);
  CHECK(run("check-system --input " + sys_path) == 0);
  std::remove(sys_path.c_str());
}
