#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include <nlohmann/json.hpp>

#include "prodsys.h"

namespace {

std::string take(char* s) {
  std::string out(s);
  prodsys_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("build and inspect a grid flow") {
  prodsys_system* sys = nullptr;
  REQUIRE(prodsys_ccr_build(2, 2, 0, &sys) == PRODSYS_OK);
  CHECK(prodsys_system_level(sys) == 2);
  CHECK(prodsys_system_slice_dim(sys, 1) == 3);
  CHECK(prodsys_system_slice_dim(sys, 4) == 81);
  CHECK(prodsys_system_slice_dim(sys, 9) == 0);  // out of range

  char* report = nullptr;
  REQUIRE(prodsys_check_system(sys, 1e-10, &report) == PRODSYS_OK);
  auto j = nlohmann::json::parse(take(report));
  CHECK(j.at("passed").get<bool>());
  CHECK(j.at("isometry_defect").get<double>() <= 1e-12);

  int index = 0;
  REQUIRE(prodsys_index(sys, 7, &index) == PRODSYS_OK);
  CHECK(index == 2);

  prodsys_system_free(sys);
}

TEST_CASE("serialization round trips bit identically") {
  prodsys_system* sys = nullptr;
  REQUIRE(prodsys_ccr_build(1, 2, 0, &sys) == PRODSYS_OK);
  prodsys_system* trunc = nullptr;
  REQUIRE(prodsys_ccr_truncate(sys, 1, &trunc) == PRODSYS_OK);
  CHECK(prodsys_system_slice_dim(trunc, 4) == 5);

  char* json1 = nullptr;
  REQUIRE(prodsys_system_to_json(trunc, &json1) == PRODSYS_OK);
  std::string first = take(json1);

  prodsys_system* back = nullptr;
  REQUIRE(prodsys_system_from_json(first.c_str(), &back) == PRODSYS_OK);
  char* json2 = nullptr;
  REQUIRE(prodsys_system_to_json(back, &json2) == PRODSYS_OK);
  CHECK(take(json2) == first);

  char* report = nullptr;
  REQUIRE(prodsys_check_system(back, 1e-10, &report) == PRODSYS_OK);
  CHECK(nlohmann::json::parse(take(report)).at("passed").get<bool>());

  prodsys_system_free(back);
  prodsys_system_free(trunc);
  prodsys_system_free(sys);
}

TEST_CASE("tensor products through the c api") {
  prodsys_system* a = nullptr;
  prodsys_system* b = nullptr;
  REQUIRE(prodsys_ccr_build(1, 2, 0, &a) == PRODSYS_OK);
  REQUIRE(prodsys_ccr_build(2, 2, 0, &b) == PRODSYS_OK);
  prodsys_system* prod = nullptr;
  REQUIRE(prodsys_tensor(a, b, &prod) == PRODSYS_OK);
  CHECK(prodsys_system_slice_dim(prod, 4) == 16 * 81);
  prodsys_system_free(prod);
  prodsys_system_free(b);
  prodsys_system_free(a);
}

TEST_CASE("suites run through the c api") {
  nlohmann::json cfg{{"suite", "powers"}, {"k", 1}, {"level", 2}, {"seed", 3}};
  char* report = nullptr;
  REQUIRE(prodsys_run_suite(cfg.dump().c_str(), &report) == PRODSYS_OK);
  auto j = nlohmann::json::parse(take(report));
  CHECK(j.at("passed").get<bool>());
  CHECK(j.at("suite") == "powers");
  CHECK(j.at("checks").size() > 5);
}

TEST_CASE("error paths return codes and messages") {
  CHECK(prodsys_ccr_build(1, 2, 0, nullptr) == PRODSYS_ERR_INVALID_ARGUMENT);

  prodsys_system* sys = nullptr;
  CHECK(prodsys_ccr_build(0, 2, 0, &sys) == PRODSYS_ERR_INVALID_ARGUMENT);
  CHECK(prodsys_ccr_build(3, 4, 4096, &sys) == PRODSYS_ERR_SIZE_LIMIT);
  CHECK(std::string(prodsys_last_error()).size() > 0);

  prodsys_system* bad = nullptr;
  CHECK(prodsys_system_from_json("{not json", &bad) == PRODSYS_ERR_INVALID_ARGUMENT);

  char* report = nullptr;
  nlohmann::json cfg{{"suite", "no-such-suite"}};
  CHECK(prodsys_run_suite(cfg.dump().c_str(), &report) == PRODSYS_ERR_INVALID_ARGUMENT);
  nlohmann::json cfg2{{"suite", "cluster"}, {"level", 2}, {"coarse_level", 2}};
  CHECK(prodsys_run_suite(cfg2.dump().c_str(), &report) == PRODSYS_ERR_INVALID_ARGUMENT);

  char* out = nullptr;
  CHECK(prodsys_dump("{\"object\":\"mystery\"}", &out) == PRODSYS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("dumps through the c api") {
  nlohmann::json spec{{"object", "distribution"}, {"k", 1}, {"level", 2}};
  char* out = nullptr;
  REQUIRE(prodsys_dump(spec.dump().c_str(), &out) == PRODSYS_OK);
  auto j = nlohmann::json::parse(take(out));
  CHECK(j.at("cells") == 4);
  CHECK(j.at("probs").size() == 16);
  CHECK(std::string(prodsys_version()) == "1.0.0");
}
