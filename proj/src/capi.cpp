#include "prodsys.h"

#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "prodsys/ccr.hpp"
#include "prodsys/suites.hpp"

using namespace prodsys;

struct prodsys_system {
  GridSystem sys;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

prodsys_status status_of(const Error& e) {
  g_last_error = e.what();
  switch (e.code()) {
    case Errc::SizeLimit:
      return PRODSYS_ERR_SIZE_LIMIT;
    case Errc::BadInput:
    case Errc::UnknownSuite:
    case Errc::OutOfRange:
    case Errc::LevelMismatch:
    case Errc::LevelOrder:
      return PRODSYS_ERR_INVALID_ARGUMENT;
    default:
      return PRODSYS_ERR_BAD_SYSTEM;
  }
}

template <typename Fn>
prodsys_status guarded(Fn&& fn) {
  try {
    fn();
    return PRODSYS_OK;
  } catch (const Error& e) {
    return status_of(e);
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return PRODSYS_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PRODSYS_ERR_INTERNAL;
  }
}

prodsys_status require(bool ok, const char* message) {
  if (ok) return PRODSYS_OK;
  g_last_error = message;
  return PRODSYS_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* prodsys_version(void) { return kVersion; }

const char* prodsys_last_error(void) { return g_last_error.c_str(); }

prodsys_status prodsys_ccr_build(int k, int level, long long slice_cap, prodsys_system** out) {
  if (prodsys_status s = require(out != nullptr, "null output pointer")) return s;
  return guarded([&] {
    Eigen::Index cap = slice_cap > 0 ? static_cast<Eigen::Index>(slice_cap) : kDefaultSliceCap;
    *out = new prodsys_system{ccr_build(k, level, cap).sys};
  });
}

prodsys_status prodsys_ccr_truncate(const prodsys_system* sys, int max_particles,
                                    prodsys_system** out) {
  if (prodsys_status s = require(sys && out, "null argument")) return s;
  return guarded([&] {
    GridCcr ccr;
    ccr.level = sys->sys.level();
    ccr.k = static_cast<int>(sys->sys.dim(1)) - 1;
    ccr.sys = sys->sys;
    if (!sys->sys.pure() || ccr.k < 1)
      raise(Errc::BadInput, "truncation applies to grid ccr systems");
    *out = new prodsys_system{ccr_truncate(ccr, max_particles)};
  });
}

prodsys_status prodsys_tensor(const prodsys_system* a, const prodsys_system* b,
                              prodsys_system** out) {
  if (prodsys_status s = require(a && b && out, "null argument")) return s;
  return guarded([&] { *out = new prodsys_system{tensor_systems(a->sys, b->sys)}; });
}

prodsys_status prodsys_system_from_json(const char* json, prodsys_system** out) {
  if (prodsys_status s = require(json && out, "null argument")) return s;
  return guarded(
      [&] { *out = new prodsys_system{GridSystem::from_json(nlohmann::json::parse(json))}; });
}

prodsys_status prodsys_system_to_json(const prodsys_system* sys, char** json_out) {
  if (prodsys_status s = require(sys && json_out, "null argument")) return s;
  return guarded([&] { *json_out = dup_string(sys->sys.to_json().dump()); });
}

int prodsys_system_level(const prodsys_system* sys) { return sys ? sys->sys.level() : -1; }

long long prodsys_system_slice_dim(const prodsys_system* sys, int m) {
  if (!sys) return 0;
  try {
    return static_cast<long long>(sys->sys.dim(m));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 0;
  }
}

prodsys_status prodsys_check_system(const prodsys_system* sys, double tol,
                                    char** report_json_out) {
  if (prodsys_status s = require(sys && report_json_out, "null argument")) return s;
  return guarded([&] {
    StructureReport rep = check_system(sys->sys, tol > 0 ? tol : kTolIdentity);
    nlohmann::json j{{"isometry_defect", rep.isometry_defect},
                     {"coassociativity_defect", rep.coassociativity_defect},
                     {"surjective", rep.surjective},
                     {"passed", rep.passed}};
    *report_json_out = dup_string(j.dump());
  });
}

prodsys_status prodsys_index(const prodsys_system* sys, unsigned long long seed, int* index_out) {
  if (prodsys_status s = require(sys && index_out, "null argument")) return s;
  return guarded([&] { *index_out = index_of(sys->sys, seed); });
}

prodsys_status prodsys_run_suite(const char* config_json, char** report_json_out) {
  if (prodsys_status s = require(config_json && report_json_out, "null argument")) return s;
  return guarded([&] {
    SuiteConfig cfg = config_from_json(nlohmann::json::parse(config_json));
    Report rep = run_suite(cfg);
    *report_json_out = dup_string(report_to_json(rep).dump(2));
  });
}

prodsys_status prodsys_dump(const char* spec_json, char** json_out) {
  if (prodsys_status s = require(spec_json && json_out, "null argument")) return s;
  return guarded(
      [&] { *json_out = dup_string(dump_object(nlohmann::json::parse(spec_json)).dump()); });
}

void prodsys_system_free(prodsys_system* sys) { delete sys; }

void prodsys_string_free(char* s) { std::free(s); }

}  // extern "C"
