// prodsys command line: verification suites and object dumps for grid
// product-system models, driven entirely through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prodsys.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct CommonOpts {
  int k = 1;
  int level = 2;
  int coarse = 0;
  double tol = 1e-10;
  double tol_spectral = 1e-8;
  std::string state = "tracial";
  unsigned long long seed = 1;
  long long slice_cap = 4096;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--k", opts.k, "one-particle value-space dimension");
  cmd->add_option("--level", opts.level, "grid level L (2^L cells on [0,1])");
  cmd->add_option("--coarse", opts.coarse, "coarse observation level");
  cmd->add_option("--tol", opts.tol, "identity tolerance");
  cmd->add_option("--tol-spectral", opts.tol_spectral, "spectral tolerance");
  cmd->add_option("--state", opts.state, "faithful state: tracial | diag");
  cmd->add_option("--seed", opts.seed, "seed for reproducible random inputs");
  cmd->add_option("--slice-cap", opts.slice_cap, "largest allowed slice dimension");
  cmd->add_option("--out", opts.out, "write the JSON report to this file");
}

nlohmann::json config_json(const CommonOpts& opts, const std::string& suite) {
  return nlohmann::json{{"suite", suite},
                        {"k", opts.k},
                        {"level", opts.level},
                        {"coarse_level", opts.coarse},
                        {"tol_identity", opts.tol},
                        {"tol_spectral", opts.tol_spectral},
                        {"state", opts.state},
                        {"seed", opts.seed},
                        {"slice_cap", opts.slice_cap}};
}

int emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return kExitConfig;
    }
    f << text << "\n";
  }
  return kExitPass;
}

int run_suite_command(const CommonOpts& opts, const std::string& suite) {
  char* report = nullptr;
  prodsys_status st = prodsys_run_suite(config_json(opts, suite).dump().c_str(), &report);
  if (st != PRODSYS_OK) {
    std::cerr << "error: " << prodsys_last_error() << "\n";
    return kExitConfig;
  }
  std::string text(report);
  prodsys_string_free(report);
  int rc = emit(text, opts.out);
  if (rc != kExitPass) return rc;

  auto j = nlohmann::json::parse(text);
  int failed = 0, total = 0;
  for (const auto& c : j.at("checks")) {
    ++total;
    if (!c.at("passed").get<bool>()) ++failed;
  }
  std::cerr << "suite " << suite << ": " << (total - failed) << "/" << total << " checks passed\n";
  return j.at("passed").get<bool>() ? kExitPass : kExitFail;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid product-system verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(prodsys_version()));

  CommonOpts opts;

  auto* run = app.add_subcommand("run", "run a verification suite");
  std::string suite = "all";
  run->add_option("--suite", suite, "suite name (see README) or 'all'");
  add_common(run, opts);

  auto* check = app.add_subcommand("check-system", "structure checks on a serialized system");
  std::string input;
  double check_tol = 1e-10;
  check->add_option("--input", input, "system JSON file")->required();
  check->add_option("--tol", check_tol, "tolerance");

  auto* roots = app.add_subcommand("roots", "root spaces of a grid flow");
  std::string root_system = "ccr";
  roots->add_option("--system", root_system, "model family (ccr)");
  add_common(roots, opts);

  auto* ccr = app.add_subcommand("ccr", "grid CCR flow suites");
  std::string ccr_suite = "vacuum-roots";
  ccr->add_option("--suite", ccr_suite, "vacuum-roots | structure | units");
  add_common(ccr, opts);

  auto* amalgam = app.add_subcommand("amalgam", "amalgamated product suites");
  std::string mode = "spatial";
  std::string amalgam_config;
  amalgam->add_option("--mode", mode, "spatial | partial | contractive");
  amalgam->add_option("--config", amalgam_config, "JSON file with k/level/seed overrides");
  add_common(amalgam, opts);

  auto* cluster = app.add_subcommand("cluster", "cluster and random-set suites");
  std::string cluster_suite = "cluster";
  cluster->add_option("--suite", cluster_suite, "cluster | pushforward | randomset");
  add_common(cluster, opts);

  auto* dump = app.add_subcommand("dump", "serialize a named object");
  std::string object;
  int max_particles = 1;
  int component = 0;
  dump->add_option("--object", object,
                   "ccr-system | truncated-system | vacuum-family | "
                   "vacuum-root-family | distribution")
      ->required();
  dump->add_option("--max-particles", max_particles, "particle cap for truncated-system");
  dump->add_option("--component", component, "value component for vacuum-root-family");
  add_common(dump, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (run->parsed()) return run_suite_command(opts, suite);

    if (check->parsed()) {
      std::string payload = read_file(input);
      prodsys_system* sys = nullptr;
      if (prodsys_system_from_json(payload.c_str(), &sys) != PRODSYS_OK) {
        std::cerr << "error: " << prodsys_last_error() << "\n";
        return kExitConfig;
      }
      char* report = nullptr;
      prodsys_status st = prodsys_check_system(sys, check_tol, &report);
      prodsys_system_free(sys);
      if (st != PRODSYS_OK) {
        std::cerr << "error: " << prodsys_last_error() << "\n";
        return kExitConfig;
      }
      std::string text(report);
      prodsys_string_free(report);
      std::cout << text << "\n";
      return nlohmann::json::parse(text).at("passed").get<bool>() ? kExitPass : kExitFail;
    }

    if (roots->parsed()) {
      if (root_system != "ccr") {
        std::cerr << "error: unknown system family " << root_system << "\n";
        return kExitConfig;
      }
      return run_suite_command(opts, "ccr-roots");
    }

    if (ccr->parsed()) {
      std::string mapped = ccr_suite == "vacuum-roots" ? "ccr-roots"
                           : ccr_suite == "structure"  ? "system-checks"
                           : ccr_suite == "units"      ? "units"
                                                       : "";
      if (mapped.empty()) {
        std::cerr << "error: unknown ccr suite " << ccr_suite << "\n";
        return kExitConfig;
      }
      return run_suite_command(opts, mapped);
    }

    if (amalgam->parsed()) {
      if (!amalgam_config.empty()) {
        auto j = nlohmann::json::parse(read_file(amalgam_config));
        if (j.contains("k")) opts.k = j["k"].get<int>();
        if (j.contains("level")) opts.level = j["level"].get<int>();
        if (j.contains("seed")) opts.seed = j["seed"].get<unsigned long long>();
      }
      std::string mapped = mode == "spatial"       ? "amalgam-spatial"
                           : mode == "partial"     ? "amalgam-partial"
                           : mode == "contractive" ? "amalgam-spatial"
                                                   : "";
      if (mapped.empty()) {
        std::cerr << "error: unknown amalgam mode " << mode << "\n";
        return kExitConfig;
      }
      return run_suite_command(opts, mapped);
    }

    if (cluster->parsed()) {
      if (opts.coarse == 0 && opts.level >= 2) opts.coarse = 1;
      std::string mapped = cluster_suite == "cluster" ? "cluster"
                           : cluster_suite == "pushforward" || cluster_suite == "randomset"
                               ? "randomset"
                               : "";
      if (mapped.empty()) {
        std::cerr << "error: unknown cluster suite " << cluster_suite << "\n";
        return kExitConfig;
      }
      return run_suite_command(opts, mapped);
    }

    if (dump->parsed()) {
      nlohmann::json spec{{"object", object},
                          {"k", opts.k},
                          {"level", opts.level},
                          {"slice_cap", opts.slice_cap},
                          {"max_particles", max_particles},
                          {"component", component},
                          {"state", opts.state},
                          {"seed", opts.seed}};
      char* out = nullptr;
      if (prodsys_dump(spec.dump().c_str(), &out) != PRODSYS_OK) {
        std::cerr << "error: " << prodsys_last_error() << "\n";
        return kExitConfig;
      }
      std::string text(out);
      prodsys_string_free(out);
      return emit(text, opts.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
