// entropic: run scenarios, sweeps, mask ablations and the verification suites.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "entropic/config.hpp"
#include "entropic/error.hpp"
#include "entropic/sim.hpp"
#include "entropic/trace_io.hpp"
#include "entropic/verify.hpp"

namespace fs = std::filesystem;
using entropic::Error;
using entropic::ErrorCode;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Turns leftover "--a.b value" / "--a.b=value" arguments into overrides.
Overrides collect_overrides(const std::vector<std::string>& extras) {
  Overrides out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() == 2) {
      throw Error(ErrorCode::kConfig, "unexpected argument '" + arg + "'");
    }
    std::string key = arg.substr(2);
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(key.substr(0, eq), key.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extras.size()) throw Error(ErrorCode::kConfig, "override --" + key + " needs a value");
    out.emplace_back(key, extras[++i]);
  }
  return out;
}

std::string default_output_dir() {
  const char* env = std::getenv("ENTROPIC_OUTPUT_DIR");
  return env && *env ? env : "entropic_out";
}

entropic::ScenarioConfig load_config(const std::string& path, const Overrides& overrides) {
  return entropic::parse_config(entropic::apply_overrides(entropic::read_text_file(path), overrides));
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, dir + ": " + ec.message());
  return fs::path(dir);
}

void write_manifest(const fs::path& path, const entropic::ScenarioConfig& cfg,
                    std::vector<std::string> outputs) {
  entropic::RunManifest m;
  m.config_hash = entropic::config_hash(cfg);
  m.artifact_version = std::string(entropic::artifact_version());
  m.seed = cfg.seed;
  m.output_paths = std::move(outputs);
  std::ofstream out(path);
  if (!(out << m.to_json())) throw Error(ErrorCode::kIo, path.string() + ": cannot write manifest");
}

// Writes <stem>.csv, <stem>.config.json and <stem>.manifest.json.
void save_run(const fs::path& dir, const std::string& stem, const entropic::ScenarioConfig& cfg,
              const entropic::Trace& trace) {
  const fs::path csv = dir / (stem + ".csv");
  const fs::path resolved = dir / (stem + ".config.json");
  entropic::write_trace(trace, csv.string());
  {
    std::ofstream out(resolved);
    if (!(out << entropic::serialize_config(cfg))) throw Error(ErrorCode::kIo, resolved.string() + ": cannot write");
  }
  write_manifest(dir / (stem + ".manifest.json"), cfg, {csv.string(), resolved.string()});
}

void print_summary(const std::string& label, const entropic::Trace& t, double target) {
  if (t.empty()) return;
  const auto& last = t.back();
  std::printf("%s: %zu steps, H0=%.6g, H_final=%.6g (target %.6g), alpha_final=%.6g\n", label.c_str(),
              t.size(), t.front().entropy_exact, last.entropy_exact + last.observed_dH, target, last.alpha);
}

int cmd_run(const std::string& config_path, const std::string& out_dir, const Overrides& overrides) {
  const auto cfg = load_config(config_path, overrides);
  const auto trace = entropic::run_scenario(cfg);
  const fs::path dir = prepare_dir(out_dir);
  const std::string stem = fs::path(config_path).stem().string();
  save_run(dir, stem, cfg, trace);
  print_summary(stem, trace, cfg.controller.target_entropy);
  std::printf("wrote %s\n", (dir / (stem + ".csv")).string().c_str());
  return kExitOk;
}

int cmd_sweep(const std::string& config_dir, const std::string& out_dir, std::size_t workers,
              const Overrides& overrides) {
  if (!fs::is_directory(config_dir)) throw Error(ErrorCode::kIo, config_dir + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kConfig, config_dir + ": no .json scenario files");
  std::vector<entropic::ScenarioConfig> configs;
  for (const auto& f : files) {
    try {
      configs.push_back(load_config(f.string(), overrides));
    } catch (const Error& e) {
      throw Error(e.code(), f.string() + ": " + e.what());
    }
  }
  const auto results = entropic::sweep(configs, workers);
  const fs::path dir = prepare_dir(out_dir);
  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string stem = files[i].stem().string();
    if (results[i].error) {
      ++failures;
      std::fprintf(stderr, "%s: %s\n", stem.c_str(), results[i].error->c_str());
      continue;
    }
    save_run(dir, stem, configs[i], results[i].trace);
    print_summary(stem, results[i].trace, configs[i].controller.target_entropy);
  }
  std::printf("%zu/%zu scenarios completed, outputs in %s\n", results.size() - failures, results.size(),
              dir.string().c_str());
  return failures ? kExitCheckFailed : kExitOk;
}

int cmd_ablate(const std::string& config_path, const std::string& out_dir, const Overrides& overrides) {
  const auto cfg = load_config(config_path, overrides);
  const fs::path dir = prepare_dir(out_dir);
  const std::string stem = fs::path(config_path).stem().string();
  struct Arm {
    std::string name;
    entropic::MaskSpec mask;
  };
  const std::vector<Arm> arms = {
      {"baseline", {}},
      {"mask_pos_high", {true, false, false, false, cfg.mask.prob_split}},
      {"mask_pos_low", {false, true, false, false, cfg.mask.prob_split}},
      {"mask_neg_high", {false, false, true, false, cfg.mask.prob_split}},
      {"mask_neg_low", {false, false, false, true, cfg.mask.prob_split}},
  };
  entropic::Trace base;
  for (const auto& arm : arms) {
    const auto trace = entropic::run_masking_ablation(cfg, arm.mask);
    auto arm_cfg = cfg;
    arm_cfg.controller.enabled = false;
    arm_cfg.mask = arm.mask;
    save_run(dir, stem + "." + arm.name, arm_cfg, trace);
    if (base.empty()) {
      base = trace;
      std::printf("%-14s H_final=%.6g\n", arm.name.c_str(), trace.back().entropy_exact + trace.back().observed_dH);
      continue;
    }
    double dev = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
      dev += std::abs((trace[k].entropy_exact + trace[k].observed_dH) - (base[k].entropy_exact + base[k].observed_dH));
    }
    dev /= static_cast<double>(trace.size());
    std::printf("%-14s H_final=%.6g mean|H-H_base|=%.6g\n", arm.name.c_str(),
                trace.back().entropy_exact + trace.back().observed_dH, dev);
  }
  std::printf("wrote %zu traces to %s\n", arms.size(), dir.string().c_str());
  return kExitOk;
}

int cmd_verify(const std::vector<std::string>& suites, bool inject_fault, bool list) {
  if (list) {
    for (const auto& s : entropic::all_suites()) std::printf("%s\n", s.c_str());
    return kExitOk;
  }
  entropic::VerifyOptions opts;
  opts.suites = suites;
  opts.inject_gradient_fault = inject_fault;
  const auto results = entropic::run_verification(opts);
  int passed = 0;
  for (const auto& r : results) {
    std::printf("%s\n", entropic::format_result(r).c_str());
    std::fflush(stdout);
    passed += r.pass;
  }
  std::printf("%d/%zu checks passed\n", passed, results.size());
  return passed == static_cast<int>(results.size()) ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-controlled policy optimization on tabular softmax bandits"};
  app.set_version_flag("--version", std::string(entropic::artifact_version()));
  app.require_subcommand(1);

  std::string out_dir = default_output_dir();
  std::string config_path;
  std::string config_dir;
  std::size_t workers = 0;
  std::vector<std::string> suites;
  bool inject_fault = false;
  bool list = false;

  const char* out_help = "Output directory (default: $ENTROPIC_OUTPUT_DIR or ./entropic_out)";
  auto* run = app.add_subcommand("run", "Run one scenario and write its trace");
  run->add_option("config", config_path, "Scenario JSON file")->required();
  run->add_option("-o,--out", out_dir, out_help);
  run->allow_extras();

  auto* sw = app.add_subcommand("sweep", "Run every scenario file in a directory in parallel");
  sw->add_option("config-dir", config_dir, "Directory of scenario JSON files")->required();
  sw->add_option("-o,--out", out_dir, out_help);
  sw->add_option("-j,--jobs", workers, "Worker threads (default: hardware concurrency)");
  sw->allow_extras();

  auto* ablate = app.add_subcommand("ablate-masks", "Run the four group-masking arms and the baseline");
  ablate->add_option("config", config_path, "Scenario JSON file")->required();
  ablate->add_option("-o,--out", out_dir, out_help);
  ablate->allow_extras();

  auto* verify = app.add_subcommand("verify", "Run the verification suites");
  verify->add_option("--suite", suites, "Suite to run (repeatable; default: all)");
  verify->add_flag("--inject-fault", inject_fault, "Perturb analytic gradients (negative control)");
  verify->add_flag("--list", list, "List suite names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, collect_overrides(run->remaining()));
    if (*sw) return cmd_sweep(config_dir, out_dir, workers, collect_overrides(sw->remaining()));
    if (*ablate) return cmd_ablate(config_path, out_dir, collect_overrides(ablate->remaining()));
    if (*verify) return cmd_verify(suites, inject_fault, list);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(entropic::to_string(e.code())).c_str(), e.what());
    switch (e.code()) {
      case ErrorCode::kConfig:
      case ErrorCode::kIo:
      case ErrorCode::kInvalidParameter:
      case ErrorCode::kInvalidInput:
        return kExitUsage;
      default:
        return kExitCheckFailed;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckFailed;
  }
  return kExitUsage;
}
