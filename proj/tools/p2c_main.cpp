// Experiment driver. Talks to the core exclusively through the public C API.
#include "pixel2catch.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

int log_level() {
  const char* v = std::getenv("P2C_LOG");
  if (!v) return 1;
  try {
    return std::stoi(v);
  } catch (...) {
    return 1;
  }
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[p2c] " << msg << "\n";
}

int die(const std::string& context) {
  std::cerr << "error: " << context << ": " << p2c_last_error() << "\n";
  return 1;
}

struct ConfigHandle {
  p2c_config* ptr = nullptr;
  ~ConfigHandle() { p2c_config_free(ptr); }
};

struct CommonOpts {
  std::string config_path;
  std::string variant;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "Experiment config file (JSON)");
  cmd->add_option("--variant", o.variant,
                  "Variant: proposed | wo-pf | only-center | only-wh | sa-rl");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--override", o.overrides, "Dotted KEY=VALUE config override (repeatable)");
  cmd->add_option("--seed", o.seed, "Experiment seed")->each([&o](const std::string&) {
    o.seed_set = true;
  });
}

// Resolves the configuration from file/variant/overrides/seed flags.
bool build_config(const CommonOpts& o, ConfigHandle& out) {
  std::vector<const char*> ov;
  ov.reserve(o.overrides.size());
  for (const std::string& s : o.overrides) ov.push_back(s.c_str());
  p2c_status rc;
  if (!o.config_path.empty()) {
    rc = p2c_config_load(o.config_path.c_str(), ov.empty() ? nullptr : ov.data(),
                         static_cast<int>(ov.size()), &out.ptr);
  } else if (!o.variant.empty()) {
    rc = p2c_config_default(o.variant.c_str(), &out.ptr);
    for (const char* one : ov) {
      if (rc != P2C_OK) break;
      // Defaults path: re-enter through text form so overrides share one code path.
      char* text = nullptr;
      rc = p2c_config_to_text(out.ptr, &text);
      if (rc != P2C_OK) break;
      p2c_config* merged = nullptr;
      rc = p2c_config_from_text(text, &one, 1, &merged);
      p2c_string_free(text);
      if (rc != P2C_OK) break;
      p2c_config_free(out.ptr);
      out.ptr = merged;
    }
  } else {
    std::cerr << "error: pass --config FILE or --variant NAME\n";
    return false;
  }
  if (rc != P2C_OK) {
    die("loading config");
    return false;
  }
  if (!o.variant.empty() && !o.config_path.empty() &&
      p2c_config_set_variant(out.ptr, o.variant.c_str()) != P2C_OK) {
    die("setting variant");
    return false;
  }
  if (o.seed_set && p2c_config_set_seed(out.ptr, o.seed) != P2C_OK) {
    die("setting seed");
    return false;
  }
  return true;
}

bool write_text(const fs::path& path, const char* text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) return false;
    f << text;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  return !ec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pixel-feature catching experiments"};
  app.require_subcommand(1);

  CommonOpts train_o, eval_o, roll_o, sysid_o;
  std::string resume, eval_checkpoint, roll_checkpoint, sysid_data;
  int eval_episodes = 300, roll_episodes = 1;
  bool oracle = false;

  CLI::App* train_cmd = app.add_subcommand("train", "Train a policy");
  add_common(train_cmd, train_o);
  train_cmd->add_option("--resume", resume, "Checkpoint to resume from");

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Evaluate a policy");
  add_common(eval_cmd, eval_o);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Trained checkpoint (omit for untrained)");
  eval_cmd->add_option("--episodes", eval_episodes, "Evaluation episodes");
  eval_cmd->add_flag("--oracle", oracle, "Evaluate the scripted interception oracle instead");

  CLI::App* roll_cmd = app.add_subcommand("rollout", "Record episode traces");
  add_common(roll_cmd, roll_o);
  roll_cmd->add_option("--checkpoint", roll_checkpoint, "Trained checkpoint (omit for untrained)");
  roll_cmd->add_option("--episodes", roll_episodes, "Episodes to trace");

  CLI::App* sysid_cmd = app.add_subcommand("sysid", "Fit joint gains from trajectories");
  add_common(sysid_cmd, sysid_o);
  sysid_cmd->add_option("--data", sysid_data, "Trajectory CSV (t,joint,target,measured)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) {
    ConfigHandle cfg;
    if (!build_config(train_o, cfg)) return 1;
    info("training into " + train_o.out_dir);
    if (p2c_train(cfg.ptr, train_o.out_dir.c_str(), resume.empty() ? nullptr : resume.c_str()) !=
        P2C_OK)
      return die("train");
    info("done: " + train_o.out_dir + "/metrics.csv, checkpoint.bin, config.json");
    return 0;
  }

  if (eval_cmd->parsed()) {
    ConfigHandle cfg;
    if (!build_config(eval_o, cfg)) return 1;
    char* json_text = nullptr;
    char* table = nullptr;
    p2c_status rc;
    if (oracle) {
      rc = p2c_evaluate_oracle(cfg.ptr, eval_episodes, eval_o.seed, &json_text, &table);
    } else {
      rc = p2c_evaluate(cfg.ptr, eval_checkpoint.empty() ? nullptr : eval_checkpoint.c_str(),
                        eval_episodes, eval_o.seed, &json_text, &table);
    }
    if (rc != P2C_OK) return die("evaluate");
    std::cout << table;
    const fs::path report = fs::path(eval_o.out_dir) / "eval_report.json";
    const bool ok = write_text(report, json_text);
    p2c_string_free(json_text);
    p2c_string_free(table);
    if (!ok) {
      std::cerr << "error: cannot write " << report << "\n";
      return 1;
    }
    info("report: " + report.string());
    return 0;
  }

  if (roll_cmd->parsed()) {
    ConfigHandle cfg;
    if (!build_config(roll_o, cfg)) return 1;
    fs::create_directories(roll_o.out_dir);
    const fs::path trace = fs::path(roll_o.out_dir) / "trace.jsonl";
    int records = 0;
    if (p2c_rollout(cfg.ptr, roll_checkpoint.empty() ? nullptr : roll_checkpoint.c_str(),
                    roll_episodes, roll_o.seed, trace.string().c_str(), &records) != P2C_OK)
      return die("rollout");
    info("wrote " + std::to_string(records) + " records to " + trace.string());
    return 0;
  }

  // sysid — variant is irrelevant to gain fitting, so default it
  if (sysid_o.config_path.empty() && sysid_o.variant.empty()) sysid_o.variant = "proposed";
  ConfigHandle cfg;
  if (!build_config(sysid_o, cfg)) return 1;
  char* json_text = nullptr;
  if (p2c_sysid(cfg.ptr, sysid_data.c_str(), &json_text) != P2C_OK) return die("sysid");
  std::cout << json_text << "\n";
  const fs::path report = fs::path(sysid_o.out_dir) / "sysid_report.json";
  const bool ok = write_text(report, json_text);
  p2c_string_free(json_text);
  if (!ok) {
    std::cerr << "error: cannot write " << report << "\n";
    return 1;
  }
  info("report: " + report.string());
  return 0;
}
