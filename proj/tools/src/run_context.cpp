// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_context.hpp"

#include <chrono>
#include <ctime>
#include <iostream>

#include "tubemae/common/error.hpp"

namespace tubemae::cli {

namespace fs = std::filesystem;

namespace {

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

fs::path fresh_dir(const fs::path& root, const std::string& command) {
  const std::string base = command + "-" + timestamp();
  fs::path candidate = root / base;
  for (int n = 1; fs::exists(candidate); ++n) candidate = root / (base + "-" + std::to_string(n));
  return candidate;
}

}  // namespace

RunContext RunContext::open(const std::string& command, const CommonOptions& options,
                            std::vector<config::Override> flag_overrides) {
  RunContext ctx;
  ctx.config_ = options.config_path.empty() ? config::RunConfig{} : config::load_config(options.config_path);

  std::vector<config::Override> applied;
  for (const auto& s : options.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
    applied.push_back({s.substr(0, eq), s.substr(eq + 1), "--set"});
  }
  if (options.seed) applied.push_back({"train.seed", std::to_string(*options.seed), "--seed"});
  if (options.epochs) applied.push_back({"train.epochs", std::to_string(*options.epochs), "--epochs"});
  for (auto& o : flag_overrides) applied.push_back(std::move(o));
  for (const auto& o : applied) config::apply_override(ctx.config_, o.key, o.value);
  ctx.config_.validate();

  ctx.workers_ = options.workers;
  if (ctx.workers_ < 1) throw ConfigError("--workers must be at least 1");
  ctx.dir_ = options.run_dir.empty() ? fresh_dir(options.runs_root, command) : fs::path(options.run_dir);
  fs::create_directories(ctx.dir_);

  auto snapshot = ctx.create("config.ini");
  snapshot << "# tubemae " << command << (options.config_path.empty() ? "" : " from " + options.config_path) << '\n';
  snapshot << config::render_config(ctx.config_, applied);
  std::cerr << "run directory: " << ctx.dir_.string() << '\n';
  return ctx;
}

std::ofstream RunContext::create(const std::string& name) const {
  std::ofstream out(path(name), std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path(name).string());
  return out;
}

void RunContext::log(const std::string& line) const {
  std::ofstream out(path("run.log"), std::ios::app);
  out << line << '\n';
  std::cerr << line << '\n';
}

}  // namespace tubemae::cli
