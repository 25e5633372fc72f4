// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "tubemae/config/run_config.hpp"

namespace tubemae::cli {

/// Options every subcommand accepts.
struct CommonOptions {
  std::string config_path;
  std::string run_dir;
  std::string runs_root = "runs";
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  int workers = 1;
  std::vector<std::string> sets;  // "section.key=value"
};

/// A resolved configuration bound to its output directory.
class RunContext {
 public:
  /// Loads the config, applies --set entries then `flag_overrides` (later
  /// wins), validates, creates the run directory and writes config.ini.
  static RunContext open(const std::string& command, const CommonOptions& options,
                         std::vector<config::Override> flag_overrides = {});

  const config::RunConfig& config() const { return config_; }
  std::uint64_t seed() const { return config_.train.seed; }
  int workers() const { return workers_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  std::ofstream create(const std::string& name) const;
  /// Appends a line to run.log (free-form; not part of the reproducible set).
  void log(const std::string& line) const;

 private:
  config::RunConfig config_;
  std::filesystem::path dir_;
  int workers_ = 1;
};

}  // namespace tubemae::cli
