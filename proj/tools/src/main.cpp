// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// tubemae: data generation, pre-training, evaluation and self-checks.

#include <CLI11.hpp>
#include <functional>
#include <iostream>

#include "commands.hpp"
#include "errors.hpp"
#include "tubemae/common/error.hpp"

using namespace tubemae::cli;

namespace {

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--run-dir", o.run_dir, "Output directory (default: <runs-root>/<command>-<timestamp>)");
  cmd->add_option("--runs-root", o.runs_root, "Parent of timestamped run directories")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Master seed (overrides train.seed)");
  cmd->add_option("--epochs", o.epochs, "Overrides train.epochs");
  cmd->add_option("--workers", o.workers, "Threads for data generation")->capture_default_str();
  cmd->add_option("--set", o.sets, "Override a key: section.key=value (repeatable)");
}

void add_encoder_source(CLI::App* cmd, EncoderSource& s) {
  auto* ck = cmd->add_option("--checkpoint", s.checkpoint, "Pre-trained checkpoint");
  auto* rnd = cmd->add_flag("--random-init", s.random_init, "Start from randomly initialized weights");
  ck->excludes(rnd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked point-tube pre-training for point cloud videos"};
  app.require_subcommand(1);

  CommonOptions common;
  EncoderSource source;
  PretrainOptions pretrain;
  AttentionOptions attention;
  std::optional<double> fraction;
  std::optional<int> n_way, m_shot;
  double rtol = 1e-4;
  int pairs = 200;
  double tolerance = 1e-6;
  std::function<int()> action;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset and its manifest");
  add_common(gen, common);
  gen->callback([&] { action = [&] { return run_gen_data(common); }; });

  auto* pre = app.add_subcommand("pretrain", "Self-supervised pre-training");
  add_common(pre, common);
  pre->add_option("--resume", pretrain.resume, "Continue from a checkpoint of the same configuration");
  pre->add_option("--save-every", pretrain.save_every, "Epochs between intermediate checkpoints");
  pre->callback([&] { action = [&] { return run_pretrain(common, pretrain); }; });

  auto* probe = app.add_subcommand("probe", "Linear probe on a frozen encoder");
  add_common(probe, common);
  add_encoder_source(probe, source);
  probe->callback([&] { action = [&] { return run_probe(common, source); }; });

  auto* ft = app.add_subcommand("finetune", "End-to-end fine-tuning for recognition");
  add_common(ft, common);
  add_encoder_source(ft, source);
  ft->add_option("--fraction", fraction, "Share of training videos (overrides eval.fraction)");
  ft->callback([&] { action = [&] { return run_finetune(common, source, fraction); }; });

  auto* few = app.add_subcommand("fewshot", "n-way m-shot split and fine-tuning");
  add_common(few, common);
  add_encoder_source(few, source);
  few->add_option("--n-way", n_way, "Classes sampled (overrides eval.n_way)");
  few->add_option("--m-shot", m_shot, "Training videos per class (overrides eval.m_shot)");
  few->callback([&] { action = [&] { return run_fewshot(common, source, n_way, m_shot); }; });

  auto* seg = app.add_subcommand("eval-seg", "Per-frame segmentation head and segment metrics");
  add_common(seg, common);
  add_encoder_source(seg, source);
  seg->callback([&] { action = [&] { return run_eval_seg(common, source); }; });

  auto* attn = app.add_subcommand("export-attn", "Export encoder attention weights of one video");
  add_common(attn, common);
  attn->add_option("--checkpoint", attention.checkpoint, "Pre-trained checkpoint")->required();
  attn->add_option("--video", attention.video, "Video index (train then test order)")->capture_default_str();
  attn->add_option("--layer", attention.layer, "Encoder layer (default: last)");
  attn->callback([&] { action = [&] { return run_export_attn(common, attention); }; });

  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of every objective");
  add_common(grad, common);
  grad->add_option("--rtol", rtol, "Relative tolerance")->capture_default_str();
  grad->callback([&] { action = [&] { return run_grad_check(common, rtol); }; });

  auto* cham = app.add_subcommand("chamfer-oracle", "Compare the Chamfer loss with a naive reference");
  add_common(cham, common);
  cham->add_option("--pairs", pairs, "Random set pairs")->capture_default_str();
  cham->add_option("--tolerance", tolerance, "Absolute tolerance")->capture_default_str();
  cham->callback([&] { action = [&] { return run_chamfer_oracle(common, pairs, tolerance); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    return action();
  } catch (const tubemae::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const MissingInput& e) {
    std::cerr << "missing input: " << e.what() << '\n';
    return kMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
}
