// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "tubemae/common/error.hpp"
#include "tubemae/config/run_config.hpp"

namespace cf = tubemae::config;

namespace {

std::string error_of(const std::string& text) {
  try {
    cf::parse_config(text, "run.ini");
  } catch (const tubemae::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsFollowTheDeskScaleSetup) {
  const cf::RunConfig c;
  EXPECT_EQ(c.data.classes, 3);
  EXPECT_EQ(c.data.videos_per_class, 20);
  EXPECT_EQ(c.data.frames, 24);
  EXPECT_EQ(c.data.points, 256);
  EXPECT_EQ(c.model.encoder.channels, 128);
  EXPECT_EQ(c.model.encoder.depth, 5);
  EXPECT_EQ(c.model.encoder.heads, 8);
  EXPECT_EQ(c.model.decoder.depth, 4);
  EXPECT_EQ(c.model.decoder.heads, 8);
  EXPECT_EQ(c.model.momentum, 0.999);
  EXPECT_EQ(c.model.tubes.neighbors, 32);
  EXPECT_EQ(c.model.tubes.tube_frames, 3);
  EXPECT_EQ(c.model.tubes.temporal_stride, 2);
  EXPECT_EQ(c.model.tubes.spatial_stride, 32);
  EXPECT_EQ(c.pretrain.loss.temperature, 0.1);
  EXPECT_EQ(c.train.base_lr, 3e-4);
  EXPECT_EQ(c.train.weight_decay, 5e-2);
  EXPECT_EQ(c.eval.finetune_lr, 5e-4);
  EXPECT_EQ(c.eval.finetune_weight_decay, 1e-4);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesSectionsCommentsAndEnums) {
  const auto c = cf::parse_config(
      "# desk run\n"
      "[data]\nclasses = 4\ndomain = B\n"
      "[model]\nchannels = 64\naggregation = mlp-max\nlatent_tokens = false\n"
      "; masking\n[mask]\nstrategy = block\nratio = 0.85\n"
      "[loss]\nmotion = off\nmotion_denominator = literal-exclusive\n"
      "[train]\noptimizer = sgd\nseed = 18446744073709551615\n");
  EXPECT_EQ(c.data.classes, 4);
  EXPECT_EQ(c.data.domain, "B");
  EXPECT_EQ(c.model.encoder.channels, 64);
  EXPECT_EQ(c.model.encoder.aggregation, tubemae::embedding::Aggregation::kMlpMax);
  EXPECT_FALSE(c.model.decoder.latent_tokens);
  EXPECT_EQ(c.pretrain.mask.strategy, tubemae::masking::MaskStrategy::kBlock);
  EXPECT_EQ(c.pretrain.mask.ratio, 0.85);
  EXPECT_FALSE(c.pretrain.flags.motion);
  EXPECT_EQ(c.pretrain.loss.motion_denominator, tubemae::objectives::MotionDenominator::kLiteralExclusive);
  EXPECT_EQ(c.train.optimizer, tubemae::pipeline::OptimizerKind::kSgd);
  EXPECT_EQ(c.train.seed, 18446744073709551615ULL);
}

TEST(Config, ErrorsNameFileLineAndKey) {
  EXPECT_EQ(error_of("[train]\n\nbogus = 1\n"), "run.ini:3: unknown key 'bogus' in [train]");
  EXPECT_NE(error_of("[nope]\n").find("run.ini:1"), std::string::npos);
  EXPECT_NE(error_of("[train]\nepochs = ten\n").find("run.ini:2"), std::string::npos);
  EXPECT_NE(error_of("epochs = 3\n").find("run.ini:1"), std::string::npos);  // key outside a section
  EXPECT_NE(error_of("[train]\nepochs\n").find("run.ini:2"), std::string::npos);
  EXPECT_NE(error_of("[mask]\nstrategy = tube\n").find("run.ini:2"), std::string::npos);
}

TEST(Config, CrossFieldChecksRejectInconsistentSettings) {
  auto bad = [](const std::string& key, const std::string& value) {
    cf::RunConfig c;
    cf::apply_override(c, key, value);
    EXPECT_THROW(c.validate(), tubemae::ConfigError) << key << "=" << value;
  };
  bad("data.classes", "7");
  bad("data.points", "100");  // not divisible by the spatial stride
  bad("mask.ratio", "1");
  bad("eval.fraction", "0");
  bad("model.encoder_heads", "7");
  bad("model.tube_frames", "4");
}

TEST(Config, RenderedTextParsesBackToTheSameConfig) {
  cf::RunConfig c;
  cf::apply_override(c, "train.lr", "0.00123");
  cf::apply_override(c, "model.momentum", "0.99");
  cf::apply_override(c, "loss.global", "false");
  cf::apply_override(c, "data.noise", "0.1");
  const auto text = cf::render_config(c);
  const auto back = cf::parse_config(text);
  EXPECT_EQ(cf::render_config(back), text);
  EXPECT_EQ(cf::config_hash(back), cf::config_hash(c));
  EXPECT_EQ(back.train.base_lr, 0.00123);
  EXPECT_FALSE(back.pretrain.flags.global);
}

TEST(Config, OverridesAreRecordedButDoNotChangeTheHash) {
  cf::RunConfig c;
  cf::apply_override(c, "train.epochs", "7");
  const auto with = cf::render_config(c, {{"train.epochs", "7", "--epochs"}});
  EXPECT_NE(with.find("# override train.epochs = 7 (--epochs)"), std::string::npos);
  EXPECT_EQ(cf::parse_config(with).train.epochs, 7);
  const cf::RunConfig d;
  EXPECT_NE(cf::config_hash(c), cf::config_hash(d));
}

TEST(Config, EveryKeyCanBeOverriddenWithItsRenderedValue) {
  const cf::RunConfig c;
  const auto text = cf::render_config(c);
  for (const auto& key : cf::config_keys()) {
    const auto dot = key.find('.');
    const auto name = key.substr(dot + 1);
    const auto at = text.find("\n" + name + " = ");
    ASSERT_NE(at, std::string::npos) << key;
    const auto begin = at + name.size() + 4;
    const auto value = text.substr(begin, text.find('\n', begin) - begin);
    cf::RunConfig d;
    EXPECT_NO_THROW(cf::apply_override(d, key, value)) << key;
  }
  cf::RunConfig d;
  EXPECT_THROW(cf::apply_override(d, "train.nope", "1"), tubemae::ConfigError);
  EXPECT_THROW(cf::apply_override(d, "nodot", "1"), tubemae::ConfigError);
}

TEST(Config, FinetuneSettingsComeFromTheEvalSection) {
  cf::RunConfig c;
  c.eval.finetune_radius = 0.7;
  c.eval.fewshot_lr = 1e-3;
  EXPECT_EQ(c.finetune_tubes().radius, 0.7);
  EXPECT_EQ(c.finetune_tubes().neighbors, c.model.tubes.neighbors);
  EXPECT_EQ(c.finetune_train().base_lr, 5e-4);
  EXPECT_EQ(c.finetune_train(true).base_lr, 1e-3);
  EXPECT_EQ(c.finetune_train().weight_decay, 1e-4);
  EXPECT_NE(c.finetune_train().seed, c.train.seed);
}

TEST(Config, DatasetSpecMirrorsTheDataSection) {
  cf::RunConfig c;
  c.data.classes = 2;
  c.data.videos_per_class = 5;
  c.data.train_ratio = 0.6;
  const auto spec = cf::dataset_spec(c, 3);
  EXPECT_EQ(spec.classes.size(), 2u);
  EXPECT_EQ(spec.videos_per_class, 5);
  ASSERT_EQ(spec.splits.size(), 2u);
  EXPECT_EQ(spec.splits[0].ratio, 0.6);
  EXPECT_EQ(spec.frames, 24);
}
