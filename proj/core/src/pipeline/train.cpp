// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/pipeline/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"
#include "tubemae/diffcore/ops.hpp"
#include "tubemae/geometry/sampling.hpp"
#include "tubemae/nn/layers.hpp"

namespace tubemae::pipeline {

namespace {

dc::Tensor cross_entropy(const dc::Tensor& logits, const std::vector<int>& labels) {
  const dc::Index classes = logits.dim(1);
  std::vector<dc::Index> flat(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    TUBEMAE_EXPECT(labels[i] >= 0 && labels[i] < classes, "label out of range");
    flat[i] = static_cast<dc::Index>(i) * classes + labels[i];
  }
  return dc::mean(dc::sub(dc::logsumexp(logits), dc::gather(logits, flat)));
}

std::vector<int> argmax_rows(const dc::Tensor& logits) {
  const dc::Index rows = logits.dim(0);
  const dc::Index cols = logits.dim(1);
  const auto d = logits.data();
  std::vector<int> out(static_cast<std::size_t>(rows));
  for (dc::Index r = 0; r < rows; ++r) {
    const auto row = d.subspan(static_cast<std::size_t>(r * cols), static_cast<std::size_t>(cols));
    out[static_cast<std::size_t>(r)] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (truth.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += pred[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(truth.size());
}

int label_of(const geometry::PointCloudVideo& v) {
  TUBEMAE_EXPECT(v.label.has_value(), "video has no label");
  return *v.label;
}

int class_count(const std::vector<geometry::PointCloudVideo>& a, const std::vector<geometry::PointCloudVideo>& b) {
  int k = 0;
  for (const auto* set : {&a, &b})
    for (const auto& v : *set) k = std::max(k, label_of(v) + 1);
  return k;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "order", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  return order;
}

geometry::PointCloudVideo augmented(const geometry::PointCloudVideo& v, const TrainConfig& cfg, int epoch,
                                    std::size_t index) {
  if (cfg.scale_lo == 1.0 && cfg.scale_hi == 1.0) return v;
  return geometry::augment_scale(v, cfg.scale_lo, cfg.scale_hi,
                                 derive_seed(cfg.seed, "augment", static_cast<std::uint64_t>(epoch), index));
}

// Supervised heads over an encoder copy share this loop.
struct SupervisedModel {
  backbone::Encoder encoder;
  nn::Linear classifier;
  std::vector<dc::NamedTensor> params() const {
    std::vector<dc::NamedTensor> out;
    encoder.collect(out, "encoder.");
    classifier.collect(out, "classifier.");
    return out;
  }
};

}  // namespace

void TrainConfig::validate() const {
  TUBEMAE_EXPECT(epochs >= 1 && batch_size >= 1, "train: epochs and batch_size must be positive");
  TUBEMAE_EXPECT(base_lr > 0.0, "train: lr must be positive");
  TUBEMAE_EXPECT(warmup_epochs >= 0 && warmup_epochs < epochs, "train: warmup_epochs must be < epochs");
  TUBEMAE_EXPECT(weight_decay >= 0.0, "train: weight decay must be non-negative");
  TUBEMAE_EXPECT(scale_lo > 0.0 && scale_lo <= scale_hi, "train: invalid scale range");
}

OptimizerConfig TrainConfig::optimizer_config() const {
  OptimizerConfig o;
  o.kind = optimizer;
  o.weight_decay = weight_decay;
  o.momentum = sgd_momentum;
  return o;
}

Schedule TrainConfig::schedule(std::size_t dataset_size) const {
  const auto per_epoch =
      static_cast<std::int64_t>((dataset_size + static_cast<std::size_t>(batch_size) - 1) / static_cast<std::size_t>(batch_size));
  return {base_lr, per_epoch * warmup_epochs, per_epoch * epochs};
}

geometry::TubeBatch tubes_for(const geometry::PointCloudVideo& video, const geometry::TubeConfig& cfg,
                              std::uint64_t seed, const char* stream, std::uint64_t a, std::uint64_t b) {
  return geometry::build_tubes(video, cfg, derive_seed(seed, stream, a, b));
}

Pretrainer::Pretrainer(Model& model, const PretrainConfig& pretrain, const TrainConfig& train,
                       std::size_t dataset_size)
    : model_(model), pretrain_(pretrain), train_(train) {
  train_.validate();
  TUBEMAE_EXPECT(dataset_size >= 1, "pretrain: empty dataset");
  schedule_ = train_.schedule(dataset_size);
  optimizer_ = std::make_unique<Optimizer>(model_.trainable(), train_.optimizer_config());
  queue_ = std::make_unique<objectives::NegativeQueue>(static_cast<std::size_t>(pretrain_.loss.queue_size),
                                                       static_cast<std::size_t>(model_.config.encoder.channels));
}

EpochRecord Pretrainer::run_epoch(const std::vector<geometry::PointCloudVideo>& videos, const StepHook& hook) {
  TUBEMAE_EXPECT(!videos.empty(), "pretrain: empty dataset");
  ++epoch_;
  const auto order = shuffled_order(videos.size(), train_.seed, epoch_);
  const auto& mcfg = model_.config;
  EpochRecord rec;
  rec.epoch = epoch_;
  const auto batch = static_cast<std::size_t>(train_.batch_size);
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t end = std::min(order.size(), start + batch);
    std::vector<geometry::TubeBatch> tubes;
    std::vector<masking::MaskPlan> plans;
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t idx = order[k];
      const auto e = static_cast<std::uint64_t>(epoch_);
      tubes.push_back(tubes_for(augmented(videos[idx], train_, epoch_, idx), mcfg.tubes, train_.seed, "tubes", e, idx));
      plans.push_back(masking::make_mask(tubes.back().anchor_frames, tubes.back().anchors_per_frame,
                                         pretrain_.mask.strategy, pretrain_.mask.ratio,
                                         derive_seed(train_.seed, "mask", e, idx), &tubes.back().anchors));
    }
    rec.lr = lr_at(step_, schedule_);
    const auto trace = pretrain_step(model_, *optimizer_, *queue_, tubes, plans, pretrain_, rec.lr, hook);
    ++step_;
    const double w = static_cast<double>(end - start);
    rec.loss.geo += w * trace.report.geo;
    rec.loss.lat += w * trace.report.lat;
    rec.loss.motion += w * trace.report.motion;
    rec.loss.global += w * trace.report.global;
    rec.loss.total += w * trace.report.total;
  }
  const double n = static_cast<double>(videos.size());
  rec.loss.geo /= n;
  rec.loss.lat /= n;
  rec.loss.motion /= n;
  rec.loss.global /= n;
  rec.loss.total /= n;
  return rec;
}

std::vector<EpochRecord> pretrain(Model& model, const std::vector<geometry::PointCloudVideo>& videos,
                                  const PretrainConfig& pretrain, const TrainConfig& train,
                                  const std::function<void(const EpochRecord&)>& on_epoch) {
  Pretrainer trainer(model, pretrain, train, videos.size());
  std::vector<EpochRecord> history;
  for (int e = 0; e < train.epochs; ++e) {
    history.push_back(trainer.run_epoch(videos));
    if (on_epoch) on_epoch(history.back());
  }
  return history;
}

ProbeResult fit_linear_classifier(const std::vector<std::vector<double>>& train_x, const std::vector<int>& train_y,
                                  const std::vector<std::vector<double>>& test_x, const std::vector<int>& test_y,
                                  int classes, const ProbeConfig& cfg) {
  TUBEMAE_EXPECT(!train_x.empty() && train_x.size() == train_y.size() && test_x.size() == test_y.size(),
                 "classifier: features and labels must align");
  TUBEMAE_EXPECT(classes >= 2, "classifier: need at least two classes");
  const std::size_t dim = train_x.front().size();
  std::vector<double> mu(dim, 0.0);
  std::vector<double> sd(dim, 1.0);
  if (cfg.standardize) {
    for (const auto& x : train_x)
      for (std::size_t k = 0; k < dim; ++k) mu[k] += x[k];
    for (double& m : mu) m /= static_cast<double>(train_x.size());
    std::vector<double> var(dim, 0.0);
    for (const auto& x : train_x)
      for (std::size_t k = 0; k < dim; ++k) var[k] += (x[k] - mu[k]) * (x[k] - mu[k]);
    for (std::size_t k = 0; k < dim; ++k) {
      const double s = std::sqrt(var[k] / static_cast<double>(train_x.size()));
      sd[k] = s > 1e-12 ? s : 1.0;
    }
  }
  const auto to_tensor = [&](const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    flat.reserve(rows.size() * dim);
    for (const auto& x : rows) {
      TUBEMAE_EXPECT(x.size() == dim, "classifier: ragged feature rows");
      for (std::size_t k = 0; k < dim; ++k) flat.push_back((x[k] - mu[k]) / sd[k]);
    }
    return dc::Tensor::from({static_cast<dc::Index>(rows.size()), static_cast<dc::Index>(dim)}, std::move(flat));
  };
  const dc::Tensor xtr = to_tensor(train_x);
  nn::Linear head{dc::Tensor::zeros({static_cast<dc::Index>(dim), classes}, true), dc::Tensor::zeros({classes}, true)};
  std::vector<dc::NamedTensor> params;
  head.collect(params, "probe.");
  OptimizerConfig ocfg;
  ocfg.weight_decay = cfg.weight_decay;
  Optimizer opt(params, ocfg);
  for (int e = 0; e < cfg.epochs; ++e) {
    opt.zero_grad();
    dc::backward(cross_entropy(head(xtr), train_y));
    opt.step(cfg.lr);
  }
  dc::NoGradGuard guard;
  ProbeResult r;
  r.train_accuracy = accuracy(argmax_rows(head(xtr)), train_y);
  if (!test_x.empty()) {
    r.test_predictions = argmax_rows(head(to_tensor(test_x)));
    r.test_accuracy = accuracy(r.test_predictions, test_y);
  }
  return r;
}

ProbeResult linear_probe(const backbone::Encoder& encoder, const geometry::TubeConfig& tubes,
                         const std::vector<geometry::PointCloudVideo>& train,
                         const std::vector<geometry::PointCloudVideo>& test, const ProbeConfig& cfg) {
  const auto features = [&](const std::vector<geometry::PointCloudVideo>& videos, std::uint64_t split,
                            std::vector<std::vector<double>>& x, std::vector<int>& y) {
    for (std::size_t i = 0; i < videos.size(); ++i) {
      y.push_back(label_of(videos[i]));
      x.push_back(encode_video(encoder, tubes_for(videos[i], tubes, cfg.seed, "probe-tubes", split, i)));
    }
  };
  std::vector<std::vector<double>> xtr, xte;
  std::vector<int> ytr, yte;
  features(train, 0, xtr, ytr);
  features(test, 1, xte, yte);
  return fit_linear_classifier(xtr, ytr, xte, yte, class_count(train, test), cfg);
}

std::vector<std::size_t> stratified_fraction(const std::vector<int>& labels, double fraction, std::uint64_t seed) {
  TUBEMAE_EXPECT(fraction > 0.0 && fraction <= 1.0, "fraction must lie in (0, 1]");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<std::size_t> out;
  for (auto& [label, idx] : by_class) {
    if (fraction < 1.0) {
      Rng rng(derive_seed(seed, "fraction", static_cast<std::uint64_t>(label)));
      rng.shuffle(idx);
    }
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size()))));
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(keep, idx.size())));
  }
  std::sort(out.begin(), out.end());
  return out;
}

FinetuneResult finetune(const backbone::Encoder& init, const geometry::TubeConfig& tubes,
                        const std::vector<geometry::PointCloudVideo>& train_all,
                        const std::vector<geometry::PointCloudVideo>& test, const FinetuneConfig& cfg,
                        const std::function<void(const FinetuneRecord&)>& on_epoch) {
  const auto& tcfg = cfg.train;
  tcfg.validate();
  std::vector<int> labels;
  for (const auto& v : train_all) labels.push_back(label_of(v));
  std::vector<geometry::PointCloudVideo> train;
  for (std::size_t i : stratified_fraction(labels, cfg.fraction, tcfg.seed)) train.push_back(train_all[i]);
  const int classes = class_count(train_all, test);

  Rng rng = Rng::stream(tcfg.seed, "finetune-init");
  SupervisedModel model{init.copy(true), nn::Linear::init(init.p4d.channels(), classes, rng)};
  Optimizer opt(model.params(), tcfg.optimizer_config());
  const Schedule schedule = tcfg.schedule(train.size());

  FinetuneResult result;
  result.train_videos = train.size();
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    const auto order = shuffled_order(train.size(), tcfg.seed, epoch);
    FinetuneRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tcfg.batch_size));
      opt.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        const auto tb = tubes_for(augmented(train[idx], tcfg, epoch, idx), tubes, tcfg.seed, "finetune-tubes",
                                  static_cast<std::uint64_t>(epoch), idx);
        const dc::Tensor z = model.encoder.encode(model.encoder.embed(tb).embeddings);
        const dc::Tensor pooled = dc::reshape(dc::max_axis(z, 0), {1, z.dim(1)});
        const dc::Tensor loss = cross_entropy(model.classifier(pooled), {label_of(train[idx])});
        rec.loss += loss.item();
        dc::backward(dc::scale(loss, 1.0 / static_cast<double>(end - start)));
      }
      rec.lr = lr_at(step++, schedule);
      opt.step(rec.lr);
    }
    rec.loss /= static_cast<double>(train.size());
    dc::NoGradGuard guard;
    std::vector<int> pred, truth;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto tb = tubes_for(test[i], tubes, tcfg.seed, "eval-tubes", i, 0);
      const dc::Tensor z = model.encoder.encode(model.encoder.embed(tb).embeddings);
      pred.push_back(argmax_rows(model.classifier(dc::reshape(dc::max_axis(z, 0), {1, z.dim(1)})))[0]);
      truth.push_back(label_of(test[i]));
    }
    rec.test_accuracy = accuracy(pred, truth);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  result.final_accuracy = result.history.back().test_accuracy;
  return result;
}

FewShotSplit fewshot_split(const std::vector<int>& labels, int n_way, int m_shot, std::uint64_t seed) {
  TUBEMAE_EXPECT(n_way >= 1 && m_shot >= 1, "fewshot: n_way and m_shot must be positive");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<int> eligible;
  for (const auto& [label, idx] : by_class)
    if (static_cast<int>(idx.size()) >= m_shot + 1) eligible.push_back(label);
  if (static_cast<int>(eligible.size()) < n_way) {
    throw ContractError("fewshot: only " + std::to_string(eligible.size()) + " classes have at least " +
                        std::to_string(m_shot + 1) + " videos, need " + std::to_string(n_way));
  }
  Rng rng = Rng::stream(seed, "fewshot");
  rng.shuffle(eligible);
  FewShotSplit split;
  split.classes.assign(eligible.begin(), eligible.begin() + n_way);
  std::sort(split.classes.begin(), split.classes.end());
  for (int c : split.classes) {
    auto idx = by_class[c];
    rng.shuffle(idx);
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + m_shot);
    split.eval.insert(split.eval.end(), idx.begin() + m_shot, idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.eval.begin(), split.eval.end());
  return split;
}

std::vector<int> anchor_frame_labels(const geometry::PointCloudVideo& video, const geometry::TubeConfig& tubes) {
  TUBEMAE_EXPECT(static_cast<int>(video.frame_labels.size()) == video.frames, "video has no frame labels");
  std::vector<int> out;
  for (int j = 0; j * tubes.temporal_stride < video.frames; ++j)
    out.push_back(video.frame_labels[static_cast<std::size_t>(geometry::anchor_source_frame(j, tubes))]);
  return out;
}

SegmentationResult segmentation_head_finetune(const backbone::Encoder& init, const geometry::TubeConfig& tubes,
                                              const std::vector<geometry::PointCloudVideo>& train,
                                              const std::vector<geometry::PointCloudVideo>& test,
                                              const TrainConfig& cfg, int classes) {
  cfg.validate();
  TUBEMAE_EXPECT(!train.empty(), "segmentation: empty training set");
  Rng rng = Rng::stream(cfg.seed, "segmentation-init");
  SupervisedModel model{init.copy(true), nn::Linear::init(init.p4d.channels(), classes, rng)};
  Optimizer opt(model.params(), cfg.optimizer_config());
  const Schedule schedule = cfg.schedule(train.size());

  const auto frame_logits = [&](const geometry::TubeBatch& tb) {
    const dc::Tensor z = model.encoder.encode(model.encoder.embed(tb).embeddings);
    const auto pooled = objectives::pool_frames(z, tb.anchor_frames);
    return model.classifier(pooled.features);
  };

  SegmentationResult result;
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = shuffled_order(train.size(), cfg.seed, epoch);
    FinetuneRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      opt.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        const auto tb = tubes_for(augmented(train[idx], cfg, epoch, idx), tubes, cfg.seed, "segmentation-tubes",
                                  static_cast<std::uint64_t>(epoch), idx);
        const dc::Tensor loss = cross_entropy(frame_logits(tb), anchor_frame_labels(train[idx], tubes));
        rec.loss += loss.item();
        dc::backward(dc::scale(loss, 1.0 / static_cast<double>(end - start)));
      }
      rec.lr = lr_at(step++, schedule);
      opt.step(rec.lr);
    }
    rec.loss /= static_cast<double>(train.size());
    result.history.push_back(rec);
  }
  dc::NoGradGuard guard;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto tb = tubes_for(test[i], tubes, cfg.seed, "eval-tubes", i, 0);
    result.predictions.push_back(argmax_rows(frame_logits(tb)));
    result.targets.push_back(anchor_frame_labels(test[i], tubes));
  }
  return result;
}

}  // namespace tubemae::pipeline
