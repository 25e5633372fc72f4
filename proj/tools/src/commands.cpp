// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "errors.hpp"
#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"
#include "tubemae/dataio/dataset.hpp"
#include "tubemae/dataio/video_file.hpp"
#include "tubemae/diffcore/ops.hpp"
#include "tubemae/geometry/sampling.hpp"
#include "tubemae/io/csv.hpp"
#include "tubemae/metrics/metrics.hpp"
#include "tubemae/pipeline/audit.hpp"
#include "tubemae/pipeline/checkpoint.hpp"
#include "tubemae/pipeline/train.hpp"

namespace tubemae::cli {

namespace fs = std::filesystem;
using geometry::PointCloudVideo;
using io::format_number;

namespace {

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw MissingInput(what + " '" + path + "' does not exist");
}

struct Splits {
  std::vector<PointCloudVideo> train;
  std::vector<PointCloudVideo> test;

  std::vector<PointCloudVideo> all() const {
    auto out = train;
    out.insert(out.end(), test.begin(), test.end());
    return out;
  }
};

Splits load_splits(const RunContext& ctx) {
  const auto& cfg = ctx.config();
  if (!cfg.data.manifest.empty()) {
    require_file(cfg.data.manifest, "manifest");
    const auto manifest = dataio::read_manifest(cfg.data.manifest);
    return {dataio::load_split(manifest, "train"), dataio::load_split(manifest, "test")};
  }
  const auto ds = dataio::generate_dataset(config::dataset_spec(cfg, derive_seed(ctx.seed(), "data")), ctx.workers());
  return {ds.subset("train"), ds.subset("test")};
}

std::vector<PointCloudVideo> with_points(std::vector<PointCloudVideo> videos, int points) {
  for (auto& v : videos) v = geometry::take_points(v, points);
  return videos;
}

backbone::Encoder load_encoder(const RunContext& ctx, const EncoderSource& source) {
  if (source.checkpoint.empty() && !source.random_init)
    throw ConfigError("an encoder is required: pass --checkpoint <file> or --random-init");
  auto model = pipeline::Model::init(ctx.config().model, ctx.seed());
  if (!source.checkpoint.empty()) {
    require_file(source.checkpoint, "checkpoint");
    pipeline::restore_encoder(pipeline::load_checkpoint(source.checkpoint), model.encoders.online);
    ctx.log("encoder restored from " + source.checkpoint);
  } else {
    ctx.log("encoder randomly initialized");
  }
  return model.encoders.online;
}

void write_history(std::ostream& os, const std::vector<pipeline::FinetuneRecord>& history) {
  io::CsvWriter csv(os, {"epoch", "loss", "test_accuracy", "lr"});
  for (const auto& r : history) csv.row(r.epoch, r.loss, r.test_accuracy, r.lr);
}

void write_summary(std::ostream& os, const std::vector<std::pair<std::string, double>>& rows) {
  io::CsvWriter csv(os, {"metric", "value"});
  for (const auto& [name, value] : rows) csv.row(name, value);
}

}  // namespace

int run_gen_data(const CommonOptions& common) {
  const auto ctx = RunContext::open("gen-data", common);
  const auto& cfg = ctx.config();
  const auto manifest =
      dataio::make_dataset(config::dataset_spec(cfg, derive_seed(ctx.seed(), "data")), ctx.path("data").string(),
                           ctx.workers());
  std::map<std::pair<std::string, int>, int> counts;
  for (const auto& e : manifest.entries) ++counts[{e.split, e.label}];
  auto out = ctx.create("dataset_summary.csv");
  io::CsvWriter csv(out, {"split", "label", "videos"});
  for (const auto& [key, n] : counts) csv.row(key.first, key.second, n);
  ctx.log("wrote " + std::to_string(manifest.entries.size()) + " videos to " + ctx.path("data").string());
  return 0;
}

int run_pretrain(const CommonOptions& common, const PretrainOptions& options) {
  const auto ctx = RunContext::open("pretrain", common);
  const auto& cfg = ctx.config();
  const auto videos = with_points(load_splits(ctx).all(), cfg.resolved_pretrain_points());
  auto model = pipeline::Model::init(cfg.model, ctx.seed());
  pipeline::Pretrainer trainer(model, cfg.pretrain, cfg.train, videos.size());
  const auto hash = config::config_hash(cfg);

  if (!options.resume.empty()) {
    require_file(options.resume, "checkpoint");
    const auto ckpt = pipeline::load_checkpoint(options.resume);
    if (ckpt.config_hash != hash)
      throw ConfigError("checkpoint '" + options.resume + "' was written under a different configuration");
    pipeline::restore(ckpt, model, &trainer.optimizer(), &trainer.queue());
    const auto batch = static_cast<std::uint64_t>(cfg.train.batch_size);
    const auto per_epoch = (videos.size() + batch - 1) / batch;
    trainer.set_progress(static_cast<std::int64_t>(ckpt.step), static_cast<int>(ckpt.step / per_epoch));
    ctx.log("resumed at epoch " + std::to_string(trainer.epoch()));
  }

  auto out = ctx.create("pretrain_metrics.csv");
  io::CsvWriter csv(out, {"epoch", "total", "geo", "lat", "motion", "global", "lr"});
  while (trainer.epoch() < cfg.train.epochs) {
    const auto r = trainer.run_epoch(videos);
    csv.row(r.epoch, r.loss.total, r.loss.geo, r.loss.lat, r.loss.motion, r.loss.global, r.lr);
    out.flush();
    ctx.log("epoch " + std::to_string(r.epoch) + " total " + format_number(r.loss.total));
    if (options.save_every > 0 && r.epoch % options.save_every == 0 && r.epoch < cfg.train.epochs) {
      const auto name = "checkpoint-epoch" + std::to_string(r.epoch) + ".u4dc";
      pipeline::save_checkpoint(ctx.path(name).string(),
                                pipeline::capture(model, &trainer.optimizer(), &trainer.queue(),
                                                  static_cast<std::uint64_t>(trainer.step()), hash));
    }
  }
  pipeline::save_checkpoint(ctx.path("checkpoint.u4dc").string(),
                            pipeline::capture(model, &trainer.optimizer(), &trainer.queue(),
                                              static_cast<std::uint64_t>(trainer.step()), hash));

  // Disentanglement of the two decoder passes over a fixed handful of videos.
  std::vector<geometry::TubeBatch> tubes;
  std::vector<masking::MaskPlan> plans;
  for (std::size_t i = 0; i < std::min<std::size_t>(8, videos.size()); ++i) {
    tubes.push_back(pipeline::tubes_for(videos[i], cfg.model.tubes, ctx.seed(), "summary-tubes", 0, i));
    plans.push_back(masking::make_mask(tubes.back().anchor_frames, tubes.back().anchors_per_frame,
                                       cfg.pretrain.mask.strategy, cfg.pretrain.mask.ratio,
                                       derive_seed(ctx.seed(), "summary-mask", i), &tubes.back().anchors));
  }
  auto summary = ctx.create("pretrain_summary.csv");
  write_summary(summary, {{"steps", static_cast<double>(trainer.step())},
                          {"disentanglement", pipeline::measure_disentanglement(model, tubes, plans, cfg.pretrain)}});
  return 0;
}

int run_probe(const CommonOptions& common, const EncoderSource& source) {
  const auto ctx = RunContext::open("probe", common);
  const auto& cfg = ctx.config();
  const auto encoder = load_encoder(ctx, source);
  const auto splits = load_splits(ctx);
  const int points = cfg.resolved_pretrain_points();
  pipeline::ProbeConfig pc;
  pc.epochs = cfg.eval.probe_epochs;
  pc.lr = cfg.eval.probe_lr;
  pc.seed = derive_seed(ctx.seed(), "probe");
  const auto r = pipeline::linear_probe(encoder, cfg.model.tubes, with_points(splits.train, points),
                                        with_points(splits.test, points), pc);
  auto out = ctx.create("probe_metrics.csv");
  write_summary(out, {{"train_accuracy", r.train_accuracy}, {"test_accuracy", r.test_accuracy}});
  auto pred = ctx.create("probe_predictions.csv");
  io::CsvWriter csv(pred, {"index", "label", "prediction"});
  for (std::size_t i = 0; i < splits.test.size(); ++i) csv.row(i, *splits.test[i].label, r.test_predictions[i]);
  ctx.log("probe test accuracy " + format_number(r.test_accuracy));
  return 0;
}

int run_finetune(const CommonOptions& common, const EncoderSource& source, std::optional<double> fraction) {
  std::vector<config::Override> flags;
  if (fraction) flags.push_back({"eval.fraction", format_number(*fraction), "--fraction"});
  const auto ctx = RunContext::open("finetune", common, flags);
  const auto& cfg = ctx.config();
  const auto encoder = load_encoder(ctx, source);
  const auto splits = load_splits(ctx);
  const int points = cfg.resolved_finetune_points();
  pipeline::FinetuneConfig fc;
  fc.train = cfg.finetune_train(cfg.eval.fraction < 1.0);
  fc.fraction = cfg.eval.fraction;
  auto out = ctx.create("finetune_metrics.csv");
  io::CsvWriter csv(out, {"epoch", "loss", "test_accuracy", "lr"});
  const auto r = pipeline::finetune(encoder, cfg.finetune_tubes(), with_points(splits.train, points),
                                    with_points(splits.test, points), fc, [&](const pipeline::FinetuneRecord& rec) {
                                      csv.row(rec.epoch, rec.loss, rec.test_accuracy, rec.lr);
                                      out.flush();
                                    });
  auto summary = ctx.create("finetune_summary.csv");
  write_summary(summary, {{"train_videos", static_cast<double>(r.train_videos)}, {"test_accuracy", r.final_accuracy}});
  ctx.log("fine-tuned accuracy " + format_number(r.final_accuracy));
  return 0;
}

int run_fewshot(const CommonOptions& common, const EncoderSource& source, std::optional<int> n_way,
                std::optional<int> m_shot) {
  std::vector<config::Override> flags;
  if (n_way) flags.push_back({"eval.n_way", std::to_string(*n_way), "--n-way"});
  if (m_shot) flags.push_back({"eval.m_shot", std::to_string(*m_shot), "--m-shot"});
  const auto ctx = RunContext::open("fewshot", common, flags);
  const auto& cfg = ctx.config();

  dataio::Manifest manifest;
  if (cfg.data.manifest.empty()) {
    manifest = dataio::make_dataset(config::dataset_spec(cfg, derive_seed(ctx.seed(), "data")),
                                    ctx.path("data").string(), ctx.workers());
  } else {
    require_file(cfg.data.manifest, "manifest");
    manifest = dataio::read_manifest(cfg.data.manifest);
  }
  std::vector<int> labels;
  for (const auto& e : manifest.entries) labels.push_back(e.label);
  const auto split = pipeline::fewshot_split(labels, cfg.eval.n_way, cfg.eval.m_shot, derive_seed(ctx.seed(), "fewshot"));

  // Listed paths are relative to the run directory, like any manifest.
  const auto listed = [&](const std::vector<std::size_t>& idx, const std::string& name) {
    std::vector<dataio::ManifestEntry> entries;
    for (std::size_t i : idx) {
      auto e = manifest.entries[i];
      e.path = fs::proximate(fs::path(manifest.root) / e.path, ctx.dir()).generic_string();
      e.split = name;
      entries.push_back(e);
    }
    dataio::write_manifest(ctx.path("fewshot_" + name + ".tsv").string(), entries);
  };
  listed(split.train, "train");
  listed(split.eval, "eval");

  const auto load = [&](const std::vector<std::size_t>& idx) {
    std::vector<PointCloudVideo> out;
    for (std::size_t i : idx) {
      auto v = geometry::take_points(dataio::read_video((fs::path(manifest.root) / manifest.entries[i].path).string()),
                                     cfg.resolved_finetune_points());
      v.label = static_cast<int>(std::find(split.classes.begin(), split.classes.end(), *v.label) - split.classes.begin());
      out.push_back(std::move(v));
    }
    return out;
  };
  const auto encoder = load_encoder(ctx, source);
  pipeline::FinetuneConfig fc;
  fc.train = cfg.finetune_train(true);
  const auto r = pipeline::finetune(encoder, cfg.finetune_tubes(), load(split.train), load(split.eval), fc);
  auto out = ctx.create("fewshot_metrics.csv");
  write_history(out, r.history);
  auto summary = ctx.create("fewshot_summary.csv");
  write_summary(summary, {{"n_way", static_cast<double>(cfg.eval.n_way)},
                          {"m_shot", static_cast<double>(cfg.eval.m_shot)},
                          {"train_videos", static_cast<double>(split.train.size())},
                          {"eval_videos", static_cast<double>(split.eval.size())},
                          {"test_accuracy", r.final_accuracy}});
  ctx.log("few-shot accuracy " + format_number(r.final_accuracy));
  return 0;
}

int run_eval_seg(const CommonOptions& common, const EncoderSource& source) {
  const auto ctx = RunContext::open("eval-seg", common);
  const auto& cfg = ctx.config();
  dataio::SegmentedSpec spec;
  spec.classes = dataio::motion_classes(cfg.data.classes, dataio::parse_domain(cfg.data.domain), cfg.data.noise);
  spec.videos = cfg.eval.seg_videos;
  spec.segments_per_video = cfg.eval.segments_per_video;
  spec.min_length = 2 * cfg.model.tubes.temporal_stride;
  spec.frames = cfg.data.frames;
  spec.points = cfg.data.points;
  spec.seed = derive_seed(ctx.seed(), "seg-data");
  auto videos = with_points(dataio::generate_segmented_dataset(spec, ctx.workers()), cfg.resolved_finetune_points());
  const auto n_train = static_cast<std::size_t>(
      std::clamp<long>(std::lround(cfg.data.train_ratio * spec.videos), 1, static_cast<long>(spec.videos) - 1));
  if (videos.size() < 2) throw ConfigError("eval.seg_videos must be at least 2");
  const std::vector<PointCloudVideo> train(videos.begin(), videos.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<PointCloudVideo> test(videos.begin() + static_cast<std::ptrdiff_t>(n_train), videos.end());

  const auto encoder = load_encoder(ctx, source);
  auto tc = cfg.finetune_train();
  tc.epochs = cfg.eval.seg_epochs;
  const auto r = pipeline::segmentation_head_finetune(encoder, cfg.finetune_tubes(), train, test, tc, cfg.data.classes);

  auto history = ctx.create("seg_history.csv");
  write_history(history, r.history);
  auto metrics_out = ctx.create("seg_metrics.csv");
  metrics::write_metrics_csv(metrics_out, metrics::to_rows(metrics::score_segmentation(r.predictions, r.targets)));
  auto pred = ctx.create("seg_predictions.csv");
  io::CsvWriter csv(pred, {"video", "anchor_frame", "label", "prediction"});
  for (std::size_t v = 0; v < r.predictions.size(); ++v)
    for (std::size_t f = 0; f < r.predictions[v].size(); ++f) csv.row(v, f, r.targets[v][f], r.predictions[v][f]);
  return 0;
}

int run_export_attn(const CommonOptions& common, const AttentionOptions& options) {
  const auto ctx = RunContext::open("export-attn", common);
  const auto& cfg = ctx.config();
  const auto encoder = load_encoder(ctx, {options.checkpoint, false});
  const auto videos = with_points(load_splits(ctx).all(), cfg.resolved_pretrain_points());
  if (options.video < 0 || static_cast<std::size_t>(options.video) >= videos.size())
    throw ConfigError("--video " + std::to_string(options.video) + " outside [0, " + std::to_string(videos.size()) + ")");
  const auto idx = static_cast<std::size_t>(options.video);
  const auto tubes = pipeline::tubes_for(videos[idx], cfg.model.tubes, ctx.seed(), "attention", 0, idx);
  dc::NoGradGuard guard;
  backbone::AttentionRecord record;
  record.capture.layer = options.layer.value_or(encoder.stack.depth() - 1);
  encoder.encode(encoder.embed(tubes).embeddings, &record.capture);
  record.anchors = tubes.anchors;
  auto out = ctx.create("attention.csv");
  backbone::write_attention_csv(out, record);
  return 0;
}

int run_grad_check(const CommonOptions& common, double rtol) {
  const auto ctx = RunContext::open("grad-check", common);
  const auto checks = pipeline::gradient_suite(derive_seed(ctx.seed(), "grad-check"));
  auto out = ctx.create("grad_check.csv");
  io::CsvWriter csv(out, {"objective", "tensor", "checked", "max_rel_error", "max_abs_error"});
  auto report = ctx.create("grad_check_report.txt");
  bool ok = true;
  for (const auto& c : checks) {
    for (const auto& e : c.report.entries) csv.row(c.objective, e.name, e.checked, e.max_rel_error, e.max_abs_error);
    const bool pass = c.report.passed(rtol);
    ok = ok && pass;
    report << (pass ? "PASS " : "FAIL ") << c.objective << " max_rel_error=" << format_number(c.report.max_rel_error)
           << '\n';
  }
  report << (ok ? "PASS" : "FAIL") << " all objectives, rtol=" << format_number(rtol) << '\n';
  ctx.log(std::string("gradient check ") + (ok ? "passed" : "FAILED"));
  return ok ? 0 : 1;
}

int run_chamfer_oracle(const CommonOptions& common, int pairs, double tolerance) {
  const auto ctx = RunContext::open("chamfer-oracle", common);
  const auto audit = pipeline::chamfer_audit(derive_seed(ctx.seed(), "chamfer-oracle"), pairs);
  const bool ok = audit.passed(tolerance);
  auto out = ctx.create("chamfer_oracle.csv");
  write_summary(out, {{"pairs", static_cast<double>(audit.pairs)},
                      {"max_abs_error", audit.max_abs_error},
                      {"symmetric", audit.symmetric ? 1.0 : 0.0},
                      {"zero_on_identity", audit.zero_on_identity ? 1.0 : 0.0}});
  auto report = ctx.create("chamfer_oracle_report.txt");
  report << (ok ? "PASS" : "FAIL") << " chamfer oracle: pairs=" << audit.pairs
         << " max_abs_error=" << format_number(audit.max_abs_error) << " tolerance=" << format_number(tolerance)
         << " symmetric=" << audit.symmetric << " zero_on_identity=" << audit.zero_on_identity << '\n';
  ctx.log(std::string("chamfer oracle ") + (ok ? "passed" : "FAILED"));
  return ok ? 0 : 1;
}

}  // namespace tubemae::cli
