// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
// Criteria 6-9 share seven desk-scale pre-training runs. Each run is written
// to the cache directory once (keyed by config hash and seed) and read back by
// the criteria that need it; `--train` only fills the cache.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "oracles.hpp"
#include "test_support.hpp"
#include "tubemae/common/rng.hpp"
#include "tubemae/config/run_config.hpp"
#include "tubemae/dataio/dataset.hpp"
#include "tubemae/geometry/sampling.hpp"
#include "tubemae/geometry/tubes.hpp"
#include "tubemae/io/csv.hpp"
#include "tubemae/masking/mask.hpp"
#include "tubemae/metrics/metrics.hpp"
#include "tubemae/objectives/losses.hpp"
#include "tubemae/pipeline/audit.hpp"
#include "tubemae/pipeline/train.hpp"

namespace fs = std::filesystem;
using namespace tubemae;

namespace {

// Pinned tolerances and thresholds.
constexpr double kGradRtol = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kChamferTol = 1e-6;
constexpr double kEmaTol = 1e-6;
constexpr double kLossRatio = 0.7;
constexpr double kSmokeSeconds = 15.0 * 60.0;
constexpr double kProbePretrained = 80.0;
constexpr double kProbeRandom = 55.0;
constexpr double kProbeGap = 25.0;
constexpr double kDisentangled = 0.9;
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------
// Desk runs

struct RunRecord {
  std::vector<objectives::LossReport> epochs;
  double seconds = 0.0;
  double probe = 0.0;         // pretrained encoder, test accuracy
  double random_probe = 0.0;  // same seed, untrained encoder
  double disentanglement = 0.0;
};

struct Options {
  std::string cache;
  std::string config;
  std::string cli;
};

config::RunConfig run_config(const Options& opt, const std::string& preset, std::uint64_t seed) {
  auto cfg = config::load_config(opt.config);
  config::apply_override(cfg, "train.seed", std::to_string(seed));
  const bool a1 = preset == "A1";
  const auto flags = objectives::LossFlags::preset(a1 ? "B7" : preset);
  config::apply_override(cfg, "loss.geo", flags.geo ? "true" : "false");
  config::apply_override(cfg, "loss.lat", flags.lat && !a1 ? "true" : "false");
  config::apply_override(cfg, "loss.motion", flags.motion ? "true" : "false");
  config::apply_override(cfg, "loss.global", flags.global ? "true" : "false");
  cfg.validate();
  return cfg;
}

fs::path cache_file(const Options& opt, const std::string& preset, std::uint64_t seed) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config::config_hash(run_config(opt, preset, seed))));
  return fs::path(opt.cache) / (preset + "-s" + std::to_string(seed) + "-" + hash + ".run");
}

void write_record(const fs::path& path, const RunRecord& r) {
  fs::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << "seconds " << io::format_number(r.seconds) << '\n'
        << "probe " << io::format_number(r.probe) << '\n'
        << "random_probe " << io::format_number(r.random_probe) << '\n'
        << "disentanglement " << io::format_number(r.disentanglement) << '\n';
    for (const auto& e : r.epochs)
      out << "epoch " << io::format_number(e.total) << ' ' << io::format_number(e.geo) << ' '
          << io::format_number(e.lat) << ' ' << io::format_number(e.motion) << ' ' << io::format_number(e.global)
          << '\n';
  }
  fs::rename(tmp, path);
}

bool read_record(const fs::path& path, RunRecord& r) {
  std::ifstream in(path);
  if (!in) return false;
  std::string key;
  while (in >> key) {
    if (key == "epoch") {
      objectives::LossReport e;
      in >> e.total >> e.geo >> e.lat >> e.motion >> e.global;
      r.epochs.push_back(e);
    } else if (key == "seconds") {
      in >> r.seconds;
    } else if (key == "probe") {
      in >> r.probe;
    } else if (key == "random_probe") {
      in >> r.random_probe;
    } else if (key == "disentanglement") {
      in >> r.disentanglement;
    } else {
      return false;
    }
  }
  return !r.epochs.empty();
}

// Same data, seeds and evaluation as `tubemae pretrain` followed by `tubemae probe`.
RunRecord train_run(const config::RunConfig& cfg) {
  const auto seed = cfg.train.seed;
  const auto ds = dataio::generate_dataset(config::dataset_spec(cfg, derive_seed(seed, "data")), 1);
  const int points = cfg.resolved_pretrain_points();
  const auto prepare = [&](std::vector<geometry::PointCloudVideo> videos) {
    for (auto& v : videos) v = geometry::take_points(v, points);
    return videos;
  };
  const auto train = prepare(ds.subset("train"));
  const auto test = prepare(ds.subset("test"));
  auto all = train;
  all.insert(all.end(), test.begin(), test.end());

  pipeline::ProbeConfig pc;
  pc.epochs = cfg.eval.probe_epochs;
  pc.lr = cfg.eval.probe_lr;
  pc.seed = derive_seed(seed, "probe");

  RunRecord r;
  auto model = pipeline::Model::init(cfg.model, seed);
  r.random_probe = pipeline::linear_probe(model.encoders.online, cfg.model.tubes, train, test, pc).test_accuracy;

  const auto t0 = Clock::now();
  pipeline::Pretrainer trainer(model, cfg.pretrain, cfg.train, all.size());
  while (trainer.epoch() < cfg.train.epochs) {
    const auto e = trainer.run_epoch(all);
    r.epochs.push_back(e.loss);
    std::fprintf(stderr, "  epoch %d total %.4f geo %.4f\n", e.epoch, e.loss.total, e.loss.geo);
  }
  r.seconds = seconds_since(t0);
  r.probe = pipeline::linear_probe(model.encoders.online, cfg.model.tubes, train, test, pc).test_accuracy;

  std::vector<geometry::TubeBatch> tubes;
  std::vector<masking::MaskPlan> plans;
  for (std::size_t i = 0; i < std::min<std::size_t>(8, all.size()); ++i) {
    tubes.push_back(pipeline::tubes_for(all[i], cfg.model.tubes, seed, "summary-tubes", 0, i));
    plans.push_back(masking::make_mask(tubes.back().anchor_frames, tubes.back().anchors_per_frame,
                                       cfg.pretrain.mask.strategy, cfg.pretrain.mask.ratio,
                                       derive_seed(seed, "summary-mask", i), &tubes.back().anchors));
  }
  r.disentanglement = pipeline::measure_disentanglement(model, tubes, plans, cfg.pretrain);
  return r;
}

RunRecord desk_run(const Options& opt, const std::string& preset, std::uint64_t seed) {
  const auto path = cache_file(opt, preset, seed);
  RunRecord r;
  if (read_record(path, r)) return r;
  std::fprintf(stderr, "training %s seed %llu -> %s\n", preset.c_str(), static_cast<unsigned long long>(seed),
               path.string().c_str());
  r = train_run(run_config(opt, preset, seed));
  write_record(path, r);
  return r;
}

bool finite(const objectives::LossReport& e) {
  return std::isfinite(e.total) && std::isfinite(e.geo) && std::isfinite(e.lat) && std::isfinite(e.motion) &&
         std::isfinite(e.global);
}

// Centered running median; the window shrinks at the ends.
std::vector<double> median_filter(const std::vector<double>& x, int window) {
  std::vector<double> out;
  const int half = window / 2;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    std::vector<double> w(x.begin() + std::max(0, i - half), x.begin() + std::min(n, i + half + 1));
    std::sort(w.begin(), w.end());
    out.push_back(w.size() % 2 ? w[w.size() / 2] : 0.5 * (w[w.size() / 2 - 1] + w[w.size() / 2]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criteria

Verdict gradient_suite() {
  const auto t0 = Clock::now();
  const auto checks = pipeline::gradient_suite(1);
  const double secs = seconds_since(t0);
  bool ok = secs < kGradSeconds && checks.size() == 5;
  std::string worst;
  double worst_rel = 0.0;
  for (const auto& c : checks) {
    ok = ok && c.report.passed(kGradRtol) && !c.report.entries.empty();
    if (c.report.max_rel_error >= worst_rel) {
      worst_rel = c.report.max_rel_error;
      worst = c.objective;
    }
  }
  return {ok, std::to_string(checks.size()) + " objectives, max rel err " + num(worst_rel) + " (" + worst +
                  "), rtol " + num(kGradRtol) + ", " + num(secs) + " s"};
}

Verdict chamfer_oracle() {
  Rng rng(2);
  double max_err = 0.0;
  bool symmetric = true;
  bool zero = true;
  const auto random_set = [&] {
    std::vector<oracle::Point> pts(1 + rng.below(32));
    for (auto& p : pts)
      for (auto& c : p) c = rng.uniform(-1.0, 1.0);
    return pts;
  };
  const auto tensor = [](const std::vector<oracle::Point>& pts) {
    std::vector<double> flat;
    for (const auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
    return dc::Tensor::from({1, static_cast<dc::Index>(flat.size())}, flat);
  };
  for (int pair = 0; pair < 200; ++pair) {
    const auto a = random_set();
    const auto b = random_set();
    const double ab = objectives::chamfer_loss(tensor(a), tensor(b), 1).item();
    max_err = std::max(max_err, std::abs(ab - oracle::chamfer(a, b)));
    symmetric = symmetric && ab == objectives::chamfer_loss(tensor(b), tensor(a), 1).item();
    zero = zero && objectives::chamfer_loss(tensor(a), tensor(a), 1).item() == 0.0;
  }
  return {max_err <= kChamferTol && symmetric && zero,
          "200 pairs, max abs err " + num(max_err) + ", symmetric " + (symmetric ? "yes" : "no") +
              ", zero on identity " + (zero ? "yes" : "no")};
}

Verdict tube_audit() {
  Rng rng(3);
  std::size_t violations = 0;
  std::size_t members = 0;
  std::string first;
  const auto classes = dataio::motion_classes(6);
  for (int trial = 0; trial < 50; ++trial) {
    geometry::TubeConfig cfg;
    cfg.radius = rng.uniform(0.1, 0.9);
    cfg.tube_frames = 1 + 2 * static_cast<int>(rng.below(3));
    cfg.neighbors = 1 + static_cast<int>(rng.below(16));
    cfg.spatial_stride = 4 << rng.below(3);
    cfg.temporal_stride = 1 + static_cast<int>(rng.below(3));
    const int frames = cfg.temporal_stride * (2 + static_cast<int>(rng.below(4)));
    const int points = cfg.spatial_stride * (2 + static_cast<int>(rng.below(6)));
    // Half synthetic motion videos, half uniform noise.
    const auto video = trial % 2 == 0
                           ? dataio::generate_video(classes[rng.below(classes.size())], frames, points, rng.next_u64())
                           : testing_support::random_video(frames, points, rng.next_u64());
    const auto tubes = geometry::build_tubes(video, cfg, rng.next_u64());
    members += tubes.members.size();
    const auto v = oracle::tube_violations(video, cfg, tubes);
    if (!v.empty() && first.empty()) first = " first: " + v.front();
    violations += v.size();
  }
  return {violations == 0, "50 videos, " + std::to_string(members) + " members, " + std::to_string(violations) +
                               " violations" + first};
}

Verdict mask_exactness() {
  int plans = 0;
  int bad = 0;
  Rng rng(4);
  for (int pct : {65, 75, 85}) {
    const double ratio = pct / 100.0;
    for (int i = 0; i < 1000; ++i) {
      const int frames = 1 + static_cast<int>(rng.below(12));
      const int per_frame = 4 + static_cast<int>(rng.below(61));
      const int want = (2 * (100 - pct) * per_frame + 100) / 200;  // round half up, in integers
      if (want < 1) continue;
      const auto plan = masking::make_mask(frames, per_frame, masking::MaskStrategy::kFrame, ratio, rng.next_u64());
      ++plans;
      for (int f = 0; f < frames; ++f) bad += plan.visible_in_frame(f) != want;
    }
  }
  return {bad == 0 && plans >= 2900, std::to_string(plans) + " plans at ratios 0.65/0.75/0.85, " +
                                         std::to_string(bad) + " frames off the rounded count"};
}

std::vector<double> flatten(const std::vector<dc::NamedTensor>& params) {
  std::vector<double> out;
  for (const auto& p : params) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

Verdict ema_audit() {
  auto cfg = testing_support::tiny_model_config();
  auto model = pipeline::Model::init(cfg, 5);
  const double m = 0.999;
  model.encoders.momentum_coeff = m;
  pipeline::Optimizer opt(model.trainable(), {});
  pipeline::PretrainConfig pre;
  pre.loss.queue_size = 8;
  objectives::NegativeQueue queue(8, static_cast<std::size_t>(cfg.encoder.channels));
  std::vector<geometry::TubeBatch> tubes;
  std::vector<masking::MaskPlan> plans;
  for (int i = 0; i < 2; ++i) {
    tubes.push_back(geometry::build_tubes(testing_support::random_video(cfg.source_frames, cfg.points, 40 + i),
                                          cfg.tubes, 7 + i));
    plans.push_back(masking::make_mask(tubes.back().anchor_frames, tubes.back().anchors_per_frame,
                                       pre.mask.strategy, pre.mask.ratio, 9 + i));
  }

  const auto theta0 = flatten(model.momentum_encoder());
  std::vector<std::vector<double>> online;  // online parameters after each step
  bool zero_grad = true;
  const int steps = 100;
  for (int s = 0; s < steps; ++s) {
    pipeline::pretrain_step(model, opt, queue, tubes, plans, pre, 1e-3, [&](pipeline::StepPhase p) {
      if (p != pipeline::StepPhase::kBackward) return;
      for (const auto& t : model.momentum_encoder())
        if (t.tensor.has_grad())
          for (double g : t.tensor.grad()) zero_grad = zero_grad && g == 0.0;
      if (queue.size() > 0) {
        const auto q = queue.as_tensor();
        zero_grad = zero_grad && !q.requires_grad() && !q.has_grad();
      }
    });
    online.push_back(flatten(model.online_encoder()));
  }
  // theta_T = m^T theta_0 + (1 - m) sum_k m^(T-k) online_k
  const auto got = flatten(model.momentum_encoder());
  double max_err = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    double want = std::pow(m, steps) * theta0[i];
    for (int k = 1; k <= steps; ++k) want += (1.0 - m) * std::pow(m, steps - k) * online[static_cast<std::size_t>(k - 1)][i];
    max_err = std::max(max_err, std::abs(got[i] - want));
  }
  return {max_err <= kEmaTol && zero_grad, "100 steps at m=0.999, max |EMA - closed form| " + num(max_err) +
                                               ", momentum/queue gradients " + (zero_grad ? "zero" : "NONZERO")};
}

Verdict smoke_pretrain(const Options& opt) {
  const auto r = desk_run(opt, "B7", 1);
  std::vector<double> geo;
  for (const auto& e : r.epochs) geo.push_back(e.geo);
  const auto trend = median_filter(geo, 5);
  bool decreasing = true;
  for (std::size_t i = 0; i + 4 < trend.size(); ++i) decreasing = decreasing && trend[i + 4] < trend[i];
  const double ratio = r.epochs.back().total / r.epochs.front().total;
  const bool ok = r.epochs.size() == 20 && ratio < kLossRatio && decreasing && r.seconds < kSmokeSeconds;
  return {ok, "total epoch20/epoch1 = " + num(ratio) + " (need < " + num(kLossRatio) + "), geo trend " +
                  (decreasing ? "decreasing" : "NOT decreasing") + " (" + num(trend.front()) + " -> " +
                  num(trend.back()) + "), " + num(r.seconds) + " s"};
}

Verdict probe_signal(const Options& opt) {
  bool ok = true;
  std::string detail;
  for (auto seed : kSeeds) {
    const auto r = desk_run(opt, "B7", seed);
    ok = ok && r.probe >= kProbePretrained && r.random_probe <= kProbeRandom && r.probe - r.random_probe >= kProbeGap;
    detail += "seed " + std::to_string(seed) + ": pretrained " + num(r.probe) + " random " + num(r.random_probe) + "; ";
  }
  return {ok, detail + "need >= " + num(kProbePretrained) + ", <= " + num(kProbeRandom) + ", gap >= " + num(kProbeGap)};
}

Verdict disentanglement(const Options& opt) {
  const auto full = desk_run(opt, "B7", 1);
  const auto a1 = desk_run(opt, "A1", 1);
  return {full.disentanglement < kDisentangled && a1.disentanglement > full.disentanglement,
          "full " + num(full.disentanglement) + " (need < " + num(kDisentangled) + "), latent loss off " +
              num(a1.disentanglement) + " (need > full)"};
}

Verdict ablation(const Options& opt) {
  bool ok = true;
  std::string detail;
  for (auto seed : kSeeds) {
    const auto b1 = desk_run(opt, "B1", seed);
    const auto b7 = desk_run(opt, "B7", seed);
    for (const auto* r : {&b1, &b7}) {
      const bool stable = std::all_of(r->epochs.begin(), r->epochs.end(), finite) &&
                          r->epochs.back().total < r->epochs.front().total;
      ok = ok && stable;
      if (!stable) detail += "diverged; ";
    }
    ok = ok && b7.probe >= b1.probe;
    detail += "seed " + std::to_string(seed) + ": B7 " + num(b7.probe) + " B1 " + num(b1.probe) + "; ";
  }
  return {ok, detail + "need B7 >= B1 and finite, decreasing losses"};
}

std::vector<int> random_labels(Rng& rng, int segments, int classes) {
  std::vector<int> out;
  int prev = -1;
  for (int s = 0; s < segments; ++s) {
    int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    if (label == prev) label = (label + 1) % classes;
    out.insert(out.end(), 1 + rng.below(6), label);
    prev = label;
  }
  return out;
}

Verdict segmentation_metrics() {
  Rng rng(10);
  double edit_err = 0.0;
  double f1_err = 0.0;
  bool perfect = true;
  for (int trial = 0; trial < 500; ++trial) {
    const auto gt = random_labels(rng, 1 + static_cast<int>(rng.below(20)), 4);
    auto pred = gt;
    if (trial % 5 == 4) {
      // Unrelated prediction of the same length.
      pred = random_labels(rng, 1 + static_cast<int>(rng.below(20)), 4);
      pred.resize(gt.size(), pred.back());
    } else {
      for (std::size_t i = 0; i < pred.size(); ++i) {
        const double u = rng.uniform();
        if (u < 0.1) pred[i] = static_cast<int>(rng.below(4));
        else if (u < 0.2 && i > 0) pred[i] = pred[i - 1];
      }
    }
    if (oracle::segments(pred).size() > 20) pred = gt;  // keep both sides within 20 segments
    edit_err = std::max(edit_err, std::abs(metrics::segmental_edit_score(pred, gt) - oracle::edit_score(pred, gt)));
    for (double thr : metrics::kF1Thresholds)
      f1_err = std::max(f1_err, std::abs(metrics::f1_at(pred, gt, thr) - oracle::f1(pred, gt, thr)));
    const auto s = metrics::score_segmentation({gt}, {gt});
    perfect = perfect && s.accuracy == 100.0 && s.edit == 100.0 && s.f1_10 == 100.0 && s.f1_25 == 100.0 &&
              s.f1_50 == 100.0;
  }
  return {edit_err <= 1e-9 && f1_err <= 1e-9 && perfect,
          "500 sequences, max edit err " + num(edit_err) + ", max F1 err " + num(f1_err) + ", pred==gt all 100 " +
              (perfect ? "yes" : "no")};
}

Verdict fewshot_splitter() {
  std::vector<int> labels;
  for (int c = 0; c < 12; ++c)
    for (int k = 0; k < 10; ++k) labels.push_back(c);
  int bad = 0;
  for (const auto& [n, m] : std::vector<std::pair<int, int>>{{5, 1}, {10, 5}}) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto split = pipeline::fewshot_split(labels, n, m, seed);
      const std::set<std::size_t> train(split.train.begin(), split.train.end());
      const std::set<int> classes(split.classes.begin(), split.classes.end());
      bool good = static_cast<int>(split.train.size()) == n * m && static_cast<int>(train.size()) == n * m &&
                  static_cast<int>(classes.size()) == n;
      std::map<int, int> per_class;
      for (auto i : split.train) ++per_class[labels[i]];
      for (const auto& [c, k] : per_class) good = good && k == m && classes.count(c);
      for (auto i : split.eval) good = good && !train.count(i) && classes.count(labels[i]);
      good = good && split.train.size() + split.eval.size() == static_cast<std::size_t>(n) * 10;
      bad += !good;
    }
  }
  return {bad == 0, "(5,1) and (10,5) over 1000 seeds each, " + std::to_string(bad) + " bad splits"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict cli_determinism(const Options& opt) {
  if (opt.cli.empty()) return {false, "no CLI path given"};
  const fs::path root = fs::temp_directory_path() / "tubemae_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "small.ini") << "[data]\nvideos_per_class = 4\nframes = 8\npoints = 64\n"
                                       "[model]\nchannels = 16\nencoder_depth = 1\nencoder_heads = 2\n"
                                       "decoder_depth = 1\ndecoder_heads = 2\nneighbors = 8\nspatial_stride = 8\n"
                                       "[loss]\nqueue_size = 16\n"
                                       "[train]\nepochs = 2\nwarmup_epochs = 1\nseed = 5\n"
                                       "[eval]\nprobe_epochs = 50\nfinetune_epochs = 2\nfinetune_warmup_epochs = 1\n"
                                       "seg_videos = 4\nseg_epochs = 2\nsegments_per_video = 2\nn_way = 3\n";
  const std::string common = " -c " + (root / "small.ini").string() + " --workers 1";
  const auto run = [&](const std::string& args, const fs::path& dir) {
    const std::string cmd = opt.cli + " " + args + common + " --run-dir " + dir.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gen-data", ""},
      {"pretrain", ""},
      {"probe", "--checkpoint {ckpt}"},
      {"finetune", "--checkpoint {ckpt}"},
      {"fewshot", "--checkpoint {ckpt}"},
      {"eval-seg", "--checkpoint {ckpt}"},
      {"export-attn", "--checkpoint {ckpt}"},
      {"grad-check", ""},
      {"chamfer-oracle", ""}};
  int files = 0;
  std::vector<std::string> differing;
  for (const char* rep : {"a", "b"}) {
    for (const auto& [name, extra] : commands) {
      auto args = extra;
      const auto at = args.find("{ckpt}");
      if (at != std::string::npos) args.replace(at, 6, (root / rep / "pretrain" / "checkpoint.u4dc").string());
      if (!run(name + " " + args, root / rep / name)) return {false, name + " failed in run " + rep};
    }
  }
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto other = root / "b" / fs::relative(entry.path(), root / "a");
    if (slurp(entry.path()) != slurp(other)) differing.push_back(fs::relative(entry.path(), root / "a").string());
  }
  fs::remove_all(root);
  std::string detail = std::to_string(commands.size()) + " commands run twice, " + std::to_string(files) +
                       " CSVs compared, " + std::to_string(differing.size()) + " differ";
  if (!differing.empty()) detail += " (first: " + differing.front() + ")";
  return {differing.empty() && files > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Acceptance criteria 1-12");
  Options opt;
  std::vector<int> only;
  bool train_only = false;
  opt.cache = "acceptance-cache";
  app.add_option("--only", only, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 12));
  app.add_option("--cache", opt.cache, "Directory for cached desk runs")->capture_default_str();
  app.add_option("--config", opt.config, "Desk configuration for criteria 6-9")->required()->check(CLI::ExistingFile);
  app.add_option("--cli", opt.cli, "Path of the tubemae executable (criterion 12)");
  app.add_flag("--train", train_only, "Only train the desk runs that are not cached yet");
  CLI11_PARSE(app, argc, argv);

  if (train_only) {
    for (auto seed : kSeeds) {
      desk_run(opt, "B7", seed);
      desk_run(opt, "B1", seed);
    }
    desk_run(opt, "A1", 1);
    return 0;
  }

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient suite", gradient_suite},
      {"chamfer oracle", chamfer_oracle},
      {"tube membership audit", tube_audit},
      {"frame masking exactness", mask_exactness},
      {"EMA and stop-gradient audit", ema_audit},
      {"smoke pre-training", [&] { return smoke_pretrain(opt); }},
      {"linear-probe signal", [&] { return probe_signal(opt); }},
      {"disentanglement direction", [&] { return disentanglement(opt); }},
      {"ablation coherence", [&] { return ablation(opt); }},
      {"segmentation metric oracles", segmentation_metrics},
      {"few-shot splitter", fewshot_splitter},
      {"CLI determinism", [&] { return cli_determinism(opt); }}};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %2d %-28s %s  %s\n", id, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
