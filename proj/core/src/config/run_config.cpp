// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/config/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "tubemae/common/error.hpp"
#include "tubemae/common/rng.hpp"
#include "tubemae/dataio/synthetic.hpp"
#include "tubemae/io/csv.hpp"

namespace tubemae::config {

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + text + "' is not a valid number");
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("'" + text + "' is not a boolean");
}

template <typename Ref>
Field int_field(const char* section, const char* key, Ref ref) {
  return {section, key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<int>(v); }};
}

template <typename Ref>
Field u64_field(const char* section, const char* key, Ref ref) {
  return {section, key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<std::uint64_t>(v); }};
}

template <typename Ref>
Field real_field(const char* section, const char* key, Ref ref) {
  return {section, key, [ref](const RunConfig& c) { return io::format_number(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<double>(v); }};
}

template <typename Ref>
Field bool_field(const char* section, const char* key, Ref ref) {
  return {section, key, [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = parse_bool(v); }};
}

template <typename Ref>
Field string_field(const char* section, const char* key, Ref ref) {
  return {section, key, [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = v; }};
}

template <typename Ref, typename Parse>
Field enum_field(const char* section, const char* key, Ref ref, Parse parse) {
  return {section, key, [ref](const RunConfig& c) { return to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, parse](RunConfig& c, const std::string& v) { ref(c) = parse(v); }};
}

#define TUBEMAE_REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(int_field("data", "classes", TUBEMAE_REF(data.classes)));
    f.push_back(int_field("data", "videos_per_class", TUBEMAE_REF(data.videos_per_class)));
    f.push_back(int_field("data", "frames", TUBEMAE_REF(data.frames)));
    f.push_back(int_field("data", "points", TUBEMAE_REF(data.points)));
    f.push_back(int_field("data", "pretrain_points", TUBEMAE_REF(data.pretrain_points)));
    f.push_back(real_field("data", "train_ratio", TUBEMAE_REF(data.train_ratio)));
    f.push_back(string_field("data", "domain", TUBEMAE_REF(data.domain)));
    f.push_back(real_field("data", "noise", TUBEMAE_REF(data.noise)));
    f.push_back(string_field("data", "manifest", TUBEMAE_REF(data.manifest)));

    f.push_back(int_field("model", "channels", TUBEMAE_REF(model.encoder.channels)));
    f.push_back(int_field("model", "encoder_depth", TUBEMAE_REF(model.encoder.depth)));
    f.push_back(int_field("model", "encoder_heads", TUBEMAE_REF(model.encoder.heads)));
    f.push_back(int_field("model", "mlp_ratio", TUBEMAE_REF(model.encoder.mlp_ratio)));
    f.push_back(enum_field("model", "aggregation", TUBEMAE_REF(model.encoder.aggregation), embedding::parse_aggregation));
    f.push_back(bool_field("model", "p4d_bias", TUBEMAE_REF(model.encoder.p4d_bias)));
    f.push_back(int_field("model", "decoder_depth", TUBEMAE_REF(model.decoder.depth)));
    f.push_back(int_field("model", "decoder_heads", TUBEMAE_REF(model.decoder.heads)));
    f.push_back(bool_field("model", "latent_tokens", TUBEMAE_REF(model.decoder.latent_tokens)));
    f.push_back(real_field("model", "momentum", TUBEMAE_REF(model.momentum)));
    f.push_back(real_field("model", "radius", TUBEMAE_REF(model.tubes.radius)));
    f.push_back(int_field("model", "tube_frames", TUBEMAE_REF(model.tubes.tube_frames)));
    f.push_back(int_field("model", "neighbors", TUBEMAE_REF(model.tubes.neighbors)));
    f.push_back(int_field("model", "spatial_stride", TUBEMAE_REF(model.tubes.spatial_stride)));
    f.push_back(int_field("model", "temporal_stride", TUBEMAE_REF(model.tubes.temporal_stride)));

    f.push_back(enum_field("mask", "strategy", TUBEMAE_REF(pretrain.mask.strategy), masking::parse_strategy));
    f.push_back(real_field("mask", "ratio", TUBEMAE_REF(pretrain.mask.ratio)));

    f.push_back(bool_field("loss", "geo", TUBEMAE_REF(pretrain.flags.geo)));
    f.push_back(bool_field("loss", "lat", TUBEMAE_REF(pretrain.flags.lat)));
    f.push_back(bool_field("loss", "motion", TUBEMAE_REF(pretrain.flags.motion)));
    f.push_back(bool_field("loss", "global", TUBEMAE_REF(pretrain.flags.global)));
    f.push_back(real_field("loss", "temperature", TUBEMAE_REF(pretrain.loss.temperature)));
    f.push_back(int_field("loss", "queue_size", TUBEMAE_REF(pretrain.loss.queue_size)));
    f.push_back(enum_field("loss", "motion_denominator", TUBEMAE_REF(pretrain.loss.motion_denominator),
                           objectives::parse_motion_denominator));

    f.push_back(int_field("train", "epochs", TUBEMAE_REF(train.epochs)));
    f.push_back(int_field("train", "batch_size", TUBEMAE_REF(train.batch_size)));
    f.push_back(real_field("train", "lr", TUBEMAE_REF(train.base_lr)));
    f.push_back(real_field("train", "weight_decay", TUBEMAE_REF(train.weight_decay)));
    f.push_back(int_field("train", "warmup_epochs", TUBEMAE_REF(train.warmup_epochs)));
    f.push_back(enum_field("train", "optimizer", TUBEMAE_REF(train.optimizer), pipeline::parse_optimizer));
    f.push_back(real_field("train", "sgd_momentum", TUBEMAE_REF(train.sgd_momentum)));
    f.push_back(real_field("train", "scale_lo", TUBEMAE_REF(train.scale_lo)));
    f.push_back(real_field("train", "scale_hi", TUBEMAE_REF(train.scale_hi)));
    f.push_back(u64_field("train", "seed", TUBEMAE_REF(train.seed)));

    f.push_back(int_field("eval", "probe_epochs", TUBEMAE_REF(eval.probe_epochs)));
    f.push_back(real_field("eval", "probe_lr", TUBEMAE_REF(eval.probe_lr)));
    f.push_back(string_field("eval", "finetune_optimizer", TUBEMAE_REF(eval.finetune_optimizer)));
    f.push_back(real_field("eval", "finetune_lr", TUBEMAE_REF(eval.finetune_lr)));
    f.push_back(real_field("eval", "finetune_weight_decay", TUBEMAE_REF(eval.finetune_weight_decay)));
    f.push_back(int_field("eval", "finetune_epochs", TUBEMAE_REF(eval.finetune_epochs)));
    f.push_back(int_field("eval", "finetune_batch_size", TUBEMAE_REF(eval.finetune_batch_size)));
    f.push_back(int_field("eval", "finetune_warmup_epochs", TUBEMAE_REF(eval.finetune_warmup_epochs)));
    f.push_back(real_field("eval", "finetune_radius", TUBEMAE_REF(eval.finetune_radius)));
    f.push_back(int_field("eval", "finetune_points", TUBEMAE_REF(eval.finetune_points)));
    f.push_back(real_field("eval", "fraction", TUBEMAE_REF(eval.fraction)));
    f.push_back(real_field("eval", "fewshot_lr", TUBEMAE_REF(eval.fewshot_lr)));
    f.push_back(int_field("eval", "n_way", TUBEMAE_REF(eval.n_way)));
    f.push_back(int_field("eval", "m_shot", TUBEMAE_REF(eval.m_shot)));
    f.push_back(int_field("eval", "segments_per_video", TUBEMAE_REF(eval.segments_per_video)));
    f.push_back(int_field("eval", "seg_videos", TUBEMAE_REF(eval.seg_videos)));
    f.push_back(int_field("eval", "seg_epochs", TUBEMAE_REF(eval.seg_epochs)));
    return f;
  }();
  return table;
}

#undef TUBEMAE_REF

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

bool known_section(const std::string& s) {
  for (const auto& f : fields())
    if (f.section == s) return true;
  return false;
}

}  // namespace

void RunConfig::validate() const {
  const auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid configuration: " + what);
  };
  check(data.classes >= 1 && data.classes <= 6, "data.classes must be in [1, 6]");
  check(data.videos_per_class >= 1, "data.videos_per_class must be positive");
  check(data.train_ratio > 0.0 && data.train_ratio < 1.0, "data.train_ratio must lie in (0, 1)");
  check(data.frames == model.source_frames && resolved_pretrain_points() == model.points,
        "model extents must match data");
  check(data.pretrain_points >= 0 && data.pretrain_points <= data.points, "data.pretrain_points must be <= data.points");
  check(pretrain.loss.temperature > 0.0, "loss.temperature must be positive");
  check(pretrain.loss.queue_size >= 0, "loss.queue_size must be non-negative");
  check(pretrain.mask.ratio > 0.0 && pretrain.mask.ratio < 1.0, "mask.ratio must lie in (0, 1)");
  check(pretrain.flags.any(), "at least one loss must be enabled");
  check(eval.fraction > 0.0 && eval.fraction <= 1.0, "eval.fraction must lie in (0, 1]");
  check(eval.finetune_points >= 0 && eval.finetune_points <= data.points, "eval.finetune_points must be <= data.points");
  try {
    model.validate();
    train.validate();
    finetune_train().validate();
    finetune_tubes().validate();
    dataio::parse_domain(data.domain);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

pipeline::TrainConfig RunConfig::finetune_train(bool reduced_data) const {
  pipeline::TrainConfig t;
  t.epochs = eval.finetune_epochs;
  t.batch_size = eval.finetune_batch_size;
  t.base_lr = reduced_data ? eval.fewshot_lr : eval.finetune_lr;
  t.weight_decay = eval.finetune_weight_decay;
  t.warmup_epochs = eval.finetune_warmup_epochs;
  t.optimizer = pipeline::parse_optimizer(eval.finetune_optimizer);
  t.sgd_momentum = train.sgd_momentum;
  t.seed = derive_seed(train.seed, "finetune");
  return t;
}

dataio::DatasetSpec dataset_spec(const RunConfig& cfg, std::uint64_t seed) {
  dataio::DatasetSpec spec;
  spec.classes = dataio::motion_classes(cfg.data.classes, dataio::parse_domain(cfg.data.domain), cfg.data.noise);
  spec.videos_per_class = cfg.data.videos_per_class;
  spec.splits = {{"train", cfg.data.train_ratio}, {"test", 1.0 - cfg.data.train_ratio}};
  spec.frames = cfg.data.frames;
  spec.points = cfg.data.points;
  spec.seed = seed;
  return spec;
}

geometry::TubeConfig RunConfig::finetune_tubes() const {
  auto t = model.tubes;
  t.radius = eval.finetune_radius;
  return t;
}

namespace {

void sync_derived(RunConfig& cfg) {
  cfg.model.source_frames = cfg.data.frames;
  cfg.model.points = cfg.resolved_pretrain_points();
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& dotted, const std::string& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) throw ConfigError("override key '" + dotted + "' must be section.key");
  const auto* f = find_field(dotted.substr(0, dot), dotted.substr(dot + 1));
  if (!f) throw ConfigError("unknown configuration key '" + dotted + "'");
  try {
    f->set(cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError(dotted + ": " + e.what());
  }
  sync_derived(cfg);
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!known_section(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto* f = find_field(section, key);
    if (!f) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    try {
      f->set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(where + "key '" + key + "': " + e.what());
    }
  }
  sync_derived(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string render_config(const RunConfig& cfg, const std::vector<Override>& overrides) {
  std::ostringstream out;
  for (const auto& o : overrides) out << "# override " << o.key << " = " << o.value << " (" << o.origin << ")\n";
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(cfg) << '\n';
  }
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(render_config(cfg)); }

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.section + "." + f.key);
  return out;
}

}  // namespace tubemae::config
