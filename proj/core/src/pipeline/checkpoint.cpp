// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0

#include "tubemae/pipeline/checkpoint.hpp"

#include <algorithm>
#include <unordered_map>

#include "tubemae/common/error.hpp"
#include "tubemae/io/binary.hpp"

namespace tubemae::pipeline {

namespace {

constexpr char kMagic[] = {'U', '4', 'D', 'C'};

TensorRecord record_of(const std::string& name, const dc::Tensor& t) {
  return {name, t.shape(), {t.data().begin(), t.data().end()}};
}

TensorRecord record_of(const std::string& name, std::vector<double> values) {
  const auto n = static_cast<dc::Index>(values.size());
  return {name, {n}, std::move(values)};
}

void copy_into(const TensorRecord& rec, dc::Tensor& t) {
  if (rec.shape != t.shape()) {
    throw FormatError("checkpoint tensor '" + rec.name + "' has shape " + dc::shape_str(rec.shape) + ", expected " +
                          dc::shape_str(t.shape()),
                      0);
  }
  std::copy(rec.values.begin(), rec.values.end(), t.mutable_data().begin());
}

const TensorRecord& require(const Checkpoint& ckpt, const std::string& name) {
  const auto* rec = ckpt.find(name);
  if (!rec) throw FormatError("checkpoint is missing tensor '" + name + "'", 0);
  return *rec;
}

}  // namespace

const TensorRecord* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  io::ByteWriter w;
  w.bytes(std::string_view(kMagic, 4));
  w.u32(kCheckpointVersion);
  w.u64(ckpt.config_hash);
  w.u64(ckpt.step);
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    TUBEMAE_EXPECT(static_cast<dc::Index>(t.values.size()) == dc::numel_of(t.shape),
                   "checkpoint tensor '" + t.name + "' has inconsistent size");
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto e : t.shape) w.u64(static_cast<std::uint64_t>(e));
    for (double v : t.values) w.f64(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  io::ByteReader r(bytes);
  if (r.bytes(4, "magic") != std::string_view(kMagic, 4)) throw FormatError("bad checkpoint magic", 0);
  const std::size_t version_at = r.offset();
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  Checkpoint ckpt;
  ckpt.config_hash = r.u64("config hash");
  ckpt.step = r.u64("step");
  const auto count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord t;
    t.name = r.str("tensor name");
    const auto rank = r.u32("tensor rank");
    if (rank == 0 || rank > 8) throw FormatError("invalid rank for tensor '" + t.name + "'", r.offset() - 4);
    std::uint64_t numel = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const std::size_t at = r.offset();
      const auto e = r.u64("tensor extent");
      if (e == 0 || e > (1ULL << 40)) throw FormatError("invalid extent for tensor '" + t.name + "'", at);
      numel *= e;
      t.shape.push_back(static_cast<dc::Index>(e));
    }
    if (numel * 8 > r.remaining()) throw FormatError("truncated data for tensor '" + t.name + "'", r.offset());
    t.values.resize(numel);
    for (auto& v : t.values) v = r.f64("tensor value");
    ckpt.tensors.push_back(std::move(t));
  }
  r.expect_end();
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) { io::write_file(path, encode_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(io::read_file(path)); }

Checkpoint capture(const Model& model, const Optimizer* optimizer, const objectives::NegativeQueue* queue,
                   std::uint64_t step, std::uint64_t config_hash) {
  Checkpoint ckpt;
  ckpt.config_hash = config_hash;
  ckpt.step = step;
  for (const auto& p : model.all()) ckpt.tensors.push_back(record_of(p.name, p.tensor));
  if (optimizer) {
    const auto& params = optimizer->params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      ckpt.tensors.push_back(record_of("opt.m." + params[i].name, optimizer->first_moments()[i]));
      if (!optimizer->second_moments().empty())
        ckpt.tensors.push_back(record_of("opt.v." + params[i].name, optimizer->second_moments()[i]));
    }
    ckpt.tensors.push_back(record_of("opt.steps", {static_cast<double>(optimizer->steps())}));
  }
  if (queue) {
    ckpt.tensors.push_back(record_of(
        "queue.meta", {static_cast<double>(queue->capacity()), static_cast<double>(queue->channels()),
                       static_cast<double>(queue->size()), static_cast<double>(queue->cursor())}));
    if (!queue->storage().empty()) ckpt.tensors.push_back(record_of("queue.storage", queue->storage()));
  }
  return ckpt;
}

void restore(const Checkpoint& ckpt, Model& model, Optimizer* optimizer, objectives::NegativeQueue* queue) {
  for (auto& p : model.all()) copy_into(require(ckpt, p.name), p.tensor);
  if (optimizer) {
    const auto& params = optimizer->params();
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    for (const auto& p : params) {
      m.push_back(require(ckpt, "opt.m." + p.name).values);
      if (!optimizer->second_moments().empty()) v.push_back(require(ckpt, "opt.v." + p.name).values);
    }
    const auto steps = static_cast<std::int64_t>(require(ckpt, "opt.steps").values.at(0));
    optimizer->restore(std::move(m), std::move(v), steps);
  }
  if (queue) {
    const auto& meta = require(ckpt, "queue.meta").values;
    if (meta.size() != 4 || static_cast<std::size_t>(meta[0]) != queue->capacity() ||
        static_cast<std::size_t>(meta[1]) != queue->channels()) {
      throw FormatError("checkpoint queue geometry does not match", 0);
    }
    std::vector<double> storage;
    if (queue->capacity() > 0) storage = require(ckpt, "queue.storage").values;
    queue->restore(std::move(storage), static_cast<std::size_t>(meta[2]), static_cast<std::size_t>(meta[3]));
  }
}

void restore_encoder(const Checkpoint& ckpt, backbone::Encoder& encoder) {
  std::vector<dc::NamedTensor> params;
  encoder.collect(params, "online.");
  for (auto& p : params) copy_into(require(ckpt, p.name), p.tensor);
}

}  // namespace tubemae::pipeline
