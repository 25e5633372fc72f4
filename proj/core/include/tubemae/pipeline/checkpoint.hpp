// Copyright (c) 2026, The tubemae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary container: magic "U4DC", u32 version, u64 config hash, u64 step,
// u32 tensor count, then per tensor: name (u32 length + bytes), u32 rank,
// u64 extents, f64 values. All fields little-endian.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubemae/diffcore/tensor.hpp"
#include "tubemae/objectives/queue.hpp"
#include "tubemae/pipeline/model.hpp"
#include "tubemae/pipeline/optim.hpp"

namespace tubemae::pipeline {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  dc::Shape shape;
  std::vector<double> values;

  bool operator==(const TensorRecord&) const = default;
};

struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::uint64_t step = 0;
  std::vector<TensorRecord> tensors;

  const TensorRecord* find(const std::string& name) const;
  bool operator==(const Checkpoint&) const = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Snapshot of model parameters and, when given, optimizer moments and queue.
Checkpoint capture(const Model& model, const Optimizer* optimizer, const objectives::NegativeQueue* queue,
                   std::uint64_t step, std::uint64_t config_hash);
/// Writes checkpoint values into existing tensors. Every parameter of the
/// model must be present with a matching shape.
void restore(const Checkpoint& ckpt, Model& model, Optimizer* optimizer, objectives::NegativeQueue* queue);

/// Copies only the online encoder ("online." entries) into `encoder`.
void restore_encoder(const Checkpoint& ckpt, backbone::Encoder& encoder);

}  // namespace tubemae::pipeline
