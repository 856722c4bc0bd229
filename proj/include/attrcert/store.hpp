/* Copyright 2026 The AttrCert Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef ATTRCERT_STORE_HPP_
#define ATTRCERT_STORE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "attrcert/model.hpp"

namespace attrcert::store {

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weights container: a line-oriented text format ("attrcert-model v1")
/// holding architecture metadata plus each layer's parameters as base64 of
/// little-endian IEEE-754 doubles in row-major order, closed by an fnv1a64
/// digest line over everything above it. Lossless and platform-independent;
/// documented with a worked example in the README.
void save_model(const model::ModelWeights& w, const std::string& path);
model::ModelWeights load_model(const std::string& path);

/// IDX ingestion: big-endian magic 0x00000803 (images) / 0x00000801
/// (labels), big-endian dimension sizes, unsigned-byte pixels scaled to
/// [0,1] by /255. Takes the first `limit` items. Malformed input is
/// rejected with the failing byte offset.
model::Dataset load_idx(const std::string& images_path,
                        const std::string& labels_path, int limit);

struct BlobsSpec {
  int dimension;
  int classes;
  int per_class;
  double noise;
  std::uint64_t seed;
};

/// Gaussian blobs around per-class centers drawn uniformly in [0.2, 0.8]^d,
/// clipped to [0,1]. noise = 0 degenerates to the centers themselves, which
/// a linear classifier separates exactly.
model::Dataset synth_blobs(const BlobsSpec& spec);

struct BarsSpec {
  int dimension;  // must be a perfect square
  int classes;    // up to 4 distinct stripe patterns
  int per_class;
  double noise;
  std::uint64_t seed;
};

/// Class-dependent stripe patterns on the sqrt(d) x sqrt(d) grid (period-2
/// horizontal or vertical bars with a phase per class) plus Gaussian noise,
/// clipped to [0,1].
model::Dataset synth_bars(const BarsSpec& spec);

/// One output row; mirrors one cell/attack of the result tables. Unset
/// optionals render as empty CSV cells / JSON nulls (the "/" convention).
struct ResultRow {
  std::string run_id;
  std::int64_t sample_index = 0;
  std::optional<std::int64_t> repeat;
  std::string kind;
  std::optional<std::int64_t> dimension;
  std::optional<double> r;
  std::optional<double> epsilon;
  std::optional<double> threshold_t;
  std::optional<double> value;
  std::optional<double> vu_over_vs;
  std::optional<double> norm_h;
  std::optional<double> m;
  std::string m_strategy;
  std::optional<bool> feasible;
  std::string reason;
  std::optional<double> topk;
  std::optional<double> kendall;
  std::string kendall_variant;
  std::optional<double> cosine;
  std::optional<double> delta_norm;
  std::optional<bool> prediction_preserved;
  std::optional<double> t1;
  std::optional<double> t2;
  std::optional<double> alpha;
  std::optional<std::uint64_t> smoothing_seed;
  std::optional<std::uint64_t> attack_seed;
};

enum class OutputFormat { kCsv, kJsonLines };

OutputFormat output_format_from_name(const std::string& name);

/// Fixed, documented column order shared by the CSV header and JSONL keys.
const std::vector<std::string>& result_columns();

/// CSV with the fixed header (floats at 17 significant digits, round-trip
/// safe) or JSON Lines with one object per row.
void emit_results(const std::vector<ResultRow>& rows, OutputFormat format,
                  const std::string& path);

/// fnv1a64 of a byte string, as 16 lowercase hex digits. Used for the model
/// digest and for deriving run ids from resolved configs.
std::string fnv1a64_hex(const std::string& bytes);

/// Writes text to path, throwing on I/O failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace attrcert::store

#endif  // ATTRCERT_STORE_HPP_
