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
#include "attrcert/store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "attrcert/rng.hpp"

namespace attrcert::store {

namespace {

constexpr const char* kModelMagic = "attrcert-model v1";

const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const std::uint32_t v =
        (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
    i += 3;
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text,
                                        const std::string& field) {
  static const auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) {
    throw LoadError("load_model: field '" + field +
                    "' has malformed base64 length");
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        vals[k] = 0;
        ++pad;
      } else {
        vals[k] = value_of(c);
        if (vals[k] < 0 || pad > 0) {
          throw LoadError("load_model: field '" + field +
                          "' has an invalid base64 character");
        }
      }
    }
    const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) |
                            (vals[2] << 6) | vals[3];
    out.push_back((v >> 16) & 0xFF);
    if (pad < 2) out.push_back((v >> 8) & 0xFF);
    if (pad < 1) out.push_back(v & 0xFF);
  }
  return out;
}

void append_double_le(std::vector<std::uint8_t>& bytes, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  for (int k = 0; k < 8; ++k) {
    bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
  }
}

double read_double_le(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) {
    bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  }
  double value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (const char c : bytes) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= 0x100000001B3ull;
  }
  return hash;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& data,
                        std::size_t offset, const std::string& file) {
  if (offset + 4 > data.size()) {
    throw LoadError("load_idx: " + file + " truncated at byte offset " +
                    std::to_string(offset));
  }
  return (static_cast<std::uint32_t>(data[offset]) << 24) |
         (static_cast<std::uint32_t>(data[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(data[offset + 2]) << 8) |
         static_cast<std::uint32_t>(data[offset + 3]);
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open file: " + path);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

template <typename T>
std::string opt_to_string(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, double>) {
    return format_double(*v);
  } else if constexpr (std::is_same_v<T, bool>) {
    return *v ? "true" : "false";
  } else {
    return std::to_string(*v);
  }
}

template <typename T>
nlohmann::json opt_to_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void save_model(const model::ModelWeights& w, const std::string& path) {
  w.validate();
  std::ostringstream body;
  body << kModelMagic << "\n";
  body << "input_dim " << w.input_dim << "\n";
  body << "class_count " << w.class_count << "\n";
  body << "softplus_beta " << format_double(w.softplus_beta) << "\n";
  body << "layer_count " << w.layers.size() << "\n";
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const model::DenseLayer& layer = w.layers[l];
    body << "layer " << l << " " << model::activation_name(layer.activation)
         << " " << layer.weights.rows() << " " << layer.weights.cols() << "\n";
    std::vector<std::uint8_t> wbytes;
    wbytes.reserve(static_cast<std::size_t>(layer.weights.size()) * 8);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        append_double_le(wbytes, layer.weights(i, j));
      }
    }
    body << "weights " << base64_encode(wbytes) << "\n";
    std::vector<std::uint8_t> bbytes;
    bbytes.reserve(static_cast<std::size_t>(layer.bias.size()) * 8);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      append_double_le(bbytes, layer.bias[i]);
    }
    body << "bias " << base64_encode(bbytes) << "\n";
  }
  std::string text = body.str();
  text += "digest fnv1a64 " + fnv1a64_hex(text) + "\n";
  write_text_file(path, text);
}

model::ModelWeights load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("load_model: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  const std::size_t digest_pos = text.rfind("digest fnv1a64 ");
  if (digest_pos == std::string::npos) {
    throw LoadError("load_model: field 'digest' missing (truncated file?)");
  }
  const std::string body = text.substr(0, digest_pos);
  std::string digest_line = text.substr(digest_pos);
  while (!digest_line.empty() &&
         (digest_line.back() == '\n' || digest_line.back() == '\r')) {
    digest_line.pop_back();
  }
  const std::string expected = "digest fnv1a64 " + fnv1a64_hex(body);
  if (digest_line != expected) {
    throw LoadError("load_model: field 'digest' mismatch (file corrupt?)");
  }

  std::istringstream lines(body);
  std::string line;
  auto next_line = [&](const std::string& field) {
    if (!std::getline(lines, line)) {
      throw LoadError("load_model: field '" + field +
                      "' missing (truncated container)");
    }
    while (!line.empty() && line.back() == '\r') line.pop_back();
  };
  auto parse_kv = [&](const std::string& field) -> std::string {
    next_line(field);
    const std::string prefix = field + " ";
    if (line.rfind(prefix, 0) != 0) {
      throw LoadError("load_model: expected field '" + field + "', got '" +
                      line + "'");
    }
    return line.substr(prefix.size());
  };

  next_line("magic");
  if (line != kModelMagic) {
    throw LoadError("load_model: field 'version': unsupported container '" +
                    line + "'");
  }
  model::ModelWeights w;
  try {
    w.input_dim = std::stoi(parse_kv("input_dim"));
    w.class_count = std::stoi(parse_kv("class_count"));
    w.softplus_beta = std::stod(parse_kv("softplus_beta"));
    const int layer_count = std::stoi(parse_kv("layer_count"));
    for (int l = 0; l < layer_count; ++l) {
      next_line("layer");
      std::istringstream header(line);
      std::string tag, act_name;
      int index = 0, rows = 0, cols = 0;
      header >> tag >> index >> act_name >> rows >> cols;
      if (tag != "layer" || index != l || rows <= 0 || cols <= 0 ||
          header.fail()) {
        throw LoadError("load_model: field 'layer' malformed at layer " +
                        std::to_string(l) + ": '" + line + "'");
      }
      model::DenseLayer layer;
      layer.activation = model::activation_from_name(act_name);
      const std::vector<std::uint8_t> wbytes =
          base64_decode(parse_kv("weights"), "weights");
      if (wbytes.size() != static_cast<std::size_t>(rows) * cols * 8) {
        throw LoadError("load_model: field 'weights' has wrong payload size "
                        "at layer " +
                        std::to_string(l));
      }
      layer.weights.resize(rows, cols);
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          layer.weights(i, j) =
              read_double_le(wbytes.data() + 8 * (i * cols + j));
        }
      }
      const std::vector<std::uint8_t> bbytes =
          base64_decode(parse_kv("bias"), "bias");
      if (bbytes.size() != static_cast<std::size_t>(rows) * 8) {
        throw LoadError("load_model: field 'bias' has wrong payload size "
                        "at layer " +
                        std::to_string(l));
      }
      layer.bias.resize(rows);
      for (int i = 0; i < rows; ++i) {
        layer.bias[i] = read_double_le(bbytes.data() + 8 * i);
      }
      w.layers.push_back(std::move(layer));
    }
  } catch (const std::invalid_argument& e) {
    throw LoadError(std::string("load_model: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw LoadError(std::string("load_model: numeric field out of range: ") +
                    e.what());
  }
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw LoadError(std::string("load_model: inconsistent container: ") +
                    e.what());
  }
  return w;
}

model::Dataset load_idx(const std::string& images_path,
                        const std::string& labels_path, int limit) {
  if (limit < 0) throw LoadError("load_idx: limit must be >= 0");
  const std::vector<std::uint8_t> img = read_binary_file(images_path);
  const std::vector<std::uint8_t> lab = read_binary_file(labels_path);

  const std::uint32_t img_magic = read_be32(img, 0, images_path);
  if (img_magic != 0x00000803u) {
    throw LoadError("load_idx: expected image magic 0x00000803 at byte 0 of " +
                    images_path + ", got " + std::to_string(img_magic));
  }
  const std::uint32_t lab_magic = read_be32(lab, 0, labels_path);
  if (lab_magic != 0x00000801u) {
    throw LoadError("load_idx: expected label magic 0x00000801 at byte 0 of " +
                    labels_path + ", got " + std::to_string(lab_magic));
  }
  const std::uint32_t n_images = read_be32(img, 4, images_path);
  const std::uint32_t rows = read_be32(img, 8, images_path);
  const std::uint32_t cols = read_be32(img, 12, images_path);
  const std::uint32_t n_labels = read_be32(lab, 4, labels_path);
  if (n_images != n_labels) {
    throw LoadError("load_idx: image count " + std::to_string(n_images) +
                    " != label count " + std::to_string(n_labels));
  }
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  const std::size_t want_img = 16 + static_cast<std::size_t>(n_images) * pixels;
  if (img.size() < want_img) {
    throw LoadError("load_idx: " + images_path + " truncated at byte offset " +
                    std::to_string(img.size()) + " (need " +
                    std::to_string(want_img) + ")");
  }
  const std::size_t want_lab = 8 + n_labels;
  if (lab.size() < want_lab) {
    throw LoadError("load_idx: " + labels_path + " truncated at byte offset " +
                    std::to_string(lab.size()) + " (need " +
                    std::to_string(want_lab) + ")");
  }

  const std::size_t take =
      std::min<std::size_t>(limit, static_cast<std::size_t>(n_images));
  model::Dataset data;
  data.dimension = static_cast<int>(pixels);
  data.class_count = 10;
  data.provenance = "idx(" + images_path + ";" + labels_path + ")";
  data.features.reserve(take);
  data.labels.reserve(take);
  for (std::size_t s = 0; s < take; ++s) {
    Eigen::VectorXd x(pixels);
    const std::uint8_t* base = img.data() + 16 + s * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      x[static_cast<Eigen::Index>(p)] = static_cast<double>(base[p]) / 255.0;
    }
    data.features.push_back(std::move(x));
    data.labels.push_back(static_cast<int>(lab[8 + s]));
  }
  data.validate();
  return data;
}

model::Dataset synth_blobs(const BlobsSpec& spec) {
  if (spec.dimension < 1 || spec.classes < 2 || spec.per_class < 1) {
    throw std::invalid_argument("synth_blobs: invalid spec");
  }
  Philox center_rng(spec.seed, 0);
  std::vector<Eigen::VectorXd> centers;
  for (int k = 0; k < spec.classes; ++k) {
    Eigen::VectorXd c(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) {
      c[i] = 0.2 + 0.6 * center_rng.next_double();
    }
    centers.push_back(std::move(c));
  }
  Philox sample_rng(spec.seed, 1);
  model::Dataset data;
  data.dimension = spec.dimension;
  data.class_count = spec.classes;
  char prov[128];
  std::snprintf(prov, sizeof(prov),
                "synth:blobs(d=%d;classes=%d;per_class=%d;noise=%g;seed=%llu)",
                spec.dimension, spec.classes, spec.per_class, spec.noise,
                static_cast<unsigned long long>(spec.seed));
  data.provenance = prov;
  for (int k = 0; k < spec.classes; ++k) {
    for (int s = 0; s < spec.per_class; ++s) {
      Eigen::VectorXd x = centers[k];
      for (int i = 0; i < spec.dimension; ++i) {
        x[i] = std::clamp(x[i] + spec.noise * sample_rng.next_gaussian(), 0.0,
                          1.0);
      }
      data.features.push_back(std::move(x));
      data.labels.push_back(k);
    }
  }
  data.validate();
  return data;
}

model::Dataset synth_bars(const BarsSpec& spec) {
  const int side = static_cast<int>(std::lround(std::sqrt(
      static_cast<double>(spec.dimension))));
  if (side * side != spec.dimension) {
    throw std::invalid_argument(
        "synth_bars: dimension must be a perfect square");
  }
  if (spec.classes < 2 || spec.classes > 4 || spec.per_class < 1) {
    throw std::invalid_argument(
        "synth_bars: classes must lie in [2, 4] (stripe patterns)");
  }
  Philox rng(spec.seed);
  model::Dataset data;
  data.dimension = spec.dimension;
  data.class_count = spec.classes;
  char prov[128];
  std::snprintf(prov, sizeof(prov),
                "synth:bars(d=%d;classes=%d;per_class=%d;noise=%g;seed=%llu)",
                spec.dimension, spec.classes, spec.per_class, spec.noise,
                static_cast<unsigned long long>(spec.seed));
  data.provenance = prov;
  for (int k = 0; k < spec.classes; ++k) {
    const bool vertical = (k % 2) == 1;
    const int phase = k / 2;
    for (int s = 0; s < spec.per_class; ++s) {
      Eigen::VectorXd x(spec.dimension);
      for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
          const int line = vertical ? j : i;
          const double base = (line % 2 == phase) ? 1.0 : 0.0;
          x[i * side + j] = std::clamp(
              base + spec.noise * rng.next_gaussian(), 0.0, 1.0);
        }
      }
      data.features.push_back(std::move(x));
      data.labels.push_back(k);
    }
  }
  data.validate();
  return data;
}

OutputFormat output_format_from_name(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "jsonl" || name == "json_lines") return OutputFormat::kJsonLines;
  throw std::invalid_argument("unknown output format: " + name);
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> columns = {
      "run_id",      "sample_index", "repeat",
      "kind",        "d",            "r",
      "epsilon",     "threshold_T",  "value",
      "vU_over_vS",  "norm_h",       "M",
      "m_strategy",  "feasible",     "reason",
      "topk",        "kendall",      "kendall_variant",
      "cosine",      "delta_norm",   "prediction_preserved",
      "t1",          "t2",           "alpha",
      "smoothing_seed", "attack_seed"};
  return columns;
}

void emit_results(const std::vector<ResultRow>& rows, OutputFormat format,
                  const std::string& path) {
  std::ostringstream out;
  if (format == OutputFormat::kCsv) {
    const auto& cols = result_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      out << (i ? "," : "") << cols[i];
    }
    out << "\n";
    for (const ResultRow& row : rows) {
      std::vector<std::string> fields = {
          csv_escape(row.run_id),
          std::to_string(row.sample_index),
          opt_to_string(row.repeat),
          csv_escape(row.kind),
          opt_to_string(row.dimension),
          opt_to_string(row.r),
          opt_to_string(row.epsilon),
          opt_to_string(row.threshold_t),
          opt_to_string(row.value),
          opt_to_string(row.vu_over_vs),
          opt_to_string(row.norm_h),
          opt_to_string(row.m),
          csv_escape(row.m_strategy),
          opt_to_string(row.feasible),
          csv_escape(row.reason),
          opt_to_string(row.topk),
          opt_to_string(row.kendall),
          csv_escape(row.kendall_variant),
          opt_to_string(row.cosine),
          opt_to_string(row.delta_norm),
          opt_to_string(row.prediction_preserved),
          opt_to_string(row.t1),
          opt_to_string(row.t2),
          opt_to_string(row.alpha),
          opt_to_string(row.smoothing_seed),
          opt_to_string(row.attack_seed)};
      for (std::size_t i = 0; i < fields.size(); ++i) {
        out << (i ? "," : "") << fields[i];
      }
      out << "\n";
    }
  } else {
    for (const ResultRow& row : rows) {
      nlohmann::json obj;
      obj["run_id"] = row.run_id;
      obj["sample_index"] = row.sample_index;
      obj["repeat"] = opt_to_json(row.repeat);
      obj["kind"] = row.kind;
      obj["d"] = opt_to_json(row.dimension);
      obj["r"] = opt_to_json(row.r);
      obj["epsilon"] = opt_to_json(row.epsilon);
      obj["threshold_T"] = opt_to_json(row.threshold_t);
      obj["value"] = opt_to_json(row.value);
      obj["vU_over_vS"] = opt_to_json(row.vu_over_vs);
      obj["norm_h"] = opt_to_json(row.norm_h);
      obj["M"] = opt_to_json(row.m);
      obj["m_strategy"] = row.m_strategy;
      obj["feasible"] = opt_to_json(row.feasible);
      obj["reason"] = row.reason;
      obj["topk"] = opt_to_json(row.topk);
      obj["kendall"] = opt_to_json(row.kendall);
      obj["kendall_variant"] = row.kendall_variant;
      obj["cosine"] = opt_to_json(row.cosine);
      obj["delta_norm"] = opt_to_json(row.delta_norm);
      obj["prediction_preserved"] = opt_to_json(row.prediction_preserved);
      obj["t1"] = opt_to_json(row.t1);
      obj["t2"] = opt_to_json(row.t2);
      obj["alpha"] = opt_to_json(row.alpha);
      obj["smoothing_seed"] = opt_to_json(row.smoothing_seed);
      obj["attack_seed"] = opt_to_json(row.attack_seed);
      out << obj.dump() << "\n";
    }
  }
  write_text_file(path, out.str());
}

}  // namespace attrcert::store
