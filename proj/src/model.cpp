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
#include "attrcert/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attrcert/rng.hpp"

namespace attrcert::model {

namespace {

double softplus_value(double z, double beta) {
  const double bz = beta * z;
  // Overflow-safe split: softplus(z) = max(z,0) + log1p(exp(-|beta z|))/beta
  return (bz > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::fabs(bz))) / beta;
}

double activation_value(Activation a, double beta, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kSoftplus:
      return softplus_value(z, beta);
    case Activation::kIdentity:
      return z;
  }
  return z;
}

double activation_derivative(Activation a, double beta, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kSoftplus:
      return 1.0 / (1.0 + std::exp(-beta * z));  // sigmoid(beta z)
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

void softmax_into(const Eigen::VectorXd& logits, Eigen::VectorXd& probs) {
  const double max_logit = logits.maxCoeff();
  probs = (logits.array() - max_logit).exp();
  probs /= probs.sum();
}

// Largest singular value by power iteration on W^T W. The start vector comes
// from a fixed-seed Philox stream so the bound is the same on every call.
double spectral_norm(const Eigen::MatrixXd& w) {
  if (w.size() == 0) return 0.0;
  Philox rng(0x5EEDCAFEu);
  Eigen::VectorXd v(w.cols());
  for (int i = 0; i < w.cols(); ++i) v[i] = rng.next_gaussian();
  double norm_v = v.norm();
  if (norm_v == 0.0) {
    v.setOnes();
    norm_v = v.norm();
  }
  v /= norm_v;
  double sigma = 0.0;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd wv = w * v;
    const double sigma_next = wv.norm();
    if (sigma_next == 0.0) return 0.0;
    v = w.transpose() * wv;
    v /= v.norm();
    if (std::fabs(sigma_next - sigma) <= 1e-8 * sigma_next) {
      sigma = sigma_next;
      break;
    }
    sigma = sigma_next;
  }
  return sigma;
}

int argmax(const Eigen::VectorXd& v) {
  Eigen::Index idx = 0;
  v.maxCoeff(&idx);
  return static_cast<int>(idx);
}

}  // namespace

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSoftplus:
      return "softplus";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "softplus") return Activation::kSoftplus;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation: " + name);
}

void ModelWeights::validate() const {
  if (layers.empty()) throw std::invalid_argument("model: no layers");
  int expected_in = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& layer = layers[i];
    if (layer.weights.cols() != expected_in) {
      throw std::invalid_argument("model: layer " + std::to_string(i) +
                                  " input dim " +
                                  std::to_string(layer.weights.cols()) +
                                  " breaks the chain (expected " +
                                  std::to_string(expected_in) + ")");
    }
    if (layer.bias.size() != layer.weights.rows()) {
      throw std::invalid_argument("model: layer " + std::to_string(i) +
                                  " bias size mismatch");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw std::invalid_argument("model: layer " + std::to_string(i) +
                                  " has non-finite parameters");
    }
    expected_in = static_cast<int>(layer.weights.rows());
  }
  if (expected_in != class_count) {
    throw std::invalid_argument("model: last layer output " +
                                std::to_string(expected_in) +
                                " != class_count " +
                                std::to_string(class_count));
  }
  if (!(softplus_beta > 0.0)) {
    throw std::invalid_argument("model: softplus_beta must be > 0");
  }
}

void Dataset::validate() const {
  if (features.size() != labels.size()) {
    throw std::invalid_argument("dataset: feature/label count mismatch");
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dimension) {
      throw std::invalid_argument("dataset: sample " + std::to_string(i) +
                                  " has wrong dimension");
    }
    if (features[i].minCoeff() < 0.0 || features[i].maxCoeff() > 1.0) {
      throw std::invalid_argument("dataset: sample " + std::to_string(i) +
                                  " has features outside [0,1]");
    }
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw std::invalid_argument("dataset: sample " + std::to_string(i) +
                                  " has out-of-range label");
    }
  }
}

ForwardResult forward(const ModelWeights& w, const Eigen::VectorXd& x) {
  if (x.size() != w.input_dim) {
    throw std::invalid_argument("forward: input size " +
                                std::to_string(x.size()) + " != input_dim " +
                                std::to_string(w.input_dim));
  }
  Eigen::VectorXd a = x;
  for (const DenseLayer& layer : w.layers) {
    Eigen::VectorXd z = layer.weights * a + layer.bias;
    a.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      a[i] = activation_value(layer.activation, w.softplus_beta, z[i]);
    }
  }
  ForwardResult out;
  out.logits = a;
  softmax_into(a, out.probs);
  return out;
}

int predicted_class(const ModelWeights& w, const Eigen::VectorXd& x) {
  return argmax(forward(w, x).logits);
}

void input_gradient(const ModelWeights& w, const Eigen::VectorXd& x,
                    int class_index, Wrt wrt, GradientWorkspace& ws,
                    Eigen::VectorXd& out) {
  if (x.size() != w.input_dim) {
    throw std::invalid_argument("input_gradient: input dimension mismatch");
  }
  if (class_index < 0 || class_index >= w.class_count) {
    throw std::invalid_argument("input_gradient: class_index out of range");
  }
  const std::size_t n_layers = w.layers.size();
  ws.pre.resize(n_layers);
  ws.post.resize(n_layers);

  const Eigen::VectorXd* a = &x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = w.layers[l];
    ws.pre[l].noalias() = layer.weights * (*a);
    ws.pre[l] += layer.bias;
    ws.post[l].resize(ws.pre[l].size());
    for (Eigen::Index i = 0; i < ws.pre[l].size(); ++i) {
      ws.post[l][i] =
          activation_value(layer.activation, w.softplus_beta, ws.pre[l][i]);
    }
    a = &ws.post[l];
  }

  // Seed at the outputs: e_k for a logit, the softmax Jacobian row for a
  // probability (dp_k/dy = p_k (e_k - p)).
  ws.delta.setZero(w.class_count);
  if (wrt == Wrt::kLogit) {
    ws.delta[class_index] = 1.0;
  } else {
    Eigen::VectorXd probs;
    softmax_into(ws.post[n_layers - 1], probs);
    ws.delta = -probs[class_index] * probs;
    ws.delta[class_index] += probs[class_index];
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const DenseLayer& layer = w.layers[l];
    for (Eigen::Index i = 0; i < ws.delta.size(); ++i) {
      ws.delta[i] *=
          activation_derivative(layer.activation, w.softplus_beta, ws.pre[l][i]);
    }
    ws.delta_next.noalias() = layer.weights.transpose() * ws.delta;
    ws.delta.swap(ws.delta_next);
  }
  out = ws.delta;
}

Eigen::VectorXd input_gradient(const ModelWeights& w, const Eigen::VectorXd& x,
                               int class_index, Wrt wrt) {
  GradientWorkspace ws;
  Eigen::VectorXd out;
  input_gradient(w, x, class_index, wrt, ws, out);
  return out;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  if (cfg.layer_sizes.size() < 2) {
    throw std::invalid_argument("train: need at least input and output sizes");
  }
  if (cfg.layer_sizes.front() != data.dimension ||
      cfg.layer_sizes.back() != data.class_count) {
    throw std::invalid_argument(
        "train: architecture endpoints must match the dataset (got " +
        std::to_string(cfg.layer_sizes.front()) + "->" +
        std::to_string(cfg.layer_sizes.back()) + ", want " +
        std::to_string(data.dimension) + "->" +
        std::to_string(data.class_count) + ")");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size < 1");

  Philox rng(cfg.seed);
  ModelWeights w;
  w.input_dim = data.dimension;
  w.class_count = data.class_count;
  w.softplus_beta = cfg.softplus_beta;
  const std::size_t n_layers = cfg.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int fan_in = cfg.layer_sizes[l];
    const int fan_out = cfg.layer_sizes[l + 1];
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) {
        layer.weights(i, j) = (2.0 * rng.next_double() - 1.0) * limit;
      }
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation =
        (l + 1 == n_layers) ? Activation::kIdentity : cfg.hidden_activation;
    w.layers.push_back(std::move(layer));
  }
  w.validate();

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<Eigen::MatrixXd> grad_w(n_layers);
  std::vector<Eigen::VectorXd> grad_b(n_layers);
  std::vector<Eigen::VectorXd> pre(n_layers), post(n_layers);
  double epoch_loss = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the seeded stream; deterministic batch order.
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = rng.next_u64() % i;
      std::swap(order[i - 1], order[j]);
    }
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      for (std::size_t l = 0; l < n_layers; ++l) {
        grad_w[l].setZero(w.layers[l].weights.rows(),
                          w.layers[l].weights.cols());
        grad_b[l].setZero(w.layers[l].bias.size());
      }
      for (std::size_t idx = start; idx < stop; ++idx) {
        const Eigen::VectorXd& x = data.features[order[idx]];
        const int label = data.labels[order[idx]];
        const Eigen::VectorXd* a = &x;
        for (std::size_t l = 0; l < n_layers; ++l) {
          pre[l].noalias() = w.layers[l].weights * (*a);
          pre[l] += w.layers[l].bias;
          post[l].resize(pre[l].size());
          for (Eigen::Index i = 0; i < pre[l].size(); ++i) {
            post[l][i] = activation_value(w.layers[l].activation,
                                          w.softplus_beta, pre[l][i]);
          }
          a = &post[l];
        }
        Eigen::VectorXd probs;
        softmax_into(post[n_layers - 1], probs);
        epoch_loss -= std::log(std::max(probs[label], 1e-300));

        Eigen::VectorXd delta = probs;
        delta[label] -= 1.0;
        for (std::size_t l = n_layers; l-- > 0;) {
          for (Eigen::Index i = 0; i < delta.size(); ++i) {
            delta[i] *= activation_derivative(w.layers[l].activation,
                                              w.softplus_beta, pre[l][i]);
          }
          const Eigen::VectorXd& layer_in = (l == 0) ? x : post[l - 1];
          grad_w[l].noalias() += delta * layer_in.transpose();
          grad_b[l] += delta;
          if (l > 0) delta = w.layers[l].weights.transpose() * delta;
        }
      }
      const double scale = cfg.learning_rate / static_cast<double>(stop - start);
      for (std::size_t l = 0; l < n_layers; ++l) {
        w.layers[l].weights -= scale * grad_w[l];
        w.layers[l].bias -= scale * grad_b[l];
      }
    }
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("train: non-finite loss at epoch " +
                              std::to_string(epoch),
                          epoch);
    }
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (predicted_class(w, data.features[i]) == data.labels[i]) ++correct;
  }
  return TrainResult{std::move(w),
                     n == 0 ? 0.0 : static_cast<double>(correct) / n,
                     n == 0 ? 0.0 : epoch_loss / static_cast<double>(n)};
}

double lipschitz_logit_bound(const ModelWeights& w) {
  w.validate();
  double bound = 1.0;
  for (const DenseLayer& layer : w.layers) {
    bound *= spectral_norm(layer.weights);
  }
  return bound * (1.0 + 1e-6);
}

ModelWeights softplus_substitute(const ModelWeights& w) {
  ModelWeights out = w;
  for (DenseLayer& layer : out.layers) {
    if (layer.activation == Activation::kRelu) {
      layer.activation = Activation::kSoftplus;
    }
  }
  return out;
}

}  // namespace attrcert::model
