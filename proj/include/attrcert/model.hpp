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
#ifndef ATTRCERT_MODEL_HPP_
#define ATTRCERT_MODEL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace attrcert::model {

enum class Activation { kRelu, kSoftplus, kIdentity };

/// Which network output the gradient (and hence the attribution) is taken
/// of: the raw class logit or the softmax probability.
enum class Wrt { kLogit, kProb };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation;
};

/// A small dense feedforward classifier. Layer dimensions must chain from
/// input_dim to class_count; the softmax is applied outside the layers.
struct ModelWeights {
  std::vector<DenseLayer> layers;
  int input_dim = 0;
  int class_count = 0;
  double softplus_beta = 1.0;  // sharpness of the softplus activations

  /// Throws std::invalid_argument on dimension-chain breaks or non-finite
  /// parameters.
  void validate() const;
};

struct Dataset {
  std::vector<Eigen::VectorXd> features;  // each in [0,1]^d
  std::vector<int> labels;                // each in [0, class_count)
  int dimension = 0;
  int class_count = 0;
  std::string provenance;

  std::size_t size() const { return features.size(); }
  void validate() const;
};

struct ForwardResult {
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;
};

ForwardResult forward(const ModelWeights& w, const Eigen::VectorXd& x);
int predicted_class(const ModelWeights& w, const Eigen::VectorXd& x);

/// Scratch buffers for the gradient hot path; reuse one per thread.
struct GradientWorkspace {
  std::vector<Eigen::VectorXd> pre;   // pre-activations per layer
  std::vector<Eigen::VectorXd> post;  // activations per layer
  Eigen::VectorXd delta;
  Eigen::VectorXd delta_next;
};

/// Exact reverse-mode gradient of the selected output w.r.t. the input.
Eigen::VectorXd input_gradient(const ModelWeights& w, const Eigen::VectorXd& x,
                               int class_index, Wrt wrt);
void input_gradient(const ModelWeights& w, const Eigen::VectorXd& x,
                    int class_index, Wrt wrt, GradientWorkspace& ws,
                    Eigen::VectorXd& out);

struct TrainConfig {
  std::vector<int> layer_sizes;  // input, hidden..., classes, e.g. {8,16,2}
  Activation hidden_activation = Activation::kRelu;
  double softplus_beta = 1.0;
  double learning_rate = 0.1;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& msg, int epoch)
      : std::runtime_error(msg), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

struct TrainResult {
  ModelWeights weights;
  double train_accuracy;
  double final_loss;
};

/// Mini-batch SGD on softmax cross-entropy. Deterministic given the seed
/// (Glorot-uniform init and epoch shuffles both draw from a Philox stream
/// keyed on it). epochs = 0 returns the initialization unchanged.
TrainResult train(const Dataset& data, const TrainConfig& cfg);

/// Product of layer spectral norms: a global upper bound on the l2 norm of
/// any logit's input gradient, valid for 1-Lipschitz activations (relu,
/// softplus at any beta, identity). Power iteration, 50 rounds, estimate
/// rounded up by 1e-6 relative. Also dominates the softmax-probability
/// gradients, whose Jacobian rows have l2 norm below 1.
double lipschitz_logit_bound(const ModelWeights& w);

/// Copy of w with every relu activation replaced by softplus (shared beta);
/// used by the attack, which needs a smooth surrogate loss landscape.
ModelWeights softplus_substitute(const ModelWeights& w);

}  // namespace attrcert::model

#endif  // ATTRCERT_MODEL_HPP_
