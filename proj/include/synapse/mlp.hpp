#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace synapse {

/// Fully connected layer; `weights` is outputs x inputs, row-major.
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Binary classifier with logistic activations on every layer.
///
/// Inputs are standardized with `feature_mean` / `feature_std` before the first
/// layer. Both are fitted by `mlp_train`; a freshly initialised model uses the
/// identity transform.
struct MlpModel {
  std::vector<int> layer_sizes;
  std::vector<DenseLayer> layers;
  std::vector<double> feature_mean;
  std::vector<double> feature_std;

  int input_dim() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  std::size_t parameter_count() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

struct TrainSpec {
  double learning_rate = 0.5;
  int epochs = 200;
  int batch_size = 16;
  std::uint64_t seed = 1;
  std::vector<int> hidden_sizes{20};

  void validate() const;
};

struct Sample {
  std::vector<double> features;
  int label = 0;  // 0 or 1
};

MlpModel mlp_init(std::span<const int> layer_sizes, std::uint64_t seed);

/// Probability of the positive class, strictly inside (0, 1).
double mlp_forward(const MlpModel& model, std::span<const double> x);

/// Mean binary cross-entropy of `model` over `samples`.
double mlp_loss(const MlpModel& model, std::span<const Sample> samples);

/// Mini-batch SGD on binary cross-entropy. Refits the input standardization
/// from `samples`, shuffles once per epoch from `spec.seed`, and returns the
/// epoch snapshot with the lowest full-set loss (never worse than the
/// starting point). Zero epochs returns `model` untouched.
MlpModel mlp_train(MlpModel model, std::span<const Sample> samples, const TrainSpec& spec);

/// Largest relative error between the backprop gradient of the single-sample
/// loss and central finite differences (h = 1e-5, losses evaluated in long
/// double) over all parameters.
/// Relative error is |a - n| / max(|a|, |n|, 1e-6).
double mlp_gradient_check(const MlpModel& model, const Sample& sample);

/// Flattened parameter vector in layer order (weights then biases).
std::vector<double> mlp_parameters(const MlpModel& model);

double accuracy(const MlpModel& model, std::span<const Sample> samples, double threshold = 0.5);

}  // namespace synapse
