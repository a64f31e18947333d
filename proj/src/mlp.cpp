#include "synapse/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "synapse/errors.hpp"

namespace synapse {

namespace {

constexpr double kOutputFloor = 1e-12;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<double> standardize(const MlpModel& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.input_dim()) {
    throw InvalidArgument("mlp input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(m.input_dim()));
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw InvalidArgument("mlp input feature " + std::to_string(i) + " is not finite");
    out[i] = (x[i] - m.feature_mean[i]) / m.feature_std[i];
  }
  return out;
}

// Activations per layer (index 0 is the standardized input) plus the final
// pre-activation logit.
struct Trace {
  std::vector<std::vector<double>> activations;
  double logit = 0.0;
};

Trace run(const MlpModel& m, std::vector<double> input) {
  Trace t;
  t.activations.push_back(std::move(input));
  for (const auto& layer : m.layers) {
    const auto& in = t.activations.back();
    std::vector<double> out(layer.outputs);
    for (int o = 0; o < layer.outputs; ++o) {
      double z = layer.biases[o];
      const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      for (int i = 0; i < layer.inputs; ++i) z += w[i] * in[i];
      out[o] = sigmoid(z);
      if (&layer == &m.layers.back()) t.logit = z;
    }
    t.activations.push_back(std::move(out));
  }
  return t;
}

double sample_loss(double logit, int label) { return softplus(logit) - label * logit; }

// Accumulates d(loss)/d(params) for one sample into `grads` (same layout as
// the model layers).
void backprop(const MlpModel& m, const Trace& t, int label, std::vector<DenseLayer>& grads, double scale) {
  // Output layer: d(loss)/d(logit) = p - y for sigmoid + cross-entropy.
  std::vector<double> delta{t.activations.back()[0] - label};
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    const auto& layer = m.layers[l];
    const auto& in = t.activations[l];
    auto& g = grads[l];
    for (int o = 0; o < layer.outputs; ++o) {
      g.biases[o] += scale * delta[o];
      double* gw = g.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      for (int i = 0; i < layer.inputs; ++i) gw[i] += scale * delta[o] * in[i];
    }
    if (l == 0) break;
    std::vector<double> prev(layer.inputs, 0.0);
    for (int o = 0; o < layer.outputs; ++o) {
      const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      for (int i = 0; i < layer.inputs; ++i) prev[i] += w[i] * delta[o];
    }
    for (int i = 0; i < layer.inputs; ++i) prev[i] *= in[i] * (1.0 - in[i]);
    delta = std::move(prev);
  }
}

// Single-sample loss in extended precision with the parameter at `target`
// replaced by `value`, so finite differences are not swamped by rounding.
long double probe_loss(const MlpModel& m, const std::vector<double>& input, int label, const double* target,
                       long double value) {
  auto param = [&](const double& p) -> long double { return &p == target ? value : p; };
  std::vector<long double> in(input.begin(), input.end());
  long double logit = 0;
  for (const auto& layer : m.layers) {
    std::vector<long double> out(layer.outputs);
    for (int o = 0; o < layer.outputs; ++o) {
      long double z = param(layer.biases[o]);
      for (int i = 0; i < layer.inputs; ++i) z += param(layer.weights[static_cast<std::size_t>(o) * layer.inputs + i]) * in[i];
      out[o] = 1.0L / (1.0L + std::exp(-z));
      logit = z;
    }
    in = std::move(out);
  }
  const long double softplus = logit > 0 ? logit + std::log1p(std::exp(-logit)) : std::log1p(std::exp(logit));
  return softplus - label * logit;
}

std::vector<DenseLayer> zero_like(const MlpModel& m) {
  std::vector<DenseLayer> g = m.layers;
  for (auto& l : g) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.biases.begin(), l.biases.end(), 0.0);
  }
  return g;
}

void check_samples(const MlpModel& m, std::span<const Sample> samples) {
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (static_cast<int>(s.features.size()) != m.input_dim()) {
      throw InvalidArgument("sample " + std::to_string(i) + " has " + std::to_string(s.features.size()) +
                            " features, model expects " + std::to_string(m.input_dim()));
    }
    if (s.label != 0 && s.label != 1) throw InvalidArgument("sample " + std::to_string(i) + " label must be 0 or 1");
    (s.label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw InvalidArgument("training data must contain both classes");
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

void TrainSpec::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning_rate must be > 0");
  if (epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (batch_size <= 0) throw InvalidArgument("batch_size must be positive");
  for (int h : hidden_sizes)
    if (h <= 0) throw InvalidArgument("hidden layer sizes must be positive");
}

MlpModel mlp_init(std::span<const int> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw InvalidArgument("an MLP needs at least an input and an output layer");
  for (int s : layer_sizes)
    if (s <= 0) throw InvalidArgument("layer sizes must be positive, got " + std::to_string(s));
  if (layer_sizes.back() != 1) throw InvalidArgument("the output layer must have exactly one unit");

  MlpModel m;
  m.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  m.feature_mean.assign(layer_sizes.front(), 0.0);
  m.feature_std.assign(layer_sizes.front(), 1.0);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    DenseLayer layer;
    layer.inputs = layer_sizes[l];
    layer.outputs = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.weights.resize(static_cast<std::size_t>(layer.inputs) * layer.outputs);
    for (auto& w : layer.weights) w = dist(rng);
    layer.biases.assign(layer.outputs, 0.0);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

double mlp_forward(const MlpModel& model, std::span<const double> x) {
  const auto t = run(model, standardize(model, x));
  return std::clamp(t.activations.back()[0], kOutputFloor, 1.0 - kOutputFloor);
}

double mlp_loss(const MlpModel& model, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total += sample_loss(run(model, standardize(model, s.features)).logit, s.label);
  return total / static_cast<double>(samples.size());
}

MlpModel mlp_train(MlpModel model, std::span<const Sample> samples, const TrainSpec& spec) {
  spec.validate();
  if (spec.epochs == 0) return model;
  check_samples(model, samples);

  // Per-dimension standardization from the training set.
  const auto dim = static_cast<std::size_t>(model.input_dim());
  const auto n = static_cast<double>(samples.size());
  std::vector<double> mean(dim, 0.0);
  std::vector<double> var(dim, 0.0);
  for (const auto& s : samples)
    for (std::size_t i = 0; i < dim; ++i) mean[i] += s.features[i] / n;
  for (const auto& s : samples)
    for (std::size_t i = 0; i < dim; ++i) var[i] += (s.features[i] - mean[i]) * (s.features[i] - mean[i]) / n;
  model.feature_mean = mean;
  model.feature_std.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) model.feature_std[i] = var[i] > 1e-12 ? std::sqrt(var[i]) : 1.0;

  std::vector<std::vector<double>> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) inputs.push_back(standardize(model, s.features));

  auto full_loss = [&](const MlpModel& m) {
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) total += sample_loss(run(m, inputs[i]).logit, samples[i].label);
    const double loss = total / n;
    if (!std::isfinite(loss)) throw TrainingDiverged("training loss became non-finite");
    return loss;
  };

  MlpModel best = model;
  double best_loss = full_loss(model);
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(spec.batch_size));
      auto grads = zero_like(model);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto idx = order[k];
        backprop(model, run(model, inputs[idx]), samples[idx].label, grads, scale);
      }
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] -= spec.learning_rate * grads[l].weights[i];
        for (std::size_t i = 0; i < layer.biases.size(); ++i) layer.biases[i] -= spec.learning_rate * grads[l].biases[i];
      }
    }
    const double loss = full_loss(model);
    if (loss < best_loss) {
      best_loss = loss;
      best = model;
    }
  }
  return best;
}

std::vector<double> mlp_parameters(const MlpModel& model) {
  std::vector<double> p;
  p.reserve(model.parameter_count());
  for (const auto& l : model.layers) {
    p.insert(p.end(), l.weights.begin(), l.weights.end());
    p.insert(p.end(), l.biases.begin(), l.biases.end());
  }
  return p;
}

double mlp_gradient_check(const MlpModel& model, const Sample& sample) {
  const auto input = standardize(model, sample.features);
  auto grads = zero_like(model);
  backprop(model, run(model, input), sample.label, grads, 1.0);

  constexpr long double h = 1e-5L;
  double worst = 0.0;
  auto compare = [&](const double& param, double analytic) {
    const long double up = probe_loss(model, input, sample.label, &param, param + h);
    const long double down = probe_loss(model, input, sample.label, &param, param - h);
    const auto numeric = static_cast<double>((up - down) / (2.0L * h));
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (std::size_t i = 0; i < model.layers[l].weights.size(); ++i) compare(model.layers[l].weights[i], grads[l].weights[i]);
    for (std::size_t i = 0; i < model.layers[l].biases.size(); ++i) compare(model.layers[l].biases[i], grads[l].biases[i]);
  }
  return worst;
}

double accuracy(const MlpModel& model, std::span<const Sample> samples, double threshold) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) correct += ((mlp_forward(model, s.features) >= threshold) == (s.label == 1));
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace synapse
