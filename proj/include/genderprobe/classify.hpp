#pragma once

#include "genderprobe/embed.hpp"
#include "genderprobe/lexicon.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace genderprobe {

enum class Activation { relu, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 200;
  int batch_size = 32;
  int hidden_size = 64;
  std::uint64_t seed = 0;
  double l2_penalty = 1e-4;
  Activation activation = Activation::relu;
  // Fit a per-dimension z-score on the training features before the first layer.
  bool standardize = true;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// Two-layer perceptron: p = sigmoid(w2 . act(W1 z + b1) + b2), where
// z = (x - input_shift) * input_scale. Shift/scale are 0/1 until fitted.
struct ClassifierParams {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x input_dim, row-major
  std::vector<double> b1;
  std::vector<double> w2;  // 1 x hidden
  double b2 = 0.0;
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;
  std::vector<double> input_shift;
  std::vector<double> input_scale;
  TrainConfig config;
  std::vector<double> loss_curve;

  double& W1(std::size_t h, std::size_t d) { return w1[h * input_dim + d]; }
  double W1(std::size_t h, std::size_t d) const { return w1[h * input_dim + d]; }

  bool operator==(const ClassifierParams&) const = default;
};

struct Gradients {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;
};

struct Prediction {
  Noun noun;
  double probability_masculine = 0.5;
  Gender predicted = Gender::masculine;
};

ClassifierParams init_params(std::size_t dim, const TrainConfig& config);

double forward(const ClassifierParams& params, std::span<const double> x);
double forward(const ClassifierParams& params, const FeatureVector& feature);

inline double label_of(Gender g) { return g == Gender::masculine ? 1.0 : 0.0; }

// Mean binary cross-entropy over (xs, ys) plus 0.5 * l2 * (|W1|^2 + |w2|^2).
// Fills grad when non-null.
double loss_and_gradient(const ClassifierParams& params, std::span<const std::vector<double>> xs,
                         std::span<const double> ys, double l2, Gradients* grad);

// Mini-batch gradient descent with per-epoch seeded shuffling. Labels come from
// each feature's noun gender (masculine = 1).
ClassifierParams train(std::span<const FeatureVector> features, const TrainConfig& config);

std::vector<Prediction> predict(const ClassifierParams& params, std::span<const FeatureVector> features);
Gender threshold(double probability_masculine);

std::string params_to_json(const ClassifierParams& params);
ClassifierParams params_from_json(std::string_view text);
void save_params(const std::filesystem::path& path, const ClassifierParams& params);
ClassifierParams load_params(const std::filesystem::path& path);

}  // namespace genderprobe
