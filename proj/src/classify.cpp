#include "genderprobe/classify.hpp"

#include "genderprobe/error.hpp"
#include "genderprobe/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace genderprobe {

using nlohmann::json;

namespace {

constexpr int kParamsVersion = 1;

double activate(Activation a, double v) { return a == Activation::relu ? (v > 0.0 ? v : 0.0) : std::tanh(v); }

double activate_grad(Activation a, double pre, double post) {
  if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
  return 1.0 - post * post;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// -[y log p + (1-y) log(1-p)] with p = sigmoid(z), computed from the logit.
double bce_from_logit(double z, double y) { return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))); }

struct Activations {
  std::vector<double> z;  // standardized input
  std::vector<double> pre;
  std::vector<double> post;
  double logit = 0.0;
};

void run_forward(const ClassifierParams& p, std::span<const double> x, Activations& a) {
  if (x.size() != p.input_dim) {
    throw ValidationError("feature dimension " + std::to_string(x.size()) + " does not match classifier input " +
                          std::to_string(p.input_dim));
  }
  a.z.resize(p.input_dim);
  for (std::size_t d = 0; d < p.input_dim; ++d) a.z[d] = (x[d] - p.input_shift[d]) * p.input_scale[d];
  a.pre.assign(p.hidden, 0.0);
  a.post.assign(p.hidden, 0.0);
  a.logit = p.b2;
  for (std::size_t h = 0; h < p.hidden; ++h) {
    double s = p.b1[h];
    const double* row = &p.w1[h * p.input_dim];
    for (std::size_t d = 0; d < p.input_dim; ++d) s += row[d] * a.z[d];
    a.pre[h] = s;
    a.post[h] = activate(p.activation, s);
    a.logit += p.w2[h] * a.post[h];
  }
}

double l2_term(const ClassifierParams& p, double l2) {
  if (l2 == 0.0) return 0.0;
  double s = 0.0;
  for (double w : p.w1) s += w * w;
  for (double w : p.w2) s += w * w;
  return 0.5 * l2 * s;
}

void fit_standardizer(ClassifierParams& p, std::span<const FeatureVector> features) {
  const std::size_t n = features.size();
  for (std::size_t d = 0; d < p.input_dim; ++d) {
    double mean = 0.0;
    for (const auto& f : features) mean += f.values[d];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& f : features) var += (f.values[d] - mean) * (f.values[d] - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    p.input_shift[d] = mean;
    // Constant dimensions carry no signal in training; ignore them at test time.
    p.input_scale[d] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? 1.0 / sd : 0.0;
  }
}

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ValidationError("activation must be 'relu' or 'tanh', got '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (epochs < 0) throw ValidationError("epochs must be non-negative");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  if (hidden_size < 1) throw ValidationError("hidden_size must be positive");
  if (!(l2_penalty >= 0.0)) throw ValidationError("l2_penalty must be non-negative");
}

ClassifierParams init_params(std::size_t dim, const TrainConfig& config) {
  if (dim < 1) throw ValidationError("input dimension must be at least 1");
  config.validate();
  ClassifierParams p;
  p.input_dim = dim;
  p.hidden = static_cast<std::size_t>(config.hidden_size);
  p.activation = config.activation;
  p.seed = config.seed;
  p.config = config;
  Rng rng(config.seed);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(dim));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(p.hidden));
  p.w1.resize(p.hidden * dim);
  for (double& w : p.w1) w = rng.uniform(-a1, a1);
  p.b1.assign(p.hidden, 0.0);
  p.w2.resize(p.hidden);
  for (double& w : p.w2) w = rng.uniform(-a2, a2);
  p.b2 = 0.0;
  p.input_shift.assign(dim, 0.0);
  p.input_scale.assign(dim, 1.0);
  return p;
}

double forward(const ClassifierParams& params, std::span<const double> x) {
  Activations a;
  run_forward(params, x, a);
  return sigmoid(a.logit);
}

double forward(const ClassifierParams& params, const FeatureVector& feature) { return forward(params, feature.values); }

double loss_and_gradient(const ClassifierParams& p, std::span<const std::vector<double>> xs,
                         std::span<const double> ys, double l2, Gradients* grad) {
  if (xs.size() != ys.size() || xs.empty()) throw ValidationError("need equally many (>0) inputs and labels");
  if (grad) {
    grad->w1.assign(p.w1.size(), 0.0);
    grad->b1.assign(p.hidden, 0.0);
    grad->w2.assign(p.hidden, 0.0);
    grad->b2 = 0.0;
  }
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  double loss = 0.0;
  Activations a;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    run_forward(p, xs[i], a);
    loss += bce_from_logit(a.logit, ys[i]);
    if (!grad) continue;
    const double dlogit = (sigmoid(a.logit) - ys[i]) * inv_n;
    grad->b2 += dlogit;
    for (std::size_t h = 0; h < p.hidden; ++h) {
      grad->w2[h] += dlogit * a.post[h];
      const double dpre = dlogit * p.w2[h] * activate_grad(p.activation, a.pre[h], a.post[h]);
      if (dpre == 0.0) continue;
      grad->b1[h] += dpre;
      double* row = &grad->w1[h * p.input_dim];
      for (std::size_t d = 0; d < p.input_dim; ++d) row[d] += dpre * a.z[d];
    }
  }
  if (grad && l2 != 0.0) {
    for (std::size_t k = 0; k < p.w1.size(); ++k) grad->w1[k] += l2 * p.w1[k];
    for (std::size_t h = 0; h < p.hidden; ++h) grad->w2[h] += l2 * p.w2[h];
  }
  return loss * inv_n + l2_term(p, l2);
}

ClassifierParams train(std::span<const FeatureVector> features, const TrainConfig& config) {
  config.validate();
  if (features.size() < 2) throw ValidationError("training needs at least 2 examples");
  const std::size_t dim = features.front().values.size();
  std::size_t n_masc = 0;
  for (const auto& f : features) {
    if (f.values.size() != dim) throw ValidationError("training features have inconsistent dimensions");
    if (f.noun.gender == Gender::masculine) ++n_masc;
  }
  if (n_masc == 0 || n_masc == features.size()) throw ValidationError("training set contains a single class");

  ClassifierParams p = init_params(dim, config);
  if (config.epochs == 0) return p;
  if (config.standardize) fit_standardizer(p, features);

  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  xs.reserve(features.size());
  for (const auto& f : features) {
    xs.push_back(f.values);
    ys.push_back(label_of(f.noun.gender));
  }

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config.seed, "epoch-shuffle"));
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::vector<double>> bx;
  std::vector<double> by;
  Gradients g;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      bx.clear();
      by.clear();
      for (std::size_t k = start; k < end; ++k) {
        bx.push_back(xs[order[k]]);
        by.push_back(ys[order[k]]);
      }
      loss_and_gradient(p, bx, by, config.l2_penalty, &g);
      for (std::size_t k = 0; k < p.w1.size(); ++k) p.w1[k] -= config.learning_rate * g.w1[k];
      for (std::size_t h = 0; h < p.hidden; ++h) {
        p.b1[h] -= config.learning_rate * g.b1[h];
        p.w2[h] -= config.learning_rate * g.w2[h];
      }
      p.b2 -= config.learning_rate * g.b2;
    }
    const double loss = loss_and_gradient(p, xs, ys, config.l2_penalty, nullptr);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch << " (loss " << loss << ", learning_rate "
          << config.learning_rate << ", b2 " << p.b2 << ")";
      throw DomainError(msg.str());
    }
    p.loss_curve.push_back(loss);
  }
  return p;
}

Gender threshold(double probability_masculine) {
  return probability_masculine >= 0.5 ? Gender::masculine : Gender::feminine;
}

std::vector<Prediction> predict(const ClassifierParams& params, std::span<const FeatureVector> features) {
  std::vector<Prediction> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    const double prob = forward(params, f);
    out.push_back({f.noun, prob, threshold(prob)});
  }
  return out;
}

std::string params_to_json(const ClassifierParams& p) {
  json w1 = json::array();
  for (std::size_t h = 0; h < p.hidden; ++h) {
    w1.push_back(std::vector<double>(p.w1.begin() + static_cast<std::ptrdiff_t>(h * p.input_dim),
                                     p.w1.begin() + static_cast<std::ptrdiff_t>((h + 1) * p.input_dim)));
  }
  const auto& c = p.config;
  const json j = {
      {"version", kParamsVersion},
      {"dims", {{"input", p.input_dim}, {"hidden", p.hidden}}},
      {"seed", p.seed},
      {"activation", std::string(to_string(p.activation))},
      {"config",
       {{"learning_rate", c.learning_rate},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"hidden_size", c.hidden_size},
        {"seed", c.seed},
        {"l2_penalty", c.l2_penalty},
        {"activation", std::string(to_string(c.activation))},
        {"standardize", c.standardize}}},
      {"weights",
       {{"w1", w1},
        {"b1", p.b1},
        {"w2", json::array({p.w2})},
        {"b2", p.b2},
        {"input_shift", p.input_shift},
        {"input_scale", p.input_scale}}},
      {"loss_curve", p.loss_curve}};
  return j.dump(1);
}

ClassifierParams params_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != kParamsVersion) throw ValidationError("unsupported params version");
    ClassifierParams p;
    p.input_dim = j.at("dims").at("input").get<std::size_t>();
    p.hidden = j.at("dims").at("hidden").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.activation = parse_activation(j.at("activation").get<std::string>());
    const json& c = j.at("config");
    p.config.learning_rate = c.at("learning_rate").get<double>();
    p.config.epochs = c.at("epochs").get<int>();
    p.config.batch_size = c.at("batch_size").get<int>();
    p.config.hidden_size = c.at("hidden_size").get<int>();
    p.config.seed = c.at("seed").get<std::uint64_t>();
    p.config.l2_penalty = c.at("l2_penalty").get<double>();
    p.config.activation = parse_activation(c.at("activation").get<std::string>());
    p.config.standardize = c.at("standardize").get<bool>();
    const json& w = j.at("weights");
    for (const auto& row : w.at("w1")) {
      const auto r = row.get<std::vector<double>>();
      if (r.size() != p.input_dim) throw ValidationError("w1 row has wrong length");
      p.w1.insert(p.w1.end(), r.begin(), r.end());
    }
    p.b1 = w.at("b1").get<std::vector<double>>();
    p.w2 = w.at("w2").at(0).get<std::vector<double>>();
    p.b2 = w.at("b2").get<double>();
    p.input_shift = w.at("input_shift").get<std::vector<double>>();
    p.input_scale = w.at("input_scale").get<std::vector<double>>();
    p.loss_curve = j.value("loss_curve", std::vector<double>{});
    if (p.w1.size() != p.hidden * p.input_dim || p.b1.size() != p.hidden || p.w2.size() != p.hidden ||
        p.input_shift.size() != p.input_dim || p.input_scale.size() != p.input_dim) {
      throw ValidationError("classifier params have inconsistent shapes");
    }
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(p.w1) || !finite(p.b1) || !finite(p.w2) || !std::isfinite(p.b2)) {
      throw ValidationError("classifier params contain non-finite values");
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad classifier params: ") + e.what());
  }
}

void save_params(const std::filesystem::path& path, const ClassifierParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << params_to_json(params) << '\n';
  if (!out) throw ValidationError("cannot write " + path.string());
}

ClassifierParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return params_from_json(buf.str());
}

}  // namespace genderprobe
