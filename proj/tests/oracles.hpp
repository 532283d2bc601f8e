#pragma once

// Brute-force reference implementations. They share no code with the library
// and favour the most literal formulation over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Adjective -> number of sample sets that mention it, keeping the top p by
// count with ties resolved by ascending token.
inline std::map<std::string, int> indicator_counts(const std::vector<std::vector<std::string>>& sets, int p) {
  std::vector<std::string> universe;
  for (const auto& s : sets) {
    for (const auto& a : s) {
      if (std::find(universe.begin(), universe.end(), a) == universe.end()) universe.push_back(a);
    }
  }
  std::vector<std::pair<int, std::string>> scored;
  for (const auto& a : universe) {
    int count = 0;
    for (const auto& s : sets) {
      bool present = false;
      for (const auto& t : s) present = present || t == a;
      count += present ? 1 : 0;
    }
    scored.emplace_back(count, a);
  }
  // Selection sort: highest count first, then smallest token.
  for (std::size_t i = 0; i < scored.size(); ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < scored.size(); ++j) {
      const bool higher = scored[j].first > scored[best].first;
      const bool tie_smaller = scored[j].first == scored[best].first && scored[j].second < scored[best].second;
      if (higher || tie_smaller) best = j;
    }
    std::swap(scored[i], scored[best]);
  }
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < scored.size() && static_cast<int>(i) < p; ++i) out[scored[i].second] = scored[i].first;
  return out;
}

struct LabeledProfile {
  bool masculine = false;
  std::vector<std::string> adjectives;
};

// (masculine count, total count) of profiles containing the adjective.
inline std::pair<std::size_t, std::size_t> ratio_counts(const std::vector<LabeledProfile>& profiles,
                                                       const std::string& adjective) {
  std::size_t masc = 0;
  std::size_t total = 0;
  for (const auto& p : profiles) {
    for (const auto& a : p.adjectives) {
      if (a == adjective) {
        ++total;
        if (p.masculine) ++masc;
        break;
      }
    }
  }
  return {masc, total};
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

// -30 / ln(f) written through log2 so it does not reuse the library's path.
inline double scaled_weight(double f) {
  const double clamped = f > 0.98 ? 0.98 : f;
  return -30.0 * std::log2(std::exp(1.0)) / std::log2(clamped);
}

struct Mlp {
  std::vector<std::vector<double>> w1;  // H rows of D
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
  bool tanh_activation = false;
};

inline double forward(const Mlp& m, const std::vector<double>& x) {
  double out = m.b2;
  for (std::size_t h = 0; h < m.w1.size(); ++h) {
    double pre = m.b1[h];
    for (std::size_t d = 0; d < x.size(); ++d) pre += m.w1[h][d] * x[d];
    const double act = m.tanh_activation ? std::tanh(pre) : (pre > 0 ? pre : 0.0);
    out += m.w2[h] * act;
  }
  return 1.0 / (1.0 + std::exp(-out));
}

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;  // positive = masculine
};

inline Confusion confusion(const std::vector<bool>& predicted_masc, const std::vector<bool>& true_masc) {
  Confusion c;
  for (std::size_t i = 0; i < predicted_masc.size(); ++i) {
    if (predicted_masc[i] && true_masc[i]) ++c.tp;
    if (predicted_masc[i] && !true_masc[i]) ++c.fp;
    if (!predicted_masc[i] && true_masc[i]) ++c.fn;
    if (!predicted_masc[i] && !true_masc[i]) ++c.tn;
  }
  return c;
}

inline double f1(double tp, double fp, double fn) {
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

// Central two-sided interval [lo, hi] for Binomial(n, 0.5) holding at least
// `mass` of the probability, from exact pmf sums in log space.
inline std::pair<std::size_t, std::size_t> binomial_interval(std::size_t n, double mass) {
  std::vector<double> pmf(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    pmf[k] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  const double tail = (1.0 - mass) / 2.0;
  std::size_t lo = 0;
  double acc = 0.0;
  while (lo < n && acc + pmf[lo] <= tail) acc += pmf[lo++];
  std::size_t hi = n;
  acc = 0.0;
  while (hi > 0 && acc + pmf[hi] <= tail) acc += pmf[hi--];
  return {lo, hi};
}

// Plain batch-gradient logistic regression; used to confirm a data set is
// linearly separable before asking the MLP to separate it.
inline double logistic_training_accuracy(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                                         int iterations = 2000, double lr = 0.5) {
  const std::size_t d = xs.front().size();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double z = b;
      for (std::size_t k = 0; k < d; ++k) z += w[k] * xs[i][k];
      const double err = 1.0 / (1.0 + std::exp(-z)) - ys[i];
      for (std::size_t k = 0; k < d; ++k) gw[k] += err * xs[i][k];
      gb += err;
    }
    for (std::size_t k = 0; k < d; ++k) w[k] -= lr * gw[k] / xs.size();
    b -= lr * gb / xs.size();
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double z = b;
    for (std::size_t k = 0; k < d; ++k) z += w[k] * xs[i][k];
    correct += ((z >= 0) == (ys[i] == 1)) ? 1 : 0;
  }
  return static_cast<double>(correct) / xs.size();
}

}  // namespace oracle
