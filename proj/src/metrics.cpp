#include "genderprobe/metrics.hpp"

#include "genderprobe/error.hpp"
#include "genderprobe/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>

namespace genderprobe {

GenderRatio masculine_ratio(std::span<const AdjectiveProfile> profiles, const std::string& adjective) {
  GenderRatio r;
  r.adjective = adjective;
  for (const auto& p : profiles) {
    if (!p.contains(adjective)) continue;
    ++r.support;
    if (p.noun().gender == Gender::masculine) ++r.masculine_support;
  }
  if (r.support == 0) throw DomainError("adjective '" + adjective + "' describes no noun; r_m is undefined");
  r.r_m = static_cast<double>(r.masculine_support) / static_cast<double>(r.support);
  return r;
}

std::vector<GenderRatio> ratio_table(std::span<const AdjectiveProfile> profiles) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // masculine, total
  for (const auto& p : profiles) {
    const bool masc = p.noun().gender == Gender::masculine;
    for (const auto& [adj, c] : p.counts()) {
      auto& t = tally[adj];
      t.first += masc ? 1 : 0;
      ++t.second;
    }
  }
  std::vector<GenderRatio> out;
  out.reserve(tally.size());
  for (const auto& [adj, t] : tally) {
    out.push_back({adj, static_cast<double>(t.first) / static_cast<double>(t.second), t.first, t.second});
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine similarity of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine similarity is undefined for a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

SimilarityResult similarity(std::span<const AdjectiveProfile> profiles_p, std::span<const AdjectiveProfile> profiles_q,
                            std::size_t min_support) {
  const auto rp = ratio_table(profiles_p);
  const auto rq = ratio_table(profiles_q);
  std::map<std::string, double> q_ratio;
  for (const auto& r : rq) {
    if (r.support >= min_support) q_ratio.emplace(r.adjective, r.r_m);
  }
  SimilarityResult out;
  if (!profiles_p.empty()) out.sigma_p.language = profiles_p.front().noun().language;
  if (!profiles_q.empty()) out.sigma_q.language = profiles_q.front().noun().language;
  // ratio_table is sorted by adjective, so the shared list is too.
  for (const auto& r : rp) {
    if (r.support < min_support) continue;
    const auto it = q_ratio.find(r.adjective);
    if (it == q_ratio.end()) continue;
    out.shared.push_back(r.adjective);
    out.sigma_p.sigma.push_back(r.r_m);
    out.sigma_q.sigma.push_back(it->second);
  }
  out.sigma_p.adjectives = out.shared;
  out.sigma_q.adjectives = out.shared;
  if (out.shared.empty()) return out;
  const double s = cosine_similarity(out.sigma_p.sigma, out.sigma_q.sigma);
  out.score = std::clamp(s, 0.0, 1.0);
  return out;
}

EvalMetrics classification_metrics(std::span<const Gender> predictions, std::span<const Gender> truths) {
  if (predictions.size() != truths.size()) throw ValidationError("predictions and truths differ in length");
  if (predictions.empty()) throw ValidationError("no predictions to score");
  EvalMetrics m;
  std::size_t pred_masc = 0, pred_fem = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const bool correct = predictions[i] == truths[i];
    if (truths[i] == Gender::masculine) {
      ++m.masculine_support;
      m.masculine_correct += correct ? 1 : 0;
    } else {
      ++m.feminine_support;
      m.feminine_correct += correct ? 1 : 0;
    }
    (predictions[i] == Gender::masculine ? pred_masc : pred_fem) += 1;
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  m.overall_accuracy = ratio(m.masculine_correct + m.feminine_correct, truths.size());
  m.masculine_accuracy = ratio(m.masculine_correct, m.masculine_support);
  m.feminine_accuracy = ratio(m.feminine_correct, m.feminine_support);
  auto f1 = [&](std::size_t tp, std::size_t predicted, std::size_t actual) {
    const double precision = ratio(tp, predicted);
    const double recall = ratio(tp, actual);
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  };
  m.f1_feminine = f1(m.feminine_correct, pred_fem, m.feminine_support);
  m.f1_masculine = f1(m.masculine_correct, pred_masc, m.masculine_support);
  m.f1_macro = 0.5 * (m.f1_feminine + m.f1_masculine);
  return m;
}

EvalMetrics classification_metrics(std::span<const Prediction> predictions) {
  std::vector<Gender> pred, truth;
  for (const auto& p : predictions) {
    pred.push_back(p.predicted);
    truth.push_back(p.noun.gender);
  }
  return classification_metrics(pred, truth);
}

double binomial_p_value_above_chance(std::size_t correct, std::size_t total) {
  if (total == 0) return 1.0;
  if (correct == 0) return 1.0;
  const boost::math::binomial_distribution<double> dist(static_cast<double>(total), 0.5);
  return boost::math::cdf(boost::math::complement(dist, static_cast<double>(correct - 1)));
}

std::string ratios_csv(std::span<const GenderRatio> ratios) {
  std::string out = "adjective,r_m,masculine_support,support\n";
  for (const auto& r : ratios) {
    out += text::csv_field(r.adjective) + ',' + text::format_double(r.r_m) + ',' +
           std::to_string(r.masculine_support) + ',' + std::to_string(r.support) + '\n';
  }
  return out;
}

std::string similarity_csv(const SimilarityMatrix& m) {
  std::ostringstream out;
  out << "lang_p,lang_q,S,shared_count\n";
  for (std::size_t i = 0; i < m.languages.size(); ++i) {
    for (std::size_t j = 0; j < m.languages.size(); ++j) {
      out << to_string(m.languages[i]) << ',' << to_string(m.languages[j]) << ',';
      if (m.scores[i][j]) {
        out << text::format_double(*m.scores[i][j]);
      } else {
        out << "no_overlap";
      }
      out << ',' << m.shared_counts[i][j] << '\n';
    }
  }
  return out.str();
}

}  // namespace genderprobe
