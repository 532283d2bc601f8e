#pragma once

#include "genderprobe/classify.hpp"
#include "genderprobe/describe.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genderprobe {

struct GenderRatio {
  std::string adjective;
  double r_m = 0.0;
  std::size_t masculine_support = 0;
  std::size_t support = 0;
};

// Fraction of the nouns described by `adjective` that are masculine. Only
// membership in each (truncated) profile counts. Throws if no profile has it.
GenderRatio masculine_ratio(std::span<const AdjectiveProfile> profiles, const std::string& adjective);

// Ratios for every adjective in the corpus, ordered by adjective.
std::vector<GenderRatio> ratio_table(std::span<const AdjectiveProfile> profiles);

struct ScoreVector {
  Language language = Language::en;
  std::vector<std::string> adjectives;
  std::vector<double> sigma;
};

// Cosine similarity of two equally long vectors. Throws DomainError when either
// has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct SimilarityResult {
  // Empty when no adjective reaches min_support in both languages.
  std::optional<double> score;
  std::vector<std::string> shared;
  ScoreVector sigma_p;
  ScoreVector sigma_q;
  bool no_overlap() const { return !score.has_value(); }
};

inline constexpr std::size_t kDefaultMinSupport = 15;

SimilarityResult similarity(std::span<const AdjectiveProfile> profiles_p, std::span<const AdjectiveProfile> profiles_q,
                            std::size_t min_support = kDefaultMinSupport);

struct SimilarityMatrix {
  std::vector<Language> languages;
  // S[i][j]; nullopt for no-overlap pairs.
  std::vector<std::vector<std::optional<double>>> scores;
  std::vector<std::vector<std::size_t>> shared_counts;
};

struct EvalMetrics {
  double overall_accuracy = 0.0;
  double masculine_accuracy = 0.0;
  double feminine_accuracy = 0.0;
  double f1_feminine = 0.0;
  double f1_masculine = 0.0;
  double f1_macro = 0.0;
  std::size_t masculine_support = 0;
  std::size_t feminine_support = 0;
  std::size_t masculine_correct = 0;
  std::size_t feminine_correct = 0;
};

EvalMetrics classification_metrics(std::span<const Gender> predictions, std::span<const Gender> truths);
EvalMetrics classification_metrics(std::span<const Prediction> predictions);

// P(X >= correct) for X ~ Binomial(total, 0.5).
double binomial_p_value_above_chance(std::size_t correct, std::size_t total);

std::string ratios_csv(std::span<const GenderRatio> ratios);
std::string similarity_csv(const SimilarityMatrix& matrix);

}  // namespace genderprobe
