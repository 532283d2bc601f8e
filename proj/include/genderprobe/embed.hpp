#pragma once

#include "genderprobe/describe.hpp"

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace genderprobe {

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const std::filesystem::path& source_path() const { return source_path_; }

  // Returns nullptr for out-of-vocabulary tokens.
  const std::vector<double>* find(const std::string& token) const;
  void insert(const std::string& token, std::vector<double> vec);
  bool contains(const std::string& token) const { return vectors_.count(token) != 0; }
  std::vector<std::string> tokens() const;  // sorted

 private:
  friend EmbeddingTable parse_embeddings(std::string_view, const std::filesystem::path&);
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::filesystem::path source_path_;
};

// `token v1 ... vD` per line; D comes from the first line.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::string_view content, const std::filesystem::path& origin = {});

inline constexpr double kFrequencyClamp = 0.98;

// f' = -30 / ln(min(f, 0.98)) for f in (0, 1].
double scale_frequency(double f);

enum class Weighting { scaled, raw };

std::string_view to_string(Weighting w);
Weighting parse_weighting(std::string_view s);

struct FeatureVector {
  Noun noun;
  std::vector<double> values;
  double covered_mass = 0.0;
  std::vector<std::string> oov_tokens;
  bool all_oov = false;
  bool oov_warning = false;
};

struct FeaturizeOptions {
  Weighting weighting = Weighting::scaled;
  double oov_warning_ratio = 0.5;
};

// Sum over in-vocabulary adjectives of weight(f) * e(adjective).
FeatureVector featurize(const AdjectiveProfile& profile, const EmbeddingTable& table,
                        const FeaturizeOptions& options = {});

}  // namespace genderprobe
