#pragma once

#include "genderprobe/classify.hpp"
#include "genderprobe/config.hpp"
#include "genderprobe/describe.hpp"
#include "genderprobe/embed.hpp"
#include "genderprobe/lexicon.hpp"
#include "genderprobe/llm_gateway.hpp"
#include "genderprobe/metrics.hpp"
#include "genderprobe/synthetic.hpp"
#include "genderprobe/translate.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace genderprobe {

struct SyntheticSettings {
  std::size_t n_nouns = 60;
  double masculine_fraction = 0.5;
  double beta = 1.0;
  int adjectives_per_response = 5;
  std::size_t pool_size = 20;
  std::size_t embedding_dim = 16;
  std::uint64_t vocab_seed = 1;
  bool shared_map = true;
  bool inflect = false;
  double oov_fraction = 0.0;
  double animate_fraction = 0.0;
  FrequencyShape shape = FrequencyShape::uniform;
  std::vector<Language> swap_pools;
  int n_samples = 10;
};

struct ExperimentConfig {
  std::vector<Language> languages;
  std::vector<BackendSpec> backends;
  int n_samples = 50;
  int top_p = 50;
  std::uint64_t seed = 0;
  Weighting weighting = Weighting::scaled;
  double oov_warning_ratio = 0.5;
  bool animate_filter = false;
  std::string translator_mode = "dictionary";
  std::string translator_endpoint;
  MissPolicy miss_policy = MissPolicy::error;
  std::filesystem::path lexicon_dir;
  std::filesystem::path transcript_dir;
  std::filesystem::path dictionary_path;
  std::filesystem::path embeddings_path;
  std::filesystem::path cache_path;
  std::filesystem::path out_dir;
  int max_parallel = 4;
  TrainConfig train;
  std::size_t min_support = kDefaultMinSupport;
  SyntheticSettings synth;
  bool report_timestamps = false;

  static ExperimentConfig from(const Config& config);
  // Every effective setting, with paths made absolute; feeding it back through
  // from() reproduces this config.
  std::map<std::string, std::string> snapshot() const;
};

SyntheticSpec synthetic_spec_for(const ExperimentConfig& config, Language lang, std::optional<double> beta = {});
std::uint64_t synthetic_seed_for(const ExperimentConfig& config, Language lang);
std::vector<SyntheticFixture> generate_synthetic(const ExperimentConfig& config);

struct LanguageData {
  Language language = Language::en;
  Lexicon lexicon;
  std::vector<AdjectiveProfile> source_profiles;
  std::vector<AdjectiveProfile> pivot_profiles;
  std::vector<FeatureVector> features;
  std::size_t empty_parses = 0;
  std::size_t oov_warnings = 0;
  std::size_t all_oov = 0;
};

// Shared, lazily loaded state for one experiment run: translation cache,
// translator, embedding table.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }

  // Lists every missing input for the given backend; throws ValidationError
  // naming all of them.
  void preflight(const BackendSpec& backend, bool need_embeddings = true) const;

  Lexicon lexicon(Language lang) const;
  std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const Lexicon& lexicon) const;
  TranscriptStore& store(Language lang, const std::string& model);

  std::vector<std::vector<Completion>> elicit_all(Language lang, const BackendSpec& backend);
  std::vector<AdjectiveProfile> source_profiles(Language lang, const BackendSpec& backend, std::size_t* empty = nullptr);
  std::vector<AdjectiveProfile> pivot_profiles(const std::vector<AdjectiveProfile>& source);

  LanguageData build(Language lang, const BackendSpec& backend);
  std::vector<LanguageData> build_all(const BackendSpec& backend);

  const EmbeddingTable& embeddings();
  TranslationCache& cache();
  Translator& translator();

 private:
  ExperimentConfig config_;
  std::mutex mutex_;
  std::unique_ptr<EmbeddingTable> embeddings_;
  std::unique_ptr<TranslationCache> cache_;
  std::unique_ptr<Translator> translator_;
  std::map<std::string, std::unique_ptr<TranscriptStore>> stores_;
};

enum class ExperimentKind { same_language, transfer, model_comparison, similarity };

std::string_view to_string(ExperimentKind kind);

struct LanguageRow {
  Language language = Language::en;
  EvalMetrics metrics;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  double p_value_above_chance = 1.0;
  std::size_t empty_parses = 0;
  std::size_t oov_warnings = 0;
  std::size_t all_oov = 0;
};

struct ComparisonRow {
  std::string backend;
  std::string setting;  // same | unseen
  double f1 = 0.0;
  double f1_macro = 0.0;
  double overall = 0.0;
  double masculine = 0.0;
  double feminine = 0.0;
};

struct EvalReport {
  ExperimentKind kind = ExperimentKind::same_language;
  std::vector<std::string> backends;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<LanguageRow> rows;
  std::map<std::string, std::vector<LanguageRow>> per_backend;
  std::vector<ComparisonRow> comparison;
  std::optional<SimilarityMatrix> similarity;
  std::map<Language, std::vector<GenderRatio>> ratios;
  std::optional<std::string> generated_at;
};

EvalReport run_same_language(Pipeline& pipeline, const BackendSpec& backend);
EvalReport run_same_language(const ExperimentConfig& config);
EvalReport run_transfer(Pipeline& pipeline, const BackendSpec& backend);
EvalReport run_transfer(const ExperimentConfig& config);
EvalReport run_model_comparison(const ExperimentConfig& config);
EvalReport run_similarity(const ExperimentConfig& config);

// Per-language rows from already featurized data; used by the runners and
// directly by tests.
std::vector<LanguageRow> same_language_rows(const std::vector<LanguageData>& data, const TrainConfig& train,
                                            std::uint64_t seed);
std::vector<LanguageRow> transfer_rows(const std::vector<LanguageData>& data, const TrainConfig& train,
                                       std::uint64_t seed);
SimilarityMatrix similarity_matrix(const std::vector<LanguageData>& data, std::size_t min_support);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_stem(const EvalReport& report);
// CSV tables derived from a report document, keyed by file name suffix.
std::map<std::string, std::string> render_csv(const nlohmann::json& report);
// Writes <stem>.json plus companion CSVs; returns the JSON path.
std::filesystem::path write_report(const EvalReport& report, const std::filesystem::path& out_dir);

}  // namespace genderprobe
