#pragma once

#include "genderprobe/embed.hpp"
#include "genderprobe/lexicon.hpp"
#include "genderprobe/llm_gateway.hpp"
#include "genderprobe/translate.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace genderprobe {

enum class FrequencyShape { uniform, geometric };

// Pivot-language adjective pools plus the embedding each pivot token gets.
struct SyntheticVocabulary {
  std::vector<std::string> masculine;
  std::vector<std::string> feminine;
  std::vector<std::string> neutral;
  std::map<std::string, std::vector<double>> semantic_map;
};

struct VocabularyOptions {
  std::string prefix = "adj";
  std::size_t pool_size = 20;
  std::size_t dimension = 16;
  // Vectors are non-zero only in [active_offset, active_offset + active_dims).
  std::size_t active_offset = 0;
  std::size_t active_dims = 0;  // 0 means all dimensions
  std::uint64_t seed = 1;
};

SyntheticVocabulary make_vocabulary(const VocabularyOptions& options);

struct SyntheticSpec {
  std::size_t n_nouns = 60;
  double masculine_fraction = 0.5;
  SyntheticVocabulary vocabulary;
  double bias_strength = 1.0;  // beta
  int adjectives_per_response = 5;
  int n_samples = 10;
  double animate_fraction = 0.0;
  // Surface adjectives carry a gender suffix that translation removes
  // (like bonito/bonita), producing pivot collisions.
  bool inflect = false;
  // Gendered pools trade places; used to plant anti-correlated ratios.
  bool swap_pools = false;
  // Share of pivot tokens left out of the emitted embedding table.
  double oov_fraction = 0.0;
  FrequencyShape shape = FrequencyShape::uniform;
  double geometric_ratio = 0.85;
  std::string model_name = "synthetic";

  void validate() const;
};

std::string surface_adjective(Language lang, const std::string& pivot, Gender noun_gender, bool inflect);

// Samples one comma-separated response. Each of the M slots draws from the
// noun's gendered pool with probability beta, otherwise from the neutral pool,
// without repeats inside a response.
std::string sample_response(const SyntheticSpec& spec, Language lang, Gender gender, std::uint64_t seed,
                            const std::string& prompt_hash, int sample_index);

// Answers prompts for nouns of one synthetic lexicon. The noun is read from the
// last quoted string of the prompt.
class SyntheticBackend : public Backend {
 public:
  SyntheticBackend(SyntheticSpec spec, const Lexicon& lexicon, std::uint64_t seed);
  std::string complete(const std::string& prompt, int sample_index) override;

 private:
  SyntheticSpec spec_;
  Language language_;
  std::map<std::string, Gender> genders_;
  std::uint64_t seed_;
};

struct SyntheticFixture {
  Language language = Language::en;
  Lexicon lexicon;
  std::vector<TranscriptRecord> transcript;
  std::vector<std::string> oov;  // pivot tokens withheld from embeddings
  SyntheticSpec spec;
};

inline constexpr std::string_view kFixtureTimestamp = "1970-01-01T00:00:00Z";

SyntheticFixture generate_language(const SyntheticSpec& spec, Language lang, std::uint64_t seed);

// Union of the fixtures' semantic maps minus withheld tokens; throws if two
// fixtures disagree on a vector.
EmbeddingTable fixture_embeddings(const std::vector<SyntheticFixture>& fixtures);
DictionaryTranslator fixture_dictionary(const std::vector<SyntheticFixture>& fixtures);

std::string format_embeddings(const EmbeddingTable& table);
std::string format_transcript(const std::vector<TranscriptRecord>& records);

struct FixturePaths {
  std::filesystem::path lexicon_dir;
  std::filesystem::path transcript_dir;
  std::filesystem::path embeddings;
  std::filesystem::path dictionary;
};

void write_fixtures(const std::vector<SyntheticFixture>& fixtures, const FixturePaths& paths);

}  // namespace genderprobe
