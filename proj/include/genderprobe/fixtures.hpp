#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace genderprobe {

// A fixture set is any directory holding a lexicons/ folder. Optional
// siblings: transcripts/*.jsonl, dictionary.tsv, embeddings.txt, *.toml.
struct FixtureSetReport {
  std::filesystem::path root;
  std::size_t lexicons = 0;
  std::size_t transcript_records = 0;
  std::size_t configs = 0;
  std::size_t adjectives_needed = 0;   // distinct (language, adjective) pairs in transcripts
  std::size_t adjectives_covered = 0;  // ...of which the dictionary translates
  std::size_t dictionary_targets = 0;  // distinct translation targets
  std::size_t targets_embedded = 0;    // ...of which the embedding table has a vector
  bool has_dictionary = false;
  bool has_embeddings = false;

  double embedding_coverage() const {
    return dictionary_targets == 0 ? 1.0 : static_cast<double>(targets_embedded) / dictionary_targets;
  }
};

struct FixtureReport {
  std::vector<FixtureSetReport> sets;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

inline constexpr double kMinEmbeddingCoverage = 0.95;

FixtureReport verify_fixtures(const std::filesystem::path& root);
FixtureSetReport verify_fixture_set(const std::filesystem::path& dir, std::vector<std::string>& failures);

}  // namespace genderprobe
