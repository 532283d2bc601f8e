#include "genderprobe/fixtures.hpp"

#include "genderprobe/config.hpp"
#include "genderprobe/describe.hpp"
#include "genderprobe/embed.hpp"
#include "genderprobe/error.hpp"
#include "genderprobe/experiments.hpp"
#include "genderprobe/lexicon.hpp"
#include "genderprobe/llm_gateway.hpp"
#include "genderprobe/translate.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

namespace genderprobe {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Language> language_of(const fs::path& file) {
  const std::string name = file.filename().string();
  return parse_language(name.substr(0, name.find('.')));
}

}  // namespace

FixtureSetReport verify_fixture_set(const fs::path& dir, std::vector<std::string>& failures) {
  FixtureSetReport rep;
  rep.root = dir;
  auto fail = [&](const fs::path& where, const std::string& what) {
    failures.push_back(fs::relative(where, dir.parent_path()).string() + ": " + what);
  };

  std::map<Language, std::set<std::string>> nouns;
  for (const auto& path : files_with_extension(dir / "lexicons", ".tsv")) {
    const auto lang = language_of(path);
    if (!lang) {
      fail(path, "file name does not start with a language code");
      continue;
    }
    try {
      const Lexicon lex = load_lexicon(path, *lang);
      for (const auto& n : lex.entries()) nouns[*lang].insert(n.surface);
      ++rep.lexicons;
    } catch (const std::exception& e) {
      fail(path, e.what());
    }
  }

  std::set<std::pair<Language, std::string>> adjectives;
  for (const auto& path : files_with_extension(dir / "transcripts", ".jsonl")) {
    const auto lang = language_of(path);
    if (!lang) {
      fail(path, "file name does not start with a language code");
      continue;
    }
    std::vector<TranscriptRecord> records;
    try {
      records = read_transcript(path);
    } catch (const std::exception& e) {
      fail(path, e.what());
      continue;
    }
    rep.transcript_records += records.size();
    const auto known = nouns.find(*lang);
    std::set<std::string> missing;
    for (const auto& r : records) {
      if (known == nouns.end() || !known->second.count(r.noun)) missing.insert(r.noun);
      for (const auto& a : parse_adjectives(r.raw_text)) adjectives.emplace(*lang, a);
    }
    for (const auto& m : missing) fail(path, "transcript noun '" + m + "' is not in the " + std::string(to_string(*lang)) + " lexicon");
  }
  rep.adjectives_needed = adjectives.size();

  std::optional<DictionaryTranslator> dict;
  if (fs::exists(dir / "dictionary.tsv")) {
    rep.has_dictionary = true;
    try {
      dict.emplace(dir / "dictionary.tsv");
    } catch (const std::exception& e) {
      fail(dir / "dictionary.tsv", e.what());
    }
  }
  std::optional<EmbeddingTable> table;
  if (fs::exists(dir / "embeddings.txt")) {
    rep.has_embeddings = true;
    try {
      table.emplace(load_embeddings(dir / "embeddings.txt"));
    } catch (const std::exception& e) {
      fail(dir / "embeddings.txt", e.what());
    }
  }

  if (dict) {
    std::vector<std::string> uncovered;
    for (const auto& [lang, adj] : adjectives) {
      if (dict->entries().count({lang, adj})) {
        ++rep.adjectives_covered;
      } else {
        uncovered.push_back(std::string(to_string(lang)) + ":" + adj);
      }
    }
    for (const auto& u : uncovered) fail(dir / "dictionary.tsv", "no translation for '" + u + "'");

    std::set<std::string> targets;
    for (const auto& [key, target] : dict->entries()) targets.insert(target);
    rep.dictionary_targets = targets.size();
    if (table) {
      for (const auto& t : targets) rep.targets_embedded += table->contains(t) ? 1 : 0;
      if (rep.embedding_coverage() < kMinEmbeddingCoverage) {
        fail(dir / "embeddings.txt", "covers " + std::to_string(rep.targets_embedded) + " of " +
                                         std::to_string(rep.dictionary_targets) + " dictionary targets (need 95%)");
      }
    }
  } else if (!adjectives.empty()) {
    fail(dir, "transcripts present but no usable dictionary.tsv");
  }

  for (const auto& path : files_with_extension(dir, ".toml")) {
    try {
      ExperimentConfig::from(Config::load(path));
      ++rep.configs;
    } catch (const std::exception& e) {
      fail(path, e.what());
    }
  }
  return rep;
}

FixtureReport verify_fixtures(const fs::path& root) {
  FixtureReport report;
  if (!fs::is_directory(root)) {
    report.failures.push_back(root.string() + ": not a directory");
    return report;
  }
  std::vector<fs::path> dirs;
  if (fs::is_directory(root / "lexicons")) dirs.push_back(root);
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::is_directory(e.path() / "lexicons")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) report.failures.push_back(root.string() + ": no fixture sets (directories with lexicons/)");
  for (const auto& d : dirs) report.sets.push_back(verify_fixture_set(d, report.failures));
  return report;
}

}  // namespace genderprobe
