#include "genderprobe/describe.hpp"
#include "genderprobe/fixtures.hpp"
#include "genderprobe/text.hpp"

#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <set>

using namespace genderprobe;
namespace fs = std::filesystem;

namespace {

bool mentions(const std::vector<std::string>& failures, const std::string& needle) {
  for (const auto& f : failures) {
    if (f.find(needle) != std::string::npos) return true;
  }
  return false;
}

void copy_set(const std::string& name, const fs::path& to) {
  fs::copy(testing::fixtures() / name, to, fs::copy_options::recursive);
}

}  // namespace

TEST_CASE("checked-in fixtures verify cleanly") {
  const FixtureReport report = verify_fixtures(testing::fixtures());
  for (const auto& f : report.failures) MESSAGE(f);
  CHECK(report.ok());
  CHECK(report.sets.size() >= 3);
  for (const auto& s : report.sets) {
    CHECK(s.lexicons >= 1);
    CHECK(s.configs >= 1);
    if (s.has_embeddings) CHECK(s.embedding_coverage() >= kMinEmbeddingCoverage);
  }
}

TEST_CASE("a transcript noun missing from the lexicon is named") {
  testing::TempDir dir;
  copy_set("spanish", dir / "spanish");
  const fs::path transcript = dir / "spanish/transcripts/es.mistral-7b.jsonl";
  std::string body = testing::read_file(transcript);
  auto j = nlohmann::json::parse(body.substr(0, body.find('\n')));
  j["noun"] = "zapato";
  body += j.dump() + "\n";
  testing::write_file(transcript, body);

  std::vector<std::string> failures;
  verify_fixture_set(dir / "spanish", failures);
  CHECK(mentions(failures, "zapato"));
}

TEST_CASE("an adjective without a dictionary entry is named") {
  testing::TempDir dir;
  copy_set("spanish", dir / "spanish");
  const fs::path dict = dir / "spanish/dictionary.tsv";
  std::string kept;
  for (const auto& line : text::split(testing::read_file(dict), '\n')) {
    if (line.rfind("bonita\t", 0) == 0 || line.rfind("es\tbonita\t", 0) == 0) continue;
    if (!line.empty()) kept += std::string(line) + "\n";
  }
  testing::write_file(dict, kept);
  std::vector<std::string> failures;
  verify_fixture_set(dir / "spanish", failures);
  CHECK(mentions(failures, "bonita"));
}

TEST_CASE("low embedding coverage is reported") {
  testing::TempDir dir;
  copy_set("spanish", dir / "spanish");
  const fs::path emb = dir / "spanish/embeddings.txt";
  const auto lines = text::split(testing::read_file(emb), '\n');
  std::string half;
  for (std::size_t i = 0; i < lines.size() / 2; ++i) half += std::string(lines[i]) + "\n";
  testing::write_file(emb, half);
  std::vector<std::string> failures;
  const auto s = verify_fixture_set(dir / "spanish", failures);
  CHECK(s.embedding_coverage() < kMinEmbeddingCoverage);
  CHECK_FALSE(failures.empty());
}

TEST_CASE("coverage counts match an independent set computation") {
  const fs::path root = testing::fixtures() / "spanish";
  // Distinct parsed adjectives across all transcripts.
  std::set<std::string> needed;
  for (const auto& entry : fs::directory_iterator(root / "transcripts")) {
    std::ifstream in(entry.path());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      for (const auto& a : parse_adjectives(j.at("raw_text").get<std::string>())) needed.insert(a);
    }
  }
  // Dictionary: source -> target, from whichever columns the file uses.
  std::set<std::string> sources, targets;
  {
    std::ifstream in(root / "dictionary.tsv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto cols = text::split(line, '\t');
      if (cols.front() == "source_language") continue;
      sources.insert(std::string(cols[cols.size() - 2]));
      targets.insert(std::string(cols.back()));
    }
  }
  std::set<std::string> embedded;
  {
    std::ifstream in(root / "embeddings.txt");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) embedded.insert(line.substr(0, line.find(' ')));
    }
  }
  std::size_t covered = 0;
  for (const auto& a : needed) covered += sources.count(a);
  std::size_t targets_embedded = 0;
  for (const auto& t : targets) targets_embedded += embedded.count(t);

  std::vector<std::string> failures;
  const auto s = verify_fixture_set(root, failures);
  CHECK(s.adjectives_needed == needed.size());
  CHECK(s.adjectives_covered == covered);
  CHECK(s.dictionary_targets == targets.size());
  CHECK(s.targets_embedded == targets_embedded);
}
