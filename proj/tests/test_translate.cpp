#include "genderprobe/error.hpp"
#include "genderprobe/rng.hpp"
#include "genderprobe/translate.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace genderprobe;

namespace {

const Noun kCasa{"casa", Language::es, Gender::feminine, "house", false};

class CountingDictionary : public Translator {
 public:
  std::optional<std::string> translate(const std::string& token, Language lang) override {
    ++calls;
    return dict.translate(token, lang);
  }
  TranslationOrigin origin() const override { return TranslationOrigin::dictionary; }
  DictionaryTranslator dict;
  int calls = 0;
};

class Unavailable : public Translator {
 public:
  std::optional<std::string> translate(const std::string&, Language) override {
    throw TransportError("translator offline");
  }
  TranslationOrigin origin() const override { return TranslationOrigin::online; }
};

}  // namespace

TEST_CASE("dictionary translation and pivot identity") {
  CountingDictionary t;
  t.dict.add(Language::es, "bonita", "pretty");
  TranslationCache cache;
  CHECK(translate_adjective(cache, t, "bonita", Language::es) == "pretty");
  CHECK(translate_adjective(cache, t, "old", Language::en) == "old");
  CHECK(t.calls == 1);
}

TEST_CASE("second lookup is served by the cache") {
  CountingDictionary t;
  t.dict.add(Language::es, "bonita", "pretty");
  TranslationCache cache;
  const std::string first = translate_adjective(cache, t, "bonita", Language::es);
  const std::string second = translate_adjective(cache, t, "bonita", Language::es);
  CHECK(first == second);
  CHECK(t.calls == 1);
  CHECK(cache.lookup(Language::es, "bonita")->origin == TranslationOrigin::dictionary);
}

TEST_CASE("translation targets are normalized") {
  CountingDictionary t;
  t.dict.add(Language::de, "alt", "  Old ");
  TranslationCache cache;
  CHECK(translate_adjective(cache, t, "alt", Language::de) == "old");
}

TEST_CASE("misses follow the configured policy") {
  CountingDictionary t;
  TranslationCache cache;
  CHECK_THROWS_AS(translate_adjective(cache, t, "xyz", Language::es), TranslationError);
  CHECK(translate_adjective(cache, t, "xyz", Language::es, MissPolicy::pass_through) == "xyz");
  CHECK(cache.lookup(Language::es, "xyz")->origin == TranslationOrigin::identity);
  Unavailable down;
  TranslationCache empty;
  CHECK_THROWS_AS(translate_adjective(empty, down, "bonita", Language::es), TranslationError);
}

TEST_CASE("collisions merge by summing and clamping") {
  CountingDictionary t;
  t.dict.add(Language::es, "bonito", "pretty");
  t.dict.add(Language::es, "bonita", "pretty");
  TranslationCache cache;

  const AdjectiveProfile sum(kCasa, 10, {{"bonito", 4}, {"bonita", 3}}, 50);
  const auto merged = translate_profile(sum, cache, t);
  CHECK(merged.size() == 1);
  CHECK(merged.frequency("pretty") == doctest::Approx(0.7).epsilon(1e-15));

  const AdjectiveProfile clamp(kCasa, 10, {{"bonito", 8}, {"bonita", 6}}, 50);
  CHECK(translate_profile(clamp, cache, t).frequency("pretty") == 1.0);
}

TEST_CASE("50-entry profile with 7 collision pairs against a hand-built merge") {
  Rng rng(50);
  CountingDictionary t;
  std::map<std::string, int> counts;
  std::map<std::string, int> expected;
  const int n = 50;
  // 36 injective entries.
  for (int i = 0; i < 36; ++i) {
    const std::string src = "w" + std::to_string(i);
    const int c = 1 + static_cast<int>(rng.below(n));
    counts[src] = c;
    t.dict.add(Language::it, src, "t" + std::to_string(i));
    expected["t" + std::to_string(i)] = c;
  }
  // 7 pairs (14 entries) collapsing onto 7 targets.
  for (int i = 0; i < 7; ++i) {
    const std::string m = "p" + std::to_string(i) + "o", f = "p" + std::to_string(i) + "a";
    const int cm = 1 + static_cast<int>(rng.below(n)), cf = 1 + static_cast<int>(rng.below(n));
    counts[m] = cm;
    counts[f] = cf;
    t.dict.add(Language::it, m, "pair" + std::to_string(i));
    t.dict.add(Language::it, f, "pair" + std::to_string(i));
    expected["pair" + std::to_string(i)] = std::min(n, cm + cf);
  }
  REQUIRE(counts.size() == 50);
  TranslationCache cache;
  const Noun noun{"n", Language::it, Gender::masculine, "n", false};
  const auto pivot = translate_profile(AdjectiveProfile(noun, n, counts, 50), cache, t);
  CHECK(pivot.size() == 43);
  CHECK(pivot.counts() == expected);
  for (const auto& [adj, c] : pivot.counts()) {
    CHECK(pivot.frequency(adj) > 0.0);
    CHECK(pivot.frequency(adj) <= 1.0);
  }
}

TEST_CASE("an injective dictionary preserves the frequency multiset") {
  Rng rng(8);
  CountingDictionary t;
  std::map<std::string, int> counts;
  for (int i = 0; i < 30; ++i) {
    counts["s" + std::to_string(i)] = 1 + static_cast<int>(rng.below(20));
    t.dict.add(Language::fr, "s" + std::to_string(i), "e" + std::to_string(29 - i));
  }
  const Noun noun{"n", Language::fr, Gender::feminine, "n", false};
  TranslationCache cache;
  const auto pivot = translate_profile(AdjectiveProfile(noun, 20, counts, 50), cache, t);
  std::vector<int> before, after;
  for (const auto& [k, v] : counts) before.push_back(v);
  for (const auto& [k, v] : pivot.counts()) after.push_back(v);
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(before == after);
}

TEST_CASE("all untranslatable tokens are reported together") {
  CountingDictionary t;
  t.dict.add(Language::es, "vieja", "old");
  TranslationCache cache;
  const AdjectiveProfile p(kCasa, 5, {{"vieja", 2}, {"zzz", 1}, {"qqq", 1}}, 50);
  try {
    translate_profile(p, cache, t);
    FAIL("expected TranslationError");
  } catch (const TranslationError& e) {
    CHECK(e.tokens() == std::vector<std::string>{"qqq", "zzz"});
  }
  const auto passed = translate_profile(p, cache, t, MissPolicy::pass_through);
  CHECK(passed.size() == 3);
  CHECK(passed.contains("zzz"));
}

TEST_CASE("cache persists and reloads identically") {
  testing::TempDir dir;
  CountingDictionary t;
  t.dict.add(Language::es, "bonita", "pretty");
  t.dict.add(Language::bg, "стар", "old");
  {
    TranslationCache cache(dir / "cache.tsv");
    translate_adjective(cache, t, "bonita", Language::es);
    translate_adjective(cache, t, "стар", Language::bg);
    translate_adjective(cache, t, "zzz", Language::es, MissPolicy::pass_through);
    CHECK(cache.size() == 3);
  }
  TranslationCache reloaded(dir / "cache.tsv");
  CHECK(reloaded.size() == 3);
  CHECK(reloaded.lookup(Language::es, "bonita")->target == "pretty");
  CHECK(reloaded.lookup(Language::bg, "стар")->target == "old");
  CHECK(reloaded.lookup(Language::es, "zzz")->origin == TranslationOrigin::identity);
  const int before = t.calls;
  translate_adjective(reloaded, t, "bonita", Language::es);
  CHECK(t.calls == before);
}

TEST_CASE("dictionary file format") {
  testing::TempDir dir;
  testing::write_file(dir / "d.tsv", "source_language\tsource\ttarget\nes\tBonita\tpretty\nde\talt\told\n");
  DictionaryTranslator d(dir / "d.tsv");
  CHECK(d.size() == 2);
  CHECK(d.translate("bonita", Language::es) == std::optional<std::string>("pretty"));
  CHECK_FALSE(d.translate("bonita", Language::de).has_value());
  CHECK(DictionaryTranslator(dir / "d.tsv").entries() == d.entries());
  testing::write_file(dir / "bad.tsv", "es\tonly-two\n");
  CHECK_THROWS_AS(DictionaryTranslator(dir / "bad.tsv"), ParseError);
  testing::write_file(dir / "round.tsv", format_dictionary(d));
  CHECK(DictionaryTranslator(dir / "round.tsv").entries() == d.entries());
}

TEST_CASE("the Spanish fixture dictionary maps bonita to pretty") {
  DictionaryTranslator d(testing::fixtures() / "spanish/dictionary.tsv");
  CHECK(d.translate("bonita", Language::es) == std::optional<std::string>("pretty"));
  CHECK(d.translate("bonito", Language::es) == std::optional<std::string>("pretty"));
}
