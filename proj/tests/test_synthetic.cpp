#include "genderprobe/describe.hpp"
#include "genderprobe/error.hpp"
#include "genderprobe/synthetic.hpp"

#include "support.hpp"

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <set>

using namespace genderprobe;

namespace {

SyntheticSpec base_spec(double beta) {
  SyntheticSpec s;
  s.vocabulary = make_vocabulary({});
  s.bias_strength = beta;
  return s;
}

std::string pivot_of(const std::string& surface, Language lang, bool inflect) {
  std::string p = surface.substr(to_string(lang).size() + 1);
  if (inflect) p.pop_back();
  return p;
}

}  // namespace

TEST_CASE("vocabulary pools are disjoint and fully embedded") {
  const auto v = make_vocabulary({"adj", 20, 8, 0, 0, 3});
  std::set<std::string> all;
  for (const auto* pool : {&v.masculine, &v.feminine, &v.neutral}) {
    CHECK(pool->size() == 20);
    all.insert(pool->begin(), pool->end());
  }
  CHECK(all.size() == 60);
  CHECK(v.semantic_map.size() == 60);
  for (const auto& [t, vec] : v.semantic_map) CHECK(vec.size() == 8);

  const auto sub = make_vocabulary({"x", 5, 12, 4, 4, 1});
  for (const auto& [t, vec] : sub.semantic_map) {
    for (std::size_t d = 0; d < 12; ++d) {
      if (d < 4 || d >= 8) CHECK(vec[d] == 0.0);
    }
  }
  CHECK_THROWS_AS(make_vocabulary({"x", 5, 4, 2, 4, 1}), ValidationError);
}

TEST_CASE("at full bias every token comes from the noun's gendered pool") {
  const auto spec = base_spec(1.0);
  const auto fx = generate_language(spec, Language::de, 9);
  std::map<std::string, Gender> gender;
  for (const auto& n : fx.lexicon.entries()) gender[n.surface] = n.gender;
  const std::set<std::string> masc(spec.vocabulary.masculine.begin(), spec.vocabulary.masculine.end());
  const std::set<std::string> fem(spec.vocabulary.feminine.begin(), spec.vocabulary.feminine.end());
  for (const auto& r : fx.transcript) {
    const auto tokens = parse_adjectives(r.raw_text);
    CHECK(tokens.size() == 5);
    for (const auto& t : tokens) {
      const auto& pool = gender[r.noun] == Gender::masculine ? masc : fem;
      CHECK(pool.count(pivot_of(t, Language::de, false)) == 1);
    }
  }
}

TEST_CASE("swapped pools invert the association") {
  auto spec = base_spec(1.0);
  spec.swap_pools = true;
  const std::string r = sample_response(spec, Language::it, Gender::masculine, 1, "h", 0);
  const std::set<std::string> fem(spec.vocabulary.feminine.begin(), spec.vocabulary.feminine.end());
  for (const auto& t : parse_adjectives(r)) CHECK(fem.count(pivot_of(t, Language::it, false)) == 1);
}

TEST_CASE("without bias, token usage is independent of gender") {
  const auto spec = base_spec(0.0);
  // 10k responses split evenly between the genders; contingency table of
  // neutral token x gender.
  std::map<std::string, std::array<double, 2>> table;
  for (int i = 0; i < 10000; ++i) {
    const Gender g = i % 2 ? Gender::masculine : Gender::feminine;
    for (const auto& t : parse_adjectives(sample_response(spec, Language::fr, g, 4, "h" + std::to_string(i / 2), 0))) {
      table[pivot_of(t, Language::fr, false)][i % 2] += 1;
    }
  }
  const std::set<std::string> neutral(spec.vocabulary.neutral.begin(), spec.vocabulary.neutral.end());
  double col[2] = {0, 0};
  for (const auto& [tok, c] : table) {
    CHECK(neutral.count(tok) == 1);
    col[0] += c[0];
    col[1] += c[1];
  }
  const double total = col[0] + col[1];
  double chi2 = 0.0;
  for (const auto& [tok, c] : table) {
    const double row = c[0] + c[1];
    for (int k = 0; k < 2; ++k) {
      const double expected = row * col[k] / total;
      chi2 += (c[k] - expected) * (c[k] - expected) / expected;
    }
  }
  const boost::math::chi_squared dist(static_cast<double>(table.size() - 1));
  const double p_value = boost::math::cdf(boost::math::complement(dist, chi2));
  CHECK(p_value > 0.01);
}

TEST_CASE("generation is deterministic byte for byte") {
  auto spec = base_spec(0.7);
  spec.inflect = true;
  spec.oov_fraction = 0.1;
  spec.shape = FrequencyShape::geometric;
  const auto a = generate_language(spec, Language::es, 17);
  const auto b = generate_language(spec, Language::es, 17);
  CHECK(format_lexicon(a.lexicon) == format_lexicon(b.lexicon));
  CHECK(format_transcript(a.transcript) == format_transcript(b.transcript));
  CHECK(a.oov == b.oov);
  CHECK(format_embeddings(fixture_embeddings({a})) == format_embeddings(fixture_embeddings({b})));
  const auto c = generate_language(spec, Language::es, 18);
  CHECK(format_transcript(a.transcript) != format_transcript(c.transcript));
}

TEST_CASE("lexicon shape follows the generator settings") {
  auto spec = base_spec(1.0);
  spec.n_nouns = 40;
  spec.masculine_fraction = 0.25;
  spec.animate_fraction = 0.5;
  spec.n_samples = 3;
  const auto fx = generate_language(spec, Language::cs, 2);
  CHECK(fx.lexicon.counts() == GenderCounts{40, 10, 30});
  CHECK(fx.transcript.size() == 120);
  std::size_t animate = 0;
  for (const auto& n : fx.lexicon.entries()) animate += n.animate ? 1 : 0;
  CHECK(animate > 5);
  CHECK(animate < 35);
}

TEST_CASE("inflected surfaces collapse onto one pivot in the dictionary") {
  CHECK(surface_adjective(Language::es, "adj001", Gender::masculine, true) == "es_adj001o");
  CHECK(surface_adjective(Language::es, "adj001", Gender::feminine, true) == "es_adj001a");
  CHECK(surface_adjective(Language::es, "adj001", Gender::feminine, false) == "es_adj001");
  auto spec = base_spec(1.0);
  spec.inflect = true;
  const auto fx = generate_language(spec, Language::es, 1);
  auto dict = fixture_dictionary({fx});
  CHECK(dict.translate("es_adj001o", Language::es) == dict.translate("es_adj001a", Language::es));
}

TEST_CASE("withheld tokens are missing from the emitted table") {
  auto spec = base_spec(1.0);
  spec.oov_fraction = 0.3;
  const auto fx = generate_language(spec, Language::lv, 3);
  REQUIRE_FALSE(fx.oov.empty());
  const auto table = fixture_embeddings({fx});
  for (const auto& t : fx.oov) CHECK_FALSE(table.contains(t));
  CHECK(table.size() == 60 - fx.oov.size());
}

TEST_CASE("conflicting vectors across languages are rejected") {
  auto a = base_spec(1.0);
  auto b = a;
  b.vocabulary = make_vocabulary({"adj", 20, 16, 0, 0, 99});
  const auto fa = generate_language(a, Language::de, 1);
  const auto fb = generate_language(b, Language::it, 1);
  CHECK_THROWS_AS(fixture_embeddings({fa, fb}), ValidationError);
}

TEST_CASE("generator settings are validated") {
  auto s = base_spec(1.0);
  s.bias_strength = 1.5;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = base_spec(1.0);
  s.vocabulary.neutral.push_back(s.vocabulary.masculine.front());
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = base_spec(1.0);
  s.adjectives_per_response = 21;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = base_spec(1.0);
  s.masculine_fraction = 1.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("fixtures are written in the loader formats") {
  testing::TempDir dir;
  auto spec = base_spec(1.0);
  spec.n_nouns = 12;
  spec.n_samples = 2;
  spec.inflect = true;
  const auto fx = generate_language(spec, Language::pt, 6);
  write_fixtures({fx}, {dir / "lexicons", dir / "transcripts", dir / "embeddings.txt", dir / "dictionary.tsv"});
  CHECK(load_lexicon(dir / "lexicons/pt.tsv", Language::pt) == fx.lexicon);
  CHECK(read_transcript(dir / "transcripts/pt.synthetic.jsonl") == fx.transcript);
  CHECK(load_embeddings(dir / "embeddings.txt").size() == 60);
  const auto table = load_embeddings(dir / "embeddings.txt");
  for (const auto& [tok, vec] : spec.vocabulary.semantic_map) CHECK(*table.find(tok) == vec);
  CHECK(DictionaryTranslator(dir / "dictionary.tsv").size() == 120);
}
