#include "genderprobe/embed.hpp"
#include "genderprobe/error.hpp"
#include "genderprobe/rng.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace genderprobe;

namespace {

const Noun kNoun{"casa", Language::es, Gender::feminine, "house", false};
const double kE1 = std::exp(-1.0);

AdjectiveProfile profile_from_freqs(int n, const std::map<std::string, int>& counts) {
  return AdjectiveProfile(kNoun, n, counts, 50);
}

}  // namespace

TEST_CASE("dimension is inferred from the first line") {
  const auto t = parse_embeddings("the 0.1 0.2 0.3\nof 1 2 3\n");
  CHECK(t.dimension() == 3);
  CHECK(t.size() == 2);
  CHECK(*t.find("the") == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(t.find("missing") == nullptr);
}

TEST_CASE("arity mismatch is reported at its line") {
  try {
    parse_embeddings("a 1 2 3\nb 1 2 3 4\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_embeddings("a 1 x 3\n"), ParseError);
  CHECK_THROWS_AS(parse_embeddings("a 1 nan 3\n"), ParseError);
  CHECK_THROWS_AS(parse_embeddings(""), ValidationError);
  CHECK_THROWS(load_embeddings("/nonexistent/vectors.txt"));
}

TEST_CASE("lookup in a 400k-line table") {
  testing::TempDir dir;
  {
    std::ofstream out(dir / "big.txt");
    for (int i = 0; i < 400000; ++i) {
      if (i == 271828) {
        out << "pretty 0.25 -1.5 3\n";
      } else {
        out << "w" << i << " " << i % 7 << " " << i % 11 << " " << i % 13 << "\n";
      }
    }
  }
  const auto t = load_embeddings(dir / "big.txt");
  CHECK(t.size() == 400000);
  REQUIRE(t.find("pretty") != nullptr);
  CHECK(*t.find("pretty") == std::vector<double>{0.25, -1.5, 3.0});
}

TEST_CASE("scaled frequency weight") {
  CHECK(scale_frequency(kE1) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(scale_frequency(std::exp(-30.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(scale_frequency(1.0) == doctest::Approx(-30.0 / std::log(0.98)).epsilon(1e-12));
  // -30 / ln(0.98), evaluated separately with Python's math.log.
  CHECK(scale_frequency(1.0) == doctest::Approx(1484.9494935752734).epsilon(1e-12));
  CHECK(scale_frequency(0.99) == scale_frequency(0.98));
  CHECK_THROWS_AS(scale_frequency(0.0), DomainError);
  CHECK_THROWS_AS(scale_frequency(1.5), DomainError);
  CHECK_THROWS_AS(scale_frequency(-0.1), DomainError);
}

TEST_CASE("scaled weight agrees with the log2 oracle and is strictly increasing") {
  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double f = 0.98 * i / 1000.0;
    const double w = scale_frequency(f);
    CHECK(w == doctest::Approx(oracle::scaled_weight(f)).epsilon(1e-12));
    CHECK(w > prev);
    prev = w;
  }
}

TEST_CASE("single adjective and linearity examples") {
  EmbeddingTable t(2);
  t.insert("x", {1, 0});
  t.insert("y", {0, 1});
  // n=1e6 makes count/n close to e^-1; use exact weights via the raw path instead.
  const int n = 1000000;
  const int c = static_cast<int>(std::lround(kE1 * n));
  const double w = scale_frequency(static_cast<double>(c) / n);
  const auto one = featurize(profile_from_freqs(n, {{"x", c}}), t);
  CHECK(one.values[0] == doctest::Approx(30.0).epsilon(1e-5));
  CHECK(one.values[0] == w);
  CHECK(one.values[1] == 0.0);
  const auto two = featurize(profile_from_freqs(n, {{"x", c}, {"y", c}}), t);
  CHECK(two.values[0] == w);
  CHECK(two.values[1] == w);
}

TEST_CASE("featurize matches term-by-term summation on a 20-adjective profile") {
  Rng rng(20);
  EmbeddingTable t(5);
  std::map<std::string, int> counts;
  const int n = 50;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v(5);
    for (auto& x : v) x = rng.uniform(-1, 1);
    t.insert("a" + std::to_string(i), v);
    counts["a" + std::to_string(i)] = 1 + static_cast<int>(rng.below(n));
  }
  const auto fv = featurize(profile_from_freqs(n, counts), t);
  std::vector<double> expected(5, 0.0);
  for (const auto& [adj, c] : counts) {
    const double w = oracle::scaled_weight(static_cast<double>(c) / n);
    for (int d = 0; d < 5; ++d) expected[d] += w * (*t.find(adj))[d];
  }
  for (int d = 0; d < 5; ++d) CHECK(std::abs(fv.values[d] - expected[d]) <= 1e-12 * std::max(1.0, std::abs(expected[d])));

  // Removing one adjective subtracts exactly its term.
  auto fewer = counts;
  fewer.erase("a7");
  const auto fv2 = featurize(profile_from_freqs(n, fewer), t);
  const double w7 = scale_frequency(static_cast<double>(counts["a7"]) / n);
  for (int d = 0; d < 5; ++d) {
    CHECK(fv.values[d] - fv2.values[d] == doctest::Approx(w7 * (*t.find("a7"))[d]).epsilon(1e-9));
  }
}

TEST_CASE("featurize ignores insertion order") {
  EmbeddingTable t(2);
  t.insert("a", {1, 2});
  t.insert("b", {3, -1});
  t.insert("c", {0.5, 0.5});
  std::map<std::string, int> forward_order, reverse_order;
  for (const char* k : {"a", "b", "c"}) forward_order.emplace(k, 3);
  for (const char* k : {"c", "b", "a"}) reverse_order.emplace(k, 3);
  reverse_order["a"] = forward_order["a"] = 1;
  CHECK(featurize(profile_from_freqs(5, forward_order), t).values ==
        featurize(profile_from_freqs(5, reverse_order), t).values);
}

TEST_CASE("out-of-vocabulary adjectives are skipped and recorded") {
  EmbeddingTable t(2);
  t.insert("old", {1, 1});
  const auto fv = featurize(profile_from_freqs(10, {{"old", 5}, {"zzz", 5}, {"qqq", 1}}), t);
  CHECK(fv.oov_tokens == std::vector<std::string>{"qqq", "zzz"});
  CHECK_FALSE(fv.all_oov);
  CHECK(fv.oov_warning);  // 2 of 3 adjectives uncovered
  CHECK(fv.values[0] == scale_frequency(0.5));

  const auto none = featurize(profile_from_freqs(10, {{"zzz", 5}}), t);
  CHECK(none.all_oov);
  CHECK(none.values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("raw weighting uses f directly") {
  EmbeddingTable t(1);
  t.insert("a", {2.0});
  FeaturizeOptions raw;
  raw.weighting = Weighting::raw;
  CHECK(featurize(profile_from_freqs(4, {{"a", 1}}), t, raw).values[0] == 0.5);
  CHECK(parse_weighting("raw") == Weighting::raw);
  CHECK_THROWS_AS(parse_weighting("log"), ValidationError);
}

TEST_CASE("tokens are listed sorted and inserts check dimension") {
  EmbeddingTable t(2);
  t.insert("b", {1, 1});
  t.insert("a", {1, 1});
  CHECK(t.tokens() == std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(t.insert("c", {1, 2, 3}), ValidationError);
}
