#include "genderprobe/rng.hpp"
#include "genderprobe/text.hpp"

#include <doctest.h>

#include <numeric>
#include <set>
#include <vector>

using namespace genderprobe;

TEST_CASE("utf8_lower handles the scripts of the lexicons") {
  CHECK(text::utf8_lower("OLD Red") == "old red");
  CHECK(text::utf8_lower("ÁRBOL") == "árbol");
  CHECK(text::utf8_lower("ŽLUŤOUČKÝ") == "žluťoučký");
  CHECK(text::utf8_lower("ΠΑΛΙΌΣ") == "παλιός");
  CHECK(text::utf8_lower("СТАР") == "стар");
  CHECK(text::utf8_lower("पुराना") == "पुराना");
}

TEST_CASE("normalize_token trims, lowercases and strips edge punctuation") {
  CHECK(text::normalize_token("  Old. ") == "old");
  CHECK(text::normalize_token("\"shiny\"") == "shiny");
  CHECK(text::normalize_token("¡Bonita!") == "bonita");
  CHECK(text::normalize_token("«красив»") == "красив");
  CHECK(text::normalize_token("well-known") == "well-known");
  CHECK(text::normalize_token("very   old") == "very old");
  CHECK(text::normalize_token("...") == "");
}

TEST_CASE("utf8_length counts code points") {
  CHECK(text::utf8_length("abc") == 3);
  CHECK(text::utf8_length("árbol") == 5);
  CHECK(text::utf8_length("पुराना") == 6);
}

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(text::fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(text::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("Rng is reproducible and below() stays in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(7);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = r.below(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) CHECK(h > 800);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("shuffle permutes without losing items") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  Rng r(3);
  r.shuffle(std::span<int>(v));
  CHECK(std::set<int>(v.begin(), v.end()).size() == 50);
  std::vector<int> sorted(50);
  std::iota(sorted.begin(), sorted.end(), 0);
  CHECK(v != sorted);
}

TEST_CASE("derive_seed separates labels") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}
