#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genderprobe {

enum class Language { bg, cs, fr, de, el, hi, it, lv, pt, es, en };

inline constexpr std::array<Language, 10> kSourceLanguages = {
    Language::bg, Language::cs, Language::fr, Language::de, Language::el,
    Language::hi, Language::it, Language::lv, Language::pt, Language::es};

std::string_view to_string(Language lang);
std::optional<Language> parse_language(std::string_view code);
// Throws ValidationError for unknown codes.
Language language_from_code(std::string_view code);
std::string_view language_name(Language lang);

// Masculine is encoded as the positive class (1) throughout.
enum class Gender { feminine, masculine };

std::string_view to_string(Gender g);

struct Noun {
  std::string surface;
  Language language = Language::en;
  Gender gender = Gender::masculine;
  std::string pivot_gloss;
  bool animate = false;

  bool operator==(const Noun&) const = default;
};

struct GenderCounts {
  std::size_t total = 0;
  std::size_t masculine = 0;
  std::size_t feminine = 0;

  bool operator==(const GenderCounts&) const = default;
};

class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(Language language, std::vector<Noun> entries, std::size_t neuter_dropped = 0);

  Language language() const { return language_; }
  const std::vector<Noun>& entries() const { return entries_; }
  const GenderCounts& counts() const { return counts_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t neuter_dropped() const { return neuter_dropped_; }

  const Noun* find(std::string_view surface) const;

  bool operator==(const Lexicon&) const = default;

 private:
  Language language_ = Language::en;
  std::vector<Noun> entries_;
  GenderCounts counts_;
  std::size_t neuter_dropped_ = 0;
};

struct Split {
  std::vector<Noun> train;
  std::vector<Noun> test;
  std::uint64_t seed = 0;

  bool operator==(const Split&) const = default;
};

// Reads `surface	gender	pivot_gloss	animate` TSV with a header row. Neuter rows
// are dropped and counted. Throws ParseError / ValidationError.
Lexicon load_lexicon(const std::filesystem::path& path, Language language);
Lexicon parse_lexicon(std::string_view content, Language language);
std::string format_lexicon(const Lexicon& lexicon);

Lexicon filter_animate(const Lexicon& lexicon);

// Seeded shuffle, then the first round(K/10) nouns become the test set.
Split split_lexicon(const Lexicon& lexicon, std::uint64_t seed);
std::size_t test_size_for(std::size_t total);

}  // namespace genderprobe
