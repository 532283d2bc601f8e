#include "genderprobe/lexicon.hpp"

#include "genderprobe/error.hpp"
#include "genderprobe/rng.hpp"
#include "genderprobe/text.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace genderprobe {

namespace {

struct LanguageInfo {
  Language lang;
  std::string_view code;
  std::string_view name;
};

constexpr std::array<LanguageInfo, 11> kLanguages = {{
    {Language::bg, "bg", "Bulgarian"},
    {Language::cs, "cs", "Czech"},
    {Language::fr, "fr", "French"},
    {Language::de, "de", "German"},
    {Language::el, "el", "Greek"},
    {Language::hi, "hi", "Hindi"},
    {Language::it, "it", "Italian"},
    {Language::lv, "lv", "Latvian"},
    {Language::pt, "pt", "Portuguese"},
    {Language::es, "es", "Spanish"},
    {Language::en, "en", "English"},
}};

GenderCounts tally(const std::vector<Noun>& entries) {
  GenderCounts c;
  for (const Noun& n : entries) {
    ++c.total;
    if (n.gender == Gender::masculine) {
      ++c.masculine;
    } else {
      ++c.feminine;
    }
  }
  return c;
}

}  // namespace

std::string_view to_string(Language lang) {
  for (const auto& info : kLanguages) {
    if (info.lang == lang) return info.code;
  }
  return "??";
}

std::string_view language_name(Language lang) {
  for (const auto& info : kLanguages) {
    if (info.lang == lang) return info.name;
  }
  return "??";
}

std::optional<Language> parse_language(std::string_view code) {
  for (const auto& info : kLanguages) {
    if (info.code == code) return info.lang;
  }
  return std::nullopt;
}

Language language_from_code(std::string_view code) {
  if (auto lang = parse_language(code)) return *lang;
  throw ValidationError("unsupported language code '" + std::string(code) + "'");
}

std::string_view to_string(Gender g) { return g == Gender::masculine ? "m" : "f"; }

Lexicon::Lexicon(Language language, std::vector<Noun> entries, std::size_t neuter_dropped)
    : language_(language), entries_(std::move(entries)), counts_(tally(entries_)), neuter_dropped_(neuter_dropped) {
  for (const Noun& n : entries_) {
    if (n.language != language_) {
      throw ValidationError("noun '" + n.surface + "' is " + std::string(to_string(n.language)) +
                            " but lexicon is " + std::string(to_string(language_)));
    }
  }
}

const Noun* Lexicon::find(std::string_view surface) const {
  for (const Noun& n : entries_) {
    if (n.surface == surface) return &n;
  }
  return nullptr;
}

Lexicon parse_lexicon(std::string_view content, Language language) {
  if (language == Language::en) {
    throw ValidationError("English is the pivot language and cannot hold gendered nouns");
  }
  std::vector<Noun> entries;
  std::set<std::string, std::less<>> seen;
  std::size_t neuter = 0;
  std::size_t line_no = 0;
  bool header_seen = false;

  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) {
      if (end == content.size()) break;
      continue;
    }
    if (!header_seen) {
      if (line != "surface\tgender\tpivot_gloss\tanimate") {
        throw ParseError("expected header 'surface\\tgender\\tpivot_gloss\\tanimate'", line_no);
      }
      header_seen = true;
      continue;
    }
    const auto cols = text::split(line, '\t');
    if (cols.size() != 4) {
      throw ParseError("expected 4 tab-separated columns, got " + std::to_string(cols.size()), line_no);
    }
    const std::string surface(text::trim(cols[0]));
    if (surface.empty()) throw ParseError("empty surface", line_no);

    const std::string_view g = text::trim(cols[1]);
    Gender gender;
    if (g == "m") {
      gender = Gender::masculine;
    } else if (g == "f") {
      gender = Gender::feminine;
    } else if (g == "n") {
      ++neuter;
      continue;
    } else {
      throw ParseError("unknown gender token '" + std::string(g) + "'", line_no);
    }

    const std::string_view a = text::trim(cols[3]);
    if (a != "0" && a != "1") throw ParseError("animate must be 0 or 1, got '" + std::string(a) + "'", line_no);

    if (!seen.insert(surface).second) {
      throw ParseError("duplicate surface '" + surface + "'", line_no);
    }
    entries.push_back(Noun{surface, language, gender, std::string(text::trim(cols[2])), a == "1"});
    if (end == content.size()) break;
  }
  if (!header_seen) throw ParseError("missing header row", 1);
  if (entries.empty()) throw ValidationError("lexicon for " + std::string(to_string(language)) + " is empty");
  return Lexicon(language, std::move(entries), neuter);
}

Lexicon load_lexicon(const std::filesystem::path& path, Language language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open lexicon " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_lexicon(buf.str(), language);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_lexicon(const Lexicon& lexicon) {
  std::string out = "surface\tgender\tpivot_gloss\tanimate\n";
  for (const Noun& n : lexicon.entries()) {
    out += n.surface;
    out += '\t';
    out += to_string(n.gender);
    out += '\t';
    out += n.pivot_gloss;
    out += '\t';
    out += n.animate ? '1' : '0';
    out += '\n';
  }
  return out;
}

Lexicon filter_animate(const Lexicon& lexicon) {
  std::vector<Noun> kept;
  for (const Noun& n : lexicon.entries()) {
    if (!n.animate) kept.push_back(n);
  }
  return Lexicon(lexicon.language(), std::move(kept), lexicon.neuter_dropped());
}

std::size_t test_size_for(std::size_t total) { return (total + 5) / 10; }

Split split_lexicon(const Lexicon& lexicon, std::uint64_t seed) {
  if (lexicon.size() < 10) {
    throw ValidationError("lexicon " + std::string(to_string(lexicon.language())) + " has " +
                          std::to_string(lexicon.size()) + " nouns; at least 10 are needed for a split");
  }
  std::vector<Noun> shuffled = lexicon.entries();
  Rng rng(seed);
  rng.shuffle(std::span<Noun>(shuffled));
  const auto n_test = static_cast<std::ptrdiff_t>(test_size_for(shuffled.size()));
  Split split;
  split.seed = seed;
  split.test.assign(shuffled.begin(), shuffled.begin() + n_test);
  split.train.assign(shuffled.begin() + n_test, shuffled.end());
  return split;
}

}  // namespace genderprobe
