#include "genderprobe/synthetic.hpp"

#include "genderprobe/error.hpp"
#include "genderprobe/rng.hpp"
#include "genderprobe/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace genderprobe {

SyntheticVocabulary make_vocabulary(const VocabularyOptions& o) {
  if (o.pool_size == 0) throw ValidationError("pool_size must be positive");
  const std::size_t active = o.active_dims == 0 ? o.dimension : o.active_dims;
  if (o.dimension == 0 || o.active_offset + active > o.dimension) {
    throw ValidationError("synthetic embedding subspace does not fit the dimension");
  }
  Rng rng(o.seed);
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < 3 * o.pool_size; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu", i);
    tokens.push_back(o.prefix + buf);
  }
  rng.shuffle(std::span<std::string>(tokens));
  SyntheticVocabulary v;
  const auto p = static_cast<std::ptrdiff_t>(o.pool_size);
  v.masculine.assign(tokens.begin(), tokens.begin() + p);
  v.feminine.assign(tokens.begin() + p, tokens.begin() + 2 * p);
  v.neutral.assign(tokens.begin() + 2 * p, tokens.end());
  std::vector<std::string> sorted = tokens;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& t : sorted) {
    std::vector<double> vec(o.dimension, 0.0);
    for (std::size_t d = o.active_offset; d < o.active_offset + active; ++d) vec[d] = rng.normal();
    v.semantic_map.emplace(t, std::move(vec));
  }
  return v;
}

void SyntheticSpec::validate() const {
  if (n_nouns < 1) throw ValidationError("synthetic n_nouns must be positive");
  if (!(masculine_fraction > 0.0 && masculine_fraction < 1.0)) {
    throw ValidationError("masculine_fraction must lie in (0, 1)");
  }
  if (!(bias_strength >= 0.0 && bias_strength <= 1.0)) throw ValidationError("bias strength must lie in [0, 1]");
  if (adjectives_per_response < 1) throw ValidationError("adjectives_per_response must be positive");
  if (n_samples < 1) throw ValidationError("synthetic n_samples must be positive");
  if (!(oov_fraction >= 0.0 && oov_fraction < 1.0)) throw ValidationError("oov_fraction must lie in [0, 1)");
  std::set<std::string> seen;
  for (const auto* pool : {&vocabulary.masculine, &vocabulary.feminine, &vocabulary.neutral}) {
    for (const auto& t : *pool) {
      if (!seen.insert(t).second) throw ValidationError("adjective pools overlap at '" + t + "'");
      if (!vocabulary.semantic_map.count(t)) throw ValidationError("no semantic vector for '" + t + "'");
    }
  }
  const auto m = static_cast<std::size_t>(adjectives_per_response);
  if (bias_strength > 0.0 && (vocabulary.masculine.size() < m || vocabulary.feminine.size() < m)) {
    throw ValidationError("gendered pools hold fewer adjectives than adjectives_per_response");
  }
  if (bias_strength < 1.0 && vocabulary.neutral.size() < m) {
    throw ValidationError("neutral pool holds fewer adjectives than adjectives_per_response");
  }
}

std::string surface_adjective(Language lang, const std::string& pivot, Gender noun_gender, bool inflect) {
  std::string s = std::string(to_string(lang)) + "_" + pivot;
  if (inflect) s += noun_gender == Gender::masculine ? "o" : "a";
  return s;
}

namespace {

std::size_t pick(Rng& rng, const std::vector<std::string>& pool, const std::vector<bool>& used,
                 FrequencyShape shape, double ratio) {
  double total = 0.0;
  double w = 1.0;
  for (std::size_t i = 0; i < pool.size(); ++i, w *= ratio) {
    if (!used[i]) total += shape == FrequencyShape::uniform ? 1.0 : w;
  }
  double u = rng.uniform() * total;
  w = 1.0;
  std::size_t last = pool.size();
  for (std::size_t i = 0; i < pool.size(); ++i, w *= ratio) {
    if (used[i]) continue;
    last = i;
    const double wi = shape == FrequencyShape::uniform ? 1.0 : w;
    if (u < wi) return i;
    u -= wi;
  }
  return last;
}

}  // namespace

std::string sample_response(const SyntheticSpec& spec, Language lang, Gender gender, std::uint64_t seed,
                            const std::string& hash, int sample_index) {
  Rng rng(derive_seed(seed, hash + "#" + std::to_string(sample_index)));
  const bool masc_pool = (gender == Gender::masculine) != spec.swap_pools;
  const auto& gendered = masc_pool ? spec.vocabulary.masculine : spec.vocabulary.feminine;
  const auto& neutral = spec.vocabulary.neutral;
  std::vector<bool> used_g(gendered.size(), false), used_n(neutral.size(), false);
  std::string out;
  for (int slot = 0; slot < spec.adjectives_per_response; ++slot) {
    const bool from_gendered = rng.uniform() < spec.bias_strength;
    const auto& pool = from_gendered ? gendered : neutral;
    auto& used = from_gendered ? used_g : used_n;
    if (std::count(used.begin(), used.end(), false) == 0) {
      throw ValidationError("synthetic adjective pool exhausted");
    }
    const std::size_t i = pick(rng, pool, used, spec.shape, spec.geometric_ratio);
    used[i] = true;
    if (slot > 0) out += ", ";
    out += surface_adjective(lang, pool[i], gender, spec.inflect);
  }
  return out;
}

SyntheticBackend::SyntheticBackend(SyntheticSpec spec, const Lexicon& lexicon, std::uint64_t seed)
    : spec_(std::move(spec)), language_(lexicon.language()), seed_(seed) {
  spec_.validate();
  for (const auto& n : lexicon.entries()) genders_.emplace(n.surface, n.gender);
}

std::string SyntheticBackend::complete(const std::string& prompt, int sample_index) {
  const auto close = prompt.rfind('"');
  const auto open = close == std::string::npos || close == 0 ? std::string::npos : prompt.rfind('"', close - 1);
  if (open == std::string::npos) throw ValidationError("synthetic backend cannot find the noun in the prompt");
  const std::string noun = prompt.substr(open + 1, close - open - 1);
  const auto it = genders_.find(noun);
  if (it == genders_.end()) throw ValidationError("synthetic backend does not know noun '" + noun + "'");
  return sample_response(spec_, language_, it->second, seed_, prompt_hash(prompt), sample_index);
}

SyntheticFixture generate_language(const SyntheticSpec& spec, Language lang, std::uint64_t seed) {
  spec.validate();
  if (lang == Language::en) throw ValidationError("synthetic languages need a source language code");
  Rng rng(derive_seed(seed, "lexicon"));
  const auto n_masc = static_cast<std::size_t>(std::llround(spec.masculine_fraction * static_cast<double>(spec.n_nouns)));
  std::vector<Gender> genders(spec.n_nouns, Gender::feminine);
  std::fill(genders.begin(), genders.begin() + static_cast<std::ptrdiff_t>(std::min(n_masc, spec.n_nouns)),
            Gender::masculine);
  rng.shuffle(std::span<Gender>(genders));

  std::vector<Noun> nouns;
  for (std::size_t i = 0; i < spec.n_nouns; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "noun%04zu", i);
    const bool animate = rng.uniform() < spec.animate_fraction;
    nouns.push_back(Noun{std::string(to_string(lang)) + "_" + buf, lang, genders[i], buf, animate});
  }
  SyntheticFixture fx;
  fx.language = lang;
  fx.lexicon = Lexicon(lang, std::move(nouns));
  fx.spec = spec;

  SyntheticBackend backend(spec, fx.lexicon, seed);
  const PromptTemplate& tmpl = template_for(lang);
  for (const Noun& n : fx.lexicon.entries()) {
    const std::string prompt = render_prompt(tmpl, n);
    const std::string hash = prompt_hash(prompt);
    for (int j = 0; j < spec.n_samples; ++j) {
      fx.transcript.push_back(
          {hash, n.surface, j, backend.complete(prompt, j), spec.model_name, std::string(kFixtureTimestamp)});
    }
  }

  if (spec.oov_fraction > 0.0) {
    Rng oov_rng(derive_seed(seed, "oov"));
    for (const auto& [tok, vec] : spec.vocabulary.semantic_map) {
      if (oov_rng.uniform() < spec.oov_fraction) fx.oov.push_back(tok);
    }
  }
  return fx;
}

EmbeddingTable fixture_embeddings(const std::vector<SyntheticFixture>& fixtures) {
  std::set<std::string> withheld;
  for (const auto& fx : fixtures) withheld.insert(fx.oov.begin(), fx.oov.end());
  std::map<std::string, std::vector<double>> merged;
  for (const auto& fx : fixtures) {
    for (const auto& [tok, vec] : fx.spec.vocabulary.semantic_map) {
      if (withheld.count(tok)) continue;
      const auto [it, inserted] = merged.emplace(tok, vec);
      if (!inserted && it->second != vec) {
        throw ValidationError("synthetic languages disagree on the vector for '" + tok + "'");
      }
    }
  }
  if (merged.empty()) throw ValidationError("synthetic embedding table would be empty");
  EmbeddingTable table;
  for (auto& [tok, vec] : merged) table.insert(tok, std::move(vec));
  return table;
}

DictionaryTranslator fixture_dictionary(const std::vector<SyntheticFixture>& fixtures) {
  DictionaryTranslator dict;
  for (const auto& fx : fixtures) {
    const auto& v = fx.spec.vocabulary;
    for (const auto* pool : {&v.masculine, &v.feminine, &v.neutral}) {
      for (const auto& pivot : *pool) {
        dict.add(fx.language, surface_adjective(fx.language, pivot, Gender::masculine, fx.spec.inflect), pivot);
        dict.add(fx.language, surface_adjective(fx.language, pivot, Gender::feminine, fx.spec.inflect), pivot);
      }
    }
  }
  return dict;
}

std::string format_embeddings(const EmbeddingTable& table) {
  std::string out;
  for (const auto& tok : table.tokens()) {
    out += tok;
    for (double v : *table.find(tok)) out += ' ' + text::format_double(v);
    out += '\n';
  }
  return out;
}

std::string format_transcript(const std::vector<TranscriptRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json_line(r) + "\n";
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw ValidationError("cannot write " + path.string());
}

}  // namespace

void write_fixtures(const std::vector<SyntheticFixture>& fixtures, const FixturePaths& paths) {
  for (const auto& fx : fixtures) {
    write_file(paths.lexicon_dir / (std::string(to_string(fx.language)) + ".tsv"), format_lexicon(fx.lexicon));
    write_file(transcript_file(paths.transcript_dir, fx.language, fx.spec.model_name), format_transcript(fx.transcript));
  }
  write_file(paths.embeddings, format_embeddings(fixture_embeddings(fixtures)));
  write_file(paths.dictionary, format_dictionary(fixture_dictionary(fixtures)));
}

}  // namespace genderprobe
