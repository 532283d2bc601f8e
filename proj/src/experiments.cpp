#include "genderprobe/experiments.hpp"

#include "genderprobe/error.hpp"
#include "genderprobe/rng.hpp"
#include "genderprobe/text.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

namespace genderprobe {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep = ",") {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::string num(double v) { return text::format_double(v); }

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

BackendSpec backend_from(const Config& c, const std::string& prefix, const ExperimentConfig& ec) {
  BackendSpec b;
  b.kind = parse_backend_kind(c.get_string(prefix + ".kind", "replay"));
  b.model_name = c.get_string(prefix + ".model", "mistral-7b");
  b.endpoint = c.get_string(prefix + ".endpoint", "");
  b.api = c.get_string(prefix + ".api", "completions");
  b.api_key = env_or_empty("GENDERPROBE_API_KEY");
  b.temperature = c.get_double(prefix + ".temperature", c.get_double("temperature", 0.7));
  if (b.temperature < 0) throw ValidationError(prefix + ".temperature must be >= 0");
  b.max_tokens = static_cast<int>(c.get_int(prefix + ".max_tokens", 64));
  if (b.max_tokens < 1) throw ValidationError(prefix + ".max_tokens must be positive");
  b.request_timeout = std::chrono::milliseconds(c.get_int(prefix + ".timeout_ms", 30000));
  b.retry.retries = static_cast<int>(c.get_int(prefix + ".retries", 3));
  b.retry.backoff_base = std::chrono::milliseconds(c.get_int(prefix + ".backoff_ms", 1000));
  b.transcript_path = c.get_path(prefix + ".transcript_path", ec.transcript_dir);
  b.seed = static_cast<std::uint64_t>(c.get_int(prefix + ".seed", static_cast<long long>(ec.seed)));
  if (c.has(prefix + ".beta")) b.synthetic_beta = c.get_double(prefix + ".beta", 1.0);
  b.max_parallel = static_cast<int>(c.get_int(prefix + ".max_parallel", ec.max_parallel));
  if (b.max_parallel < 1) throw ValidationError(prefix + ".max_parallel must be positive");
  if (b.kind == BackendKind::http && b.endpoint.empty()) throw ValidationError(prefix + ".endpoint is required for http");
  return b;
}

void backend_snapshot(std::map<std::string, std::string>& s, const std::string& prefix, const BackendSpec& b) {
  s[prefix + ".kind"] = std::string(to_string(b.kind));
  s[prefix + ".model"] = b.model_name;
  s[prefix + ".endpoint"] = b.endpoint;
  s[prefix + ".api"] = b.api;
  s[prefix + ".temperature"] = num(b.temperature);
  s[prefix + ".max_tokens"] = std::to_string(b.max_tokens);
  s[prefix + ".timeout_ms"] = std::to_string(b.request_timeout.count());
  s[prefix + ".retries"] = std::to_string(b.retry.retries);
  s[prefix + ".backoff_ms"] = std::to_string(b.retry.backoff_base.count());
  s[prefix + ".transcript_path"] = b.transcript_path.string();
  s[prefix + ".seed"] = std::to_string(b.seed);
  if (b.synthetic_beta) s[prefix + ".beta"] = num(*b.synthetic_beta);
  s[prefix + ".max_parallel"] = std::to_string(b.max_parallel);
}

fs::path absolute_or_empty(const fs::path& p) { return p.empty() ? p : fs::absolute(p).lexically_normal(); }

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from(const Config& c) {
  ExperimentConfig e;
  for (const auto& code : c.get_list("languages")) e.languages.push_back(language_from_code(code));
  if (e.languages.empty()) throw ValidationError("config lists no languages");
  std::sort(e.languages.begin(), e.languages.end(),
            [](Language a, Language b) { return to_string(a) < to_string(b); });
  e.languages.erase(std::unique(e.languages.begin(), e.languages.end()), e.languages.end());
  for (Language l : e.languages) {
    if (l == Language::en) throw ValidationError("en is the pivot language and cannot be evaluated");
  }

  e.n_samples = static_cast<int>(c.get_int("n_samples", 50));
  e.top_p = static_cast<int>(c.get_int("top_p", 50));
  if (e.n_samples < 1 || e.top_p < 1) throw ValidationError("n_samples and top_p must be positive");
  e.seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
  e.weighting = parse_weighting(c.get_string("weighting", "scaled"));
  e.oov_warning_ratio = c.get_double("oov_warning_ratio", 0.5);
  e.animate_filter = c.get_bool("animate_filter", false);
  e.translator_mode = c.get_string("translator.mode", "dictionary");
  if (e.translator_mode != "dictionary" && e.translator_mode != "online") {
    throw ValidationError("translator.mode must be 'dictionary' or 'online'");
  }
  e.translator_endpoint = c.get_string("translator.endpoint", "");
  const std::string miss = c.get_string("translator.miss_policy", "error");
  if (miss == "error") {
    e.miss_policy = MissPolicy::error;
  } else if (miss == "pass_through") {
    e.miss_policy = MissPolicy::pass_through;
  } else {
    throw ValidationError("translator.miss_policy must be 'error' or 'pass_through'");
  }
  e.out_dir = absolute_or_empty(c.get_path("out_dir", c.base_dir().empty() ? fs::path("out") : c.base_dir() / "out"));
  e.lexicon_dir = absolute_or_empty(c.get_path("lexicon_dir", "lexicons"));
  e.transcript_dir = absolute_or_empty(c.get_path("transcript_dir", e.out_dir / "transcripts"));
  e.dictionary_path = absolute_or_empty(c.get_path("dictionary_path"));
  e.embeddings_path = absolute_or_empty(c.get_path("embeddings_path"));
  e.cache_path = absolute_or_empty(c.get_path("cache_path", e.out_dir / "translation_cache.tsv"));
  e.max_parallel = static_cast<int>(c.get_int("max_parallel", 4));
  e.min_support = static_cast<std::size_t>(c.get_int("min_support", static_cast<long long>(kDefaultMinSupport)));
  e.report_timestamps = c.get_bool("report_timestamps", false);

  e.train.learning_rate = c.get_double("train.learning_rate", 0.01);
  e.train.epochs = static_cast<int>(c.get_int("train.epochs", 200));
  e.train.batch_size = static_cast<int>(c.get_int("train.batch_size", 32));
  e.train.hidden_size = static_cast<int>(c.get_int("train.hidden_size", 64));
  e.train.l2_penalty = c.get_double("train.l2_penalty", 1e-4);
  e.train.activation = parse_activation(c.get_string("train.activation", "relu"));
  e.train.standardize = c.get_bool("train.standardize", true);
  e.train.validate();

  auto& s = e.synth;
  s.n_nouns = static_cast<std::size_t>(c.get_int("synth.n_nouns", 60));
  s.masculine_fraction = c.get_double("synth.masculine_fraction", 0.5);
  s.beta = c.get_double("synth.beta", 1.0);
  s.adjectives_per_response = static_cast<int>(c.get_int("synth.adjectives_per_response", 5));
  s.pool_size = static_cast<std::size_t>(c.get_int("synth.pool_size", 20));
  s.embedding_dim = static_cast<std::size_t>(c.get_int("synth.embedding_dim", 16));
  s.vocab_seed = static_cast<std::uint64_t>(c.get_int("synth.vocab_seed", 1));
  const std::string map = c.get_string("synth.semantic_map", "shared");
  if (map != "shared" && map != "disjoint") throw ValidationError("synth.semantic_map must be shared or disjoint");
  s.shared_map = map == "shared";
  s.inflect = c.get_bool("synth.inflect", false);
  s.oov_fraction = c.get_double("synth.oov_fraction", 0.0);
  s.animate_fraction = c.get_double("synth.animate_fraction", 0.0);
  const std::string shape = c.get_string("synth.shape", "uniform");
  if (shape != "uniform" && shape != "geometric") throw ValidationError("synth.shape must be uniform or geometric");
  s.shape = shape == "uniform" ? FrequencyShape::uniform : FrequencyShape::geometric;
  for (const auto& code : c.get_list("synth.swap_pools")) s.swap_pools.push_back(language_from_code(code));
  s.n_samples = static_cast<int>(c.get_int("synth.n_samples", e.n_samples));

  e.backends.push_back(backend_from(c, "backend", e));
  if (c.has("backend2.kind")) e.backends.push_back(backend_from(c, "backend2", e));
  return e;
}

std::map<std::string, std::string> ExperimentConfig::snapshot() const {
  std::map<std::string, std::string> s;
  std::vector<std::string> langs;
  for (Language l : languages) langs.emplace_back(to_string(l));
  s["languages"] = join(langs);
  s["n_samples"] = std::to_string(n_samples);
  s["top_p"] = std::to_string(top_p);
  s["seed"] = std::to_string(seed);
  s["weighting"] = std::string(to_string(weighting));
  s["oov_warning_ratio"] = num(oov_warning_ratio);
  s["animate_filter"] = animate_filter ? "true" : "false";
  s["translator.mode"] = translator_mode;
  s["translator.endpoint"] = translator_endpoint;
  s["translator.miss_policy"] = miss_policy == MissPolicy::error ? "error" : "pass_through";
  s["lexicon_dir"] = lexicon_dir.string();
  s["transcript_dir"] = transcript_dir.string();
  s["dictionary_path"] = dictionary_path.string();
  s["embeddings_path"] = embeddings_path.string();
  s["cache_path"] = cache_path.string();
  s["out_dir"] = out_dir.string();
  s["max_parallel"] = std::to_string(max_parallel);
  s["min_support"] = std::to_string(min_support);
  s["report_timestamps"] = report_timestamps ? "true" : "false";
  s["train.learning_rate"] = num(train.learning_rate);
  s["train.epochs"] = std::to_string(train.epochs);
  s["train.batch_size"] = std::to_string(train.batch_size);
  s["train.hidden_size"] = std::to_string(train.hidden_size);
  s["train.l2_penalty"] = num(train.l2_penalty);
  s["train.activation"] = std::string(to_string(train.activation));
  s["train.standardize"] = train.standardize ? "true" : "false";
  s["synth.n_nouns"] = std::to_string(synth.n_nouns);
  s["synth.masculine_fraction"] = num(synth.masculine_fraction);
  s["synth.beta"] = num(synth.beta);
  s["synth.adjectives_per_response"] = std::to_string(synth.adjectives_per_response);
  s["synth.pool_size"] = std::to_string(synth.pool_size);
  s["synth.embedding_dim"] = std::to_string(synth.embedding_dim);
  s["synth.vocab_seed"] = std::to_string(synth.vocab_seed);
  s["synth.semantic_map"] = synth.shared_map ? "shared" : "disjoint";
  s["synth.inflect"] = synth.inflect ? "true" : "false";
  s["synth.oov_fraction"] = num(synth.oov_fraction);
  s["synth.animate_fraction"] = num(synth.animate_fraction);
  s["synth.shape"] = synth.shape == FrequencyShape::uniform ? "uniform" : "geometric";
  std::vector<std::string> swaps;
  for (Language l : synth.swap_pools) swaps.emplace_back(to_string(l));
  s["synth.swap_pools"] = join(swaps);
  s["synth.n_samples"] = std::to_string(synth.n_samples);
  if (!backends.empty()) backend_snapshot(s, "backend", backends[0]);
  if (backends.size() > 1) backend_snapshot(s, "backend2", backends[1]);
  return s;
}

// ---------------------------------------------------------------------------

std::uint64_t synthetic_seed_for(const ExperimentConfig& config, Language lang) {
  return derive_seed(config.seed, "synth/" + std::string(to_string(lang)));
}

SyntheticSpec synthetic_spec_for(const ExperimentConfig& config, Language lang, std::optional<double> beta) {
  const auto& s = config.synth;
  VocabularyOptions vo;
  vo.pool_size = s.pool_size;
  vo.seed = s.vocab_seed;
  if (s.shared_map) {
    vo.dimension = s.embedding_dim;
  } else {
    const auto it = std::find(config.languages.begin(), config.languages.end(), lang);
    const auto index = static_cast<std::size_t>(it - config.languages.begin());
    vo.prefix = "adj" + std::string(to_string(lang));
    vo.dimension = s.embedding_dim * config.languages.size();
    vo.active_offset = s.embedding_dim * index;
    vo.active_dims = s.embedding_dim;
    vo.seed = derive_seed(s.vocab_seed, vo.prefix);
  }
  SyntheticSpec spec;
  spec.n_nouns = s.n_nouns;
  spec.masculine_fraction = s.masculine_fraction;
  spec.vocabulary = make_vocabulary(vo);
  spec.bias_strength = beta.value_or(s.beta);
  spec.adjectives_per_response = s.adjectives_per_response;
  spec.n_samples = s.n_samples;
  spec.animate_fraction = s.animate_fraction;
  spec.inflect = s.inflect;
  spec.swap_pools = std::find(s.swap_pools.begin(), s.swap_pools.end(), lang) != s.swap_pools.end();
  spec.oov_fraction = s.oov_fraction;
  spec.shape = s.shape;
  spec.model_name = config.backends.empty() ? "synthetic" : config.backends.front().model_name;
  return spec;
}

std::vector<SyntheticFixture> generate_synthetic(const ExperimentConfig& config) {
  std::vector<SyntheticFixture> out;
  const std::optional<double> beta = config.backends.empty() ? std::nullopt : config.backends.front().synthetic_beta;
  for (Language lang : config.languages) {
    out.push_back(generate_language(synthetic_spec_for(config, lang, beta), lang, synthetic_seed_for(config, lang)));
  }
  return out;
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(ExperimentConfig config) : config_(std::move(config)) {}

void Pipeline::preflight(const BackendSpec& backend, bool need_embeddings) const {
  std::vector<std::string> missing;
  for (Language lang : config_.languages) {
    const fs::path lex = config_.lexicon_dir / (std::string(to_string(lang)) + ".tsv");
    if (!fs::exists(lex)) missing.push_back(std::string(to_string(lang)) + ": lexicon " + lex.string());
    if (backend.kind == BackendKind::replay) {
      const fs::path t = fs::is_directory(backend.transcript_path)
                             ? transcript_file(backend.transcript_path, lang, backend.model_name)
                             : backend.transcript_path;
      if (!fs::exists(t)) missing.push_back(std::string(to_string(lang)) + ": transcript " + t.string());
    }
  }
  if (config_.translator_mode == "dictionary" && !fs::exists(config_.dictionary_path)) {
    missing.push_back("dictionary " + (config_.dictionary_path.empty() ? "(dictionary_path not set)"
                                                                        : config_.dictionary_path.string()));
  }
  if (config_.translator_mode == "online" && config_.translator_endpoint.empty()) {
    missing.push_back("translator.endpoint (online translator mode)");
  }
  if (need_embeddings && !fs::exists(config_.embeddings_path)) {
    missing.push_back("embeddings " + (config_.embeddings_path.empty() ? "(embeddings_path not set)"
                                                                        : config_.embeddings_path.string()));
  }
  if (!missing.empty()) {
    std::string msg = "missing inputs:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw ValidationError(msg);
  }
}

Lexicon Pipeline::lexicon(Language lang) const {
  Lexicon lex = load_lexicon(config_.lexicon_dir / (std::string(to_string(lang)) + ".tsv"), lang);
  return config_.animate_filter ? filter_animate(lex) : lex;
}

std::unique_ptr<Backend> Pipeline::make_backend(const BackendSpec& spec, const Lexicon& lexicon) const {
  switch (spec.kind) {
    case BackendKind::http:
      return std::make_unique<HttpBackend>(spec);
    case BackendKind::replay: {
      BackendSpec s = spec;
      if (fs::is_directory(s.transcript_path)) {
        s.transcript_path = transcript_file(s.transcript_path, lexicon.language(), s.model_name);
      }
      return std::make_unique<ReplayBackend>(s);
    }
    case BackendKind::synthetic:
      return std::make_unique<SyntheticBackend>(synthetic_spec_for(config_, lexicon.language(), spec.synthetic_beta),
                                                lexicon, synthetic_seed_for(config_, lexicon.language()));
  }
  throw ValidationError("unknown backend kind");
}

TranscriptStore& Pipeline::store(Language lang, const std::string& model) {
  const fs::path path = transcript_file(config_.transcript_dir, lang, model);
  std::lock_guard lock(mutex_);
  auto& slot = stores_[path.string()];
  if (!slot) slot = std::make_unique<TranscriptStore>(path);
  return *slot;
}

const EmbeddingTable& Pipeline::embeddings() {
  std::lock_guard lock(mutex_);
  if (!embeddings_) embeddings_ = std::make_unique<EmbeddingTable>(load_embeddings(config_.embeddings_path));
  return *embeddings_;
}

TranslationCache& Pipeline::cache() {
  std::lock_guard lock(mutex_);
  if (!cache_) cache_ = std::make_unique<TranslationCache>(config_.cache_path);
  return *cache_;
}

Translator& Pipeline::translator() {
  std::lock_guard lock(mutex_);
  if (!translator_) {
    if (config_.translator_mode == "online") {
      translator_ = std::make_unique<OnlineTranslator>(config_.translator_endpoint, env_or_empty("GENDERPROBE_TRANSLATE_KEY"));
    } else {
      translator_ = std::make_unique<DictionaryTranslator>(config_.dictionary_path);
    }
  }
  return *translator_;
}

std::vector<std::vector<Completion>> Pipeline::elicit_all(Language lang, const BackendSpec& spec) {
  const Lexicon lex = lexicon(lang);
  auto backend = make_backend(spec, lex);
  TranscriptStore& st = store(lang, spec.model_name);
  const PromptTemplate& tmpl = template_for(lang);
  ElicitOptions opts;
  opts.max_parallel = spec.max_parallel;
  if (spec.kind != BackendKind::http) opts.clock = [] { return std::string(kFixtureTimestamp); };
  std::vector<std::vector<Completion>> out;
  out.reserve(lex.size());
  for (const Noun& n : lex.entries()) out.push_back(elicit(*backend, spec, n, tmpl, config_.n_samples, &st, opts));
  return out;
}

std::vector<AdjectiveProfile> Pipeline::source_profiles(Language lang, const BackendSpec& spec, std::size_t* empty) {
  std::vector<AdjectiveProfile> out;
  std::size_t n_empty = 0;
  for (const auto& completions : elicit_all(lang, spec)) {
    std::vector<AdjectiveSet> sets;
    sets.reserve(completions.size());
    for (const auto& c : completions) {
      sets.push_back(parse_completion(c));
      n_empty += sets.back().empty_warning ? 1 : 0;
    }
    out.push_back(aggregate(sets, config_.n_samples, config_.top_p));
  }
  if (empty) *empty = n_empty;
  return out;
}

std::vector<AdjectiveProfile> Pipeline::pivot_profiles(const std::vector<AdjectiveProfile>& source) {
  std::vector<AdjectiveProfile> out;
  out.reserve(source.size());
  std::vector<std::string> failures;
  for (const auto& p : source) {
    try {
      out.push_back(translate_profile(p, cache(), translator(), config_.miss_policy));
    } catch (const TranslationError& e) {
      failures.insert(failures.end(), e.tokens().begin(), e.tokens().end());
    }
  }
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    failures.erase(std::unique(failures.begin(), failures.end()), failures.end());
    throw TranslationError("untranslatable adjectives: " + join(failures, ", "), failures);
  }
  return out;
}

LanguageData Pipeline::build(Language lang, const BackendSpec& spec) {
  LanguageData d;
  d.language = lang;
  d.lexicon = lexicon(lang);
  d.source_profiles = source_profiles(lang, spec, &d.empty_parses);
  d.pivot_profiles = pivot_profiles(d.source_profiles);
  const EmbeddingTable& table = embeddings();
  FeaturizeOptions fo{config_.weighting, config_.oov_warning_ratio};
  for (const auto& p : d.pivot_profiles) {
    d.features.push_back(featurize(p, table, fo));
    d.oov_warnings += d.features.back().oov_warning ? 1 : 0;
    d.all_oov += d.features.back().all_oov ? 1 : 0;
  }
  return d;
}

std::vector<LanguageData> Pipeline::build_all(const BackendSpec& spec) {
  preflight(spec);
  std::vector<std::future<LanguageData>> jobs;
  for (Language lang : config_.languages) {
    jobs.push_back(std::async(std::launch::async, [this, lang, &spec] { return build(lang, spec); }));
  }
  std::vector<LanguageData> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::same_language:
      return "same_language";
    case ExperimentKind::transfer:
      return "transfer";
    case ExperimentKind::model_comparison:
      return "model_comparison";
    case ExperimentKind::similarity:
      return "similarity";
  }
  return "?";
}

namespace {

LanguageRow evaluate(Language lang, const ClassifierParams& params, const std::vector<FeatureVector>& test,
                     std::size_t n_train, std::uint64_t seed) {
  const auto preds = predict(params, test);
  LanguageRow row;
  row.language = lang;
  row.metrics = classification_metrics(preds);
  row.n_train = n_train;
  row.n_test = test.size();
  row.seed = seed;
  row.p_value_above_chance =
      binomial_p_value_above_chance(row.metrics.masculine_correct + row.metrics.feminine_correct, test.size());
  return row;
}

void attach_warnings(LanguageRow& row, const LanguageData& d) {
  row.empty_parses = d.empty_parses;
  row.oov_warnings = d.oov_warnings;
  row.all_oov = d.all_oov;
}

std::vector<FeatureVector> select(const LanguageData& d, const std::vector<Noun>& nouns) {
  std::map<std::string, const FeatureVector*> by_surface;
  for (const auto& f : d.features) by_surface.emplace(f.noun.surface, &f);
  std::vector<FeatureVector> out;
  out.reserve(nouns.size());
  for (const auto& n : nouns) out.push_back(*by_surface.at(n.surface));
  return out;
}

}  // namespace

std::vector<LanguageRow> same_language_rows(const std::vector<LanguageData>& data, const TrainConfig& train,
                                            std::uint64_t seed) {
  std::vector<std::future<LanguageRow>> jobs;
  for (const auto& d : data) {
    jobs.push_back(std::async(std::launch::async, [&d, &train, seed] {
      const std::string tag = "same/" + std::string(to_string(d.language));
      const std::uint64_t run_seed = derive_seed(seed, tag);
      Lexicon lex(d.language, [&] {
        std::vector<Noun> nouns;
        for (const auto& f : d.features) nouns.push_back(f.noun);
        return nouns;
      }());
      const Split split = split_lexicon(lex, derive_seed(run_seed, "split"));
      TrainConfig tc = train;
      tc.seed = derive_seed(run_seed, "train");
      const auto train_set = select(d, split.train);
      const auto params = genderprobe::train(train_set, tc);
      LanguageRow row = evaluate(d.language, params, select(d, split.test), train_set.size(), run_seed);
      attach_warnings(row, d);
      return row;
    }));
  }
  std::vector<LanguageRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::vector<LanguageRow> transfer_rows(const std::vector<LanguageData>& data, const TrainConfig& train,
                                       std::uint64_t seed) {
  if (data.size() < 2) throw ValidationError("transfer needs at least two languages");
  std::vector<std::future<LanguageRow>> jobs;
  for (std::size_t held = 0; held < data.size(); ++held) {
    jobs.push_back(std::async(std::launch::async, [&data, &train, seed, held] {
      const LanguageData& target = data[held];
      const std::uint64_t run_seed = derive_seed(seed, "transfer/" + std::string(to_string(target.language)));
      std::vector<FeatureVector> train_set;
      for (std::size_t k = 0; k < data.size(); ++k) {
        if (k == held) continue;
        train_set.insert(train_set.end(), data[k].features.begin(), data[k].features.end());
      }
      TrainConfig tc = train;
      tc.seed = derive_seed(run_seed, "train");
      const auto params = genderprobe::train(train_set, tc);
      LanguageRow row = evaluate(target.language, params, target.features, train_set.size(), run_seed);
      attach_warnings(row, target);
      return row;
    }));
  }
  std::vector<LanguageRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

SimilarityMatrix similarity_matrix(const std::vector<LanguageData>& data, std::size_t min_support) {
  SimilarityMatrix m;
  const std::size_t n = data.size();
  for (const auto& d : data) m.languages.push_back(d.language);
  m.scores.assign(n, std::vector<std::optional<double>>(n));
  m.shared_counts.assign(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      std::optional<double> score;
      std::size_t shared = 0;
      try {
        const auto r = similarity(data[i].pivot_profiles, data[j].pivot_profiles, min_support);
        score = r.score;
        shared = r.shared.size();
      } catch (const DomainError&) {
        // zero score vector: similarity undefined, reported like no overlap
      }
      m.scores[i][j] = m.scores[j][i] = score;
      m.shared_counts[i][j] = m.shared_counts[j][i] = shared;
    }
  }
  return m;
}

namespace {

EvalReport base_report(ExperimentKind kind, const ExperimentConfig& config, std::vector<std::string> backends) {
  EvalReport r;
  r.kind = kind;
  r.backends = std::move(backends);
  r.seed = config.seed;
  r.config = config.snapshot();
  if (config.report_timestamps) r.generated_at = text::iso8601_now();
  return r;
}

ComparisonRow mean_row(const std::string& backend, const std::string& setting, const std::vector<LanguageRow>& rows) {
  ComparisonRow c;
  c.backend = backend;
  c.setting = setting;
  for (const auto& r : rows) {
    c.f1 += r.metrics.f1_feminine;
    c.f1_macro += r.metrics.f1_macro;
    c.overall += r.metrics.overall_accuracy;
    c.masculine += r.metrics.masculine_accuracy;
    c.feminine += r.metrics.feminine_accuracy;
  }
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  c.f1 /= n;
  c.f1_macro /= n;
  c.overall /= n;
  c.masculine /= n;
  c.feminine /= n;
  return c;
}

}  // namespace

EvalReport run_same_language(Pipeline& pipeline, const BackendSpec& backend) {
  const auto& config = pipeline.config();
  EvalReport r = base_report(ExperimentKind::same_language, config, {backend.summary()});
  r.rows = same_language_rows(pipeline.build_all(backend), config.train, config.seed);
  return r;
}

EvalReport run_same_language(const ExperimentConfig& config) {
  Pipeline pipeline(config);
  return run_same_language(pipeline, config.backends.front());
}

EvalReport run_transfer(Pipeline& pipeline, const BackendSpec& backend) {
  const auto& config = pipeline.config();
  if (config.languages.size() < 2) throw ValidationError("transfer needs at least two languages");
  EvalReport r = base_report(ExperimentKind::transfer, config, {backend.summary()});
  r.rows = transfer_rows(pipeline.build_all(backend), config.train, config.seed);
  return r;
}

EvalReport run_transfer(const ExperimentConfig& config) {
  Pipeline pipeline(config);
  return run_transfer(pipeline, config.backends.front());
}

EvalReport run_model_comparison(const ExperimentConfig& config) {
  if (config.backends.size() != 2) throw ValidationError("model comparison needs backend and backend2");
  Pipeline pipeline(config);
  for (const auto& b : config.backends) pipeline.preflight(b);
  std::vector<std::string> names;
  for (const auto& b : config.backends) names.push_back(b.summary());
  EvalReport r = base_report(ExperimentKind::model_comparison, config, names);
  for (const auto& b : config.backends) {
    const auto data = pipeline.build_all(b);
    auto same = same_language_rows(data, config.train, config.seed);
    r.comparison.push_back(mean_row(b.summary(), "same", same));
    if (data.size() >= 2) {
      auto unseen = transfer_rows(data, config.train, config.seed);
      r.comparison.push_back(mean_row(b.summary(), "unseen", unseen));
    }
    r.per_backend[b.summary()] = std::move(same);
  }
  return r;
}

EvalReport run_similarity(const ExperimentConfig& config) {
  if (config.languages.size() < 2) throw ValidationError("similarity needs at least two languages");
  Pipeline pipeline(config);
  const BackendSpec& backend = config.backends.front();
  pipeline.preflight(backend, false);
  EvalReport r = base_report(ExperimentKind::similarity, config, {backend.summary()});
  std::vector<LanguageData> data;
  for (Language lang : config.languages) {
    LanguageData d;
    d.language = lang;
    d.lexicon = pipeline.lexicon(lang);
    d.source_profiles = pipeline.source_profiles(lang, backend, &d.empty_parses);
    d.pivot_profiles = pipeline.pivot_profiles(d.source_profiles);
    r.ratios[lang] = ratio_table(d.pivot_profiles);
    data.push_back(std::move(d));
  }
  r.similarity = similarity_matrix(data, config.min_support);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

json row_json(const LanguageRow& row) {
  const auto& m = row.metrics;
  return json{{"language", std::string(to_string(row.language))},
              {"f1", m.f1_feminine},
              {"f1_feminine", m.f1_feminine},
              {"f1_masculine", m.f1_masculine},
              {"f1_macro", m.f1_macro},
              {"overall_accuracy", m.overall_accuracy},
              {"masculine_accuracy", m.masculine_accuracy},
              {"feminine_accuracy", m.feminine_accuracy},
              {"masculine_support", m.masculine_support},
              {"feminine_support", m.feminine_support},
              {"n_train", row.n_train},
              {"n_test", row.n_test},
              {"seed", row.seed},
              {"p_value_above_chance", row.p_value_above_chance},
              {"warnings",
               {{"empty_parses", row.empty_parses}, {"oov_profiles", row.oov_warnings}, {"all_oov_profiles", row.all_oov}}}};
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '-';
  }
  return s;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& r) {
  json j;
  j["kind"] = std::string(to_string(r.kind));
  j["backends"] = r.backends;
  j["seed"] = r.seed;
  j["config"] = r.config;
  if (r.generated_at) j["generated_at"] = *r.generated_at;
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back(row_json(row));
  j["rows"] = rows;
  if (!r.comparison.empty()) {
    json cmp = json::array();
    for (const auto& c : r.comparison) {
      cmp.push_back({{"backend", c.backend},
                     {"setting", c.setting},
                     {"f1", c.f1},
                     {"f1_macro", c.f1_macro},
                     {"overall_accuracy", c.overall},
                     {"masculine_accuracy", c.masculine},
                     {"feminine_accuracy", c.feminine}});
    }
    j["comparison"] = cmp;
    json per = json::object();
    for (const auto& [name, rows_b] : r.per_backend) {
      json arr = json::array();
      for (const auto& row : rows_b) arr.push_back(row_json(row));
      per[name] = arr;
    }
    j["per_backend_same"] = per;
  }
  if (r.similarity) {
    const auto& m = *r.similarity;
    json langs = json::array();
    for (Language l : m.languages) langs.push_back(std::string(to_string(l)));
    json scores = json::array();
    for (const auto& row : m.scores) {
      json jr = json::array();
      for (const auto& s : row) jr.push_back(s ? json(*s) : json(nullptr));
      scores.push_back(jr);
    }
    j["similarity"] = {{"languages", langs}, {"S", scores}, {"shared_counts", m.shared_counts}};
    json ratios = json::object();
    for (const auto& [lang, table] : r.ratios) {
      json arr = json::array();
      for (const auto& g : table) arr.push_back({{"adjective", g.adjective},
                     {"r_m", g.r_m},
                     {"masculine_support", g.masculine_support},
                     {"support", g.support}});
      ratios[std::string(to_string(lang))] = arr;
    }
    j["ratios"] = ratios;
  }
  return j;
}

std::string report_stem(const EvalReport& r) {
  std::string models;
  for (const auto& b : r.backends) models += (models.empty() ? "" : "-vs-") + sanitize(b);
  return std::string(to_string(r.kind)) + "_" + models + "_seed" + std::to_string(r.seed);
}

std::map<std::string, std::string> render_csv(const nlohmann::json& j) {
  auto cells = [](const json& obj, std::initializer_list<const char*> keys) {
    std::string line;
    for (const char* k : keys) {
      if (!line.empty()) line += ',';
      const json& v = obj.at(k);
      line += v.is_string() ? text::csv_field(v.get<std::string>())
                            : v.is_number_float() ? text::format_double(v.get<double>()) : v.dump();
    }
    return line + "\n";
  };
  std::map<std::string, std::string> out;
  if (j.contains("rows") && !j.at("rows").empty()) {
    const auto keys = {"language", "f1", "f1_macro", "overall_accuracy", "masculine_accuracy", "feminine_accuracy",
                       "masculine_support", "feminine_support", "n_train", "n_test"};
    std::string csv = "language,f1,f1_macro,overall_accuracy,masculine_accuracy,feminine_accuracy,"
                      "masculine_support,feminine_support,n_train,n_test\n";
    for (const auto& row : j.at("rows")) csv += cells(row, keys);
    out[".csv"] = csv;
  }
  if (j.contains("comparison")) {
    const auto keys = {"backend", "setting", "f1", "f1_macro", "overall_accuracy", "masculine_accuracy",
                       "feminine_accuracy"};
    std::string csv = "backend,setting,f1,f1_macro,overall_accuracy,masculine_accuracy,feminine_accuracy\n";
    for (const auto& c : j.at("comparison")) csv += cells(c, keys);
    out[".csv"] = csv;
  }
  if (j.contains("similarity")) {
    const auto& s = j.at("similarity");
    SimilarityMatrix m;
    for (const auto& l : s.at("languages")) m.languages.push_back(language_from_code(l.get<std::string>()));
    for (const auto& row : s.at("S")) {
      std::vector<std::optional<double>> r;
      for (const auto& v : row) r.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      m.scores.push_back(r);
    }
    m.shared_counts = s.at("shared_counts").get<std::vector<std::vector<std::size_t>>>();
    out[".csv"] = similarity_csv(m);
    for (const auto& [lang, table] : j.at("ratios").items()) {
      std::vector<GenderRatio> ratios;
      for (const auto& g : table) {
        ratios.push_back({g.at("adjective").get<std::string>(), g.at("r_m").get<double>(),
                          g.at("masculine_support").get<std::size_t>(), g.at("support").get<std::size_t>()});
      }
      out["_ratios_" + lang + ".csv"] = ratios_csv(ratios);
    }
  }
  return out;
}

fs::path write_report(const EvalReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const json j = report_to_json(report);
  const fs::path json_path = out_dir / (report_stem(report) + ".json");
  {
    std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw ValidationError("cannot write report " + json_path.string());
  }
  for (const auto& [suffix, content] : render_csv(j)) {
    std::ofstream out(out_dir / (report_stem(report) + suffix), std::ios::binary | std::ios::trunc);
    out << content;
  }
  return json_path;
}

}  // namespace genderprobe
