#pragma once

#include "genderprobe/describe.hpp"
#include "genderprobe/http_client.hpp"
#include "genderprobe/lexicon.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>

namespace genderprobe {

enum class TranslationOrigin { online, dictionary, identity };

std::string_view to_string(TranslationOrigin origin);

// Maps one normalized source-language adjective to English. Returns nullopt when
// the translator has no answer; throws TransportError on client failure.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::optional<std::string> translate(const std::string& token, Language lang) = 0;
  virtual TranslationOrigin origin() const = 0;
};

// Offline word list: TSV `source_language	source	target`, header optional.
class DictionaryTranslator : public Translator {
 public:
  DictionaryTranslator() = default;
  explicit DictionaryTranslator(const std::filesystem::path& path);

  void add(Language lang, const std::string& source, const std::string& target);
  std::optional<std::string> translate(const std::string& token, Language lang) override;
  TranslationOrigin origin() const override { return TranslationOrigin::dictionary; }

  std::size_t size() const { return entries_.size(); }
  const std::map<std::pair<Language, std::string>, std::string>& entries() const { return entries_; }

 private:
  std::map<std::pair<Language, std::string>, std::string> entries_;
};

std::string format_dictionary(const DictionaryTranslator& dict);

// POSTs {"q": token, "source": lang, "target": "en"} and reads "translation"
// from the response. Key from GENDERPROBE_TRANSLATE_KEY.
class OnlineTranslator : public Translator {
 public:
  OnlineTranslator(std::string endpoint, std::string api_key, http::RetryPolicy retry = {},
                   std::chrono::milliseconds timeout = std::chrono::milliseconds(15000));
  std::optional<std::string> translate(const std::string& token, Language lang) override;
  TranslationOrigin origin() const override { return TranslationOrigin::online; }
  std::size_t calls() const { return calls_; }

 private:
  std::string endpoint_;
  std::string api_key_;
  http::RetryPolicy retry_;
  std::chrono::milliseconds timeout_;
  std::atomic<std::size_t> calls_{0};
};

enum class MissPolicy { error, pass_through };

struct CacheEntry {
  std::string target;
  TranslationOrigin origin = TranslationOrigin::dictionary;
};

// Thread-safe translation memory. When backed by a file, every new entry is
// appended as `source_language	source	target	origin`; on reload the last
// line for a key wins.
class TranslationCache {
 public:
  TranslationCache() = default;
  explicit TranslationCache(std::filesystem::path path);

  std::optional<CacheEntry> lookup(Language lang, const std::string& source) const;
  void store(Language lang, const std::string& source, const CacheEntry& entry);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<std::pair<Language, std::string>, CacheEntry> entries_;
};

std::string translate_adjective(TranslationCache& cache, Translator& client, const std::string& token,
                                Language lang, MissPolicy policy = MissPolicy::error);

// Replaces every adjective by its pivot form. Source adjectives that collapse to
// one pivot token have their counts summed and clamped to n_samples. All
// untranslatable tokens are reported together.
AdjectiveProfile translate_profile(const AdjectiveProfile& profile, TranslationCache& cache, Translator& client,
                                   MissPolicy policy = MissPolicy::error);

}  // namespace genderprobe
