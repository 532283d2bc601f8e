#include "genderprobe/translate.hpp"

#include "genderprobe/error.hpp"
#include "genderprobe/text.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace genderprobe {

using nlohmann::json;

std::string_view to_string(TranslationOrigin origin) {
  switch (origin) {
    case TranslationOrigin::online:
      return "online";
    case TranslationOrigin::dictionary:
      return "dictionary";
    case TranslationOrigin::identity:
      return "identity";
  }
  return "?";
}

namespace {

TranslationOrigin parse_origin(std::string_view s, std::size_t line_no) {
  if (s == "online") return TranslationOrigin::online;
  if (s == "dictionary") return TranslationOrigin::dictionary;
  if (s == "identity") return TranslationOrigin::identity;
  throw ParseError("unknown translation origin '" + std::string(s) + "'", line_no);
}

}  // namespace

DictionaryTranslator::DictionaryTranslator(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dictionary " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    if (line_no == 1 && cols.size() >= 1 && cols[0] == "source_language") continue;
    if (cols.size() != 3) throw ParseError(path.string() + ": expected 3 columns", line_no);
    const auto lang = parse_language(text::trim(cols[0]));
    if (!lang) throw ParseError(path.string() + ": unknown language '" + cols[0] + "'", line_no);
    add(*lang, text::normalize_token(cols[1]), text::normalize_token(cols[2]));
  }
}

void DictionaryTranslator::add(Language lang, const std::string& source, const std::string& target) {
  entries_[{lang, source}] = target;
}

std::optional<std::string> DictionaryTranslator::translate(const std::string& token, Language lang) {
  const auto it = entries_.find({lang, token});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string format_dictionary(const DictionaryTranslator& dict) {
  std::string out = "source_language\tsource\ttarget\n";
  for (const auto& [key, target] : dict.entries()) {
    out += std::string(to_string(key.first)) + "\t" + key.second + "\t" + target + "\n";
  }
  return out;
}

OnlineTranslator::OnlineTranslator(std::string endpoint, std::string api_key, http::RetryPolicy retry,
                                   std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), retry_(retry), timeout_(timeout) {
  http::parse_url(endpoint_);
}

std::optional<std::string> OnlineTranslator::translate(const std::string& token, Language lang) {
  ++calls_;
  http::Request req;
  req.url = endpoint_;
  req.timeout = timeout_;
  req.body = json{{"q", token}, {"source", std::string(to_string(lang))}, {"target", "en"}}.dump();
  if (!api_key_.empty()) req.headers.emplace_back("Authorization", "Bearer " + api_key_);
  const std::string body = http::post_json(req, retry_);
  try {
    const json j = json::parse(body);
    if (!j.contains("translation") || j["translation"].is_null()) return std::nullopt;
    return j["translation"].get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed translation response: ") + e.what());
  }
}

TranslationCache::TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    return;
  }
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 4) throw ParseError(path_.string() + ": expected 4 columns", line_no);
    const auto lang = parse_language(cols[0]);
    if (!lang) throw ParseError(path_.string() + ": unknown language '" + cols[0] + "'", line_no);
    entries_[{*lang, cols[1]}] = CacheEntry{cols[2], parse_origin(cols[3], line_no)};
  }
}

std::optional<CacheEntry> TranslationCache::lookup(Language lang, const std::string& source) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find({lang, source});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::store(Language lang, const std::string& source, const CacheEntry& entry) {
  std::unique_lock lock(mutex_);
  entries_[{lang, source}] = entry;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << to_string(lang) << '\t' << source << '\t' << entry.target << '\t' << to_string(entry.origin) << '\n';
  if (!out) throw ValidationError("cannot append to translation cache " + path_.string());
}

std::size_t TranslationCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::string translate_adjective(TranslationCache& cache, Translator& client, const std::string& token,
                                Language lang, MissPolicy policy) {
  if (lang == Language::en) return token;
  if (auto hit = cache.lookup(lang, token)) return hit->target;

  std::optional<std::string> result;
  try {
    result = client.translate(token, lang);
  } catch (const TransportError& e) {
    throw TranslationError("cannot translate '" + token + "' (" + std::string(to_string(lang)) + "): " + e.what(),
                           {token});
  }
  if (result) {
    std::string target = text::normalize_token(*result);
    if (!target.empty()) {
      cache.store(lang, token, CacheEntry{target, client.origin()});
      return target;
    }
  }
  if (policy == MissPolicy::pass_through) {
    cache.store(lang, token, CacheEntry{token, TranslationOrigin::identity});
    return token;
  }
  throw TranslationError("no translation for '" + token + "' (" + std::string(to_string(lang)) + ")", {token});
}

AdjectiveProfile translate_profile(const AdjectiveProfile& profile, TranslationCache& cache, Translator& client,
                                   MissPolicy policy) {
  const Language lang = profile.noun().language;
  std::map<std::string, int> merged;
  std::vector<std::string> failures;
  for (const auto& [adj, count] : profile.counts()) {
    try {
      const std::string pivot = translate_adjective(cache, client, adj, lang, policy);
      int& slot = merged[pivot];
      slot = std::min(slot + count, profile.n_samples());
    } catch (const TranslationError&) {
      failures.push_back(adj);
    }
  }
  if (!failures.empty()) {
    std::string list;
    for (const auto& f : failures) list += (list.empty() ? "" : ", ") + f;
    throw TranslationError("untranslatable adjectives for '" + profile.noun().surface + "' (" +
                               std::string(to_string(lang)) + "): " + list,
                           std::move(failures));
  }
  return AdjectiveProfile(profile.noun(), profile.n_samples(), std::move(merged), profile.truncated_to());
}

}  // namespace genderprobe
