#include "genderprobe/describe.hpp"

#include "genderprobe/error.hpp"
#include "genderprobe/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace genderprobe {

using nlohmann::json;

AdjectiveProfile::AdjectiveProfile(Noun noun, int n_samples, std::map<std::string, int> counts, int truncated_to)
    : noun_(std::move(noun)), n_samples_(n_samples), counts_(std::move(counts)), truncated_to_(truncated_to) {
  if (n_samples_ < 1) throw ValidationError("profile needs n_samples >= 1");
  for (const auto& [adj, c] : counts_) {
    if (c < 1 || c > n_samples_) {
      throw ValidationError("count " + std::to_string(c) + " for '" + adj + "' outside [1, " +
                            std::to_string(n_samples_) + "]");
    }
  }
}

double AdjectiveProfile::frequency(const std::string& adjective) const {
  const auto it = counts_.find(adjective);
  return it == counts_.end() ? 0.0 : static_cast<double>(it->second) / n_samples_;
}

std::map<std::string, double> AdjectiveProfile::frequencies() const {
  std::map<std::string, double> out;
  for (const auto& [adj, c] : counts_) out.emplace(adj, static_cast<double>(c) / n_samples_);
  return out;
}

std::vector<std::string> parse_adjectives(std::string_view raw) {
  // Leading blank lines are skipped so "\nglass, thin" still yields an answer.
  const std::size_t start = raw.find_first_not_of(" \t\r\n");
  if (start == std::string_view::npos) return {};
  raw.remove_prefix(start);
  std::size_t end = raw.find('\n');
  const std::size_t marker = raw.find("***");
  if (marker < end) end = marker;
  const std::string_view answer = raw.substr(0, end);

  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  for (const std::string& piece : text::split(answer, ',')) {
    std::string tok = text::normalize_token(piece);
    if (tok.empty() || text::utf8_length(tok) > kMaxAdjectiveLength) continue;
    if (seen.insert(tok).second) out.push_back(std::move(tok));
  }
  return out;
}

AdjectiveSet parse_completion(const Completion& completion) {
  AdjectiveSet set;
  set.noun = completion.noun;
  set.sample_index = completion.sample_index;
  set.adjectives = parse_adjectives(completion.raw_text);
  set.empty_warning = set.adjectives.empty();
  return set;
}

AdjectiveProfile aggregate(const std::vector<AdjectiveSet>& sets, int n_samples, int top_p) {
  if (top_p < 1) throw ValidationError("top_p must be at least 1");
  if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
  if (sets.size() != static_cast<std::size_t>(n_samples)) {
    throw ValidationError("expected " + std::to_string(n_samples) + " sample sets, got " + std::to_string(sets.size()));
  }
  const Noun& noun = sets.front().noun;
  std::map<std::string, int> counts;
  for (const AdjectiveSet& s : sets) {
    if (s.noun.surface != noun.surface || s.noun.language != noun.language) {
      throw ValidationError("sample sets span several nouns ('" + noun.surface + "', '" + s.noun.surface + "')");
    }
    // Sets are deduplicated by construction, but a hand-built set may not be.
    std::set<std::string> unique(s.adjectives.begin(), s.adjectives.end());
    for (const auto& a : unique) ++counts[a];
  }
  if (counts.size() > static_cast<std::size_t>(top_p)) {
    std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    ranked.resize(static_cast<std::size_t>(top_p));
    counts = std::map<std::string, int>(ranked.begin(), ranked.end());
  }
  return AdjectiveProfile(noun, n_samples, std::move(counts), top_p);
}

std::string to_json_line(const AdjectiveProfile& p) {
  json entries = json::object();
  for (const auto& [adj, c] : p.counts()) entries[adj] = static_cast<double>(c) / p.n_samples();
  const json j = {{"noun", p.noun().surface},
                  {"language", std::string(to_string(p.noun().language))},
                  {"gender", std::string(to_string(p.noun().gender))},
                  {"pivot_gloss", p.noun().pivot_gloss},
                  {"animate", p.noun().animate},
                  {"n_samples", p.n_samples()},
                  {"top_p", p.truncated_to()},
                  {"entries", entries}};
  return j.dump();
}

AdjectiveProfile profile_from_json_line(std::string_view line, std::size_t line_no) {
  try {
    const json j = json::parse(line);
    Noun noun;
    noun.surface = j.at("noun").get<std::string>();
    noun.language = language_from_code(j.at("language").get<std::string>());
    const auto g = j.at("gender").get<std::string>();
    if (g != "m" && g != "f") throw ParseError("bad gender '" + g + "'", line_no);
    noun.gender = g == "m" ? Gender::masculine : Gender::feminine;
    noun.pivot_gloss = j.value("pivot_gloss", std::string());
    noun.animate = j.value("animate", false);
    const int n = j.at("n_samples").get<int>();
    std::map<std::string, int> counts;
    for (const auto& [adj, f] : j.at("entries").items()) {
      counts.emplace(adj, static_cast<int>(std::lround(f.get<double>() * n)));
    }
    return AdjectiveProfile(std::move(noun), n, std::move(counts), j.value("top_p", 0));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad profile record: ") + e.what(), line_no);
  }
}

void write_profiles(const std::filesystem::path& path, const std::vector<AdjectiveProfile>& profiles) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& p : profiles) out << to_json_line(p) << '\n';
  if (!out) throw ValidationError("cannot write profiles to " + path.string());
}

std::vector<AdjectiveProfile> read_profiles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open profile store " + path.string());
  std::vector<AdjectiveProfile> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    out.push_back(profile_from_json_line(line, line_no));
  }
  return out;
}

}  // namespace genderprobe
