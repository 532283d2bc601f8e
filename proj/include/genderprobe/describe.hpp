#pragma once

#include "genderprobe/lexicon.hpp"
#include "genderprobe/llm_gateway.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace genderprobe {

inline constexpr std::size_t kMaxAdjectiveLength = 40;

struct AdjectiveSet {
  Noun noun;
  int sample_index = 0;
  std::vector<std::string> adjectives;  // normalized, unique, in first-seen order
  bool empty_warning = false;
};

// Per-noun adjective frequencies. Frequencies are stored as integer sample
// counts so f * n_samples is exact; frequency() divides on demand.
class AdjectiveProfile {
 public:
  AdjectiveProfile() = default;
  AdjectiveProfile(Noun noun, int n_samples, std::map<std::string, int> counts, int truncated_to);

  const Noun& noun() const { return noun_; }
  int n_samples() const { return n_samples_; }
  int truncated_to() const { return truncated_to_; }
  const std::map<std::string, int>& counts() const { return counts_; }
  std::size_t size() const { return counts_.size(); }
  bool contains(const std::string& adjective) const { return counts_.count(adjective) != 0; }
  double frequency(const std::string& adjective) const;
  std::map<std::string, double> frequencies() const;

  bool operator==(const AdjectiveProfile&) const = default;

 private:
  Noun noun_;
  int n_samples_ = 0;
  std::map<std::string, int> counts_;
  int truncated_to_ = 0;
};

// Takes the first answer line (up to a newline or the next *** marker), splits
// on commas and normalizes each token.
AdjectiveSet parse_completion(const Completion& completion);
std::vector<std::string> parse_adjectives(std::string_view raw_text);

// f(a) = |{sets containing a}| / n_samples, keeping the top p by frequency with
// ties broken by ascending token.
AdjectiveProfile aggregate(const std::vector<AdjectiveSet>& sets, int n_samples, int top_p);

std::string to_json_line(const AdjectiveProfile& profile);
AdjectiveProfile profile_from_json_line(std::string_view line, std::size_t line_no = 0);
void write_profiles(const std::filesystem::path& path, const std::vector<AdjectiveProfile>& profiles);
std::vector<AdjectiveProfile> read_profiles(const std::filesystem::path& path);

}  // namespace genderprobe
