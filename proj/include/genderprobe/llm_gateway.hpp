#pragma once

#include "genderprobe/http_client.hpp"
#include "genderprobe/lexicon.hpp"
#include "genderprobe/text.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace genderprobe {

struct Exemplar {
  std::string noun;
  std::string answer;
};

// Few-shot elicitation prompt for one language. Each shot renders as
//   <Q>: <question with "noun"> <A>: <answer>\n
// and the final question ends with the bare answer marker.
struct PromptTemplate {
  Language language = Language::en;
  std::string question_marker;  // e.g. ***Question***:
  std::string answer_marker;    // e.g. ***Answer***:
  std::string question;         // contains exactly one {noun}
  std::vector<Exemplar> exemplars;
};

inline constexpr std::string_view kNounPlaceholder = "{noun}";

const PromptTemplate& template_for(Language lang);
std::string render_prompt(const PromptTemplate& tmpl, const Noun& noun);
std::string prompt_hash(std::string_view prompt);

enum class BackendKind { http, replay, synthetic };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view s);

struct BackendSpec {
  BackendKind kind = BackendKind::replay;
  std::string model_name = "mistral-7b";
  // http
  std::string endpoint;
  std::string api = "completions";  // or "chat"
  std::string api_key;              // usually from GENDERPROBE_API_KEY
  double temperature = 0.7;
  int max_tokens = 64;
  std::chrono::milliseconds request_timeout{30000};
  http::RetryPolicy retry;
  // replay
  std::filesystem::path transcript_path;
  // synthetic
  std::uint64_t seed = 0;
  std::optional<double> synthetic_beta;  // overrides synth.beta for this backend

  int max_parallel = 4;

  std::string summary() const;
};

// A source of raw completions. Implementations must be safe to call from
// several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const std::string& prompt, int sample_index) = 0;
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendSpec spec);
  std::string complete(const std::string& prompt, int sample_index) override;

  // Exposed for tests.
  std::string request_body(const std::string& prompt) const;
  std::string extract_text(const std::string& response_body) const;

 private:
  BackendSpec spec_;
};

struct TranscriptRecord {
  std::string prompt_hash;
  std::string noun;
  int sample_index = 0;
  std::string raw_text;
  std::string model;
  std::string timestamp;

  bool operator==(const TranscriptRecord&) const = default;
};

std::string to_json_line(const TranscriptRecord& record);
TranscriptRecord transcript_from_json_line(std::string_view line, std::size_t line_no = 0);
std::vector<TranscriptRecord> read_transcript(const std::filesystem::path& path);

// Serves completions recorded in transcript files. A miss is an error.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const BackendSpec& spec);
  ReplayBackend(std::vector<TranscriptRecord> records, std::string model_name);
  std::string complete(const std::string& prompt, int sample_index) override;
  std::size_t size() const { return records_.size(); }

 private:
  void add(const std::vector<TranscriptRecord>& records);

  std::string model_name_;
  std::map<std::pair<std::string, int>, std::string> records_;
};

// Append-only JSON-lines store keyed by (model, prompt hash, sample index).
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path path);

  std::optional<TranscriptRecord> find(const std::string& model, const std::string& hash, int sample_index) const;
  // Appends and flushes one record. Keys already present are ignored.
  void append(const TranscriptRecord& record);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  using Key = std::tuple<std::string, std::string, int>;
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<Key, TranscriptRecord> records_;
};

std::filesystem::path transcript_file(const std::filesystem::path& dir, Language lang, const std::string& model);

struct Completion {
  Noun noun;
  int sample_index = 0;
  std::string raw_text;
  std::string backend;
  std::string timestamp;
};

std::string complete(Backend& backend, const std::string& prompt, int sample_index);

struct ElicitOptions {
  int max_parallel = 4;
  std::function<std::string()> clock = text::iso8601_now;
};

// Returns n_samples completions in sample order. Samples already in the store
// are reused; new ones are persisted as they arrive, so an interrupted run
// resumes where it stopped.
std::vector<Completion> elicit(Backend& backend, const BackendSpec& spec, const Noun& noun,
                               const PromptTemplate& tmpl, int n_samples, TranscriptStore* store,
                               const ElicitOptions& options = {});

// Count of samples elicit() would request from the backend.
std::size_t planned_requests(const TranscriptStore* store, const std::string& model, const std::string& prompt,
                             int n_samples);

}  // namespace genderprobe
