#include "genderprobe/llm_gateway.hpp"

#include "genderprobe/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace genderprobe {

using nlohmann::json;

namespace {

PromptTemplate make_template(Language lang, std::string q, std::string a, std::string question,
                             std::string noun1, std::string answer1, std::string noun2, std::string answer2) {
  return PromptTemplate{lang, std::move(q), std::move(a), std::move(question),
                        {{std::move(noun1), std::move(answer1)}, {std::move(noun2), std::move(answer2)}}};
}

std::vector<PromptTemplate> build_templates() {
  std::vector<PromptTemplate> t;
  t.push_back(make_template(
      Language::en, "***Question***:", "***Answer***:", "Describe the word \"{noun}\" using comma-separated adjectives.",
      "bottle", "glass, sleek, thin, brittle, elegant, transparent, clear, tall, fragile, shiny",
      "stone", "round, old, strong, cold, solid, ancient, sturdy, dense, natural, durable"));
  t.push_back(make_template(
      Language::es, "***Pregunta***:", "***Respuesta***:",
      "Describe la palabra \"{noun}\" usando adjetivos separados por comas.",
      "botella", "vidrio, liso, delgado, quebradizo, elegante, transparente, claro, alto, frágil, brillante",
      "piedra", "redondo, viejo, fuerte, frío, sólido, antiguo, robusto, denso, natural, duradero"));
  t.push_back(make_template(
      Language::de, "***Frage***:", "***Antwort***:",
      "Beschreibe das Wort \"{noun}\" mit durch Kommas getrennten Adjektiven.",
      "Flasche", "gläsern, schlank, dünn, spröde, elegant, durchsichtig, klar, hoch, zerbrechlich, glänzend",
      "Stein", "rund, alt, stark, kalt, fest, uralt, robust, dicht, natürlich, langlebig"));
  t.push_back(make_template(
      Language::fr, "***Question***:", "***Réponse***:",
      "Décris le mot \"{noun}\" en utilisant des adjectifs séparés par des virgules.",
      "bouteille", "vitreuse, lisse, mince, cassante, élégante, transparente, claire, haute, fragile, brillante",
      "pierre", "ronde, vieille, forte, froide, solide, ancienne, robuste, dense, naturelle, durable"));
  t.push_back(make_template(
      Language::it, "***Domanda***:", "***Risposta***:",
      "Descrivi la parola \"{noun}\" usando aggettivi separati da virgole.",
      "bottiglia", "vitrea, liscia, sottile, fragile, elegante, trasparente, chiara, alta, delicata, lucida",
      "pietra", "rotonda, vecchia, forte, fredda, solida, antica, robusta, densa, naturale, durevole"));
  t.push_back(make_template(
      Language::pt, "***Pergunta***:", "***Resposta***:",
      "Descreva a palavra \"{noun}\" usando adjetivos separados por vírgulas.",
      "garrafa", "vítrea, lisa, fina, quebradiça, elegante, transparente, clara, alta, frágil, brilhante",
      "pedra", "redonda, velha, forte, fria, sólida, antiga, robusta, densa, natural, durável"));
  t.push_back(make_template(
      Language::bg, "***Въпрос***:", "***Отговор***:",
      "Опиши думата \"{noun}\" с прилагателни, разделени със запетаи.",
      "бутилка", "стъклена, гладка, тънка, чуплива, елегантна, прозрачна, ясна, висока, крехка, лъскава",
      "камък", "кръгъл, стар, силен, студен, твърд, древен, здрав, плътен, естествен, траен"));
  t.push_back(make_template(
      Language::cs, "***Otázka***:", "***Odpověď***:",
      "Popiš slovo \"{noun}\" pomocí přídavných jmen oddělených čárkami.",
      "láhev", "skleněná, hladká, tenká, křehká, elegantní, průhledná, čirá, vysoká, lámavá, lesklá",
      "kámen", "kulatý, starý, silný, studený, pevný, prastarý, odolný, hutný, přírodní, trvanlivý"));
  t.push_back(make_template(
      Language::el, "***Ερώτηση***:", "***Απάντηση***:",
      "Περίγραψε τη λέξη \"{noun}\" χρησιμοποιώντας επίθετα χωρισμένα με κόμματα.",
      "μπουκάλι", "γυάλινο, λείο, λεπτό, εύθραυστο, κομψό, διάφανο, καθαρό, ψηλό, ευαίσθητο, γυαλιστερό",
      "πέτρα", "στρογγυλή, παλιά, δυνατή, κρύα, στερεή, αρχαία, ανθεκτική, πυκνή, φυσική, διαρκής"));
  t.push_back(make_template(
      Language::hi, "***प्रश्न***:", "***उत्तर***:",
      "शब्द \"{noun}\" का वर्णन अल्पविराम से अलग किए गए विशेषणों का उपयोग करके करें।",
      "बोतल", "काँच की, चिकनी, पतली, भंगुर, सुंदर, पारदर्शी, साफ़, लंबी, नाज़ुक, चमकदार",
      "पत्थर", "गोल, पुराना, मज़बूत, ठंडा, ठोस, प्राचीन, टिकाऊ, घना, प्राकृतिक, स्थायी"));
  t.push_back(make_template(
      Language::lv, "***Jautājums***:", "***Atbilde***:",
      "Apraksti vārdu \"{noun}\", izmantojot ar komatiem atdalītus īpašības vārdus.",
      "pudele", "stikla, slaida, plāna, trausla, eleganta, caurspīdīga, dzidra, augsta, smalka, spīdīga",
      "akmens", "apaļš, vecs, stiprs, auksts, ciets, sens, izturīgs, blīvs, dabīgs, noturīgs"));
  return t;
}

std::string fill(const std::string& question, std::string_view noun) {
  std::string out = question;
  const auto pos = out.find(kNounPlaceholder);
  out.replace(pos, kNounPlaceholder.size(), noun);
  return out;
}

}  // namespace

const PromptTemplate& template_for(Language lang) {
  static const std::vector<PromptTemplate> templates = build_templates();
  for (const auto& t : templates) {
    if (t.language == lang) return t;
  }
  throw ValidationError("no prompt template for " + std::string(to_string(lang)));
}

std::string render_prompt(const PromptTemplate& tmpl, const Noun& noun) {
  if (tmpl.language != noun.language) {
    throw ValidationError("prompt template is " + std::string(to_string(tmpl.language)) + " but noun '" +
                          noun.surface + "' is " + std::string(to_string(noun.language)));
  }
  const auto first = tmpl.question.find(kNounPlaceholder);
  if (first == std::string::npos || tmpl.question.find(kNounPlaceholder, first + 1) != std::string::npos) {
    throw ValidationError("prompt template must contain exactly one {noun} placeholder");
  }
  std::string out;
  for (const Exemplar& ex : tmpl.exemplars) {
    out += tmpl.question_marker + " " + fill(tmpl.question, ex.noun) + " " + tmpl.answer_marker + " " + ex.answer + "\n";
  }
  out += tmpl.question_marker + " " + fill(tmpl.question, noun.surface) + " " + tmpl.answer_marker;
  return out;
}

std::string prompt_hash(std::string_view prompt) { return text::hex64(text::fnv1a64(prompt)); }

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::http:
      return "http";
    case BackendKind::replay:
      return "replay";
    case BackendKind::synthetic:
      return "synthetic";
  }
  return "?";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "http") return BackendKind::http;
  if (s == "replay") return BackendKind::replay;
  if (s == "synthetic") return BackendKind::synthetic;
  throw ValidationError("unknown backend kind '" + std::string(s) + "'");
}

std::string BackendSpec::summary() const { return std::string(to_string(kind)) + ":" + model_name; }

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(BackendSpec spec) : spec_(std::move(spec)) {
  if (spec_.endpoint.empty()) throw ValidationError("http backend needs an endpoint");
  http::parse_url(spec_.endpoint);
  if (spec_.api != "completions" && spec_.api != "chat") {
    throw ValidationError("backend api must be 'completions' or 'chat'");
  }
}

std::string HttpBackend::request_body(const std::string& prompt) const {
  json body = {{"model", spec_.model_name},
               {"temperature", spec_.temperature},
               {"max_tokens", spec_.max_tokens},
               {"n", 1}};
  if (spec_.api == "chat") {
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
  } else {
    body["prompt"] = prompt;
  }
  return body.dump();
}

std::string HttpBackend::extract_text(const std::string& response_body) const {
  try {
    const json j = json::parse(response_body);
    const json& choice = j.at("choices").at(0);
    if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what());
  }
}

std::string HttpBackend::complete(const std::string& prompt, int) {
  http::Request req;
  req.url = spec_.endpoint;
  req.body = request_body(prompt);
  req.timeout = spec_.request_timeout;
  if (!spec_.api_key.empty()) req.headers.emplace_back("Authorization", "Bearer " + spec_.api_key);
  return extract_text(http::post_json(req, spec_.retry));
}

// ---------------------------------------------------------------------------

std::string to_json_line(const TranscriptRecord& r) {
  const json j = {{"prompt_hash", r.prompt_hash}, {"noun", r.noun},   {"sample_index", r.sample_index},
                  {"raw_text", r.raw_text},       {"model", r.model}, {"timestamp", r.timestamp}};
  return j.dump();
}

TranscriptRecord transcript_from_json_line(std::string_view line, std::size_t line_no) {
  try {
    const json j = json::parse(line);
    TranscriptRecord r;
    r.prompt_hash = j.at("prompt_hash").get<std::string>();
    r.noun = j.at("noun").get<std::string>();
    r.sample_index = j.at("sample_index").get<int>();
    r.raw_text = j.at("raw_text").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.timestamp = j.value("timestamp", std::string());
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad transcript record: ") + e.what(), line_no);
  }
}

std::vector<TranscriptRecord> read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open transcript " + path.string());
  std::vector<TranscriptRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    out.push_back(transcript_from_json_line(line, line_no));
  }
  return out;
}

ReplayBackend::ReplayBackend(const BackendSpec& spec) : model_name_(spec.model_name) {
  namespace fs = std::filesystem;
  if (spec.transcript_path.empty()) throw ValidationError("replay backend needs a transcript path");
  if (fs::is_directory(spec.transcript_path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(spec.transcript_path)) {
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add(read_transcript(f));
  } else {
    add(read_transcript(spec.transcript_path));
  }
}

ReplayBackend::ReplayBackend(std::vector<TranscriptRecord> records, std::string model_name)
    : model_name_(std::move(model_name)) {
  add(records);
}

void ReplayBackend::add(const std::vector<TranscriptRecord>& records) {
  for (const auto& r : records) {
    if (!model_name_.empty() && r.model != model_name_) continue;
    records_.emplace(std::make_pair(r.prompt_hash, r.sample_index), r.raw_text);
  }
}

std::string ReplayBackend::complete(const std::string& prompt, int sample_index) {
  const std::string hash = prompt_hash(prompt);
  const auto it = records_.find({hash, sample_index});
  if (it == records_.end()) {
    throw ReplayMissError("no recorded completion for prompt " + hash + " sample " + std::to_string(sample_index) +
                          " (model " + model_name_ + ")");
  }
  return it->second;
}

// ---------------------------------------------------------------------------

TranscriptStore::TranscriptStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    for (auto& r : read_transcript(path_)) {
      Key key{r.model, r.prompt_hash, r.sample_index};
      records_.emplace(std::move(key), std::move(r));
    }
  } else if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
}

std::optional<TranscriptRecord> TranscriptStore::find(const std::string& model, const std::string& hash,
                                                      int sample_index) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find(Key{model, hash, sample_index});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void TranscriptStore::append(const TranscriptRecord& record) {
  std::lock_guard lock(mutex_);
  Key key{record.model, record.prompt_hash, record.sample_index};
  if (records_.count(key)) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << to_json_line(record) << '\n';
  out.flush();
  if (!out) throw ValidationError("cannot append to transcript store " + path_.string());
  records_.emplace(std::move(key), record);
}

std::size_t TranscriptStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::filesystem::path transcript_file(const std::filesystem::path& dir, Language lang, const std::string& model) {
  std::string safe = model;
  for (char& c : safe) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return dir / (std::string(to_string(lang)) + "." + safe + ".jsonl");
}

// ---------------------------------------------------------------------------

std::string complete(Backend& backend, const std::string& prompt, int sample_index) {
  return backend.complete(prompt, sample_index);
}

std::size_t planned_requests(const TranscriptStore* store, const std::string& model, const std::string& prompt,
                             int n_samples) {
  if (!store) return static_cast<std::size_t>(std::max(n_samples, 0));
  const std::string hash = prompt_hash(prompt);
  std::size_t n = 0;
  for (int i = 0; i < n_samples; ++i) {
    if (!store->find(model, hash, i)) ++n;
  }
  return n;
}

std::vector<Completion> elicit(Backend& backend, const BackendSpec& spec, const Noun& noun,
                               const PromptTemplate& tmpl, int n_samples, TranscriptStore* store,
                               const ElicitOptions& options) {
  if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
  const std::string prompt = render_prompt(tmpl, noun);
  const std::string hash = prompt_hash(prompt);
  const std::string summary = spec.summary();

  std::vector<Completion> out(static_cast<std::size_t>(n_samples));
  std::vector<int> missing;
  for (int i = 0; i < n_samples; ++i) {
    auto& c = out[static_cast<std::size_t>(i)];
    c.noun = noun;
    c.sample_index = i;
    c.backend = summary;
    if (store) {
      if (auto r = store->find(spec.model_name, hash, i)) {
        c.raw_text = r->raw_text;
        c.timestamp = r->timestamp;
        continue;
      }
    }
    missing.push_back(i);
  }
  if (missing.empty()) return out;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= missing.size()) return;
      const int idx = missing[k];
      try {
        std::string raw = complete(backend, prompt, idx);
        auto& c = out[static_cast<std::size_t>(idx)];
        c.raw_text = std::move(raw);
        c.timestamp = options.clock();
        if (store) store->append({hash, noun.surface, idx, c.raw_text, spec.model_name, c.timestamp});
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(missing.size(), static_cast<std::size_t>(std::max(1, options.max_parallel)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace genderprobe
