#include "genderprobe/embed.hpp"

#include "genderprobe/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace genderprobe {

const std::vector<double>* EmbeddingTable::find(const std::string& token) const {
  const auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<std::string> EmbeddingTable::tokens() const {
  std::vector<std::string> out;
  out.reserve(vectors_.size());
  for (const auto& [tok, vec] : vectors_) out.push_back(tok);
  std::sort(out.begin(), out.end());
  return out;
}

void EmbeddingTable::insert(const std::string& token, std::vector<double> vec) {
  if (dimension_ == 0) dimension_ = vec.size();
  if (vec.size() != dimension_) {
    throw ValidationError("vector for '" + token + "' has dimension " + std::to_string(vec.size()) + ", expected " +
                          std::to_string(dimension_));
  }
  vectors_[token] = std::move(vec);
}

EmbeddingTable parse_embeddings(std::string_view content, const std::filesystem::path& origin) {
  EmbeddingTable table;
  table.source_path_ = origin;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<double> vec;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;

    const std::size_t sp = line.find(' ');
    if (sp == std::string_view::npos || sp == 0) throw ParseError("expected a token followed by numbers", line_no);
    const std::string token(line.substr(0, sp));
    vec.clear();
    const char* p = line.data() + sp;
    const char* last = line.data() + line.size();
    while (p < last) {
      while (p < last && (*p == ' ' || *p == '\t')) ++p;
      if (p == last) break;
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, last, v);
      if (ec != std::errc() || (next != last && *next != ' ' && *next != '\t')) {
        throw ParseError("non-numeric field for '" + token + "'", line_no);
      }
      if (!std::isfinite(v)) throw ParseError("non-finite value for '" + token + "'", line_no);
      vec.push_back(v);
      p = next;
    }
    if (vec.empty()) throw ParseError("no vector values for '" + token + "'", line_no);
    if (table.dimension_ == 0) table.dimension_ = vec.size();
    if (vec.size() != table.dimension_) {
      throw ParseError("dimension " + std::to_string(vec.size()) + " differs from " +
                           std::to_string(table.dimension_) + " on the first line",
                       line_no);
    }
    table.vectors_[token] = vec;
  }
  if (table.vectors_.empty()) throw ValidationError("embedding table is empty");
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open embeddings " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_embeddings(buf.str(), path);
}

double scale_frequency(double f) {
  if (!(f > 0.0) || f > 1.0) throw DomainError("frequency must be in (0, 1], got " + std::to_string(f));
  return -30.0 / std::log(std::min(f, kFrequencyClamp));
}

std::string_view to_string(Weighting w) { return w == Weighting::scaled ? "scaled" : "raw"; }

Weighting parse_weighting(std::string_view s) {
  if (s == "scaled") return Weighting::scaled;
  if (s == "raw") return Weighting::raw;
  throw ValidationError("weighting must be 'scaled' or 'raw', got '" + std::string(s) + "'");
}

FeatureVector featurize(const AdjectiveProfile& profile, const EmbeddingTable& table, const FeaturizeOptions& options) {
  FeatureVector fv;
  fv.noun = profile.noun();
  fv.values.assign(table.dimension(), 0.0);
  // counts() is ordered, so the summation order (and result) does not depend
  // on how the profile was built.
  for (const auto& [adj, count] : profile.counts()) {
    const double f = static_cast<double>(count) / profile.n_samples();
    const std::vector<double>* e = table.find(adj);
    if (!e) {
      fv.oov_tokens.push_back(adj);
      continue;
    }
    const double w = options.weighting == Weighting::scaled ? scale_frequency(f) : f;
    for (std::size_t d = 0; d < fv.values.size(); ++d) fv.values[d] += w * (*e)[d];
    fv.covered_mass += f;
  }
  fv.all_oov = profile.size() > 0 && fv.oov_tokens.size() == profile.size();
  if (profile.size() > 0) {
    const double ratio = static_cast<double>(fv.oov_tokens.size()) / static_cast<double>(profile.size());
    fv.oov_warning = ratio > options.oov_warning_ratio;
  }
  return fv;
}

}  // namespace genderprobe
