#include "genderprobe/config.hpp"

#include "genderprobe/error.hpp"
#include "genderprobe/text.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace genderprobe {

namespace {

std::string unquote(std::string_view v, std::size_t line_no) {
  if (v.size() < 2 || v.back() != '"') throw ParseError("unterminated string", line_no);
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\' && i + 2 < v.size()) {
      const char c = v[++i];
      out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
    } else {
      out += v[i];
    }
  }
  return out;
}

// Drops a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string parse_value(std::string_view raw, std::size_t line_no) {
  const std::string_view v = text::trim(raw);
  if (v.empty()) throw ParseError("missing value", line_no);
  if (v.front() == '"') return unquote(v, line_no);
  if (v.front() == '[') {
    if (v.back() != ']') throw ParseError("unterminated list", line_no);
    std::string out;
    for (const auto& item : text::split(v.substr(1, v.size() - 2), ',')) {
      const std::string_view t = text::trim(item);
      if (t.empty()) continue;
      if (!out.empty()) out += ',';
      out += t.front() == '"' ? unquote(t, line_no) : std::string(t);
    }
    return out;
  }
  return std::string(v);
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ',';
      out += json_scalar(item);
    }
    return out;
  }
  return v.dump();
}

}  // namespace

Config Config::parse(std::string_view content, const std::filesystem::path& base_dir) {
  Config cfg;
  cfg.base_dir_ = base_dir;
  const std::string_view lead = text::trim(content);
  if (!lead.empty() && lead.front() == '{') {
    try {
      const auto j = nlohmann::json::parse(content);
      const auto& obj = j.contains("config") ? j.at("config") : j;
      for (const auto& [k, v] : obj.items()) cfg.values_[k] = json_scalar(v);
      return cfg;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad JSON config: ") + e.what());
    }
  }

  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = text::trim(strip_comment(content.substr(pos, end - pos)));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("bad section header", line_no);
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    std::string key(text::trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!section.empty()) key = section + "." + key;
    cfg.values_[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str(), std::filesystem::absolute(path).parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void Config::set_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("override '" + std::string(assignment) + "' is not key=value");
  }
  values_[std::string(text::trim(assignment.substr(0, eq)))] = parse_value(assignment.substr(eq + 1), 0);
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) {
    throw ValidationError("config key '" + key + "' must be an integer, got '" + *v + "'");
  }
  return out;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  double out = 0;
  const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) {
    throw ValidationError("config key '" + key + "' must be a number, got '" + *v + "'");
  }
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ValidationError("config key '" + key + "' must be true or false, got '" + *v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key, const std::vector<std::string>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  for (const auto& item : text::split(*v, ',')) {
    const std::string_view t = text::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::filesystem::path Config::get_path(const std::string& key, const std::filesystem::path& fallback) const {
  const auto v = get(key);
  std::filesystem::path p = (!v || v->empty()) ? fallback : std::filesystem::path(*v);
  if (p.empty()) return p;
  if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
  return p.lexically_normal();
}

}  // namespace genderprobe
