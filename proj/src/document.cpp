#include "dualmink/document.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dualmink {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view tok, int line) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("line " + std::to_string(line) + ": bad real '" + std::string(tok) + "'");
  }
  return x;
}

std::int64_t parse_int(std::string_view tok, int line) {
  std::int64_t x = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("line " + std::to_string(line) + ": bad integer '" + std::string(tok) + "'");
  }
  return x;
}

bool looks_real(std::string_view tok) {
  return tok.find_first_of(".eEn") != std::string_view::npos || tok.find("inf") != std::string_view::npos;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::string unquote(std::string_view s, int line) {
  if (s.size() < 2 || s.back() != '"') {
    throw ParseError("line " + std::to_string(line) + ": unterminated string");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) {
      ++i;
      out += s[i] == 'n' ? '\n' : s[i];
    } else {
      out += s[i];
    }
  }
  return out;
}

Value parse_value(std::string_view v, int line) {
  if (v.empty()) throw ParseError("line " + std::to_string(line) + ": missing value");
  if (v.front() == '"') return unquote(v, line);
  if (v == "true") return true;
  if (v == "false") return false;
  const bool is_real_array = v.rfind("real[", 0) == 0;
  const bool is_int_array = v.rfind("int[", 0) == 0;
  if (is_real_array || is_int_array) {
    const auto close = v.find(']');
    if (close == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line) + ": bad array header");
    }
    const auto open = v.find('[');
    const std::int64_t count = parse_int(v.substr(open + 1, close - open - 1), line);
    const auto toks = split_ws(v.substr(close + 1));
    if (std::int64_t(toks.size()) != count) {
      throw ParseError("line " + std::to_string(line) + ": array length " +
                       std::to_string(toks.size()) + " does not match declared " +
                       std::to_string(count));
    }
    if (is_real_array) {
      std::vector<double> xs;
      xs.reserve(toks.size());
      for (auto t : toks) xs.push_back(parse_double(t, line));
      return xs;
    }
    std::vector<std::int64_t> xs;
    xs.reserve(toks.size());
    for (auto t : toks) xs.push_back(parse_int(t, line));
    return xs;
  }
  if (looks_real(v)) return parse_double(v, line);
  return parse_int(v, line);
}

std::string write_value(const Value& v) {
  struct Visitor {
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(double x) const {
      std::string s = format_real(x);
      if (s.find_first_of(".eEn") == std::string::npos && s.find("inf") == std::string::npos) s += ".0";
      return s;
    }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
    std::string operator()(const std::string& x) const { return quote(x); }
    std::string operator()(const std::vector<double>& xs) const {
      std::string s = "real[" + std::to_string(xs.size()) + "]";
      for (double x : xs) s += " " + format_real(x);
      return s;
    }
    std::string operator()(const std::vector<std::int64_t>& xs) const {
      std::string s = "int[" + std::to_string(xs.size()) + "]";
      for (auto x : xs) s += " " + std::to_string(x);
      return s;
    }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Section& Section::set(const std::string& key, Value value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return *this;
    }
  }
  entries_.emplace_back(key, std::move(value));
  return *this;
}

Section& Section::set(const std::string& key, const Eigen::VectorXd& values) {
  return set(key, Value(std::vector<double>(values.data(), values.data() + values.size())));
}

bool Section::has(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const Value& Section::at(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw ParseError("[" + name_ + "]: missing key '" + key + "'");
}

namespace {
template <typename T>
const T& typed(const Section& s, const std::string& key, const char* what) {
  const Value& v = s.at(key);
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw ParseError("[" + s.name() + "] " + key + ": expected " + what);
}
}  // namespace

std::int64_t Section::get_int(const std::string& key) const {
  return typed<std::int64_t>(*this, key, "integer");
}

double Section::get_real(const std::string& key) const {
  const Value& v = at(key);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return double(*i);
  return typed<double>(*this, key, "real");
}

bool Section::get_bool(const std::string& key) const { return typed<bool>(*this, key, "bool"); }

const std::string& Section::get_string(const std::string& key) const {
  return typed<std::string>(*this, key, "string");
}

std::vector<double> Section::get_reals(const std::string& key) const {
  return typed<std::vector<double>>(*this, key, "real array");
}

Eigen::VectorXd Section::get_vector(const std::string& key) const {
  const auto& xs = typed<std::vector<double>>(*this, key, "real array");
  return Eigen::Map<const Eigen::VectorXd>(xs.data(), Eigen::Index(xs.size()));
}

std::vector<std::int64_t> Section::get_ints(const std::string& key) const {
  return typed<std::vector<std::int64_t>>(*this, key, "integer array");
}

Section& Document::section(const std::string& name) {
  for (auto& s : sections_) {
    if (s.name() == name) return s;
  }
  sections_.emplace_back(name);
  return sections_.back();
}

const Section& Document::at(const std::string& name) const {
  for (const auto& s : sections_) {
    if (s.name() == name) return s;
  }
  throw ParseError("missing section [" + name + "]");
}

bool Document::has(const std::string& name) const {
  for (const auto& s : sections_) {
    if (s.name() == name) return true;
  }
  return false;
}

Document Document::without(const std::string& name) const {
  Document d;
  for (const auto& s : sections_) {
    if (s.name() != name) d.sections_.push_back(s);
  }
  return d;
}

std::string Document::str() const {
  std::string out;
  for (const auto& s : sections_) {
    out += "[" + s.name() + "]\n";
    for (const auto& [k, v] : s.entries()) out += k + " = " + write_value(v) + "\n";
    out += "\n";
  }
  return out;
}

Document Document::parse(std::string_view text) {
  Document doc;
  Section* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("line " + std::to_string(line_no) + ": bad section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (doc.has(name)) throw ParseError("line " + std::to_string(line_no) + ": duplicate section [" + name + "]");
      current = &doc.section(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (current == nullptr) {
      throw ParseError("line " + std::to_string(line_no) + ": entry outside of a section");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
    current->set(key, parse_value(trim(line.substr(eq + 1)), line_no));
  }
  return doc;
}

void Document::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << str();
}

Document Document::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace dualmink
