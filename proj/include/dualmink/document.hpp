// Structured-text documents: named sections of typed key/value entries.
//
//   # comment
//   [section]
//   count = 3
//   scale = 1.5
//   even = true
//   label = "text"
//   values = real[3] 1 0.5 0.25
//   sizes = int[2] 32 64
//
// Reals are written with 17 significant digits, so parse(write(x)) is exact.
#ifndef DUALMINK_DOCUMENT_HPP
#define DUALMINK_DOCUMENT_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace dualmink {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Value = std::variant<std::int64_t, double, bool, std::string, std::vector<double>,
                           std::vector<std::int64_t>>;

class Section {
 public:
  explicit Section(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const std::vector<std::pair<std::string, Value>>& entries() const { return entries_; }

  /// Replaces an existing key in place, otherwise appends.
  Section& set(const std::string& key, Value value);
  Section& set(const std::string& key, const Eigen::VectorXd& values);
  Section& set(const std::string& key, int value) { return set(key, Value(std::int64_t(value))); }
  Section& set(const std::string& key, bool value) { return set(key, Value(value)); }
  Section& set(const std::string& key, double value) { return set(key, Value(value)); }
  Section& set(const std::string& key, const char* value) { return set(key, Value(std::string(value))); }

  bool has(const std::string& key) const;
  const Value& at(const std::string& key) const;

  std::int64_t get_int(const std::string& key) const;
  double get_real(const std::string& key) const;  // accepts integer entries
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::vector<double> get_reals(const std::string& key) const;
  Eigen::VectorXd get_vector(const std::string& key) const;
  std::vector<std::int64_t> get_ints(const std::string& key) const;

  bool operator==(const Section&) const = default;

 private:
  std::string name_;
  std::vector<std::pair<std::string, Value>> entries_;
};

class Document {
 public:
  /// Existing section with that name, or a new one appended at the end.
  Section& section(const std::string& name);
  const Section& at(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<Section>& sections() const { return sections_; }

  /// Copy without the named section (e.g. timings) for byte comparisons.
  Document without(const std::string& name) const;

  std::string str() const;
  static Document parse(std::string_view text);

  void save(const std::string& path) const;
  static Document load(const std::string& path);

  bool operator==(const Document&) const = default;

 private:
  std::vector<Section> sections_;
};

std::string format_real(double x);

}  // namespace dualmink

#endif  // DUALMINK_DOCUMENT_HPP
