#include "dualmink/fspec.hpp"

#include "dualmink/document.hpp"
#include "dualmink/solver.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace dualmink {

namespace {

class Cursor {
 public:
  explicit Cursor(const std::string& text) : s_(text) {}

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ == s_.size();
  }
  bool accept(const std::string& token) {
    skip_space();
    if (s_.compare(pos_, token.size(), token) == 0) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& token) {
    if (!accept(token)) fail("expected '" + token + "'");
  }
  bool peek_number() {
    skip_space();
    return pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.');
  }
  double number() {
    skip_space();
    double v = 0.0;
    const char* begin = s_.data() + pos_;
    const auto [end, ec] = std::from_chars(begin, s_.data() + s_.size(), v);
    if (ec != std::errc() || end == begin) fail("expected a number");
    pos_ += std::size_t(end - begin);
    return v;
  }
  int integer() {
    const double v = number();
    if (v != std::floor(v) || v < 0 || v > 1000) fail("expected a non-negative integer");
    return int(v);
  }
  std::string word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("f spec '" + s_ + "' at column " + std::to_string(pos_ + 1) + ": " + what);
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

// After "cos(" / "sin(" on the circle: k followed by θ, theta or t.
HarmonicMode circle_mode(Cursor& c, bool sine) {
  const int k = c.integer();
  if (!c.accept("θ") && !c.accept("theta") && !c.accept("t")) c.fail("expected θ after the frequency");
  c.expect(")");
  return {k, 0, sine};
}

HarmonicMode sphere_mode(Cursor& c, bool sine) {
  const int k = c.integer();
  c.expect(",");
  const int m = c.integer();
  c.expect(")");
  return {k, m, sine};
}

std::optional<HarmonicMode> parse_mode(Cursor& c, int dim) {
  std::optional<HarmonicMode> mode;
  if (dim == 1 && c.accept("cos(")) mode = circle_mode(c, false);
  else if (dim == 1 && c.accept("sin(")) mode = circle_mode(c, true);
  else if (dim == 2 && c.accept("Yc(")) mode = sphere_mode(c, false);
  else if (dim == 2 && c.accept("Ys(")) mode = sphere_mode(c, true);
  if (!mode) return mode;
  if (!mode->valid_for(dim)) c.fail("mode " + mode->str(dim) + " is not valid here");
  if (!mode->even()) c.fail("odd mode " + mode->str(dim) + " rejected: f must be even");
  return mode;
}

AnalyticBody parse_body(Cursor& c, int dim) {
  const std::string name = c.word();
  c.expect("(");
  std::vector<double> args;
  if (name == "perturbed") {
    const double amp = c.number();
    c.expect(",");
    if (auto mode = parse_mode(c, dim)) {
      c.expect(")");
      return AnalyticBody::perturbed_ball(amp, *mode);
    }
    const int k = c.integer();
    c.expect(",");
    const int m = c.integer();
    c.expect(",");
    const std::string kind = c.word();
    if (kind != "cos" && kind != "sin") c.fail("expected cos or sin");
    c.expect(")");
    const HarmonicMode mode{k, m, kind == "sin"};
    if (!mode.valid_for(dim)) c.fail("mode is not valid here");
    if (!mode.even()) c.fail("odd mode rejected: f must be even");
    return AnalyticBody::perturbed_ball(amp, mode);
  }
  do {
    args.push_back(c.number());
  } while (c.accept(","));
  c.expect(")");
  if (name == "ball") {
    if (args.size() != 1) c.fail("ball takes one radius");
    return AnalyticBody::ball(args[0]);
  }
  if (name == "ellipse" || name == "ellipsoid") {
    if (int(args.size()) != dim + 1) c.fail(name + " needs " + std::to_string(dim + 1) + " semi-axes");
    return AnalyticBody::ellipsoid(args);
  }
  c.fail("unknown body '" + name + "'");
}

std::string mode_text(const HarmonicMode& m, int dim) {
  if (dim == 1) return std::string(m.sine ? "sin(" : "cos(") + std::to_string(m.degree) + "θ)";
  return std::string(m.sine ? "Ys(" : "Yc(") + std::to_string(m.degree) + "," + std::to_string(m.order) + ")";
}

}  // namespace

std::string FSpec::str() const {
  if (manufactured) {
    const AnalyticBody& b = *manufactured;
    if (b.kind == AnalyticBody::Kind::perturbed_ball) {
      return "manufacture:perturbed(" + format_real(b.amplitude) + "," + mode_text(b.mode, dim) + ")";
    }
    if (b.kind == AnalyticBody::Kind::ball) return "manufacture:ball(" + format_real(b.radius) + ")";
    std::string out = std::string("manufacture:") + (dim == 1 ? "ellipse(" : "ellipsoid(");
    for (std::size_t i = 0; i < b.axes.size(); ++i) out += (i ? "," : "") + format_real(b.axes[i]);
    return out + ")";
  }
  std::string out = format_real(constant);
  for (const ModeTerm& t : terms) {
    out += std::signbit(t.amplitude) ? " - " : " + ";
    out += format_real(std::abs(t.amplitude)) + "*" + mode_text(t.mode, dim);
  }
  return out;
}

double FSpec::perturbation() const {
  if (manufactured) return std::numeric_limits<double>::quiet_NaN();
  double s = std::abs(constant - 1.0);
  for (const ModeTerm& t : terms) s += std::abs(t.amplitude);
  return s;
}

FSpec parse_fspec(const std::string& text, int dim) {
  if (dim != 1 && dim != 2) throw ParseError("f spec: dimension must be 1 or 2");
  Cursor c(text);
  FSpec spec;
  spec.dim = dim;
  if (c.accept("manufacture:")) {
    spec.manufactured = parse_body(c, dim);
    if (!c.done()) c.fail("trailing characters");
    return spec;
  }
  spec.constant = 0.0;
  bool first = true;
  bool have_constant = false;
  while (!c.done()) {
    double sign = 1.0;
    if (c.accept("+")) {
    } else if (c.accept("-")) {
      sign = -1.0;
    } else if (!first) {
      c.fail("expected + or -");
    }
    first = false;
    double amp = 1.0;
    bool has_number = false;
    if (c.peek_number()) {
      amp = c.number();
      has_number = true;
    }
    if (has_number && !c.accept("*")) {
      if (have_constant) c.fail("more than one constant term");
      spec.constant = sign * amp;
      have_constant = true;
      continue;
    }
    const auto mode = parse_mode(c, dim);
    if (!mode) c.fail(dim == 1 ? "expected cos(kθ) or sin(kθ)" : "expected Yc(k,m) or Ys(k,m)");
    if (mode->degree == 0 && !mode->sine) {
      if (have_constant) c.fail("more than one constant term");
      spec.constant = sign * amp;
      have_constant = true;
      continue;
    }
    spec.terms.push_back({sign * amp, *mode});
  }
  if (!have_constant && spec.terms.empty()) c.fail("empty expression");
  return spec;
}

Field evaluate_fspec(const FSpec& spec, const GridPtr& grid, double q) {
  if (grid->dim() != spec.dim) throw std::invalid_argument("f spec dimension does not match the grid");
  if (spec.manufactured) return manufacture_density(*spec.manufactured, grid, q);
  Field f = Field::Constant(grid->size(), spec.constant);
  for (const ModeTerm& t : spec.terms) f += t.amplitude * evaluate_mode(*grid, t.mode);
  return project_even(*grid, f);
}

}  // namespace dualmink
