#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "confrepair/rng.hpp"

namespace confrepair {

/// Tolerance used when comparing real-valued parameters for equality.
inline constexpr double kRealEqualityTolerance = 1e-9;

enum class ParamKind { Integer, Real, Boolean, Enumeration };

inline const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::Integer: return "int";
    case ParamKind::Real: return "real";
    case ParamKind::Boolean: return "bool";
    case ParamKind::Enumeration: return "enum";
  }
  return "?";
}

/// A concrete parameter value. The active alternative matches the
/// ParameterSpec kind: Integer -> long long, Real -> double,
/// Boolean -> bool, Enumeration -> std::string.
using ParamValue = std::variant<long long, double, bool, std::string>;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Admissible range of one configurable parameter.
struct ParameterSpec {
  std::string name;
  ParamKind kind = ParamKind::Real;
  long long int_lo = 0;
  long long int_hi = 0;
  double real_lo = 0.0;
  double real_hi = 0.0;
  std::vector<std::string> choices;  // Enumeration only
  std::string description;

  static ParameterSpec integer(std::string n, long long lo, long long hi,
                               std::string desc = "") {
    ParameterSpec s;
    s.name = std::move(n);
    s.kind = ParamKind::Integer;
    s.int_lo = lo;
    s.int_hi = hi;
    s.description = std::move(desc);
    return s;
  }
  static ParameterSpec real(std::string n, double lo, double hi,
                            std::string desc = "") {
    ParameterSpec s;
    s.name = std::move(n);
    s.kind = ParamKind::Real;
    s.real_lo = lo;
    s.real_hi = hi;
    s.description = std::move(desc);
    return s;
  }
  static ParameterSpec boolean(std::string n, std::string desc = "") {
    ParameterSpec s;
    s.name = std::move(n);
    s.kind = ParamKind::Boolean;
    s.description = std::move(desc);
    return s;
  }
  static ParameterSpec enumeration(std::string n, std::vector<std::string> vals,
                                   std::string desc = "") {
    ParameterSpec s;
    s.name = std::move(n);
    s.kind = ParamKind::Enumeration;
    s.choices = std::move(vals);
    s.description = std::move(desc);
    return s;
  }

  void validate() const {
    if (name.empty()) throw std::invalid_argument("parameter with empty name");
    switch (kind) {
      case ParamKind::Integer:
        if (int_lo > int_hi)
          throw std::invalid_argument("parameter '" + name + "': inverted range");
        break;
      case ParamKind::Real:
        if (!(real_lo <= real_hi))
          throw std::invalid_argument("parameter '" + name + "': inverted range");
        break;
      case ParamKind::Boolean:
        break;
      case ParamKind::Enumeration: {
        if (choices.empty())
          throw std::invalid_argument("parameter '" + name + "': empty enumeration");
        std::unordered_set<std::string> seen;
        for (const auto& c : choices)
          if (!seen.insert(c).second)
            throw std::invalid_argument("parameter '" + name +
                                        "': duplicate enumeration value '" + c + "'");
        break;
      }
    }
  }

  /// True when the domain holds exactly one value (mutation cannot change it).
  bool singleton_domain() const {
    switch (kind) {
      case ParamKind::Integer: return int_lo == int_hi;
      case ParamKind::Real: return real_lo == real_hi;
      case ParamKind::Boolean: return false;
      case ParamKind::Enumeration: return choices.size() == 1;
    }
    return false;
  }

  bool contains(const ParamValue& v) const {
    switch (kind) {
      case ParamKind::Integer: {
        const auto* p = std::get_if<long long>(&v);
        return p && *p >= int_lo && *p <= int_hi;
      }
      case ParamKind::Real: {
        const auto* p = std::get_if<double>(&v);
        return p && *p >= real_lo && *p <= real_hi;
      }
      case ParamKind::Boolean:
        return std::holds_alternative<bool>(v);
      case ParamKind::Enumeration: {
        const auto* p = std::get_if<std::string>(&v);
        return p && std::find(choices.begin(), choices.end(), *p) != choices.end();
      }
    }
    return false;
  }
};

/// Equality of two values of the same parameter; reals compare within
/// kRealEqualityTolerance.
inline bool values_equal(const ParameterSpec& spec, const ParamValue& a,
                         const ParamValue& b) {
  if (spec.kind == ParamKind::Real)
    return std::fabs(std::get<double>(a) - std::get<double>(b)) <=
           kRealEqualityTolerance;
  return a == b;
}

/// Ordered collection of parameter specs; the order defines the canonical
/// parameter index used by configurations, patches and suspiciousness
/// bookkeeping.
class ParameterSpace {
 public:
  explicit ParameterSpace(std::vector<ParameterSpec> specs)
      : specs_(std::move(specs)) {
    if (specs_.empty()) throw std::invalid_argument("empty parameter space");
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      specs_[i].validate();
      if (!index_.emplace(specs_[i].name, i).second)
        throw std::invalid_argument("duplicate parameter name '" + specs_[i].name + "'");
    }
  }

  std::size_t size() const { return specs_.size(); }
  const ParameterSpec& spec(std::size_t i) const { return specs_.at(i); }
  const std::vector<ParameterSpec>& specs() const { return specs_; }

  std::optional<std::size_t> index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool same_layout(const ParameterSpace& other) const {
    if (specs_.size() != other.specs_.size()) return false;
    for (std::size_t i = 0; i < specs_.size(); ++i)
      if (specs_[i].name != other.specs_[i].name ||
          specs_[i].kind != other.specs_[i].kind)
        return false;
    return true;
  }

 private:
  std::vector<ParameterSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParameterSpacePtr = std::shared_ptr<const ParameterSpace>;

/// A concrete point in a parameter space. Immutable after construction;
/// safe to share between evaluation workers.
class Configuration {
 public:
  Configuration(ParameterSpacePtr space, std::vector<ParamValue> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw std::invalid_argument("configuration without a space");
    if (values_.size() != space_->size())
      throw std::invalid_argument("configuration value count does not match space");
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!space_->spec(i).contains(values_[i]))
        throw std::invalid_argument("value for parameter '" + space_->spec(i).name +
                                    "' is out of range or of the wrong kind");
  }

  const ParameterSpace& space() const { return *space_; }
  const ParameterSpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return values_.size(); }
  const ParamValue& value(std::size_t i) const { return values_.at(i); }
  const std::vector<ParamValue>& values() const { return values_; }

  /// Copy with one value replaced (validated).
  Configuration with_value(std::size_t i, ParamValue v) const {
    std::vector<ParamValue> vals = values_;
    vals.at(i) = std::move(v);
    return Configuration(space_, std::move(vals));
  }

  bool operator==(const Configuration& other) const {
    if (!space_->same_layout(*other.space_)) return false;
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!values_equal(space_->spec(i), values_[i], other.values_[i])) return false;
    return true;
  }

 private:
  ParameterSpacePtr space_;
  std::vector<ParamValue> values_;
};

// ---------------------------------------------------------------------------
// Value formatting and parsing

inline std::string format_value(const ParamValue& v) {
  struct Visitor {
    std::string operator()(long long x) const { return std::to_string(x); }
    std::string operator()(double x) const {
      std::ostringstream os;
      os << std::setprecision(17) << x;
      return os.str();
    }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
    std::string operator()(const std::string& x) const { return x; }
  };
  return std::visit(Visitor{}, v);
}

namespace detail {

inline std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline bool parse_ll(const std::string& s, long long& out) {
  try {
    std::size_t pos = 0;
    out = std::stoll(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

}  // namespace detail

inline ParamValue parse_value(const ParameterSpec& spec, const std::string& raw) {
  const std::string text = detail::trim(raw);
  switch (spec.kind) {
    case ParamKind::Integer: {
      long long v;
      if (!detail::parse_ll(text, v))
        throw ParseError("parameter '" + spec.name + "': '" + text +
                         "' is not an integer");
      return v;
    }
    case ParamKind::Real: {
      double v;
      if (!detail::parse_double(text, v))
        throw ParseError("parameter '" + spec.name + "': '" + text +
                         "' is not a real number");
      return v;
    }
    case ParamKind::Boolean:
      if (text == "true") return true;
      if (text == "false") return false;
      throw ParseError("parameter '" + spec.name + "': '" + text +
                       "' is not a boolean (expected true/false)");
    case ParamKind::Enumeration:
      if (std::find(spec.choices.begin(), spec.choices.end(), text) ==
          spec.choices.end())
        throw ParseError("parameter '" + spec.name + "': '" + text +
                         "' is not one of the enumeration values");
      return text;
  }
  throw ParseError("unreachable");
}

// ---------------------------------------------------------------------------
// Spec-file format: one parameter per line.
//   <name> int  <lo> <hi>
//   <name> real <lo> <hi>
//   <name> bool
//   <name> enum v1,v2,...
// '#' starts a comment.

inline ParameterSpace parse_parameter_space(const std::string& text) {
  std::vector<ParameterSpec> specs;
  std::unordered_set<std::string> names;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto tok = detail::tokenize(line);
    auto fail = [&](const std::string& msg) -> ParseError {
      return ParseError("line " + std::to_string(lineno) + ": " + msg);
    };
    if (tok.size() < 2) throw fail("expected '<name> <kind> ...'");
    const std::string& name = tok[0];
    const std::string& kind = tok[1];
    if (!names.insert(name).second)
      throw fail("duplicate parameter name '" + name + "'");
    ParameterSpec spec;
    if (kind == "int" || kind == "integer") {
      long long lo, hi;
      if (tok.size() != 4 || !detail::parse_ll(tok[2], lo) ||
          !detail::parse_ll(tok[3], hi))
        throw fail("expected '<name> int <lo> <hi>'");
      if (lo > hi) throw fail("parameter '" + name + "': inverted range");
      spec = ParameterSpec::integer(name, lo, hi);
    } else if (kind == "real") {
      double lo, hi;
      if (tok.size() != 4 || !detail::parse_double(tok[2], lo) ||
          !detail::parse_double(tok[3], hi))
        throw fail("expected '<name> real <lo> <hi>'");
      if (lo > hi) throw fail("parameter '" + name + "': inverted range");
      spec = ParameterSpec::real(name, lo, hi);
    } else if (kind == "bool" || kind == "boolean") {
      if (tok.size() != 2) throw fail("expected '<name> bool'");
      spec = ParameterSpec::boolean(name);
    } else if (kind == "enum") {
      if (tok.size() != 3) throw fail("expected '<name> enum v1,v2,...'");
      auto vals = detail::split(tok[2], ',');
      for (auto& v : vals)
        if (detail::trim(v).empty()) throw fail("empty enumeration value");
      spec = ParameterSpec::enumeration(name, vals);
    } else {
      throw fail("unknown kind '" + kind + "'");
    }
    try {
      spec.validate();
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw ParseError("empty parameter space");
  return ParameterSpace(std::move(specs));
}

inline std::string serialize_parameter_space(const ParameterSpace& space) {
  std::ostringstream os;
  for (const auto& s : space.specs()) {
    if (!s.description.empty()) os << "# " << s.description << "\n";
    os << s.name << ' ';
    switch (s.kind) {
      case ParamKind::Integer:
        os << "int " << s.int_lo << ' ' << s.int_hi;
        break;
      case ParamKind::Real:
        os << "real " << std::setprecision(17) << s.real_lo << ' ' << s.real_hi;
        break;
      case ParamKind::Boolean:
        os << "bool";
        break;
      case ParamKind::Enumeration: {
        os << "enum ";
        for (std::size_t i = 0; i < s.choices.size(); ++i) {
          if (i) os << ',';
          os << s.choices[i];
        }
        break;
      }
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Configuration-file format: '<name> = <value>' per line, order-insensitive.

inline Configuration parse_configuration(const std::string& text,
                                         ParameterSpacePtr space) {
  std::vector<std::optional<ParamValue>> slots(space->size());
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected '<name> = <value>'");
    const std::string name = detail::trim(line.substr(0, eq));
    const std::string raw = detail::trim(line.substr(eq + 1));
    auto idx = space->index_of(name);
    if (!idx)
      throw ParseError("line " + std::to_string(lineno) + ": unknown parameter '" +
                       name + "'");
    if (slots[*idx])
      throw ParseError("line " + std::to_string(lineno) + ": duplicate parameter '" +
                       name + "'");
    const ParameterSpec& spec = space->spec(*idx);
    ParamValue v = parse_value(spec, raw);
    if (!spec.contains(v))
      throw ParseError("line " + std::to_string(lineno) + ": value for '" + name +
                       "' is out of range");
    slots[*idx] = std::move(v);
  }
  std::vector<ParamValue> values;
  values.reserve(space->size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i])
      throw ParseError("missing parameter '" + space->spec(i).name + "'");
    values.push_back(std::move(*slots[i]));
  }
  return Configuration(std::move(space), std::move(values));
}

inline std::string serialize_configuration(const Configuration& config) {
  std::ostringstream os;
  for (std::size_t i = 0; i < config.size(); ++i)
    os << config.space().spec(i).name << " = " << format_value(config.value(i))
       << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

/// Number of positions where two configurations over the same space differ.
inline std::size_t hamming_distance(const Configuration& a, const Configuration& b) {
  if (a.space_ptr() != b.space_ptr() && !a.space().same_layout(b.space()))
    throw std::invalid_argument("hamming_distance: configurations use different spaces");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!values_equal(a.space().spec(i), a.value(i), b.value(i))) ++d;
  return d;
}

/// Uniform draw from a parameter's admissible range.
inline ParamValue random_value(const ParameterSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case ParamKind::Integer:
      return rng.uniform_int(spec.int_lo, spec.int_hi);
    case ParamKind::Real:
      return rng.uniform_real(spec.real_lo, spec.real_hi);
    case ParamKind::Boolean:
      return rng.coin_flip();
    case ParamKind::Enumeration:
      return spec.choices[rng.uniform_index(spec.choices.size())];
  }
  throw std::logic_error("unreachable");
}

/// Uniform draw that is guaranteed to differ from `current` (retries until
/// it does). Throws on single-valued domains, where no different value exists.
inline ParamValue random_value_excluding(const ParameterSpec& spec,
                                         const ParamValue& current, Rng& rng) {
  if (spec.singleton_domain())
    throw std::invalid_argument("parameter '" + spec.name +
                                "': cannot exclude the only admissible value");
  ParamValue v;
  do {
    v = random_value(spec, rng);
  } while (values_equal(spec, v, current));
  return v;
}

}  // namespace confrepair
