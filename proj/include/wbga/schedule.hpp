#ifndef WBGA_SCHEDULE_HPP
#define WBGA_SCHEDULE_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "spec_string.hpp"

namespace wbga {

/// A sequence indexed by m:
///   const:<v>         v for every m
///   pow:<c>,<a>       c * max(m,1)^{-a}
///   list:<v1>,<v2>,.. v_m, the last value repeated past the end
///   prop72auto        evaluated online from the current residual (error
///                     schedules only)
/// Emitted values are clamped to [0, 1].
struct SequenceSpec {
  enum class Kind { constant, power, list, prop72auto };
  Kind kind = Kind::constant;
  double c = 0.0;
  double a = 0.0;
  std::vector<double> values;

  static SequenceSpec constant(double v) { return {Kind::constant, v, 0.0, {}}; }
  static SequenceSpec power(double c, double a) { return {Kind::power, c, a, {}}; }

  bool is_auto() const { return kind == Kind::prop72auto; }

  double at(int m) const {
    double v = 0.0;
    switch (kind) {
      case Kind::constant: v = c; break;
      case Kind::power: v = c * std::pow(static_cast<double>(std::max(m, 1)), -a); break;
      case Kind::list:
        v = values.empty() ? 0.0
                           : values[static_cast<std::size_t>(
                                 std::clamp(m - 1, 0, static_cast<int>(values.size()) - 1))];
        break;
      case Kind::prop72auto:
        throw std::logic_error("prop72auto sequences are evaluated online");
    }
    return std::clamp(v, 0.0, 1.0);
  }

  bool is_zero() const {
    switch (kind) {
      case Kind::constant: return c == 0.0;
      case Kind::power: return c == 0.0;
      case Kind::list:
        return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
      case Kind::prop72auto: return false;
    }
    return false;
  }

  std::string spec() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::constant: os << "const:" << c; break;
      case Kind::power: os << "pow:" << c << "," << a; break;
      case Kind::list:
        os << "list:";
        for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
        break;
      case Kind::prop72auto: os << "prop72auto"; break;
    }
    return os.str();
  }
};

inline SequenceSpec parse_sequence_spec(const std::string& text, const std::string& field,
                                        bool allow_auto) {
  if (text == "prop72auto") {
    if (!allow_auto) throw StructuralError("field '" + field + "': prop72auto not allowed here");
    return {SequenceSpec::Kind::prop72auto, 0.0, 0.0, {}};
  }
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw StructuralError("field '" + field + "': expected const:<v>, pow:<c>,<a> or list:<...>");
  const std::string kind = text.substr(0, colon);
  const auto parts = split(text.substr(colon + 1), ',');
  SequenceSpec s;
  if (kind == "const") {
    if (parts.size() != 1) throw StructuralError("field '" + field + "': const takes one value");
    s = SequenceSpec::constant(parse_double(parts[0], field));
  } else if (kind == "pow") {
    if (parts.size() != 2) throw StructuralError("field '" + field + "': pow takes <c>,<a>");
    s = SequenceSpec::power(parse_double(parts[0], field), parse_double(parts[1], field));
    if (s.a < 0.0) throw StructuralError("field '" + field + "': exponent must be >= 0");
  } else if (kind == "list") {
    s.kind = SequenceSpec::Kind::list;
    for (const auto& p : parts) s.values.push_back(parse_double(p, field));
  } else {
    throw StructuralError("field '" + field + "': unknown sequence kind '" + kind + "'");
  }
  auto bad = [](double v) { return !(v >= 0.0 && v <= 1.0); };
  if ((s.kind != SequenceSpec::Kind::list && bad(s.c)) ||
      std::any_of(s.values.begin(), s.values.end(), bad))
    throw StructuralError("field '" + field + "': values must lie in [0, 1]");
  return s;
}

/// Weakness sequence t_m, m >= 1.
struct WeaknessSchedule {
  SequenceSpec seq = SequenceSpec::constant(1.0);

  double at(int m) const { return seq.at(m); }
  bool is_constant() const { return seq.kind == SequenceSpec::Kind::constant; }
  std::string spec() const { return seq.spec(); }
};

inline WeaknessSchedule parse_weakness_spec(const std::string& text) {
  WeaknessSchedule w{parse_sequence_spec(text, "weakness", false)};
  if (w.seq.kind != SequenceSpec::Kind::list && !(w.seq.c > 0.0))
    throw StructuralError("field 'weakness': t0 must lie in (0, 1]");
  return w;
}

/// Error parameters of an approximate run: delta_m (functional inexactness),
/// eta_m (relative minimisation slack) and the biorthogonality slack eps_m,
/// either derived from delta, eta and ||G_m|| or given explicitly.
struct ErrorSchedule {
  SequenceSpec delta = SequenceSpec::constant(0.0);
  SequenceSpec eta = SequenceSpec::constant(0.0);
  bool eps_derived = true;
  std::vector<double> eps_list;

  std::string spec() const {
    std::ostringstream os;
    os.precision(17);
    os << "err:delta=" << delta.spec() << ",eta=" << eta.spec() << ",eps=";
    if (eps_derived) {
      os << "derived";
    } else {
      os << "list:";
      for (std::size_t i = 0; i < eps_list.size(); ++i) os << (i ? "," : "") << eps_list[i];
    }
    return os.str();
  }
};

inline ErrorSchedule parse_error_spec(const std::string& text) {
  SpecString s = parse_spec_string(text, "err", false);
  ErrorSchedule e;
  for (const auto& [key, value] : s.values) {
    if (key == "delta") {
      e.delta = parse_sequence_spec(value, "delta", true);
    } else if (key == "eta") {
      e.eta = parse_sequence_spec(value, "eta", true);
    } else if (key == "eps") {
      if (value == "derived") {
        e.eps_derived = true;
      } else if (value.rfind("list:", 0) == 0) {
        e.eps_derived = false;
        for (const auto& v : split(value.substr(5), ',')) {
          const double x = parse_double(v, "eps");
          if (!(x >= 0.0)) throw StructuralError("field 'eps': values must be nonnegative");
          e.eps_list.push_back(x);
        }
      } else {
        throw StructuralError("field 'eps': expected derived or list:<...>");
      }
    } else {
      throw StructuralError("unknown error-schedule field '" + key + "'");
    }
  }
  return e;
}

}  // namespace wbga

#endif  // WBGA_SCHEDULE_HPP
