#ifndef WBGA_SPEC_STRING_HPP
#define WBGA_SPEC_STRING_HPP

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace wbga {

/// Flat "prefix:head,key=value,..." specifier. Comma-separated tokens without
/// '=' that follow a key are glued back onto that key's value, so
/// "delta=pow:0.1,1.1" keeps its comma.
struct SpecString {
  std::string prefix;
  std::string head;  // first bare token, e.g. the dictionary kind
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  const std::string& at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw StructuralError("missing field '" + key + "' in spec");
    return it->second;
  }

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }
};

inline double parse_double(std::string_view text, const std::string& field) {
  std::string buf(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(buf, &used);
  } catch (const std::exception&) {
    throw StructuralError("field '" + field + "': expected a number, got '" + buf + "'");
  }
  if (used != buf.size())
    throw StructuralError("field '" + field + "': trailing characters in '" + buf + "'");
  return value;
}

inline std::int64_t parse_int(std::string_view text, const std::string& field) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw StructuralError("field '" + field + "': expected an integer, got '" + std::string(text) +
                          "'");
  return value;
}

inline double SpecString::number(const std::string& key) const { return parse_double(at(key), key); }
inline std::int64_t SpecString::integer(const std::string& key) const {
  return parse_int(at(key), key);
}

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                       : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// `expected_prefix` is optional in the input: "dict:canonical" and
/// "canonical" parse the same when expected_prefix == "dict".
inline SpecString parse_spec_string(std::string_view text, std::string_view expected_prefix,
                                    bool allow_head) {
  SpecString spec;
  spec.prefix = std::string(expected_prefix);
  std::string_view body = text;
  auto colon = text.find(':');
  auto eq = text.find('=');
  if (colon != std::string_view::npos && (eq == std::string_view::npos || colon < eq)) {
    std::string_view prefix = text.substr(0, colon);
    if (prefix == expected_prefix) {
      body = text.substr(colon + 1);
    } else if (!allow_head) {
      throw StructuralError("expected '" + std::string(expected_prefix) + ":' specifier, got '" +
                            std::string(text) + "'");
    }
  }
  if (body.empty()) throw StructuralError("empty " + std::string(expected_prefix) + " specifier");
  std::string last_key;
  bool first = true;
  for (const auto& token : split(body, ',')) {
    auto pos = token.find('=');
    if (pos == std::string::npos) {
      if (first && allow_head) {
        spec.head = token;
      } else if (!last_key.empty()) {
        spec.values[last_key] += "," + token;
      } else {
        throw StructuralError("malformed token '" + token + "' in '" + std::string(text) + "'");
      }
    } else {
      last_key = token.substr(0, pos);
      if (last_key.empty()) throw StructuralError("empty key in '" + std::string(text) + "'");
      spec.values[last_key] = token.substr(pos + 1);
    }
    first = false;
  }
  return spec;
}

}  // namespace wbga

#endif  // WBGA_SPEC_STRING_HPP
