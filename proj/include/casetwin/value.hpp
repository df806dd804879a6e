#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace casetwin {

enum class PrimitiveType { Int, Float, Boolean, String };

std::string_view to_string(PrimitiveType type);
std::optional<PrimitiveType> parse_primitive_type(std::string_view keyword);

inline bool is_numeric(PrimitiveType type) {
  return type == PrimitiveType::Int || type == PrimitiveType::Float;
}

/// A single attribute value as seen by conditions, solutions and the machine port.
using Value = std::variant<std::int64_t, double, bool, std::string>;

PrimitiveType type_of(const Value& value);
bool is_numeric(const Value& value);
double as_double(const Value& value);  // throws std::bad_variant_access for non-numeric

/// Shortest decimal text that re-reads to the same value. Floats always carry
/// a '.' or exponent so they re-lex as floats; strings are quoted.
std::string format_value(const Value& value);
std::string format_double(double value);

/// "Class.attribute"
using PathKey = std::string;

/// One production cycle's snapshot of the machine, keyed by dotted attribute path.
struct Situation {
  std::int64_t cycle_id = 0;
  std::map<PathKey, Value> values;

  const Value* find(const PathKey& path) const {
    auto it = values.find(path);
    return it == values.end() ? nullptr : &it->second;
  }
  bool operator==(const Situation&) const = default;
};

}  // namespace casetwin
