#include "casetwin/value.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace casetwin {

std::string_view to_string(PrimitiveType type) {
  switch (type) {
    case PrimitiveType::Int: return "int";
    case PrimitiveType::Float: return "float";
    case PrimitiveType::Boolean: return "boolean";
    case PrimitiveType::String: return "string";
  }
  return "?";
}

std::optional<PrimitiveType> parse_primitive_type(std::string_view keyword) {
  if (keyword == "int") return PrimitiveType::Int;
  if (keyword == "float") return PrimitiveType::Float;
  if (keyword == "boolean") return PrimitiveType::Boolean;
  if (keyword == "string") return PrimitiveType::String;
  return std::nullopt;
}

PrimitiveType type_of(const Value& value) {
  switch (value.index()) {
    case 0: return PrimitiveType::Int;
    case 1: return PrimitiveType::Float;
    case 2: return PrimitiveType::Boolean;
    default: return PrimitiveType::String;
  }
}

bool is_numeric(const Value& value) { return is_numeric(type_of(value)); }

double as_double(const Value& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  return std::get<double>(value);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  std::string text(buf.data(), end);
  if (text.find_first_of(".eE") == std::string::npos) text += ".0";
  return text;
}

std::string format_value(const Value& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          std::string out = "\"";
          for (char c : v) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
          }
          return out + "\"";
        }
      },
      value);
}

}  // namespace casetwin
