#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "casetwin/text.hpp"
#include "casetwin/value.hpp"

namespace casetwin {

struct Range {
  double min = 0;
  double max = 0;
  double span() const { return max - min; }
  bool operator==(const Range&) const = default;
};

struct AttributeDef {
  std::string name;
  PrimitiveType type = PrimitiveType::Float;
  std::optional<Range> range;
  std::optional<std::string> unit;
  bool operator==(const AttributeDef&) const = default;
};

struct ClassDef {
  std::string name;
  std::vector<AttributeDef> attributes;

  const AttributeDef* find(std::string_view attribute) const;
  bool operator==(const ClassDef&) const = default;
};

struct DomainModel {
  std::string name;
  std::vector<ClassDef> classes;

  const ClassDef* find(std::string_view class_name) const;
  bool operator==(const DomainModel&) const = default;
};

struct AttributePath {
  std::string class_name;
  std::string attribute;

  PathKey key() const { return class_name + "." + attribute; }
  static AttributePath from_key(std::string_view key);  // throws std::invalid_argument
  bool operator==(const AttributePath&) const = default;
  auto operator<=>(const AttributePath&) const = default;
};

struct AttributeInfo {
  AttributePath path;
  PrimitiveType type = PrimitiveType::Float;
  std::optional<Range> range;
  std::optional<std::string> unit;
};

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

DomainModel parse_domain_model(std::string_view source);
std::string print_domain_model(const DomainModel& model);

AttributeInfo resolve_path(const DomainModel& model, const AttributePath& path);

/// The set of domain models a case base or similarity model imports.
/// Class names must be unique across the set for paths to stay unambiguous.
class DomainScope {
 public:
  DomainScope() = default;
  explicit DomainScope(std::vector<const DomainModel*> models) : models_(std::move(models)) {}

  AttributeInfo resolve(const AttributePath& path) const;
  std::vector<AttributeInfo> all_attributes() const;
  bool empty() const { return models_.empty(); }

 private:
  std::vector<const DomainModel*> models_;
};

/// Looks up imported model names, failing with a ParseError at `where`.
DomainScope scope_for_imports(const std::vector<std::string>& imports, const std::vector<DomainModel>& models,
                              const std::vector<SourcePos>& where);

/// Parses `Class . attribute` from the lexer.
AttributePath parse_attribute_path(Lexer& lex);

}  // namespace casetwin
