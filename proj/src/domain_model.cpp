#include "casetwin/domain_model.hpp"

#include <set>
#include <sstream>

namespace casetwin {

const AttributeDef* ClassDef::find(std::string_view attribute) const {
  for (const auto& a : attributes) {
    if (a.name == attribute) return &a;
  }
  return nullptr;
}

const ClassDef* DomainModel::find(std::string_view class_name) const {
  for (const auto& c : classes) {
    if (c.name == class_name) return &c;
  }
  return nullptr;
}

AttributePath AttributePath::from_key(std::string_view key) {
  auto dot = key.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == key.size() ||
      key.find('.', dot + 1) != std::string_view::npos) {
    throw std::invalid_argument("malformed attribute path '" + std::string(key) + "'");
  }
  return {std::string(key.substr(0, dot)), std::string(key.substr(dot + 1))};
}

AttributePath parse_attribute_path(Lexer& lex) {
  Token cls = lex.expect_identifier("class name");
  lex.expect_punct(".");
  Token attr = lex.expect_identifier("attribute name");
  return {cls.text, attr.text};
}

namespace {

AttributeDef parse_attribute(Lexer& lex) {
  AttributeDef attr;
  attr.name = lex.expect_identifier("attribute name").text;
  lex.expect_punct(":");
  Token type_tok = lex.expect_identifier("type");
  auto type = parse_primitive_type(type_tok.text);
  if (!type) lex.fail(type_tok, "unknown type '" + type_tok.text + "' (expected int, float, boolean or string)");
  attr.type = *type;

  if (lex.is_keyword("range")) {
    Token range_tok = lex.next();
    lex.expect_punct("[");
    double lo = lex.expect_number("range minimum");
    lex.expect_punct(",");
    double hi = lex.expect_number("range maximum");
    lex.expect_punct("]");
    if (!is_numeric(attr.type)) lex.fail(range_tok, "range on non-numeric attribute '" + attr.name + "'");
    if (!(lo < hi)) lex.fail(range_tok, "malformed range for '" + attr.name + "': minimum must be below maximum");
    attr.range = Range{lo, hi};
  }
  if (lex.accept_keyword("unit")) {
    if (lex.peek().kind != TokenKind::String) lex.fail_here("expected unit string");
    attr.unit = lex.next().text;
  }
  lex.expect_punct(";");
  return attr;
}

}  // namespace

DomainModel parse_domain_model(std::string_view source) {
  Lexer lex(source);
  if (lex.at_end()) throw ParseError(lex.peek().pos, "no class definitions");

  DomainModel model;
  lex.expect_keyword("model");
  model.name = lex.expect_identifier("model name").text;
  lex.expect_punct("{");

  while (!lex.accept_punct("}")) {
    lex.expect_keyword("class");
    ClassDef cls;
    Token name = lex.expect_identifier("class name");
    cls.name = name.text;
    if (model.find(cls.name)) lex.fail(name, "duplicate class '" + cls.name + "'");
    lex.expect_punct("{");
    while (!lex.accept_punct("}")) {
      Token at = lex.peek();
      AttributeDef attr = parse_attribute(lex);
      if (cls.find(attr.name)) {
        lex.fail(at, "duplicate attribute '" + attr.name + "' in class '" + cls.name + "'");
      }
      cls.attributes.push_back(std::move(attr));
    }
    model.classes.push_back(std::move(cls));
  }
  if (!lex.at_end()) lex.fail_here("unexpected " + describe(lex.peek()) + " after model");
  if (model.classes.empty()) throw ParseError({1, 1}, "no class definitions");
  return model;
}

std::string print_domain_model(const DomainModel& model) {
  std::ostringstream out;
  out << "model " << model.name << " {\n";
  for (const auto& cls : model.classes) {
    out << "  class " << cls.name << " {\n";
    for (const auto& a : cls.attributes) {
      out << "    " << a.name << " : " << to_string(a.type);
      if (a.range) out << " range [" << format_double(a.range->min) << ", " << format_double(a.range->max) << "]";
      if (a.unit) out << " unit " << format_value(*a.unit);
      out << ";\n";
    }
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

AttributeInfo resolve_path(const DomainModel& model, const AttributePath& path) {
  const ClassDef* cls = model.find(path.class_name);
  if (!cls) throw ResolutionError("unknown class '" + path.class_name + "' in model '" + model.name + "'");
  const AttributeDef* attr = cls->find(path.attribute);
  if (!attr) throw ResolutionError("unknown attribute '" + path.key() + "'");
  return {path, attr->type, attr->range, attr->unit};
}

AttributeInfo DomainScope::resolve(const AttributePath& path) const {
  const DomainModel* owner = nullptr;
  for (const DomainModel* m : models_) {
    if (m->find(path.class_name)) {
      if (owner) {
        throw ResolutionError("class '" + path.class_name + "' is ambiguous between models '" + owner->name +
                              "' and '" + m->name + "'");
      }
      owner = m;
    }
  }
  if (!owner) throw ResolutionError("unknown class '" + path.class_name + "' in '" + path.key() + "'");
  return resolve_path(*owner, path);
}

std::vector<AttributeInfo> DomainScope::all_attributes() const {
  std::vector<AttributeInfo> out;
  for (const DomainModel* m : models_) {
    for (const auto& c : m->classes) {
      for (const auto& a : c.attributes) out.push_back({{c.name, a.name}, a.type, a.range, a.unit});
    }
  }
  return out;
}

DomainScope scope_for_imports(const std::vector<std::string>& imports, const std::vector<DomainModel>& models,
                              const std::vector<SourcePos>& where) {
  std::vector<const DomainModel*> found;
  for (std::size_t i = 0; i < imports.size(); ++i) {
    const DomainModel* hit = nullptr;
    for (const auto& m : models) {
      if (m.name == imports[i]) hit = &m;
    }
    if (!hit) throw ParseError(i < where.size() ? where[i] : SourcePos{}, "unknown domain model '" + imports[i] + "'");
    found.push_back(hit);
  }
  return DomainScope(std::move(found));
}

}  // namespace casetwin
