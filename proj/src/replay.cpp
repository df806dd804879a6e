#include "casetwin/replay.hpp"

#include <charconv>
#include <cmath>

#include <spdlog/spdlog.h>

#include "casetwin/text.hpp"

namespace casetwin {

RowError::RowError(std::size_t row, const std::string& message)
    : std::runtime_error("row " + std::to_string(row) + ": " + message), row_(row) {}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    if (s->find_first_of(",\"\n") == std::string::npos) return *s;
    std::string q = "\"";
    for (char c : *s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return format_double(std::get<double>(v));
}

namespace {

std::optional<Value> parse_field(const std::string& text, PrimitiveType type) {
  const char* b = text.data();
  const char* e = text.data() + text.size();
  switch (type) {
    case PrimitiveType::Int: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e) return std::nullopt;
      return v;
    }
    case PrimitiveType::Float: {
      double v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e || !std::isfinite(v)) return std::nullopt;
      return v;
    }
    case PrimitiveType::Boolean:
      if (text == "true") return true;
      if (text == "false") return false;
      return std::nullopt;
    case PrimitiveType::String:
      return text;
  }
  return std::nullopt;
}

}  // namespace

ReplaySource::ReplaySource(const std::string& path, const DomainScope& scope, std::string cycle_column,
                           bool skip_malformed)
    : in_(path), skip_malformed_(skip_malformed) {
  if (!in_) throw IoError("cannot open replay file '" + path + "'");
  std::string header;
  if (!std::getline(in_, header)) throw ParseError({1, 1}, path + ": missing header row");
  bool found_cycle = false;
  const auto names = split_csv_line(header);
  for (std::size_t i = 0; i < names.size(); ++i) {
    AttributeInfo info;
    try {
      info = scope.resolve(AttributePath::from_key(names[i]));
    } catch (const std::exception& e) {
      throw ParseError({1, 1}, path + ": column '" + names[i] + "': " + e.what());
    }
    if (names[i] == cycle_column) {
      if (info.type != PrimitiveType::Int) throw ParseError({1, 1}, path + ": cycle column must be an int attribute");
      cycle_index_ = i;
      found_cycle = true;
    }
    columns_.push_back(std::move(info));
  }
  if (!found_cycle) throw ParseError({1, 1}, path + ": missing cycle column '" + cycle_column + "'");
}

std::optional<Situation> ReplaySource::read_cycle() {
  std::string line;
  while (std::getline(in_, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_;
    try {
      auto fields = split_csv_line(line);
      if (fields.size() != columns_.size()) {
        throw RowError(row_, "expected " + std::to_string(columns_.size()) + " fields, got " +
                                 std::to_string(fields.size()));
      }
      Situation s;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        auto v = parse_field(fields[i], columns_[i].type);
        if (!v) {
          throw RowError(row_, "column '" + columns_[i].path.key() + "' expects " +
                                   std::string(to_string(columns_[i].type)) + ", got '" + fields[i] + "'");
        }
        s.values[columns_[i].path.key()] = std::move(*v);
      }
      s.cycle_id = std::get<std::int64_t>(s.values.at(columns_[cycle_index_].path.key()));
      if (last_cycle_ && s.cycle_id <= *last_cycle_) {
        throw RowError(row_, "cycle counter " + std::to_string(s.cycle_id) + " does not increase");
      }
      last_cycle_ = s.cycle_id;
      return s;
    } catch (const RowError& e) {
      if (!skip_malformed_) throw;
      spdlog::warn("replay: skipping {}", e.what());
      skipped_.push_back(e.what());
    }
  }
  return std::nullopt;
}

SituationLogWriter::SituationLogWriter(const std::string& path) : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw IoError("cannot open situation log '" + path + "'");
}

void SituationLogWriter::append(const Situation& s) {
  if (header_.empty()) {
    for (const auto& [k, v] : s.values) header_.push_back(k);
    for (std::size_t i = 0; i < header_.size(); ++i) out_ << (i ? "," : "") << header_[i];
    out_ << "\n";
  }
  for (std::size_t i = 0; i < header_.size(); ++i) {
    const Value* v = s.find(header_[i]);
    out_ << (i ? "," : "") << (v ? csv_field(*v) : std::string());
  }
  out_ << "\n";
  out_.flush();
  if (!out_) throw IoError("cannot append to situation log '" + path_ + "'");
}

}  // namespace casetwin
