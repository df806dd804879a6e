#include "casetwin/explain.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <sstream>

#include <json.hpp>
#include <spdlog/fmt/fmt.h>

#include "casetwin/text.hpp"

namespace casetwin {

using nlohmann::json;

namespace {

json value_json(const Value& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

Value json_value(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw ExplainLogError("unsupported situation value " + j.dump());
}

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

}  // namespace

bool involves(const ExplainRecord& r, const std::string& name) {
  if (r.primary_trigger == name || r.learned_case == name || r.reinforced_case == name) return true;
  if (std::find(r.triggers.begin(), r.triggers.end(), name) != r.triggers.end()) return true;
  for (const auto& c : r.candidates) {
    if (c.case_name == name) return true;
  }
  for (const auto& a : r.attempts) {
    if (a.case_name == name) return true;
  }
  return false;
}

std::string to_json_line(const ExplainRecord& r) {
  json j;
  j["episode"] = r.episode;
  j["cycle"] = r.cycle;
  j["closed_cycle"] = r.closed_cycle;
  j["triggers"] = r.triggers;
  j["primary_trigger"] = r.primary_trigger;
  json sit = json::object();
  for (const auto& [k, v] : r.situation) sit[k] = value_json(v);
  j["situation"] = std::move(sit);
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back({{"case", c.case_name}, {"raw", c.raw}, {"effective", c.effective}});
  j["candidates"] = std::move(cands);
  json attempts = json::array();
  for (const auto& a : r.attempts) {
    json aj{{"case", a.case_name}, {"rank", a.rank}, {"steps", a.steps}};
    if (a.success) aj["success"] = *a.success;
    attempts.push_back(std::move(aj));
  }
  j["attempts"] = std::move(attempts);
  put_opt(j, "fallback", r.fallback);
  put_opt(j, "planner", r.planner);
  if (!r.plan.empty()) j["plan"] = r.plan;
  if (!r.writes.empty()) j["writes"] = r.writes;
  j["outcome"] = r.outcome;
  put_opt(j, "learned_case", r.learned_case);
  put_opt(j, "reinforced_case", r.reinforced_case);
  put_opt(j, "min_score", r.min_score);
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j.dump();
}

ExplainRecord from_json_line(const std::string& line) {
  try {
    json j = json::parse(line);
    ExplainRecord r;
    r.episode = j.at("episode").get<std::int64_t>();
    r.cycle = j.at("cycle").get<std::int64_t>();
    r.closed_cycle = j.at("closed_cycle").get<std::int64_t>();
    r.triggers = j.at("triggers").get<std::vector<std::string>>();
    r.primary_trigger = j.at("primary_trigger").get<std::string>();
    for (const auto& [k, v] : j.at("situation").items()) r.situation[k] = json_value(v);
    for (const auto& c : j.at("candidates")) {
      r.candidates.push_back({c.at("case").get<std::string>(), c.at("raw").get<double>(), c.at("effective").get<double>()});
    }
    for (const auto& a : j.at("attempts")) {
      ExplainAttempt at;
      at.case_name = a.at("case").get<std::string>();
      at.rank = a.at("rank").get<std::size_t>();
      at.steps = a.at("steps").get<std::vector<std::string>>();
      at.success = get_opt<bool>(a, "success");
      r.attempts.push_back(std::move(at));
    }
    r.fallback = get_opt<std::string>(j, "fallback");
    r.planner = get_opt<std::string>(j, "planner");
    r.plan = j.value("plan", std::vector<std::string>{});
    r.writes = j.value("writes", std::vector<std::string>{});
    r.outcome = j.at("outcome").get<std::string>();
    r.learned_case = get_opt<std::string>(j, "learned_case");
    r.reinforced_case = get_opt<std::string>(j, "reinforced_case");
    r.min_score = get_opt<double>(j, "min_score");
    r.notes = j.value("notes", std::vector<std::string>{});
    return r;
  } catch (const json::exception& e) {
    throw ExplainLogError(std::string("malformed explain record: ") + e.what());
  }
}

ExplainLogWriter::ExplainLogWriter(const std::string& path, bool truncate) : path_(path) {
  int flags = O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC;
  if (truncate) flags |= O_TRUNC;
  fd_ = ::open(path.c_str(), flags, 0644);
  if (fd_ < 0) throw IoError("cannot open explain log '" + path + "': " + std::strerror(errno));
}

ExplainLogWriter::~ExplainLogWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void ExplainLogWriter::append(const ExplainRecord& record) {
  std::string line = to_json_line(record) + "\n";
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    ssize_t n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("cannot append to explain log '" + path_ + "': " + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::vector<ExplainRecord> read_explain_log(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<ExplainRecord> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    ++line_no;
    if (end == std::string::npos) break;  // truncated tail
    std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const ExplainLogError& e) {
      throw ExplainLogError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string explain(const std::vector<ExplainRecord>& log, const ExplainFilter& filter) {
  std::ostringstream out;
  std::size_t shown = 0;
  for (const auto& r : log) {
    if (filter.case_name && !involves(r, *filter.case_name)) continue;
    if (filter.from_cycle && r.cycle < *filter.from_cycle) continue;
    if (filter.to_cycle && r.cycle > *filter.to_cycle) continue;
    ++shown;

    out << "episode " << r.episode << " at cycle " << r.cycle;
    if (r.closed_cycle != r.cycle) out << " (closed at cycle " << r.closed_cycle << ")";
    out << "\n";
    out << "  trigger: " << r.primary_trigger;
    if (r.triggers.size() > 1) {
      out << " (also holding:";
      for (const auto& t : r.triggers) {
        if (t != r.primary_trigger) out << " " << t;
      }
      out << ")";
    }
    out << "\n  situation:";
    for (const auto& [k, v] : r.situation) out << " " << k << "=" << format_value(v);
    out << "\n";
    if (r.candidates.empty()) {
      out << "  candidates: none below threshold\n";
    } else {
      out << "  candidates:\n";
      for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        const auto& c = r.candidates[i];
        out << fmt::format("    {}. {} raw={:.6f} effective={:.6f}\n", i + 1, c.case_name, c.raw, c.effective);
      }
    }
    for (const auto& a : r.attempts) {
      out << "  applied " << a.case_name << " (rank " << a.rank + 1 << "):";
      for (const auto& s : a.steps) out << " [" << s << "]";
      if (a.success) out << (*a.success ? " -> yields held" : " -> yields violated");
      out << "\n";
    }
    if (r.fallback) out << "  fallback: " << *r.fallback << "\n";
    if (r.planner) {
      out << "  planner: " << *r.planner;
      if (!r.plan.empty()) {
        out << ",";
        for (const auto& step : r.plan) out << " " << step;
      }
      out << "\n";
    }
    if (!r.writes.empty()) {
      out << "  writes:";
      for (const auto& w : r.writes) out << " [" << w << "]";
      out << "\n";
    }
    for (const auto& n : r.notes) out << "  note: " << n << "\n";
    out << "  outcome: " << r.outcome << "\n";
    if (r.learned_case) out << "  learned: " << *r.learned_case << "\n";
    if (r.reinforced_case) out << "  reinforced: " << *r.reinforced_case << "\n";
    if (r.min_score) out << fmt::format("  nearest known case distance: {:.6f}\n", *r.min_score);
  }
  if (shown == 0) return log.empty() ? "no reasoning episodes recorded\n" : "no matching reasoning episodes\n";
  return out.str();
}

}  // namespace casetwin
