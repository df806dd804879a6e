#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "casetwin/text.hpp"

namespace casetwin::testing {

namespace fs = std::filesystem;

std::string source_path(const std::string& relative) { return (fs::path(CASETWIN_SOURCE_DIR) / relative).string(); }
std::string fixture(const std::string& name) { return source_path("tests/fixtures/" + name); }
std::string model_file(const std::string& name) { return source_path("models/" + name); }

Bundled load_bundled() {
  Bundled b;
  b.domains.push_back(parse_domain_model(read_text_file(model_file("injection_molding.dm"))));
  b.case_base = parse_case_base(read_text_file(model_file("injection_molding.cb")), b.domains);
  b.spec = parse_similarity_spec(read_text_file(model_file("injection_molding.cs")), b.domains);
  register_builtin_plugins(b.plugins);
  return b;
}

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "casetwin-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void copy_models(const TempDir& dir) {
  for (const auto& entry : fs::directory_iterator(source_path("models"))) {
    if (entry.is_regular_file()) fs::copy_file(entry.path(), dir.path() / entry.path().filename());
  }
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::trunc);
  out << contents;
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace casetwin::testing
