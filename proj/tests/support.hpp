#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "casetwin/case_base.hpp"
#include "casetwin/domain_model.hpp"
#include "casetwin/similarity.hpp"

namespace casetwin::testing {

std::string source_path(const std::string& relative);
std::string fixture(const std::string& name);
std::string model_file(const std::string& name);

struct Bundled {
  std::vector<DomainModel> domains;
  CaseBase case_base;
  SimilaritySpec spec;
  PluginRegistry plugins;
};

Bundled load_bundled();

/// A fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Copies the bundled models into `dir` so runs may persist to them.
void copy_models(const TempDir& dir);

void write_file(const std::string& path, const std::string& contents);

}  // namespace casetwin::testing
