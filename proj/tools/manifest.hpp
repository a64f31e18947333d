#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace synapse::cli {

inline constexpr const char* kToolVersion = "1.0.0";

std::string sha256_hex(const std::string& bytes);

/// Collects output files in memory and publishes them together: everything
/// is written to temporaries first, then renamed into place. Anything not
/// committed is removed on destruction.
class OutputStage {
 public:
  explicit OutputStage(std::filesystem::path dir);
  ~OutputStage();
  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;

  void add(const std::string& name, std::string bytes);
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
  void commit();

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::vector<std::filesystem::path> temporaries_;
  bool committed_ = false;
};

/// Record of one command run; contains nothing run-specific beyond what
/// determines the outputs, so identical runs produce identical manifests.
class Manifest {
 public:
  explicit Manifest(std::string command);

  void config(const std::string& section, nlohmann::json value) { doc_["config"][section] = std::move(value); }
  void seed(std::uint64_t seed) { doc_["seed"] = seed; }
  void note(const std::string& key, nlohmann::json value) { doc_["notes"][key] = std::move(value); }
  /// Records an input by file name and content digest.
  void input(const std::filesystem::path& path);

  /// Adds digests of the staged outputs and stages the manifest itself.
  void finish(OutputStage& stage, const std::string& manifest_name);

 private:
  nlohmann::json doc_;
};

}  // namespace synapse::cli
