#include "manifest.hpp"

#include <openssl/evp.h>

#include <fmt/format.h>

#include "synapse/errors.hpp"
#include "synapse/volume_io.hpp"

namespace synapse::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

OutputStage::OutputStage(std::filesystem::path dir) : dir_(std::move(dir)) {}

OutputStage::~OutputStage() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& t : temporaries_) std::filesystem::remove(t, ec);
}

void OutputStage::add(const std::string& name, std::string bytes) { files_.emplace_back(name, std::move(bytes)); }

void OutputStage::commit() {
  std::filesystem::create_directories(dir_);
  for (const auto& [name, bytes] : files_) {
    auto tmp = dir_ / (name + ".partial");
    temporaries_.push_back(tmp);
    write_file(tmp, bytes);
  }
  for (std::size_t i = 0; i < files_.size(); ++i) std::filesystem::rename(temporaries_[i], dir_ / files_[i].first);
  committed_ = true;
}

Manifest::Manifest(std::string command) {
  doc_["tool"] = "synapse";
  doc_["version"] = kToolVersion;
  doc_["command"] = std::move(command);
  doc_["config"] = nlohmann::json::object();
  doc_["inputs"] = nlohmann::json::array();
}

void Manifest::input(const std::filesystem::path& path) {
  doc_["inputs"].push_back({{"name", path.filename().string()}, {"sha256", sha256_hex(read_file(path))}});
}

void Manifest::finish(OutputStage& stage, const std::string& manifest_name) {
  auto outputs = nlohmann::json::array();
  for (const auto& [name, bytes] : stage.files()) outputs.push_back({{"name", name}, {"sha256", sha256_hex(bytes)}});
  doc_["outputs"] = std::move(outputs);
  stage.add(manifest_name, doc_.dump(2) + "\n");
}

}  // namespace synapse::cli
