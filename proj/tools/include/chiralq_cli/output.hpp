#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace chiralq::cli {

std::string sha256_hex(const std::string& bytes);

// Shortest round-trip text for a double; "inf"/"nan" spelled out.
std::string fmt(double x);

// Output files of one command run. Files are written as they are produced;
// unless commit() is reached, the destructor removes every file written and
// the output directory if this run created it.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);
  ~OutputSet();
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::ordered_json& j);
  // Writes manifest.json listing every file with its SHA-256.
  nlohmann::ordered_json commit(nlohmann::ordered_json manifest);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct Entry {
    std::string name;
    std::string sha256;
    std::size_t bytes;
  };
  std::filesystem::path dir_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<Entry> files_;
};

}  // namespace chiralq::cli
