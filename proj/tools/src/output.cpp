#include "chiralq_cli/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <openssl/evp.h>

#include "chiralq_cli/config.hpp"

namespace chiralq::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::exists(dir_)) {
    std::filesystem::create_directories(dir_);
    created_dir_ = true;
  } else if (!std::filesystem::is_directory(dir_)) {
    throw ConfigError("output path '" + dir_.string() + "' is not a directory");
  }
}

OutputSet::~OutputSet() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& f : files_) std::filesystem::remove(dir_ / f.name, ec);
  std::filesystem::remove(dir_ / "manifest.json", ec);
  if (created_dir_) std::filesystem::remove(dir_, ec);  // only if now empty
}

void OutputSet::write(const std::string& name, const std::string& content) {
  // Recorded before writing so a failed write is still cleaned up.
  files_.push_back({name, sha256_hex(content), content.size()});
  std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error("cannot write '" + (dir_ / name).string() + "'");
}

void OutputSet::write_json(const std::string& name,
                           const nlohmann::ordered_json& j) {
  write(name, j.dump(2) + "\n");
}

nlohmann::ordered_json OutputSet::commit(nlohmann::ordered_json manifest) {
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& f : files_)
    files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  manifest["files"] = files;
  const std::string text = manifest.dump(2) + "\n";
  std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write manifest");
  committed_ = true;
  return manifest;
}

}  // namespace chiralq::cli
