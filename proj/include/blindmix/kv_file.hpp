#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blindmix {

class KvFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line-oriented `key = value` text. Blank lines and `#` comments are ignored;
/// duplicate keys are an error. Used for bank config files and pinned test vectors.
class KvFile {
 public:
  static KvFile parse(std::string_view text);
  static KvFile load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& at(const std::string& key) const;
  std::string get_or(const std::string& key, std::string fallback) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace blindmix
