#include "blindmix/kv_file.hpp"

#include <fstream>
#include <sstream>

namespace blindmix {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KvFile KvFile::parse(std::string_view text) {
  KvFile out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw KvFormatError("line " + std::to_string(line_no) + ": expected `key = value`");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw KvFormatError("line " + std::to_string(line_no) + ": empty key");
    if (!out.entries_.emplace(key, std::move(value)).second) {
      throw KvFormatError("line " + std::to_string(line_no) + ": duplicate key " + key);
    }
  }
  return out;
}

KvFile KvFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw KvFormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& KvFile::at(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw KvFormatError("missing key " + key);
  return it->second;
}

std::string KvFile::get_or(const std::string& key, std::string fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

}  // namespace blindmix
