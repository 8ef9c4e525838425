#ifndef TIDS_CONFIG_HPP
#define TIDS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tids {

// flat key=value settings, keys carry dotted section prefixes
// (e.g. smote.k_neighbors=5); '#' starts a comment
class Config {
public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // all keys under "prefix." with the prefix stripped
  std::vector<std::pair<std::string, std::string>> section(const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

private:
  std::map<std::string, std::string> entries_;
};

}  // namespace tids

#endif
