#include "manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "ttc/error.hpp"

#ifndef TTC_BUILD_ID
#define TTC_BUILD_ID "unknown"
#endif

namespace ttc::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

const std::string& Manifest::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw IoError("manifest has no entry '" + key + "'");
  return it->second;
}

std::map<std::string, std::string> Manifest::with_prefix(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k.rfind(prefix, 0) == 0) out[k.substr(prefix.size())] = v;
  }
  return out;
}

void Manifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  if (!out) throw IoError("write to " + path + " failed");
}

Manifest Manifest::read(const std::string& path) {
  Manifest m;
  m.entries_ = read_key_value_file(path);
  return m;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* build_id() { return TTC_BUILD_ID; }

}  // namespace ttc::cli
