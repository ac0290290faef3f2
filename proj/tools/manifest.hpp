#pragma once

// Run manifests: flat key=value text files written next to every run.
//
//   command=<subcommand>
//   command_line=<argv as given>
//   build=<build identifier>
//   seed=<root seed>
//   start=<UTC timestamp>  end=<UTC timestamp>
//   param.<flag>=<effective value>     (after merging the config file)
//   output.<name>=<file name relative to the manifest directory>
//
// Replay rebuilds the argument list from the param.* entries.

#include <map>
#include <string>
#include <vector>

namespace ttc::cli {

class Manifest {
 public:
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  /// IoError when missing.
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Entries whose key starts with `prefix`, with the prefix stripped.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

  void write(const std::string& path) const;
  static Manifest read(const std::string& path);

 private:
  std::map<std::string, std::string> entries_;
};

/// key=value lines; '#' comments and blank lines skipped, whitespace around
/// keys and values trimmed. IoError on malformed lines.
std::map<std::string, std::string> read_key_value_file(const std::string& path);

std::string utc_timestamp();
const char* build_id();

}  // namespace ttc::cli
