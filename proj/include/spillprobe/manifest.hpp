#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spillprobe/core.hpp"

namespace spillprobe {

/// Parse or validation failure, with the JSON line and the offending field.
class ManifestError : public Error {
 public:
  ManifestError(std::string message, int line, std::string field, int entry = -1);

  int line() const { return line_; }
  const std::string& field() const { return field_; }
  int entry() const { return entry_; }

 private:
  int line_;
  std::string field_;
  int entry_;
};

enum class Group { A, B, C };

std::string to_string(Group g);
Group parse_group(const std::string& text);

struct ManifestEntry {
  std::string image_id;
  std::string category;
  std::optional<Group> group;
  std::string original_path;                      // as written in the file
  std::map<std::string, std::string> generated;   // model -> path as written
  EditBox edit_box;

  // Filled at load time.
  std::filesystem::path original_resolved;
  std::map<std::string, std::filesystem::path> generated_resolved;
  std::map<std::string, std::string> absent;      // model -> reason

  bool usable(const std::string& model) const;
  std::filesystem::path generated_for(const std::string& model) const;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  /// Every model that appears in any entry's `generated` map.
  std::vector<std::string> models() const;
  std::size_t usable_count(const std::string& model) const;
};

/// Reads, validates and resolves a manifest. Relative paths resolve against
/// the manifest's directory. Missing generated files are flagged, not fatal.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);

std::string serialize_manifest(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace spillprobe
