#include "spillprobe/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "spillprobe/image_io.hpp"

namespace spillprobe {
namespace {

using nlohmann::json;

int line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// nlohmann does not keep source positions for parsed values, so entry lines
// are recovered by scanning for each top-level object opening brace.
std::vector<int> entry_lines(const std::string& text) {
  std::vector<int> lines;
  int depth = 0;
  int line = 1;
  bool in_string = false;
  bool escape = false;
  for (char c : text) {
    if (c == '\n') ++line;
    if (in_string) {
      if (escape) escape = false;
      else if (c == '\\') escape = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') {
      if (c == '{' && depth == 1) lines.push_back(line);
      ++depth;
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
  return lines;
}

std::string require_string(const json& obj, const char* key, int line, int index) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ManifestError(fmt::format("entry {}: missing field '{}'", index, key), line, key, index);
  }
  if (!it->is_string()) {
    throw ManifestError(fmt::format("entry {}: field '{}' must be a string", index, key), line, key, index);
  }
  auto value = it->get<std::string>();
  if (value.empty()) {
    throw ManifestError(fmt::format("entry {}: field '{}' is empty", index, key), line, key, index);
  }
  return value;
}

}  // namespace

ManifestError::ManifestError(std::string message, int line, std::string field, int entry)
    : Error(fmt::format("manifest line {}: {}", line, message)),
      line_(line), field_(std::move(field)), entry_(entry) {}

std::string to_string(Group g) {
  switch (g) {
    case Group::A: return "A";
    case Group::B: return "B";
    case Group::C: return "C";
  }
  return "?";
}

Group parse_group(const std::string& text) {
  if (text == "A" || text == "a") return Group::A;
  if (text == "B" || text == "b") return Group::B;
  if (text == "C" || text == "c") return Group::C;
  throw Error(fmt::format("unknown group '{}': expected A, B or C", text));
}

bool ManifestEntry::usable(const std::string& model) const {
  return generated_resolved.contains(model) && !absent.contains(model);
}

std::filesystem::path ManifestEntry::generated_for(const std::string& model) const {
  auto it = generated_resolved.find(model);
  if (it == generated_resolved.end()) {
    throw Error(fmt::format("image {} has no output for model {}", image_id, model));
  }
  return it->second;
}

std::vector<std::string> DatasetManifest::models() const {
  std::set<std::string> names;
  for (const auto& e : entries) {
    for (const auto& [model, _] : e.generated) names.insert(model);
  }
  return {names.begin(), names.end()};
}

std::size_t DatasetManifest::usable_count(const std::string& model) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.usable(model); }));
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError(e.what(), line_of_byte(text, e.byte == 0 ? 0 : e.byte - 1), "<syntax>");
  }
  if (!root.is_array()) throw ManifestError("top level must be an array of entries", 1, "<root>");

  const auto lines = entry_lines(text);
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  std::set<std::string> seen;

  for (std::size_t i = 0; i < root.size(); ++i) {
    const int idx = static_cast<int>(i);
    const int line = i < lines.size() ? lines[i] : 1;
    const json& obj = root[i];
    if (!obj.is_object()) throw ManifestError(fmt::format("entry {} is not an object", idx), line, "<entry>", idx);

    ManifestEntry entry;
    entry.image_id = require_string(obj, "image_id", line, idx);
    if (!seen.insert(entry.image_id).second) {
      throw ManifestError(fmt::format("duplicate image_id '{}'", entry.image_id), line, "image_id", idx);
    }
    entry.category = require_string(obj, "category", line, idx);
    if (obj.contains("group") && !obj["group"].is_null()) {
      if (!obj["group"].is_string()) throw ManifestError("field 'group' must be a string", line, "group", idx);
      try {
        entry.group = parse_group(obj["group"].get<std::string>());
      } catch (const Error& e) {
        throw ManifestError(e.what(), line, "group", idx);
      }
    }
    entry.original_path = require_string(obj, "original", line, idx);

    auto gen = obj.find("generated");
    if (gen == obj.end() || !gen->is_object()) {
      throw ManifestError(fmt::format("entry {}: 'generated' must be an object of model -> path", idx), line,
                          "generated", idx);
    }
    for (auto it = gen->begin(); it != gen->end(); ++it) {
      if (!it.value().is_string() || it.value().get<std::string>().empty()) {
        throw ManifestError(fmt::format("entry {}: generated path for model '{}' must be a non-empty string", idx,
                                        it.key()),
                            line, "generated." + it.key(), idx);
      }
      entry.generated[it.key()] = it.value().get<std::string>();
    }

    auto box = obj.find("edit_box");
    if (box == obj.end() || !box->is_array() || box->size() != 4 ||
        !std::all_of(box->begin(), box->end(), [](const json& v) { return v.is_number_integer(); })) {
      throw ManifestError(fmt::format("entry {}: 'edit_box' must be [x_min, y_min, x_max, y_max] integers", idx),
                          line, "edit_box", idx);
    }
    entry.edit_box = {(*box)[0].get<int>(), (*box)[1].get<int>(), (*box)[2].get<int>(), (*box)[3].get<int>()};

    entry.original_resolved = base_dir / entry.original_path;
    ImageSize size;
    try {
      size = read_image_size(entry.original_resolved);
    } catch (const ImageIoError& e) {
      throw ManifestError(fmt::format("entry {}: original image unreadable: {}", idx, e.what()), line, "original",
                          idx);
    }
    try {
      entry.edit_box.validate(size.width, size.height);
    } catch (const Error& e) {
      throw ManifestError(fmt::format("entry {}: {}", idx, e.what()), line, "edit_box", idx);
    }

    for (const auto& [model, rel] : entry.generated) {
      auto resolved = base_dir / rel;
      entry.generated_resolved[model] = resolved;
      std::error_code ec;
      if (!std::filesystem::is_regular_file(resolved, ec)) {
        entry.absent[model] = fmt::format("generated image missing: {}", resolved.string());
      }
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError(fmt::format("cannot open {}", path.string()), 0, "<file>");
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_manifest(text, path.parent_path());
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  json root = json::array();
  for (const auto& e : manifest.entries) {
    json obj = {{"image_id", e.image_id},
                {"category", e.category},
                {"original", e.original_path},
                {"generated", e.generated},
                {"edit_box", {e.edit_box.x_min, e.edit_box.y_min, e.edit_box.x_max, e.edit_box.y_max}}};
    if (e.group) obj["group"] = to_string(*e.group);
    root.push_back(std::move(obj));
  }
  return root.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write manifest {}", path.string()));
  out << serialize_manifest(manifest);
}

}  // namespace spillprobe
