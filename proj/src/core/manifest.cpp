#include "prism/core/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string where(const fs::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

bool is_readable_file(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return false;
  std::ifstream in(p, std::ios::binary);
  return in.good();
}

}  // namespace

Manifest::Manifest(std::vector<ManifestRow> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& id = rows_[i].meme.id;
    if (id.empty()) throw InputError("manifest row " + std::to_string(i) + " has an empty id");
    if (!by_id_.emplace(id, i).second) throw InputError("duplicate meme id '" + id + "'");
  }
}

const ManifestRow* Manifest::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &rows_[it->second];
}

std::unordered_map<std::string, Verdict> Manifest::gold(LabelScheme scheme) const {
  std::unordered_map<std::string, Verdict> out;
  for (const auto& row : rows_) {
    if (row.label) out.emplace(row.meme.id, normalize_label(*row.label, scheme));
  }
  return out;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();

  std::vector<ManifestRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(where(path, line_no) + ": " + e.what());
    }
    if (!obj.is_object()) throw InputError(where(path, line_no) + ": expected a JSON object");

    auto string_field = [&](const char* key, bool required) -> std::string {
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) {
        if (required) throw InputError(where(path, line_no) + ": missing \"" + key + "\"");
        return {};
      }
      if (!it->is_string()) throw InputError(where(path, line_no) + ": \"" + key + "\" must be a string");
      return it->get<std::string>();
    };

    ManifestRow row;
    row.meme.id = string_field("id", true);
    if (row.meme.id.empty()) throw InputError(where(path, line_no) + ": empty id");
    const fs::path image = string_field("image", true);
    row.meme.image_ref = (image.is_absolute() || base.empty() ? image : base / image).lexically_normal().string();
    row.meme.text = string_field("text", false);
    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw InputError(where(path, line_no) + ": \"label\" must be a string or null");
      row.label = it->get<std::string>();
    }
    row.image_readable = is_readable_file(row.meme.image_ref);
    rows.push_back(std::move(row));
  }
  return Manifest(std::move(rows));
}

MemeCatalog::MemeCatalog(const Manifest& manifest) {
  for (const auto& row : manifest.rows()) memes_.emplace(row.meme.id, row.meme);
}

MemeCatalog::MemeCatalog(std::vector<Meme> memes) {
  for (auto& m : memes) {
    std::string id = m.id;
    if (!memes_.emplace(std::move(id), std::move(m)).second) {
      throw InputError("duplicate meme id in catalog");
    }
  }
}

const Meme* MemeCatalog::find(std::string_view id) const {
  auto it = memes_.find(std::string(id));
  return it == memes_.end() ? nullptr : &it->second;
}

const Meme& MemeCatalog::at(std::string_view id) const {
  if (const Meme* m = find(id)) return *m;
  throw InputError("meme '" + std::string(id) + "' not found in reference corpus");
}

}  // namespace prism
