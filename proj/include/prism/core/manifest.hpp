#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "prism/core/labels.hpp"
#include "prism/core/types.hpp"

namespace prism {

struct ManifestRow {
  Meme meme;
  std::optional<std::string> label;
  // Checked once at load. Rows with unreadable images stay in the manifest so
  // the harness can report them as failed cases instead of dropping them.
  bool image_readable = false;
};

class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(std::vector<ManifestRow> rows);

  const std::vector<ManifestRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const ManifestRow* find(std::string_view id) const;

  // Gold labels for every row that has one.
  std::unordered_map<std::string, Verdict> gold(LabelScheme scheme) const;

 private:
  std::vector<ManifestRow> rows_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// JSONL: {"id": str, "image": str, "text": str, "label": str|null}. Relative
// image paths resolve against the manifest's directory. Duplicate or empty ids
// throw InputError.
Manifest load_manifest(const std::filesystem::path& path);

// Read-only id -> Meme lookup over the reference corpus.
class MemeCatalog {
 public:
  MemeCatalog() = default;
  explicit MemeCatalog(const Manifest& manifest);
  explicit MemeCatalog(std::vector<Meme> memes);

  const Meme* find(std::string_view id) const;
  const Meme& at(std::string_view id) const;
  std::size_t size() const noexcept { return memes_.size(); }

 private:
  std::unordered_map<std::string, Meme> memes_;
};

}  // namespace prism
