#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prism/retrieval/fusion.hpp"
#include "prism/retrieval/index.hpp"

namespace prism {

// Embedding file layout (JSONL):
//   {"dim": int, "encoder": str, "count": int, "version": 1}
//   {"id": str, "visual": [f32...], "textual": [f32...]}   x count
struct EmbeddingFileHeader {
  std::size_t dim = 0;
  std::string encoder;
  std::size_t count = 0;
  int version = 1;
};

struct EmbeddingFile {
  EmbeddingFileHeader header;
  std::vector<ModalEmbeddings> records;
};

// Validates the header, the record count, every vector's dimension, finite
// values, non-zero modalities and id uniqueness. Throws InputError (or
// ZeroVector) naming the offending line.
EmbeddingFile load_embedding_file(const std::filesystem::path& path);
void write_embedding_file(const std::filesystem::path& path, const EmbeddingFile& file);

// Fused index file written by `build-index`:
//   {"kind": "fused-index", "version": 1, "dim", "encoder", "alpha", "beta", "count"}
//   {"id": str, "vector": [f32...]}   x count
FusedIndex load_index_file(const std::filesystem::path& path);
void write_index_file(const std::filesystem::path& path, const FusedIndex& index);

// Raw embeddings for query memes and their variants, keyed by record id
// (`<id>` or `<id>#ori|#b|#m`). Several files may be merged.
class QueryEmbeddings {
 public:
  QueryEmbeddings() = default;

  // Later files do not override earlier ids; a clash throws InputError.
  void add(EmbeddingFile file);
  const ModalEmbeddings* find(std::string_view id) const;
  std::size_t size() const noexcept { return by_id_.size(); }
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::unordered_map<std::string, ModalEmbeddings> by_id_;
  std::size_t dim_ = 0;
};

}  // namespace prism
