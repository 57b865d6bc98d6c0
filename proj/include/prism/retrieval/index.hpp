#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prism/core/types.hpp"
#include "prism/retrieval/fusion.hpp"

namespace prism {

struct IndexEntry {
  std::string id;
  std::vector<float> vector;  // unit norm
};

// Immutable exact-search index over the fused embeddings of the reference
// corpus. Entries are kept sorted by id so iteration order never depends on
// input file order. Safe for concurrent queries.
class FusedIndex {
 public:
  FusedIndex() = default;

  // Fuses every record with `weights`. Throws InputError on duplicate ids or
  // inconsistent dimensions, ZeroVector on degenerate records.
  static FusedIndex build(std::vector<ModalEmbeddings> records, FusionWeights weights,
                          std::string encoder_name);

  // Adopts precomputed fused vectors (e.g. from an index file). Every vector
  // must already be unit norm within 1e-5.
  static FusedIndex from_entries(std::vector<IndexEntry> entries, std::size_t dim,
                                 FusionWeights weights, std::string encoder_name);

  // Exact top-k by cosine similarity, descending, ties broken by id
  // ascending. `exclude_id` is dropped from the results when present.
  // Throws EmptyIndex on an empty index, PreconditionError when k == 0,
  // DimensionMismatch when the query has the wrong length.
  EvidenceSet top_k(std::span<const float> query, std::size_t k,
                    std::optional<std::string_view> exclude_id = std::nullopt,
                    std::string query_id = {}) const;

  const IndexEntry* find(std::string_view id) const;

  const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  FusionWeights weights() const noexcept { return weights_; }
  const std::string& encoder_name() const noexcept { return encoder_name_; }

 private:
  std::vector<IndexEntry> entries_;
  std::size_t dim_ = 0;
  FusionWeights weights_;
  std::string encoder_name_;
};

}  // namespace prism
