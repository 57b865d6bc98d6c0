#include "prism/retrieval/index.hpp"

#include <algorithm>
#include <cmath>

#include "prism/errors.hpp"

namespace prism {

namespace {

void sort_and_check_unique(std::vector<IndexEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const IndexEntry& a, const IndexEntry& b) { return a.id < b.id; });
  auto dup = std::adjacent_find(entries.begin(), entries.end(),
                                [](const IndexEntry& a, const IndexEntry& b) { return a.id == b.id; });
  if (dup != entries.end()) throw InputError("duplicate id '" + dup->id + "' in reference corpus");
}

}  // namespace

FusedIndex FusedIndex::build(std::vector<ModalEmbeddings> records, FusionWeights weights,
                             std::string encoder_name) {
  FusedIndex index;
  index.weights_ = weights;
  index.encoder_name_ = std::move(encoder_name);
  index.entries_.reserve(records.size());
  for (auto& rec : records) {
    validate(rec);
    if (index.dim_ == 0) index.dim_ = rec.visual.size();
    if (rec.visual.size() != index.dim_) {
      throw InputError("embedding '" + rec.id + "' has dimension " + std::to_string(rec.visual.size()) +
                       ", expected " + std::to_string(index.dim_));
    }
    index.entries_.push_back({std::move(rec.id), fuse(rec, weights)});
  }
  sort_and_check_unique(index.entries_);
  return index;
}

FusedIndex FusedIndex::from_entries(std::vector<IndexEntry> entries, std::size_t dim,
                                    FusionWeights weights, std::string encoder_name) {
  for (const auto& e : entries) {
    if (e.vector.size() != dim) {
      throw InputError("index entry '" + e.id + "' has dimension " + std::to_string(e.vector.size()) +
                       ", expected " + std::to_string(dim));
    }
    double n2 = 0.0;
    for (float x : e.vector) n2 += static_cast<double>(x) * x;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-5) {
      throw InputError("index entry '" + e.id + "' is not unit norm");
    }
  }
  FusedIndex index;
  index.entries_ = std::move(entries);
  index.dim_ = dim;
  index.weights_ = weights;
  index.encoder_name_ = std::move(encoder_name);
  sort_and_check_unique(index.entries_);
  return index;
}

EvidenceSet FusedIndex::top_k(std::span<const float> query, std::size_t k,
                              std::optional<std::string_view> exclude_id,
                              std::string query_id) const {
  if (entries_.empty()) throw EmptyIndex();
  if (k == 0) throw PreconditionError("top_k requires k >= 1");
  if (query.size() != dim_) {
    throw DimensionMismatch("query has dimension " + std::to_string(query.size()) + ", index has " +
                            std::to_string(dim_));
  }

  struct Scored {
    float similarity;
    std::size_t pos;  // position in entries_, i.e. id rank
  };
  std::vector<Scored> scored;
  scored.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (exclude_id && entries_[i].id == *exclude_id) continue;
    scored.push_back({cosine(query, entries_[i].vector), i});
  }

  const auto by_rank = [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.pos < b.pos;
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), by_rank);

  EvidenceSet out;
  out.query_id = std::move(query_id);
  out.hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.hits.push_back({entries_[scored[i].pos].id, scored[i].similarity});
  }
  return out;
}

const IndexEntry* FusedIndex::find(std::string_view id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const IndexEntry& e, std::string_view key) { return e.id < key; });
  return it != entries_.end() && it->id == id ? &*it : nullptr;
}

}  // namespace prism
