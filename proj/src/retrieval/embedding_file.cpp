#include "prism/retrieval/embedding_file.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct JsonlReader {
  explicit JsonlReader(const fs::path& p) : path(p), in(p) {
    if (!in) throw InputError("cannot open " + path.string());
  }

  // Next non-blank line as JSON, or false at EOF.
  bool next(json& out) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      try {
        out = json::parse(line);
      } catch (const json::parse_error& e) {
        fail(e.what());
      }
      if (!out.is_object()) fail("expected a JSON object");
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  }

  template <typename T>
  T field(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(std::string("missing \"") + key + "\"");
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      fail(std::string("bad type for \"") + key + "\"");
    }
  }

  std::vector<float> vector_field(const json& obj, const char* key, std::size_t dim) const {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) fail(std::string("\"") + key + "\" must be an array");
    if (it->size() != dim) {
      fail(std::string("\"") + key + "\" has " + std::to_string(it->size()) + " values, expected " +
           std::to_string(dim));
    }
    std::vector<float> out;
    out.reserve(dim);
    for (const auto& v : *it) {
      if (!v.is_number()) fail(std::string("\"") + key + "\" contains a non-number");
      const float f = static_cast<float>(v.get<double>());
      if (!std::isfinite(f)) fail(std::string("\"") + key + "\" contains a non-finite value");
      out.push_back(f);
    }
    return out;
  }

  fs::path path;
  std::ifstream in;
  std::size_t line_no = 0;
};

json float_array(const std::vector<float>& v) {
  json arr = json::array();
  for (float f : v) arr.push_back(static_cast<double>(f));
  return arr;
}

void write_lines(const fs::path& path, const json& header, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << header.dump() << '\n';
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace

EmbeddingFile load_embedding_file(const fs::path& path) {
  JsonlReader reader(path);
  json obj;
  if (!reader.next(obj)) throw InputError(path.string() + ": empty embedding file");

  EmbeddingFile file;
  file.header.dim = reader.field<std::size_t>(obj, "dim");
  file.header.encoder = reader.field<std::string>(obj, "encoder");
  file.header.count = reader.field<std::size_t>(obj, "count");
  file.header.version = reader.field<int>(obj, "version");
  if (file.header.version != 1) reader.fail("unsupported embedding file version");
  if (file.header.dim == 0) reader.fail("dim must be positive");

  std::unordered_map<std::string, bool> seen;
  while (reader.next(obj)) {
    ModalEmbeddings rec;
    rec.id = reader.field<std::string>(obj, "id");
    if (rec.id.empty()) reader.fail("empty id");
    if (!seen.emplace(rec.id, true).second) reader.fail("duplicate id '" + rec.id + "'");
    rec.visual = reader.vector_field(obj, "visual", file.header.dim);
    rec.textual = reader.vector_field(obj, "textual", file.header.dim);
    try {
      validate(rec);
    } catch (const Error& e) {
      reader.fail(e.what());
    }
    file.records.push_back(std::move(rec));
  }
  if (file.records.size() != file.header.count) {
    throw InputError(path.string() + ": header count " + std::to_string(file.header.count) + " but " +
                     std::to_string(file.records.size()) + " records");
  }
  return file;
}

void write_embedding_file(const fs::path& path, const EmbeddingFile& file) {
  json header = {{"dim", file.header.dim},
                 {"encoder", file.header.encoder},
                 {"count", file.records.size()},
                 {"version", 1}};
  std::vector<json> rows;
  rows.reserve(file.records.size());
  for (const auto& r : file.records) {
    rows.push_back({{"id", r.id}, {"visual", float_array(r.visual)}, {"textual", float_array(r.textual)}});
  }
  write_lines(path, header, rows);
}

FusedIndex load_index_file(const fs::path& path) {
  JsonlReader reader(path);
  json obj;
  if (!reader.next(obj)) throw InputError(path.string() + ": empty index file");
  if (reader.field<std::string>(obj, "kind") != "fused-index") reader.fail("not a fused index file");
  if (reader.field<int>(obj, "version") != 1) reader.fail("unsupported index file version");
  const auto dim = reader.field<std::size_t>(obj, "dim");
  const auto count = reader.field<std::size_t>(obj, "count");
  const auto encoder = reader.field<std::string>(obj, "encoder");
  FusionWeights weights;
  try {
    weights = FusionWeights(reader.field<float>(obj, "alpha"), reader.field<float>(obj, "beta"));
  } catch (const PreconditionError& e) {
    reader.fail(e.what());
  }

  std::vector<IndexEntry> entries;
  while (reader.next(obj)) {
    IndexEntry e;
    e.id = reader.field<std::string>(obj, "id");
    e.vector = reader.vector_field(obj, "vector", dim);
    entries.push_back(std::move(e));
  }
  if (entries.size() != count) reader.fail("header count does not match number of entries");
  return FusedIndex::from_entries(std::move(entries), dim, weights, encoder);
}

void write_index_file(const fs::path& path, const FusedIndex& index) {
  json header = {{"kind", "fused-index"},
                 {"version", 1},
                 {"dim", index.dim()},
                 {"encoder", index.encoder_name()},
                 {"alpha", static_cast<double>(index.weights().alpha())},
                 {"beta", static_cast<double>(index.weights().beta())},
                 {"count", index.size()}};
  std::vector<json> rows;
  rows.reserve(index.size());
  for (const auto& e : index.entries()) rows.push_back({{"id", e.id}, {"vector", float_array(e.vector)}});
  write_lines(path, header, rows);
}

void QueryEmbeddings::add(EmbeddingFile file) {
  if (dim_ != 0 && file.header.dim != dim_) {
    throw InputError("query embedding files disagree on dimension");
  }
  dim_ = file.header.dim;
  for (auto& rec : file.records) {
    if (by_id_.contains(rec.id)) {
      throw InputError("embedding id '" + rec.id + "' appears in more than one query file");
    }
    std::string id = rec.id;
    by_id_.emplace(std::move(id), std::move(rec));
  }
}

const ModalEmbeddings* QueryEmbeddings::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &it->second;
}

}  // namespace prism
