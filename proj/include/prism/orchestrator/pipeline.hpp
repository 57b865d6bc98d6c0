#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "prism/agents/prompts.hpp"
#include "prism/backend/backend.hpp"
#include "prism/core/manifest.hpp"
#include "prism/orchestrator/config.hpp"
#include "prism/orchestrator/trace.hpp"
#include "prism/retrieval/embedding_file.hpp"
#include "prism/retrieval/index.hpp"

namespace prism {

struct RewritePair {
  std::string b_text;
  std::string m_text;
};
using RewriteMap = std::unordered_map<std::string, RewritePair>;

// JSONL of {"id", "b_text", "m_text"} as written by a --rewrites-only pass.
RewriteMap load_rewrites(const std::filesystem::path& path);

// Read-only inputs shared by every case of a run.
struct RunInputs {
  const FusedIndex* index = nullptr;
  const MemeCatalog* corpus = nullptr;
  // Raw query embeddings keyed `<id>` or `<id>#ori|#b|#m`; optional. Without
  // a record for a variant, retrieval falls back to the original meme's
  // record and then to the meme's own index entry.
  const QueryEmbeddings* queries = nullptr;
  // Rewrites from an earlier pass; when present for a meme, the analyst is
  // not called for it.
  const RewriteMap* rewrites = nullptr;
};

// Runs one meme through the configured stages. Never throws for per-case
// problems: any stage error yields a failed trace naming the stage.
CaseTrace run_case(const Meme& meme, const RunInputs& inputs, const PipelineConfig& config,
                   const PromptSet& prompts, Backend& backend);

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void write(const CaseTrace& trace) = 0;
};

// Appends one JSON line per trace and flushes, so an interrupted run leaves
// only whole lines behind. Throws InputError on I/O failure.
class JsonlTraceSink final : public TraceSink {
 public:
  JsonlTraceSink(const std::filesystem::path& path, bool append);
  void write(const CaseTrace& trace) override;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class MemoryTraceSink final : public TraceSink {
 public:
  void write(const CaseTrace& trace) override { traces.push_back(trace); }
  std::vector<CaseTrace> traces;
};

struct RunOptions {
  // Plain text, one completed id per line. Ids listed there are skipped and
  // every finished case (failed ones included) is appended.
  std::optional<std::filesystem::path> checkpoint;
};

struct RunSummary {
  std::size_t n_cases = 0;  // cases executed in this invocation
  std::size_t n_failed = 0;
  std::size_t n_skipped = 0;  // already in the checkpoint
  std::map<std::string, Verdict> verdicts;
};

// Runs every manifest row in manifest order. Rows whose image could not be
// read at load time fail at stage "ingest". With workers > 1 (and a backend
// that allows it) cases run concurrently, but traces are still written in
// manifest order. Only sink or checkpoint I/O errors abort the run.
RunSummary run_dataset(const Manifest& manifest, const RunInputs& inputs, const PipelineConfig& config,
                       const PromptSet& prompts, Backend& backend, TraceSink& sink, const RunOptions& options = {});

std::vector<std::string> read_checkpoint(const std::filesystem::path& path);

struct RewriteSummary {
  std::size_t written = 0;
  // id -> error for memes that were skipped (unreadable image, backend error).
  std::map<std::string, std::string> failed;
};

// First pass of the two-pass flow: rewrites every readable manifest meme
// both ways and writes {"id", "b_text", "m_text"} lines.
RewriteSummary run_rewrites(const Manifest& manifest, const PromptSet& prompts, Backend& backend, std::ostream& out);

}  // namespace prism
