#include "prism/orchestrator/pipeline.hpp"

#include <chrono>
#include <future>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "prism/agents/agents.hpp"
#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct QueryVector {
  std::vector<float> vector;
  std::string source;
};

class QueryResolver {
 public:
  QueryResolver(const Meme& meme, const RunInputs& inputs, FusionWeights weights)
      : meme_(meme), inputs_(inputs), weights_(weights) {}

  const QueryVector& get(VariantKind v) {
    auto it = cache_.find(v);
    if (it == cache_.end()) it = cache_.emplace(v, resolve(v)).first;
    return it->second;
  }

 private:
  QueryVector resolve(VariantKind v) const {
    if (inputs_.queries != nullptr) {
      if (const auto* rec = inputs_.queries->find(variant_id(meme_.id, v))) return {fuse(*rec, weights_), "variant"};
      if (const auto* rec = inputs_.queries->find(meme_.id)) return {fuse(*rec, weights_), "original"};
      if (const auto* rec = inputs_.queries->find(variant_id(meme_.id, VariantKind::Original))) {
        return {fuse(*rec, weights_), "original"};
      }
    }
    if (const auto* entry = inputs_.index->find(meme_.id)) return {entry->vector, "index"};
    throw InputError("no query embedding for meme '" + meme_.id + "'");
  }

  const Meme& meme_;
  const RunInputs& inputs_;
  FusionWeights weights_;
  std::map<VariantKind, QueryVector> cache_;
};

Meme reused_rewrite(const Meme& meme, const RewritePair& pair, VariantKind v) {
  std::string text = v == VariantKind::Benevolent ? pair.b_text : pair.m_text;
  if (text::trim(text).empty()) text = text::trim(meme.text).empty() ? std::string(kNoTextMarker) : meme.text;
  return Meme{variant_id(meme.id, v), meme.image_ref, std::move(text)};
}

CaseTrace failed_trace(const Meme& meme, const PipelineConfig& config, std::string stage, std::string error) {
  CaseTrace t;
  t.meme_id = meme.id;
  t.status = CaseStatus::Failed;
  t.failure = CaseFailure{std::move(stage), std::move(error)};
  t.image_ref = meme.image_ref;
  t.variants.push_back({VariantKind::Original, variant_id(meme.id, VariantKind::Original), meme.text, "input"});
  t.config_fingerprint = config.fingerprint();
  return t;
}

}  // namespace

RewriteMap load_rewrites(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read rewrites file " + path.string());
  RewriteMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto where = fmt::format("{}:{}", path.string(), lineno);
    try {
      const auto j = nlohmann::json::parse(line);
      auto id = j.at("id").get<std::string>();
      RewritePair pair{j.at("b_text").get<std::string>(), j.at("m_text").get<std::string>()};
      if (!out.emplace(id, std::move(pair)).second) throw InputError(where + ": duplicate id '" + id + "'");
    } catch (const nlohmann::json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return out;
}

CaseTrace run_case(const Meme& meme, const RunInputs& inputs, const PipelineConfig& config, const PromptSet& prompts,
                   Backend& backend) {
  CountingBackend counted(backend);
  CaseTrace t;
  t.meme_id = meme.id;
  t.image_ref = meme.image_ref;
  t.config_fingerprint = config.fingerprint();
  t.variants.push_back({VariantKind::Original, variant_id(meme.id, VariantKind::Original), meme.text, "input"});

  const auto case_start = Clock::now();
  std::string stage = "config";
  auto timed = [&](const char* name, auto&& fn) {
    stage = name;
    const auto start = Clock::now();
    fn();
    t.timings_ms[name] += elapsed_ms(start);
  };

  try {
    config.validate();
    if (inputs.index == nullptr || inputs.corpus == nullptr) throw PreconditionError("run needs an index and a corpus");
    if (!(config.weights == inputs.index->weights())) {
      throw PreconditionError("config fusion weights differ from the index's");
    }
    const auto selected = config.effective_variants();
    QueryResolver queries(meme, inputs, config.weights);

    std::map<VariantKind, Meme> memes{{VariantKind::Original, meme}};
    if (config.enabled(Stage::Analyst)) {
      timed("analyst", [&] {
        t.rewrites.emplace();
        const RewritePair* reuse = nullptr;
        if (inputs.rewrites != nullptr) {
          auto it = inputs.rewrites->find(meme.id);
          if (it != inputs.rewrites->end()) reuse = &it->second;
        }
        for (VariantKind v : selected) {
          if (v == VariantKind::Original) continue;
          const Intent intent = v == VariantKind::Benevolent ? Intent::Benevolent : Intent::Malicious;
          Meme rewritten = reuse ? reused_rewrite(meme, *reuse, v) : analyst_rewrite(meme, intent, prompts, counted);
          VariantRecord rec{v, rewritten.id, rewritten.text, reuse ? "file" : "analyst"};
          t.rewrites->push_back(rec);
          t.variants.push_back(std::move(rec));
          memes.emplace(v, std::move(rewritten));
        }
      });
    }

    std::map<VariantKind, std::string> notes;
    if (config.enabled(Stage::Investigator)) {
      t.evidence.emplace();
      t.interpretations.emplace();
      for (VariantKind v : selected) {
        RetrievalRecord retrieval{v, "none", EvidenceSet{variant_id(meme.id, v), {}}};
        timed("retrieval", [&] {
          if (config.k_evidence == 0 || inputs.index->empty()) return;
          const auto& q = queries.get(v);
          retrieval.embedding_source = q.source;
          retrieval.evidence = inputs.index->top_k(q.vector, config.k_evidence, meme.id, retrieval.evidence.query_id);
        });
        timed("investigator", [&] {
          auto state = investigate(v, retrieval.evidence, *inputs.corpus, prompts, counted);
          notes[v] = state.rules();
          t.interpretations->push_back(std::move(state));
        });
        t.evidence->push_back(std::move(retrieval));
      }
    }

    if (!config.enabled(Stage::Prosecutor)) {
      timed("direct", [&] { t.direct = direct_classify(meme, prompts, counted); });
      t.final_verdict = t.direct->verdict;
      t.decision = Decision::Direct;
    } else {
      std::vector<ProsecutionResult> results;
      timed("prosecutor", [&] {
        for (VariantKind v : selected) results.push_back(prosecute(meme, notes[v], v, prompts, counted));
      });
      t.prosecutions = results;

      // The original's prosecution is the reference; without it, the first
      // selected variant takes that role.
      const ProsecutionResult& reference = results.front();
      std::vector<ProsecutionResult> dissents;
      for (const auto& r : results) {
        if (r.verdict != reference.verdict) dissents.push_back(r);
      }

      if (dissents.empty()) {
        t.final_verdict = reference.verdict;
        t.decision = Decision::Unanimous;
      } else if (config.enabled(Stage::Judge)) {
        std::string core;
        if (config.core_representation) {
          timed("core", [&] {
            EvidenceSet core_evidence{variant_id(meme.id, VariantKind::Original), {}};
            if (!inputs.index->empty()) {
              core_evidence = inputs.index->top_k(queries.get(VariantKind::Original).vector, config.k_core, meme.id,
                                                  core_evidence.query_id);
            }
            core = core_representation(meme, core_evidence, *inputs.corpus, prompts, counted);
            t.core_evidence = std::move(core_evidence);
            t.core_representation = core;
          });
        }
        timed("judge", [&] { t.judge_output = judge(meme, reference, dissents, core, prompts, counted); });
        t.final_verdict = t.judge_output->verdict;
        t.decision = Decision::Judge;
      } else {
        std::size_t harmful = 0;
        for (const auto& r : results) harmful += r.verdict == Verdict::Harmful ? 1 : 0;
        const std::size_t harmless = results.size() - harmful;
        if (harmful == harmless) {
          t.final_verdict = reference.verdict;
        } else {
          t.final_verdict = harmful > harmless ? Verdict::Harmful : Verdict::Harmless;
        }
        t.decision = Decision::Majority;
      }
    }
  } catch (const std::exception& e) {
    t.status = CaseStatus::Failed;
    t.failure = CaseFailure{stage, e.what()};
    t.final_verdict.reset();
    t.decision.reset();
  }

  t.backend_calls = counted.calls();
  t.timings_ms["total"] = elapsed_ms(case_start);
  return t;
}

JsonlTraceSink::JsonlTraceSink(const std::filesystem::path& path, bool append)
    : path_(path), out_(path, append ? std::ios::app : std::ios::trunc) {
  if (!out_) throw InputError("cannot open trace file " + path.string());
}

void JsonlTraceSink::write(const CaseTrace& trace) {
  out_ << trace_to_json_line(trace) << '\n';
  out_.flush();
  if (!out_) throw InputError("failed writing trace file " + path_.string());
}

std::vector<std::string> read_checkpoint(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  std::ifstream in(path);
  if (!in) return ids;
  std::string line;
  while (std::getline(in, line)) {
    auto id = text::trim(line);
    if (!id.empty()) ids.emplace_back(id);
  }
  return ids;
}

RunSummary run_dataset(const Manifest& manifest, const RunInputs& inputs, const PipelineConfig& config,
                       const PromptSet& prompts, Backend& backend, TraceSink& sink, const RunOptions& options) {
  RunSummary summary;
  std::unordered_set<std::string> done;
  std::ofstream checkpoint;
  if (options.checkpoint) {
    for (auto& id : read_checkpoint(*options.checkpoint)) done.insert(std::move(id));
    checkpoint.open(*options.checkpoint, std::ios::app);
    if (!checkpoint) throw InputError("cannot open checkpoint " + options.checkpoint->string());
  }

  std::vector<const ManifestRow*> pending;
  for (const auto& row : manifest.rows()) {
    if (done.contains(row.meme.id)) {
      ++summary.n_skipped;
    } else {
      pending.push_back(&row);
    }
  }

  auto process = [&](const ManifestRow& row) {
    if (!row.image_readable) {
      return failed_trace(row.meme, config, "ingest", "image not readable: " + row.meme.image_ref);
    }
    return run_case(row.meme, inputs, config, prompts, backend);
  };
  auto record = [&](const CaseTrace& trace) {
    sink.write(trace);
    if (checkpoint.is_open()) {
      checkpoint << trace.meme_id << '\n';
      checkpoint.flush();
      if (!checkpoint) throw InputError("failed writing checkpoint " + options.checkpoint->string());
    }
    ++summary.n_cases;
    if (trace.status == CaseStatus::Failed) {
      ++summary.n_failed;
    } else if (trace.final_verdict) {
      summary.verdicts[trace.meme_id] = *trace.final_verdict;
    }
  };

  const std::size_t workers =
      backend.requires_serial_calls() ? 1 : static_cast<std::size_t>(std::max(1, config.workers));
  for (std::size_t start = 0; start < pending.size(); start += workers) {
    const std::size_t end = std::min(pending.size(), start + workers);
    if (workers == 1) {
      record(process(*pending[start]));
      continue;
    }
    std::vector<std::future<CaseTrace>> chunk;
    for (std::size_t i = start; i < end; ++i) {
      chunk.push_back(std::async(std::launch::async, process, std::cref(*pending[i])));
    }
    for (auto& f : chunk) record(f.get());
  }
  return summary;
}

RewriteSummary run_rewrites(const Manifest& manifest, const PromptSet& prompts, Backend& backend, std::ostream& out) {
  RewriteSummary summary;
  for (const auto& row : manifest.rows()) {
    if (!row.image_readable) {
      summary.failed[row.meme.id] = "image not readable: " + row.meme.image_ref;
      continue;
    }
    try {
      const Meme b = analyst_rewrite(row.meme, Intent::Benevolent, prompts, backend);
      const Meme m = analyst_rewrite(row.meme, Intent::Malicious, prompts, backend);
      nlohmann::ordered_json j;
      j["id"] = row.meme.id;
      j["b_text"] = b.text;
      j["m_text"] = m.text;
      out << j.dump() << '\n';
      if (!out) throw InputError("failed writing rewrites");
      ++summary.written;
    } catch (const InputError&) {
      throw;
    } catch (const std::exception& e) {
      summary.failed[row.meme.id] = e.what();
    }
  }
  return summary;
}

}  // namespace prism
