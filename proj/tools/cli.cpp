#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "prism/agents/prompts.hpp"
#include "prism/core/labels.hpp"
#include "prism/core/manifest.hpp"
#include "prism/core/text.hpp"
#include "prism/errors.hpp"
#include "prism/evaluation/metrics.hpp"
#include "prism/evaluation/report.hpp"
#include "prism/evaluation/rubric.hpp"
#include "prism/orchestrator/config.hpp"
#include "prism/orchestrator/pipeline.hpp"
#include "prism/orchestrator/trace.hpp"
#include "prism/retrieval/embedding_file.hpp"
#include "prism/retrieval/index.hpp"

namespace prism {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void refuse_clobber(const fs::path& p, bool force) {
  if (fs::exists(p) && !force) throw UsageError(p.string() + " already exists; pass --force to overwrite");
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw InputError("cannot write " + path.string());
}

std::string file_stem_for(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    out += keep ? c : '_';
  }
  return out;
}

bool is_fused_index_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::string first;
  std::getline(in, first);
  try {
    const auto j = nlohmann::json::parse(first);
    return j.is_object() && j.value("kind", std::string()) == "fused-index";
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

// ---- shared flag groups ----

struct BackendFlags {
  std::string kind;
  std::string script;
  std::string endpoint;
  std::string model;
  std::optional<int> retry_limit;
  std::optional<int> timeout_ms;
  std::optional<int> max_in_flight;

  void add(CLI::App* app) {
    app->add_option("--backend", kind, "Backend kind")->check(CLI::IsMember({"scripted", "http"}));
    app->add_option("--script", script, "Scripted backend file (JSONL of {tag, response})");
    app->add_option("--endpoint", endpoint, "OpenAI-compatible base URL");
    app->add_option("--model", model, "Model name for the HTTP backend");
    app->add_option("--retry-limit", retry_limit, "HTTP retries after the first attempt");
    app->add_option("--timeout-ms", timeout_ms, "HTTP request timeout");
    app->add_option("--max-in-flight", max_in_flight, "Concurrent HTTP requests");
  }

  void apply(BackendSpec& spec) const {
    if (!kind.empty()) spec.kind = kind == "http" ? BackendKind::HttpEndpoint : BackendKind::Scripted;
    if (!script.empty()) {
      spec.script_path = script;
      if (kind.empty()) spec.kind = BackendKind::Scripted;
    }
    if (!endpoint.empty()) {
      spec.endpoint_url = endpoint;
      if (kind.empty()) spec.kind = BackendKind::HttpEndpoint;
    }
    if (!model.empty()) spec.model_name = model;
    if (retry_limit) spec.retry_limit = *retry_limit;
    if (timeout_ms) spec.timeout_ms = *timeout_ms;
    if (max_in_flight) spec.max_in_flight = *max_in_flight;
  }
};

struct PipelineFlags {
  std::string config;
  std::optional<std::size_t> k;
  std::optional<std::size_t> K;
  std::optional<float> alpha;
  std::optional<float> beta;
  std::string stages;
  std::string variants;
  bool no_core = false;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  BackendFlags backend;

  void add(CLI::App* app) {
    app->add_option("--config", config, "Pipeline config (JSON)");
    app->add_option("--k", k, "Evidence memes per variant");
    app->add_option("--K", K, "Similar memes for the core representation");
    app->add_option("--alpha", alpha, "Visual fusion weight");
    app->add_option("--beta", beta, "Textual fusion weight");
    app->add_option("--stages", stages, "Enabled stages, e.g. analyst,investigator,prosecutor,judge");
    app->add_option("--variants", variants, "Variant selection, e.g. ori,b,m");
    app->add_flag("--no-core", no_core, "Judge without the core representation");
    app->add_option("--workers", workers, "Concurrent cases (forced to 1 for scripted backends)");
    app->add_option("--seed", seed, "Recorded in the config fingerprint");
    backend.add(app);
  }

  bool weights_given() const { return alpha.has_value() || beta.has_value(); }

  // Built-in defaults < config file < flags.
  PipelineConfig resolve() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : load_config(config);
    if (k) c.k_evidence = *k;
    if (K) c.k_core = *K;
    if (weights_given()) {
      const float a = alpha.value_or(1.0f - beta.value_or(0.0f));
      c.weights = FusionWeights(a, beta.value_or(1.0f - a));
    }
    if (!stages.empty()) {
      c.stages = {false, false, false, false};
      for (Stage s : parse_stage_list(stages)) c.set_enabled(s, true);
    }
    if (!variants.empty()) c.variants = parse_variant_list(variants);
    if (no_core) c.core_representation = false;
    if (workers) c.workers = *workers;
    if (seed) c.seed = *seed;
    backend.apply(c.backend);
    return c;
  }
};

struct DataFlags {
  std::string manifest;
  std::string corpus;
  std::string index;
  std::string embeddings;
  std::string queries;
  std::string variant_embeddings;

  void add(CLI::App* app) {
    app->add_option("--manifest", manifest, "Memes to classify (JSONL)")->required();
    app->add_option("--corpus", corpus, "Reference corpus manifest (JSONL)");
    app->add_option("--index", index, "Fused index file or raw embedding file of the corpus");
    app->add_option("--embeddings", embeddings, "Raw embedding file of the corpus");
    app->add_option("--queries", queries, "Raw embeddings of the manifest memes");
    app->add_option("--variant-embeddings", variant_embeddings, "Embeddings keyed <id>#ori|#b|#m");
  }
};

struct LoadedRun {
  PipelineConfig config;
  Manifest manifest;
  MemeCatalog corpus;
  FusedIndex index;
  std::optional<EmbeddingFile> raw;
  QueryEmbeddings queries;
  bool has_queries = false;
  PromptSet prompts;
};

LoadedRun load_run(const DataFlags& data, const PipelineFlags& flags, std::ostream& err) {
  LoadedRun run;
  run.config = flags.resolve();
  run.config.validate();
  run.prompts = PromptSet::load(run.config.prompts);
  run.manifest = load_manifest(data.manifest);

  std::optional<fs::path> corpus = data.corpus.empty() ? run.config.data.corpus : fs::path(data.corpus);
  if (!corpus) throw UsageError("no reference corpus: pass --corpus or set \"corpus\" in the config");
  run.corpus = MemeCatalog(load_manifest(*corpus));

  if (!data.index.empty() && !data.embeddings.empty()) throw UsageError("pass either --index or --embeddings");
  if (data.index.empty() && data.embeddings.empty()) throw UsageError("pass --index or --embeddings");
  const fs::path index_path = data.index.empty() ? fs::path(data.embeddings) : fs::path(data.index);
  if (data.embeddings.empty() && is_fused_index_file(index_path)) {
    run.index = load_index_file(index_path);
    if (!(run.index.weights() == run.config.weights)) {
      if (flags.weights_given()) {
        throw UsageError(fmt::format("{} was built with alpha={} beta={}; rebuild it or drop --alpha/--beta",
                                     index_path.string(), run.index.weights().alpha(), run.index.weights().beta()));
      }
      err << fmt::format("note: using the index's fusion weights alpha={} beta={}\n", run.index.weights().alpha(),
                         run.index.weights().beta());
      run.config.weights = run.index.weights();
    }
  } else {
    run.raw = load_embedding_file(index_path);
    run.index = FusedIndex::build(run.raw->records, run.config.weights, run.raw->header.encoder);
  }

  std::optional<fs::path> queries = data.queries.empty() ? run.config.data.queries : fs::path(data.queries);
  std::optional<fs::path> variants =
      data.variant_embeddings.empty() ? run.config.data.variant_embeddings : fs::path(data.variant_embeddings);
  if (queries) run.queries.add(load_embedding_file(*queries));
  if (variants) run.queries.add(load_embedding_file(*variants));
  run.has_queries = queries.has_value() || variants.has_value();
  return run;
}

RunSummary execute(const LoadedRun& run, const PipelineConfig& config, const FusedIndex& index,
                   const fs::path& traces, const std::optional<fs::path>& checkpoint, bool append,
                   const RewriteMap* rewrites) {
  auto backend = make_backend(config.backend);
  JsonlTraceSink sink(traces, append);
  RunInputs inputs{&index, &run.corpus, run.has_queries ? &run.queries : nullptr, rewrites};
  return run_dataset(run.manifest, inputs, config, run.prompts, *backend, sink, RunOptions{checkpoint});
}

void report_summary(const RunSummary& s, const fs::path& traces, std::ostream& out) {
  out << fmt::format("{} cases run, {} failed, {} skipped -> {}\n", s.n_cases, s.n_failed, s.n_skipped,
                     traces.string());
}

std::string render_metric_report(const MetricReport& r) {
  const MetricReport one[] = {r};
  std::string text = compare_reports(one).table;
  text += "\nclass     precision  recall     f1  support\n";
  auto row = [](std::string_view name, const ClassMetrics& m) {
    return fmt::format("{:<8}  {:>9.2f}  {:>6.2f}  {:>5.2f}  {:>7}\n", name, m.precision * 100, m.recall * 100,
                       m.f1 * 100, m.support);
  };
  text += row("harmful", r.harmful);
  text += row("harmless", r.harmless);
  if (r.n_unscored_gold > 0) text += fmt::format("\n{} labelled memes had no trace\n", r.n_unscored_gold);
  return text;
}

// ---- inspect ----

std::string indent(std::string_view body, std::string_view pad) {
  std::string out;
  std::size_t start = 0;
  const auto trimmed = text::trim(body);
  if (trimmed.empty()) return std::string(pad) + "(empty)\n";
  while (start <= trimmed.size()) {
    const std::size_t nl = std::min(trimmed.find('\n', start), trimmed.size());
    out += pad;
    out += trimmed.substr(start, nl - start);
    out += '\n';
    start = nl + 1;
  }
  return out;
}

std::string render_trace(const CaseTrace& t) {
  std::string s;
  s += fmt::format("meme {}  [{}]", t.meme_id, to_string(t.status));
  if (t.final_verdict) s += fmt::format("  final: {}", to_string(*t.final_verdict));
  if (t.decision) s += fmt::format(" ({})", to_string(*t.decision));
  s += "\n";
  if (t.failure) s += fmt::format("failed at {}: {}\n", t.failure->stage, t.failure->error);
  s += fmt::format("image: {}\nconfig: {}\nbackend calls: {}\n", t.image_ref, t.config_fingerprint, t.backend_calls);

  s += "\n== variants\n";
  for (const auto& v : t.variants) s += fmt::format("  {:<3} [{}] {}\n", variant_suffix(v.variant), v.source, v.text);

  if (t.evidence) {
    s += "\n== evidence\n";
    for (const auto& r : *t.evidence) {
      s += fmt::format("  {} (query embedding: {})\n", variant_suffix(r.variant), r.embedding_source);
      for (std::size_t i = 0; i < r.evidence.hits.size(); ++i) {
        s += fmt::format("    {}. {}  {:.4f}\n", i + 1, r.evidence.hits[i].meme_id, r.evidence.hits[i].similarity);
      }
    }
  }
  if (t.interpretations) {
    s += "\n== interpretations\n";
    for (const auto& state : *t.interpretations) {
      s += fmt::format("  {}\n", variant_suffix(state.variant));
      for (std::size_t i = 0; i < state.steps.size(); ++i) {
        const auto& st = state.steps[i];
        s += fmt::format("    step {} from {}{}{}\n", i + 1, st.evidence_id,
                         st.marker_missing ? " (no updated rules, carried forward)" : "",
                         st.truncated ? " (truncated to 5 rules)" : "");
        s += indent(st.rules, "      ");
      }
    }
  }
  auto prosecution = [&](const ProsecutionResult& p) {
    s += fmt::format("  {} -> {}{}{}\n", variant_suffix(p.variant), to_string(p.verdict),
                     p.attempts > 1 ? " (retried)" : "", p.parse_fallback ? " (parse fallback)" : "");
    s += indent(p.rationale, "    ");
  };
  if (t.prosecutions) {
    s += "\n== prosecutions\n";
    for (const auto& p : *t.prosecutions) prosecution(p);
  }
  if (t.direct) {
    s += "\n== direct classification\n";
    prosecution(*t.direct);
  }
  if (t.core_representation) {
    s += "\n== core representation";
    if (t.core_evidence) {
      std::vector<std::string> ids;
      for (const auto& h : t.core_evidence->hits) ids.push_back(h.meme_id);
      s += fmt::format(" (from {})", fmt::join(ids, ", "));
    }
    s += "\n" + indent(*t.core_representation, "  ");
  }
  if (t.judge_output) {
    s += fmt::format("\n== judge -> {}{}\n", to_string(t.judge_output->verdict),
                     t.judge_output->parse_fallback ? " (parse fallback)" : "");
    s += indent(t.judge_output->rationale, "  ");
  }
  return s;
}

// ---- grids ----

struct GridEntry {
  std::string name;
  std::function<void(PipelineConfig&)> apply;
};

std::vector<GridEntry> grid_entries(const std::string& grid) {
  auto disable = [](Stage s) { return [s](PipelineConfig& c) { c.set_enabled(s, false); }; };
  auto select = [](std::vector<VariantKind> v) { return [v](PipelineConfig& c) { c.variants = v; }; };
  using VK = VariantKind;
  const GridEntry full{"full", [](PipelineConfig&) {}};
  const std::vector<GridEntry> agents = {{"wo_analyst", disable(Stage::Analyst)},
                                         {"wo_investigator", disable(Stage::Investigator)},
                                         {"wo_prosecutor", disable(Stage::Prosecutor)},
                                         {"wo_judge", disable(Stage::Judge)}};
  const std::vector<GridEntry> variants = {{"ori", select({VK::Original})},
                                           {"m", select({VK::Malicious})},
                                           {"b", select({VK::Benevolent})},
                                           {"ori_m", select({VK::Original, VK::Malicious})},
                                           {"ori_b", select({VK::Original, VK::Benevolent})}};
  const std::vector<GridEntry> core = {{"wo_core", [](PipelineConfig& c) { c.core_representation = false; }}};

  std::vector<GridEntry> out{full};
  if (grid == "agents" || grid == "all") out.insert(out.end(), agents.begin(), agents.end());
  if (grid == "variants" || grid == "all") out.insert(out.end(), variants.begin(), variants.end());
  if (grid == "core" || grid == "all") out.insert(out.end(), core.begin(), core.end());
  if (out.size() > 1) return out;

  // A grid file: [{"name": str, "config": {...}}, ...] applied over the base config.
  const fs::path path(grid);
  if (!fs::exists(path)) throw UsageError("unknown grid '" + grid + "' (agents, variants, core, all or a JSON file)");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  if (!j.is_array() || j.empty()) throw InputError(path.string() + ": grid must be a non-empty JSON array");
  out.clear();
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("name")) throw InputError(path.string() + ": grid entries need a name");
    const std::string overrides = item.value("config", nlohmann::json::object()).dump();
    const fs::path base_dir = path.parent_path();
    out.push_back({item.at("name").get<std::string>(), [overrides, base_dir](PipelineConfig& c) {
                     c = config_from_json_text(overrides, base_dir, c);
                   }});
  }
  return out;
}

struct Variation {
  std::string name;
  PipelineConfig config;
};

// Runs every variation into out_dir and writes the comparison table.
int run_variations(const LoadedRun& run, const std::vector<Variation>& variations, const fs::path& out_dir,
                   const std::string& report_stem, LabelScheme scheme, bool force, std::ostream& out,
                   std::ostream& err) {
  fs::create_directories(out_dir);
  for (const auto& v : variations) refuse_clobber(out_dir / (file_stem_for(v.name) + ".traces.jsonl"), force);
  refuse_clobber(out_dir / (report_stem + ".txt"), force);

  std::vector<MetricReport> reports;
  for (const auto& v : variations) {
    v.config.validate();
    const fs::path traces = out_dir / (file_stem_for(v.name) + ".traces.jsonl");
    FusedIndex rebuilt;
    const FusedIndex* index = &run.index;
    if (!(v.config.weights == run.index.weights())) {
      if (!run.raw) throw UsageError("changing fusion weights needs a raw embedding file (--embeddings)");
      rebuilt = FusedIndex::build(run.raw->records, v.config.weights, run.raw->header.encoder);
      index = &rebuilt;
    }
    const auto summary = execute(run, v.config, *index, traces, std::nullopt, false, nullptr);
    err << fmt::format("{}: {} cases, {} failed\n", v.name, summary.n_cases, summary.n_failed);
    try {
      reports.push_back(evaluate_traces(load_traces(traces), run.manifest, scheme, v.name));
    } catch (const EmptyPredictions&) {
      MetricReport empty;
      empty.name = v.name;
      empty.n_failed = summary.n_failed;
      empty.config_fingerprint = v.config.fingerprint();
      reports.push_back(empty);
    }
  }
  const auto comparison = compare_reports(reports);
  write_file(out_dir / (report_stem + ".txt"), comparison.table);
  write_file(out_dir / (report_stem + ".json"), comparison.json);
  out << comparison.table;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"multi-agent harmful meme detection", "prism"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // build-index
  auto* build = app.add_subcommand("build-index", "Fuse raw corpus embeddings into an index file");
  std::string build_embeddings, build_out;
  std::optional<float> build_alpha, build_beta;
  bool build_force = false;
  build->add_option("--embeddings", build_embeddings, "Raw embedding file")->required();
  build->add_option("--alpha", build_alpha, "Visual weight (default 0.8)");
  build->add_option("--beta", build_beta, "Textual weight (default 1 - alpha)");
  build->add_option("--out", build_out, "Index file to write")->required();
  build->add_flag("--force", build_force, "Overwrite an existing output");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the pipeline over a manifest");
  DataFlags run_data;
  PipelineFlags run_flags;
  std::string run_traces, run_checkpoint, run_rewrites_out, run_rewrites_in;
  bool run_force = false, run_resume = false, run_rewrites_only = false;
  run_data.add(run_cmd);
  run_flags.add(run_cmd);
  run_cmd->add_option("--traces", run_traces, "Trace file (JSONL)");
  run_cmd->add_option("--checkpoint", run_checkpoint, "Completed-ids file (default <traces>.checkpoint)");
  run_cmd->add_flag("--force", run_force, "Overwrite existing outputs");
  run_cmd->add_flag("--resume", run_resume, "Skip cases listed in the checkpoint and append traces");
  run_cmd->add_flag("--rewrites-only", run_rewrites_only, "Only produce analyst rewrites");
  run_cmd->add_option("--rewrites-out", run_rewrites_out, "Where --rewrites-only writes {id, b_text, m_text}");
  run_cmd->add_option("--rewrites", run_rewrites_in, "Reuse rewrites from an earlier --rewrites-only pass");

  // eval
  auto* eval = app.add_subcommand("eval", "Score traces against manifest labels");
  std::string eval_traces, eval_manifest, eval_out, eval_labels = "harm", eval_name = "run";
  bool eval_force = false;
  eval->add_option("--traces", eval_traces, "Trace file")->required();
  eval->add_option("--manifest", eval_manifest, "Labelled manifest")->required();
  eval->add_option("--labels", eval_labels, "Label scheme: harm or binary")->capture_default_str();
  eval->add_option("--out", eval_out, "Report file; a .json sidecar is written next to it")->required();
  eval->add_option("--name", eval_name, "Row name in the report")->capture_default_str();
  eval->add_flag("--force", eval_force, "Overwrite an existing report");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run a grid of stage/variant ablations");
  DataFlags ablate_data;
  PipelineFlags ablate_flags;
  std::string ablate_grid, ablate_out_dir, ablate_labels = "harm";
  bool ablate_force = false;
  ablate_data.add(ablate);
  ablate_flags.add(ablate);
  ablate->add_option("--grid", ablate_grid, "agents, variants, core, all or a JSON grid file")->required();
  ablate->add_option("--out-dir", ablate_out_dir, "Directory for traces and the comparison")->required();
  ablate->add_option("--labels", ablate_labels, "Label scheme: harm or binary")->capture_default_str();
  ablate->add_flag("--force", ablate_force, "Overwrite existing outputs");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Sweep k, K or alpha");
  DataFlags sweep_data;
  PipelineFlags sweep_flags;
  std::string sweep_param, sweep_values, sweep_out_dir, sweep_labels = "harm";
  bool sweep_force = false;
  sweep_data.add(sweep);
  sweep_flags.add(sweep);
  sweep->add_option("--param", sweep_param, "k, K or alpha")->required()->check(CLI::IsMember({"k", "K", "alpha"}));
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--out-dir", sweep_out_dir, "Directory for traces and the comparison")->required();
  sweep->add_option("--labels", sweep_labels, "Label scheme: harm or binary")->capture_default_str();
  sweep->add_flag("--force", sweep_force, "Overwrite existing outputs");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print one meme's reasoning chain");
  std::string inspect_traces, inspect_id;
  bool inspect_json = false;
  inspect->add_option("--traces", inspect_traces, "Trace file")->required();
  inspect->add_option("--id", inspect_id, "Meme id")->required();
  inspect->add_flag("--json", inspect_json, "Print the raw trace as indented JSON");

  // rubric
  auto* rubric = app.add_subcommand("rubric", "Score reasoning chains with the interpretability rubric");
  std::string rubric_traces, rubric_out, rubric_config, rubric_prompt;
  std::size_t rubric_sample = 100;
  std::uint64_t rubric_seed = 0;
  bool rubric_force = false;
  BackendFlags rubric_backend;
  rubric->add_option("--traces", rubric_traces, "Trace file")->required();
  rubric->add_option("--out", rubric_out, "Rubric results (JSONL)")->required();
  rubric->add_option("--sample", rubric_sample, "Traces to score")->capture_default_str();
  rubric->add_option("--seed", rubric_seed, "Sampling seed")->capture_default_str();
  rubric->add_option("--config", rubric_config, "Config file supplying the backend");
  rubric->add_option("--prompt", rubric_prompt, "Alternative rubric prompt ({reasoning_chain} slot)");
  rubric->add_flag("--force", rubric_force, "Overwrite an existing output");
  rubric_backend.add(rubric);

  std::vector<std::string> reversed;
  if (args.size() > 1) reversed.assign(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == build) {
      refuse_clobber(build_out, build_force);
      const float a = build_alpha.value_or(build_beta ? 1.0f - *build_beta : 0.8f);
      const FusionWeights weights(a, build_beta.value_or(1.0f - a));
      auto file = load_embedding_file(build_embeddings);
      const auto index = FusedIndex::build(std::move(file.records), weights, file.header.encoder);
      write_index_file(build_out, index);
      out << fmt::format("indexed {} memes (dim {}, encoder {}, alpha {}, beta {}) -> {}\n", index.size(), index.dim(),
                         index.encoder_name(), weights.alpha(), weights.beta(), build_out);
      return kExitOk;
    }

    if (active == run_cmd) {
      if (run_rewrites_only) {
        if (run_rewrites_out.empty()) throw UsageError("--rewrites-only needs --rewrites-out");
        refuse_clobber(run_rewrites_out, run_force);
        auto config = run_flags.resolve();
        const auto prompts = PromptSet::load(config.prompts);
        const auto manifest = load_manifest(run_data.manifest);
        auto backend = make_backend(config.backend);
        std::ofstream rewrites_out(run_rewrites_out, std::ios::trunc);
        if (!rewrites_out) throw InputError("cannot write " + run_rewrites_out);
        const auto summary = run_rewrites(manifest, prompts, *backend, rewrites_out);
        for (const auto& [id, error] : summary.failed) err << fmt::format("skipped {}: {}\n", id, error);
        out << fmt::format("{} rewrites, {} skipped -> {}\n", summary.written, summary.failed.size(),
                           run_rewrites_out);
        return summary.written == 0 && !manifest.empty() ? kExitRuntime : kExitOk;
      }
      if (run_traces.empty()) throw UsageError("run needs --traces (or --rewrites-only)");
      if (run_resume && run_force) throw UsageError("--resume and --force are mutually exclusive");
      const fs::path traces(run_traces);
      const fs::path checkpoint = run_checkpoint.empty() ? fs::path(run_traces + ".checkpoint") : fs::path(run_checkpoint);
      if (!run_resume) {
        refuse_clobber(traces, run_force);
        fs::remove(checkpoint);
      }
      const auto run = load_run(run_data, run_flags, err);
      std::optional<RewriteMap> rewrites;
      if (!run_rewrites_in.empty()) rewrites = load_rewrites(run_rewrites_in);
      const auto summary = execute(run, run.config, run.index, traces, checkpoint, run_resume,
                                   rewrites ? &*rewrites : nullptr);
      report_summary(summary, traces, out);
      return kExitOk;
    }

    if (active == eval) {
      const fs::path report(eval_out);
      refuse_clobber(report, eval_force);
      const auto scheme = label_scheme_from_string(eval_labels);
      const auto manifest = load_manifest(eval_manifest);
      const auto r = evaluate_traces(load_traces(eval_traces), manifest, scheme, eval_name);
      const auto text = render_metric_report(r);
      const MetricReport one[] = {r};
      write_file(report, text);
      write_file(report.string() + ".json", compare_reports(one).json);
      out << text;
      return kExitOk;
    }

    if (active == ablate) {
      const auto scheme = label_scheme_from_string(ablate_labels);
      const auto run = load_run(ablate_data, ablate_flags, err);
      std::vector<Variation> variations;
      for (const auto& entry : grid_entries(ablate_grid)) {
        PipelineConfig c = run.config;
        entry.apply(c);
        variations.push_back({entry.name, std::move(c)});
      }
      return run_variations(run, variations, ablate_out_dir, "ablation", scheme, ablate_force, out, err);
    }

    if (active == sweep) {
      const auto scheme = label_scheme_from_string(sweep_labels);
      const auto run = load_run(sweep_data, sweep_flags, err);
      if (sweep_param == "alpha" && !run.raw) throw UsageError("an alpha sweep needs a raw embedding file");
      std::vector<Variation> variations;
      for (const auto& item : CLI::detail::split(sweep_values, ',')) {
        const auto value_text = std::string(text::trim(item));
        if (value_text.empty()) continue;
        PipelineConfig c = run.config;
        double value = 0;
        try {
          std::size_t used = 0;
          value = std::stod(value_text, &used);
          if (used != value_text.size()) throw std::invalid_argument(value_text);
        } catch (const std::exception&) {
          throw UsageError("not a number in --values: '" + value_text + "'");
        }
        if (sweep_param == "alpha") {
          c.weights = FusionWeights(static_cast<float>(value), static_cast<float>(1.0 - value));
        } else {
          if (value < 0 || value != static_cast<double>(static_cast<std::size_t>(value))) {
            throw UsageError("--values for " + sweep_param + " must be non-negative integers");
          }
          (sweep_param == "k" ? c.k_evidence : c.k_core) = static_cast<std::size_t>(value);
        }
        variations.push_back({sweep_param + "=" + value_text, std::move(c)});
      }
      if (variations.empty()) throw UsageError("--values is empty");
      return run_variations(run, variations, sweep_out_dir, "sweep_" + file_stem_for(sweep_param), scheme,
                            sweep_force, out, err);
    }

    if (active == inspect) {
      std::optional<CaseTrace> found;
      for (auto& t : load_traces(inspect_traces)) {
        if (t.meme_id == inspect_id) found = std::move(t);
      }
      if (!found) {
        err << "no trace for id '" << inspect_id << "' in " << inspect_traces << "\n";
        return kExitRuntime;
      }
      if (inspect_json) {
        out << nlohmann::ordered_json::parse(trace_to_json_line(*found)).dump(2) << "\n";
      } else {
        out << render_trace(*found);
      }
      return kExitOk;
    }

    if (active == rubric) {
      refuse_clobber(rubric_out, rubric_force);
      PipelineConfig config = rubric_config.empty() ? PipelineConfig{} : load_config(rubric_config);
      rubric_backend.apply(config.backend);
      const PromptTemplate prompt(rubric_prompt.empty() ? std::string(default_prompts::rubric())
                                                        : read_text_file(rubric_prompt));
      if (!prompt.has_slot("reasoning_chain")) throw UsageError("rubric prompt needs a {reasoning_chain} slot");
      std::vector<CaseTrace> scorable;
      for (auto& t : load_traces(rubric_traces)) {
        if (t.status == CaseStatus::Ok) scorable.push_back(std::move(t));
      }
      auto backend = make_backend(config.backend);
      std::ofstream results(rubric_out, std::ios::trunc);
      if (!results) throw InputError("cannot write " + rubric_out);
      std::array<double, 5> sums{};
      std::size_t scored = 0;
      std::size_t unparseable = 0;
      for (std::size_t i : sample_indices(scorable.size(), rubric_sample, rubric_seed)) {
        try {
          const auto score = rubric_score(scorable[i], *backend, prompt);
          results << rubric_to_json_line(scorable[i].meme_id, score) << '\n';
          for (std::size_t d = 0; d < sums.size(); ++d) sums[d] += score.values[d];
          ++scored;
        } catch (const Unparseable& e) {
          nlohmann::ordered_json j;
          j["id"] = scorable[i].meme_id;
          j["scores"] = nullptr;
          j["flags"] = {"unparseable"};
          results << j.dump() << '\n';
          err << fmt::format("{}: {}\n", scorable[i].meme_id, e.what());
          ++unparseable;
        }
      }
      out << fmt::format("{} traces scored, {} unparseable -> {}\n", scored, unparseable, rubric_out);
      for (std::size_t d = 0; d < sums.size() && scored > 0; ++d) {
        out << fmt::format("  {:<21} {:.2f}\n", kRubricDimensions[d], sums[d] / static_cast<double>(scored));
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "usage error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace prism
