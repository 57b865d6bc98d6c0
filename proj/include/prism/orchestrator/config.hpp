#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prism/agents/prompts.hpp"
#include "prism/backend/backend.hpp"
#include "prism/core/types.hpp"
#include "prism/retrieval/fusion.hpp"

namespace prism {

enum class Stage { Analyst, Investigator, Prosecutor, Judge };

inline constexpr std::array<Stage, 4> kAllStages = {Stage::Analyst, Stage::Investigator, Stage::Prosecutor,
                                                    Stage::Judge};

std::string_view to_string(Stage s) noexcept;
Stage stage_from_string(std::string_view s);

// Run inputs a config file may name; never part of the fingerprint.
struct DataPaths {
  std::optional<std::filesystem::path> corpus;  // reference corpus manifest
  std::optional<std::filesystem::path> queries;
  std::optional<std::filesystem::path> variant_embeddings;
};

struct PipelineConfig {
  std::size_t k_evidence = 3;
  std::size_t k_core = 7;
  FusionWeights weights;
  std::array<bool, 4> stages = {true, true, true, true};  // indexed by Stage
  // Whether the judge sees the core representation of the top-K memes.
  bool core_representation = true;
  std::vector<VariantKind> variants = {kAllVariants.begin(), kAllVariants.end()};
  BackendSpec backend;
  int workers = 1;
  std::uint64_t seed = 0;
  PromptPaths prompts;
  DataPaths data;

  bool enabled(Stage s) const noexcept { return stages[static_cast<std::size_t>(s)]; }
  void set_enabled(Stage s, bool on) noexcept { stages[static_cast<std::size_t>(s)] = on; }
  bool selected(VariantKind v) const noexcept;

  // The variants that actually flow through a case, in canonical order
  // (ori, b, m). Without the analyst only the original is available.
  std::vector<VariantKind> effective_variants() const;

  // Throws PreconditionError on an empty or duplicated variant selection,
  // k_core == 0 with the judge enabled, or workers < 1. The backend spec is
  // checked separately when the backend is built.
  void validate() const;

  // Canonical one-line description of everything that can change a verdict,
  // e.g. "k=3;K=7;alpha=0.8;beta=0.2;stages=analyst,investigator,...".
  std::string fingerprint() const;
};

// Reads a JSON config. Relative paths (script, prompt overrides) resolve
// against `base_dir`. Unknown keys throw InputError.
PipelineConfig config_from_json_text(std::string_view text, const std::filesystem::path& base_dir,
                                     PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

std::string config_to_json_text(const PipelineConfig& config);

// "ori,b,m" -> variants; "analyst,judge" -> stage list.
std::vector<VariantKind> parse_variant_list(std::string_view csv);
std::vector<Stage> parse_stage_list(std::string_view csv);

}  // namespace prism
