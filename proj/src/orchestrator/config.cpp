#include "prism/orchestrator/config.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "prism/agents/prompts.hpp"
#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

namespace {

using json = nlohmann::json;

template <typename T>
T get_as(const json& j, std::string_view key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InputError(fmt::format("config key '{}' has the wrong type", key));
  }
}

std::size_t get_count(const json& j, std::string_view key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw InputError(fmt::format("config key '{}' must be a non-negative integer", key));
  }
  return j.get<std::size_t>();
}

std::vector<std::string> split_csv(std::string_view csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', start), csv.size());
    const auto item = text::trim(csv.substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

std::vector<VariantKind> canonical_variants(std::vector<VariantKind> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

void apply_backend(const json& j, const std::filesystem::path& base_dir, BackendSpec& spec) {
  if (!j.is_object()) throw InputError("config key 'backend' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      const auto kind = get_as<std::string>(value, key);
      if (kind == "scripted") {
        spec.kind = BackendKind::Scripted;
      } else if (kind == "http") {
        spec.kind = BackendKind::HttpEndpoint;
      } else {
        throw InputError("backend kind must be 'scripted' or 'http', got '" + kind + "'");
      }
    } else if (key == "script") {
      spec.script_path = resolve(base_dir, get_as<std::string>(value, key)).string();
    } else if (key == "endpoint_url") {
      spec.endpoint_url = get_as<std::string>(value, key);
    } else if (key == "model") {
      spec.model_name = get_as<std::string>(value, key);
    } else if (key == "retry_limit") {
      spec.retry_limit = get_as<int>(value, key);
    } else if (key == "timeout_ms") {
      spec.timeout_ms = get_as<int>(value, key);
    } else if (key == "backoff_ms") {
      spec.backoff_ms = get_as<int>(value, key);
    } else if (key == "max_in_flight") {
      spec.max_in_flight = get_as<int>(value, key);
    } else {
      throw InputError("unknown backend config key '" + key + "'");
    }
  }
}

void apply_prompts(const json& j, const std::filesystem::path& base_dir, PromptPaths& paths) {
  if (!j.is_object()) throw InputError("config key 'prompts' must be an object");
  for (const auto& [key, value] : j.items()) {
    auto path = resolve(base_dir, get_as<std::string>(value, key));
    if (key == "benevolent") {
      paths.benevolent = path;
    } else if (key == "malicious") {
      paths.malicious = path;
    } else if (key == "investigator") {
      paths.interpret = path;
    } else if (key == "prosecutor") {
      paths.prosecute = path;
    } else if (key == "core") {
      paths.core = path;
    } else if (key == "judge") {
      paths.judge = path;
    } else if (key == "direct") {
      paths.direct = path;
    } else {
      throw InputError("unknown prompt key '" + key + "'");
    }
  }
}

std::vector<std::string> prompt_overrides(const PromptPaths& p) {
  std::vector<std::string> names;
  if (p.benevolent) names.emplace_back("benevolent");
  if (p.malicious) names.emplace_back("malicious");
  if (p.interpret) names.emplace_back("investigator");
  if (p.prosecute) names.emplace_back("prosecutor");
  if (p.core) names.emplace_back("core");
  if (p.judge) names.emplace_back("judge");
  if (p.direct) names.emplace_back("direct");
  return names;
}

}  // namespace

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Analyst:
      return "analyst";
    case Stage::Investigator:
      return "investigator";
    case Stage::Prosecutor:
      return "prosecutor";
    case Stage::Judge:
      return "judge";
  }
  return "analyst";
}

Stage stage_from_string(std::string_view s) {
  for (Stage stage : kAllStages) {
    if (to_string(stage) == s) return stage;
  }
  throw InputError("unknown stage '" + std::string(s) + "'");
}

std::vector<VariantKind> parse_variant_list(std::string_view csv) {
  std::vector<VariantKind> out;
  for (const auto& item : split_csv(csv)) out.push_back(variant_from_suffix(item));
  return out;
}

std::vector<Stage> parse_stage_list(std::string_view csv) {
  std::vector<Stage> out;
  for (const auto& item : split_csv(csv)) out.push_back(stage_from_string(item));
  return out;
}

bool PipelineConfig::selected(VariantKind v) const noexcept {
  return std::find(variants.begin(), variants.end(), v) != variants.end();
}

std::vector<VariantKind> PipelineConfig::effective_variants() const {
  if (!enabled(Stage::Analyst)) return {VariantKind::Original};
  return canonical_variants(variants);
}

void PipelineConfig::validate() const {
  if (variants.empty()) throw PreconditionError("variant selection must not be empty");
  if (std::set<VariantKind>(variants.begin(), variants.end()).size() != variants.size()) {
    throw PreconditionError("variant selection lists a variant twice");
  }
  if (enabled(Stage::Judge) && k_core == 0) throw PreconditionError("K must be >= 1 when the judge is enabled");
  if (workers < 1) throw PreconditionError("workers must be >= 1");
}

std::string PipelineConfig::fingerprint() const {
  std::vector<std::string_view> stage_names;
  for (Stage s : kAllStages) {
    if (enabled(s)) stage_names.push_back(to_string(s));
  }
  std::vector<std::string_view> variant_names;
  for (VariantKind v : canonical_variants(variants)) variant_names.push_back(variant_suffix(v));
  const auto overrides = prompt_overrides(prompts);

  return fmt::format("k={};K={};alpha={};beta={};stages={};core={};variants={};backend={};seed={};prompts={}",
                     k_evidence, k_core, weights.alpha(), weights.beta(), fmt::join(stage_names, ","),
                     core_representation ? "on" : "off", fmt::join(variant_names, ","), backend.describe(), seed,
                     overrides.empty() ? std::string("default") : fmt::format("{}", fmt::join(overrides, ",")));
}

PipelineConfig config_from_json_text(std::string_view text, const std::filesystem::path& base_dir,
                                     PipelineConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config must be a JSON object");

  PipelineConfig c = std::move(base);
  std::optional<float> alpha;
  std::optional<float> beta;
  for (const auto& [key, value] : j.items()) {
    if (key == "k_evidence" || key == "k") {
      c.k_evidence = get_count(value, key);
    } else if (key == "k_core" || key == "K") {
      c.k_core = get_count(value, key);
    } else if (key == "alpha") {
      alpha = get_as<float>(value, key);
    } else if (key == "beta") {
      beta = get_as<float>(value, key);
    } else if (key == "stages") {
      c.stages = {false, false, false, false};
      for (const auto& s : get_as<std::vector<std::string>>(value, key)) c.set_enabled(stage_from_string(s), true);
    } else if (key == "core_representation") {
      c.core_representation = get_as<bool>(value, key);
    } else if (key == "variants") {
      c.variants.clear();
      for (const auto& v : get_as<std::vector<std::string>>(value, key)) c.variants.push_back(variant_from_suffix(v));
    } else if (key == "backend") {
      apply_backend(value, base_dir, c.backend);
    } else if (key == "workers") {
      c.workers = get_as<int>(value, key);
    } else if (key == "seed") {
      c.seed = get_count(value, key);
    } else if (key == "prompts") {
      apply_prompts(value, base_dir, c.prompts);
    } else if (key == "corpus") {
      c.data.corpus = resolve(base_dir, get_as<std::string>(value, key));
    } else if (key == "queries") {
      c.data.queries = resolve(base_dir, get_as<std::string>(value, key));
    } else if (key == "variant_embeddings") {
      c.data.variant_embeddings = resolve(base_dir, get_as<std::string>(value, key));
    } else {
      throw InputError("unknown config key '" + key + "'");
    }
  }
  if (alpha || beta) {
    const float a = alpha.value_or(beta ? 1.0f - *beta : c.weights.alpha());
    const float b = beta.value_or(1.0f - a);
    c.weights = FusionWeights(a, b);
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  return config_from_json_text(read_text_file(path), path.parent_path(), std::move(base));
}

std::string config_to_json_text(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["k_evidence"] = c.k_evidence;
  j["k_core"] = c.k_core;
  j["alpha"] = c.weights.alpha();
  j["beta"] = c.weights.beta();
  auto stages = nlohmann::ordered_json::array();
  for (Stage s : kAllStages) {
    if (c.enabled(s)) stages.push_back(to_string(s));
  }
  j["stages"] = stages;
  j["core_representation"] = c.core_representation;
  auto variants = nlohmann::ordered_json::array();
  for (VariantKind v : canonical_variants(c.variants)) variants.push_back(variant_suffix(v));
  j["variants"] = variants;

  nlohmann::ordered_json backend;
  backend["kind"] = c.backend.kind == BackendKind::Scripted ? "scripted" : "http";
  if (c.backend.script_path) backend["script"] = *c.backend.script_path;
  if (c.backend.endpoint_url) backend["endpoint_url"] = *c.backend.endpoint_url;
  if (c.backend.model_name) backend["model"] = *c.backend.model_name;
  backend["retry_limit"] = c.backend.retry_limit;
  backend["timeout_ms"] = c.backend.timeout_ms;
  backend["backoff_ms"] = c.backend.backoff_ms;
  backend["max_in_flight"] = c.backend.max_in_flight;
  j["backend"] = backend;
  j["workers"] = c.workers;
  j["seed"] = c.seed;

  nlohmann::ordered_json prompts = nlohmann::ordered_json::object();
  auto put = [&](const char* name, const std::optional<std::filesystem::path>& p) {
    if (p) prompts[name] = p->string();
  };
  put("benevolent", c.prompts.benevolent);
  put("malicious", c.prompts.malicious);
  put("investigator", c.prompts.interpret);
  put("prosecutor", c.prompts.prosecute);
  put("core", c.prompts.core);
  put("judge", c.prompts.judge);
  put("direct", c.prompts.direct);
  j["prompts"] = prompts;
  if (c.data.corpus) j["corpus"] = c.data.corpus->string();
  if (c.data.queries) j["queries"] = c.data.queries->string();
  if (c.data.variant_embeddings) j["variant_embeddings"] = c.data.variant_embeddings->string();
  return j.dump(2);
}

}  // namespace prism
