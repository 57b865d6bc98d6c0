#include "prism/backend/backend.hpp"

#include "prism/backend/http.hpp"
#include "prism/backend/scripted.hpp"
#include "prism/errors.hpp"

namespace prism {

void validate(const ChatRequest& req) {
  if (req.tag.empty()) throw PreconditionError("chat request needs a stage tag");
  if (!(req.temperature >= 0.0f)) throw PreconditionError("temperature must be >= 0");
  if (req.max_tokens <= 0) throw PreconditionError("max_tokens must be positive");
  if (req.images.size() > kMaxImagesPerRequest) {
    throw PreconditionError("request '" + req.tag + "' carries " + std::to_string(req.images.size()) +
                            " images; the limit is " + std::to_string(kMaxImagesPerRequest));
  }
}

void BackendSpec::validate() const {
  switch (kind) {
    case BackendKind::HttpEndpoint:
      if (!endpoint_url || endpoint_url->empty() || !model_name || model_name->empty()) {
        throw PreconditionError("http backend requires endpoint_url and model_name");
      }
      break;
    case BackendKind::Scripted:
      if (!script_path || script_path->empty()) throw PreconditionError("scripted backend requires script_path");
      break;
  }
  if (retry_limit < 0) throw PreconditionError("retry_limit must be >= 0");
  if (timeout_ms <= 0) throw PreconditionError("timeout_ms must be positive");
  if (backoff_ms < 0) throw PreconditionError("backoff_ms must be >= 0");
  if (max_in_flight < 1) throw PreconditionError("max_in_flight must be >= 1");
}

std::string BackendSpec::describe() const {
  if (kind == BackendKind::Scripted) return "scripted";
  return "http:" + model_name.value_or("?");
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
  spec.validate();
  if (spec.kind == BackendKind::Scripted) {
    return std::make_unique<ScriptedBackend>(ScriptedBackend::load_script(*spec.script_path));
  }
  return std::make_unique<HttpBackend>(spec);
}

}  // namespace prism
