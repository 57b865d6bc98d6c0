#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prism {

// Stage tags. The scripted backend keys its responses on these.
namespace tags {
inline constexpr std::string_view kAnalystBenevolent = "analyst_benevolent";
inline constexpr std::string_view kAnalystMalicious = "analyst_malicious";
inline constexpr std::string_view kInvestigator = "investigator";
inline constexpr std::string_view kProsecutor = "prosecutor";
inline constexpr std::string_view kCore = "core";
inline constexpr std::string_view kJudge = "judge";
inline constexpr std::string_view kDirect = "direct";
inline constexpr std::string_view kRubric = "rubric";
}  // namespace tags

inline constexpr float kRewriteTemperature = 0.3f;
inline constexpr float kDeterministicTemperature = 0.0f;
inline constexpr int kRewriteMaxTokens = 256;
inline constexpr int kReasoningMaxTokens = 1024;
// Core-representation requests carry the target plus K similar memes.
inline constexpr std::size_t kMaxImagesPerRequest = 16;

struct ChatRequest {
  std::string prompt;
  // Image refs, in the order the prompt refers to them.
  std::vector<std::string> images;
  float temperature = kDeterministicTemperature;
  int max_tokens = kReasoningMaxTokens;
  std::string tag;
};

// Throws PreconditionError for negative temperature, non-positive
// max_tokens, too many images or an empty tag.
void validate(const ChatRequest& req);

enum class BackendKind { HttpEndpoint, Scripted };

struct BackendSpec {
  BackendKind kind = BackendKind::Scripted;
  std::optional<std::string> endpoint_url;
  std::optional<std::string> model_name;
  std::optional<std::string> script_path;
  int retry_limit = 2;
  int timeout_ms = 120000;
  int backoff_ms = 500;  // first retry delay; doubles per attempt
  int max_in_flight = 4;

  // HttpEndpoint needs endpoint_url and model_name; Scripted needs
  // script_path. Throws PreconditionError otherwise.
  void validate() const;
  // Short provenance string, e.g. "scripted" or "http:gpt-4o".
  std::string describe() const;
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Returns the raw model text for one request.
  virtual std::string complete(const ChatRequest& req) = 0;

  // Scripted replay depends on call order, so callers must not fan out.
  virtual bool requires_serial_calls() const noexcept { return false; }
};

// Throws PreconditionError on an invalid spec, InputError when a script file
// cannot be loaded.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec);

// Counts calls passing through to another backend. One is created per case so
// traces can report how many model calls the case cost.
class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(Backend& inner) : inner_(inner) {}

  std::string complete(const ChatRequest& req) override {
    ++calls_;
    return inner_.complete(req);
  }
  bool requires_serial_calls() const noexcept override { return inner_.requires_serial_calls(); }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  Backend& inner_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace prism
