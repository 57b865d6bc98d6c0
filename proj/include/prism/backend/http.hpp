#pragma once

#include <condition_variable>
#include <mutex>
#include <optional>
#include <string>

#include "prism/backend/backend.hpp"

namespace prism {

// OpenAI-compatible chat-completions client. Images are read from disk and
// inlined as base64 data URLs. Transport failures, 429 and 5xx responses are
// retried up to retry_limit times with exponential backoff; any other
// response is final.
class HttpBackend final : public Backend {
 public:
  // api_key defaults to $PRISM_API_KEY when unset.
  explicit HttpBackend(BackendSpec spec, std::optional<std::string> api_key = std::nullopt);

  std::string complete(const ChatRequest& req) override;

  // Number of HTTP attempts made so far, retries included.
  std::size_t attempts() const noexcept;

  // Request body for `req` as sent on the wire (exposed for tests).
  std::string build_body(const ChatRequest& req) const;

 private:
  std::string post_once(const std::string& body, bool& retryable, bool& timed_out);

  BackendSpec spec_;
  std::optional<std::string> api_key_;
  std::string scheme_host_port_;
  std::string path_prefix_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  std::size_t attempts_ = 0;
};

// MIME type guessed from the file extension (png, jpg, jpeg, gif, webp, bmp).
std::string image_mime_type(std::string_view path);
std::string base64_encode(std::string_view bytes);

}  // namespace prism
