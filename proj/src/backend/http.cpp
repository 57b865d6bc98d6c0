#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "prism/backend/http.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendError("cannot read image '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string image_mime_type(std::string_view path) {
  const std::string lower = text::to_lower(path);
  auto ends_with = [&](std::string_view ext) {
    return lower.size() >= ext.size() && lower.compare(lower.size() - ext.size(), ext.size(), ext) == 0;
  };
  if (ends_with(".jpg") || ends_with(".jpeg")) return "image/jpeg";
  if (ends_with(".gif")) return "image/gif";
  if (ends_with(".webp")) return "image/webp";
  if (ends_with(".bmp")) return "image/bmp";
  return "image/png";
}

HttpBackend::HttpBackend(BackendSpec spec, std::optional<std::string> api_key)
    : spec_(std::move(spec)), api_key_(std::move(api_key)) {
  spec_.kind = BackendKind::HttpEndpoint;
  spec_.validate();
  if (!api_key_) {
    if (const char* env = std::getenv("PRISM_API_KEY"); env && *env) api_key_ = env;
  }
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(*spec_.endpoint_url, m, url_re)) {
    throw PreconditionError("endpoint_url must look like http(s)://host[:port][/path]");
  }
  scheme_host_port_ = m[1].str();
  path_prefix_ = m[2].matched ? m[2].str() : "";
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::size_t HttpBackend::attempts() const noexcept {
  std::lock_guard lock(mu_);
  return attempts_;
}

std::string HttpBackend::build_body(const ChatRequest& req) const {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", req.prompt}});
  for (const auto& image : req.images) {
    const std::string url = "data:" + image_mime_type(image) + ";base64," + base64_encode(read_file(image));
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
  }
  json body = {{"model", *spec_.model_name},
               {"messages", json::array({{{"role", "user"}, {"content", std::move(content)}}})},
               {"temperature", req.temperature},
               {"max_tokens", req.max_tokens}};
  return body.dump();
}

std::string HttpBackend::post_once(const std::string& body, bool& retryable, bool& timed_out) {
  retryable = false;
  timed_out = false;
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::milliseconds(spec_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    retryable = true;
    timed_out = err == httplib::Error::ConnectionTimeout ||
                (err == httplib::Error::Read && std::chrono::steady_clock::now() - started >= timeout);
    throw TransportError("POST " + *spec_.endpoint_url + " failed: " + httplib::to_string(err));
  }
  if (res->status == 429 || res->status >= 500) {
    retryable = true;
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw BackendError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  try {
    const json doc = json::parse(res->body);
    const json& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some servers return content as a list of typed parts.
    std::string joined;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") joined += part.value("text", "");
    }
    return joined;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed chat-completions response: ") + e.what());
  }
}

std::string HttpBackend::complete(const ChatRequest& req) {
  validate(req);
  const std::string body = build_body(req);

  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < spec_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    HttpBackend& self;
    ~Release() {
      {
        std::lock_guard lock(self.mu_);
        --self.in_flight_;
      }
      self.cv_.notify_one();
    }
  } release{*this};

  std::string last_error;
  bool last_timed_out = false;
  for (int attempt = 0; attempt <= spec_.retry_limit; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(spec_.backoff_ms) * (1 << (attempt - 1)));
    }
    {
      std::lock_guard lock(mu_);
      ++attempts_;
    }
    bool retryable = false;
    try {
      return post_once(body, retryable, last_timed_out);
    } catch (const TransportError& e) {
      if (!retryable) throw;
      last_error = e.what();
    }
  }
  const std::string msg = last_error + " (after " + std::to_string(spec_.retry_limit + 1) + " attempts)";
  if (last_timed_out) throw TimeoutError(msg);
  throw TransportError(msg);
}

}  // namespace prism
