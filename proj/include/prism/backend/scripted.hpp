#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "prism/backend/backend.hpp"

namespace prism {

struct ScriptEntry {
  std::string tag;
  std::string response;
};

struct CallRecord {
  std::string tag;
  std::size_t ordinal = 0;  // 0-based position within the tag
  ChatRequest request;
  std::string response;
};

// Deterministic stand-in for a model endpoint. Responses are consumed FIFO per
// tag; the prompt content is never inspected, so tests can vary retrieved text
// freely without touching the script.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> entries);

  // Script file: JSONL of {"tag": str, "response": str}.
  static ScriptedBackend from_file(const std::filesystem::path& path);
  static std::vector<ScriptEntry> load_script(const std::filesystem::path& path);

  // Throws ScriptExhausted when the tag has no responses left.
  std::string complete(const ChatRequest& req) override;
  bool requires_serial_calls() const noexcept override { return true; }

  std::vector<CallRecord> call_log() const;
  std::size_t calls() const;
  std::size_t calls_with_tag(std::string_view tag) const;
  std::size_t remaining(std::string_view tag) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::deque<std::string>, std::less<>> queues_;
  std::map<std::string, std::size_t, std::less<>> consumed_;
  std::vector<CallRecord> log_;
};

}  // namespace prism
