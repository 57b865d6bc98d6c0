#include "prism/backend/scripted.hpp"

#include <fstream>

#include <json.hpp>

#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

using nlohmann::json;

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries) {
  for (auto& e : entries) {
    auto it = queues_.find(e.tag);
    if (it == queues_.end()) it = queues_.emplace(e.tag, std::deque<std::string>{}).first;
    it->second.push_back(std::move(e.response));
  }
}

std::vector<ScriptEntry> ScriptedBackend::load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open script " + path.string());
  std::vector<ScriptEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const json obj = json::parse(line);
      ScriptEntry e{obj.at("tag").get<std::string>(), obj.at("response").get<std::string>()};
      if (e.tag.empty()) throw InputError(where + ": empty tag");
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw InputError(where + ": " + ex.what());
    }
  }
  return entries;
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  return ScriptedBackend(load_script(path));
}

std::string ScriptedBackend::complete(const ChatRequest& req) {
  validate(req);
  std::lock_guard lock(mu_);
  auto it = queues_.find(req.tag);
  if (it == queues_.end() || it->second.empty()) throw ScriptExhausted(req.tag);
  std::string response = std::move(it->second.front());
  it->second.pop_front();
  std::size_t& ordinal = consumed_[req.tag];
  log_.push_back({req.tag, ordinal, req, response});
  ++ordinal;
  return response;
}

std::vector<CallRecord> ScriptedBackend::call_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::size_t ScriptedBackend::calls_with_tag(std::string_view tag) const {
  std::lock_guard lock(mu_);
  auto it = consumed_.find(tag);
  return it == consumed_.end() ? 0 : it->second;
}

std::size_t ScriptedBackend::remaining(std::string_view tag) const {
  std::lock_guard lock(mu_);
  auto it = queues_.find(tag);
  return it == queues_.end() ? 0 : it->second.size();
}

}  // namespace prism
