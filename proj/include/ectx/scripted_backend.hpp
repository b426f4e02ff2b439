#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ectx/backend.hpp"

namespace ectx {

// One scripted response. Entries are tried in order; the first whose
// predicates all hold fires. An entry without predicates is a default and
// matches everything. JSONL form:
//   {"match":{"turn":3},"response":"…"}
//   {"match":{"contains":"population"},"response":"…"}
//   {"response":"…"}                      (default)
//   {"match":{…},"error":"…"}             (simulated backend failure)
struct ScriptEntry {
  std::optional<int> match_turn;
  std::optional<std::string> match_contains;
  std::string response;
  std::optional<std::string> error;

  bool is_default() const { return !match_turn && !match_contains; }

  bool matches(int turn, const std::string& rendered_context) const {
    if (match_turn && *match_turn != turn) return false;
    if (match_contains &&
        rendered_context.find(*match_contains) == std::string::npos) {
      return false;
    }
    return true;
  }
};

// Deterministic backend: a pure function of (script, turn index, rendered
// context). Entries are never consumed, so one entry may fire on many turns
// and repeated runs of an episode are byte-identical.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> entries)
      : entries_(std::move(entries)) {
    bool has_default = false;
    for (const auto& e : entries_) has_default = has_default || e.is_default();
    if (!has_default) {
      throw std::invalid_argument(
          "script must contain a default entry (one without a match)");
    }
  }

  static ScriptedBackend load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open script file: " + path);
    std::vector<ScriptEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error("script line " + std::to_string(line_no) +
                                 " is not a JSON object: " + path);
      }
      ScriptEntry entry;
      if (j.contains("match")) {
        const auto& m = j.at("match");
        if (m.contains("turn")) entry.match_turn = m.at("turn").get<int>();
        if (m.contains("contains")) {
          entry.match_contains = m.at("contains").get<std::string>();
        }
      }
      if (j.contains("error")) {
        entry.error = j.at("error").get<std::string>();
      } else {
        entry.response = j.at("response").get<std::string>();
      }
      entries.push_back(std::move(entry));
    }
    return ScriptedBackend(std::move(entries));
  }

  std::string complete(const BackendRequest& request) override {
    for (const auto& entry : entries_) {
      if (!entry.matches(request.turn_index, request.rendered_context)) {
        continue;
      }
      if (entry.error) throw BackendError(*entry.error);
      return entry.response;
    }
    // unreachable: a default entry always matches
    throw BackendError("script has no matching entry");
  }

  std::string name() const override { return "scripted"; }

 private:
  std::vector<ScriptEntry> entries_;
};

}  // namespace ectx
