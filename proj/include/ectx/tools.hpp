#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ectx/history.hpp"
#include "ectx/tokens.hpp"

namespace ectx {

inline constexpr const char* kFinalAnswerTool = "final_answer";

// Observation returned to the agent. Errors render as text with ok=false so
// the model can see and react to them; executing a tool never aborts a turn.
struct ToolResult {
  std::string text;
  bool ok = true;
  std::size_t token_estimate = 0;
};

// Byte-cap truncation with an explicit marker. The marker is appended whole,
// never split: output length <= cap + marker length.
inline std::string truncate_bytes(const std::string& text, std::size_t cap) {
  if (cap == 0 || text.size() <= cap) return text;
  return text.substr(0, cap) + "\n[truncated at " + std::to_string(cap) +
         " bytes]";
}

class ToolRegistry {
 public:
  using Handler = std::function<ToolResult(const nlohmann::json& args)>;

  explicit ToolRegistry(TokenEstimator estimator = nullptr)
      : estimator_(estimator ? std::move(estimator)
                             : TokenEstimator([](std::string_view t) {
                                 return bytes_per_token_estimate(t);
                               })) {
    register_tool(kFinalAnswerTool,
                  "final_answer{\"answer\": text} ends the episode",
                  [](const nlohmann::json& args) {
                    ToolResult r;
                    if (!args.contains("answer")) {
                      r.ok = false;
                      r.text = "final_answer requires an 'answer' argument";
                      return r;
                    }
                    r.text = "final answer recorded";
                    return r;
                  });
  }

  void register_tool(std::string name, std::string description,
                     Handler handler) {
    tools_[std::move(name)] = Entry{std::move(description), std::move(handler)};
  }

  bool has(const std::string& name) const { return tools_.count(name) > 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : tools_) out.push_back(name);
    return out;  // map order: sorted, deterministic
  }

  std::string describe() const {
    std::string out;
    for (const auto& [name, entry] : tools_) {
      out += "- " + name + ": " + entry.description + "\n";
    }
    return out;
  }

  // Total: every call yields a result. Unknown names and handler exceptions
  // become error observations.
  ToolResult execute(const ToolCall& call) const {
    ToolResult result;
    auto it = tools_.find(call.name);
    if (it == tools_.end()) {
      result.ok = false;
      result.text = "unknown tool '" + call.name + "'; valid tools:";
      for (const auto& name : names()) result.text += " " + name;
    } else {
      try {
        result = it->second.handler(call.arguments);
      } catch (const std::exception& e) {
        result.ok = false;
        result.text = std::string("tool '") + call.name + "' failed: " + e.what();
      }
    }
    result.token_estimate = estimator_(result.text);
    return result;
  }

 private:
  struct Entry {
    std::string description;
    Handler handler;
  };
  std::map<std::string, Entry> tools_;
  TokenEstimator estimator_;
};

}  // namespace ectx
