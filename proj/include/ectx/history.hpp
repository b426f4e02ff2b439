#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace ectx {

struct ToolCall {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();

  bool operator==(const ToolCall&) const = default;
};

enum class StepKind { original, summary };

inline std::string to_string(StepKind kind) {
  return kind == StepKind::original ? "original" : "summary";
}

// One unit of the working context. Original steps hold a reasoning trace, an
// optional tool call and the observation the tool returned. Summary steps hold
// abstractive text that replaced a span of earlier steps; they carry no
// reasoning or tool call of their own.
//
// Each step keeps the display label(s) it stands for: an original step records
// the display index it occupied when appended, a summary records the label
// span of the steps it replaced. Labels are what the "[steps a-b]" banner in
// the rendered view refers to; they are not positions in the current sequence.
struct Step {
  std::uint64_t id = 0;
  StepKind kind = StepKind::original;
  std::string reasoning;
  std::optional<ToolCall> tool_call;
  std::string observation;
  std::uint64_t label_lo = 0;
  std::uint64_t label_hi = 0;
  bool snippet_applied = false;

  std::optional<std::pair<std::uint64_t, std::uint64_t>> origin_span() const {
    if (kind != StepKind::summary) return std::nullopt;
    return std::make_pair(label_lo, label_hi);
  }

  bool operator==(const Step&) const = default;
};

// Ordered step sequence plus the id counter. Value type: copy freely, share
// const snapshots across threads; one logical writer mutates it per episode.
struct History {
  std::vector<Step> steps;
  std::uint64_t next_id = 1;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  // 1-based display index, matching the numbering the model sees.
  const Step& at_display(std::size_t k) const {
    if (k < 1 || k > steps.size()) {
      throw std::out_of_range("display index " + std::to_string(k) +
                              " out of range 1.." + std::to_string(steps.size()));
    }
    return steps[k - 1];
  }

  Step& append_original(std::string reasoning, std::optional<ToolCall> call,
                        std::string observation) {
    Step s;
    s.id = next_id++;
    s.kind = StepKind::original;
    s.reasoning = std::move(reasoning);
    s.tool_call = std::move(call);
    s.observation = std::move(observation);
    s.label_lo = s.label_hi = static_cast<std::uint64_t>(steps.size()) + 1;
    steps.push_back(std::move(s));
    return steps.back();
  }

  bool operator==(const History&) const = default;
};

}  // namespace ectx
