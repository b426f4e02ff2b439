#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ectx/meta_ops.hpp"

namespace ectx {

// The four-field structured model emission. One tagged region per field:
//
//   <think>…</think>
//   <meta_tool_call>[{"op":…}, …]</meta_tool_call>
//   <motivation>…</motivation>
//   <standard_tool_call>{"name":…,"arguments":{…}}</standard_tool_call>
//
// Regions may appear in any order on the wire; rendering always emits them in
// the canonical order above. Region contents are captured byte-for-byte.
struct StructuredOutput {
  std::string think;
  std::vector<MetaOp> meta_ops;
  std::string motivation;
  ToolCall tool_call;
  std::vector<std::string> warnings;  // not part of the semantic value

  bool same_semantics(const StructuredOutput& other) const {
    return think == other.think && meta_ops == other.meta_ops &&
           motivation == other.motivation && tool_call == other.tool_call;
  }
};

struct ParseError {
  std::size_t position = 0;  // byte offset into the raw text
  std::string reason;
};

struct ParseOutcome {
  std::optional<StructuredOutput> output;
  ParseError error;

  bool ok() const { return output.has_value(); }
};

namespace detail {

struct Region {
  bool present = false;
  std::size_t position = 0;
  std::string content;
};

inline constexpr std::array<std::string_view, 4> kRegionTags = {
    "think", "meta_tool_call", "motivation", "standard_tool_call"};

// Scans top-level tagged regions left to right. Tag-lookalikes inside an
// earlier region's content are skipped because scanning resumes after each
// closing tag.
inline bool scan_regions(std::string_view raw, std::array<Region, 4>& regions,
                         ParseError& error) {
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::size_t best = std::string_view::npos;
    int best_tag = -1;
    for (int t = 0; t < 4; ++t) {
      const std::string open = "<" + std::string(kRegionTags[t]) + ">";
      const auto found = raw.find(open, pos);
      if (found != std::string_view::npos && found < best) {
        best = found;
        best_tag = t;
      }
    }
    if (best_tag < 0) break;
    const std::string open = "<" + std::string(kRegionTags[best_tag]) + ">";
    const std::string close = "</" + std::string(kRegionTags[best_tag]) + ">";
    const auto content_start = best + open.size();
    const auto close_pos = raw.find(close, content_start);
    if (close_pos == std::string_view::npos) {
      error = {best, "unbalanced region: missing " + close};
      return false;
    }
    Region& r = regions[static_cast<std::size_t>(best_tag)];
    if (r.present) {
      error = {best, "duplicate <" + std::string(kRegionTags[best_tag]) +
                         "> region"};
      return false;
    }
    r.present = true;
    r.position = best;
    r.content = std::string(raw.substr(content_start, close_pos - content_start));
    pos = close_pos + close.size();
  }
  return true;
}

}  // namespace detail

// Extracts the four tagged regions from a raw model emission. A missing
// <meta_tool_call> region parses as a single skip with a warning; missing
// <think>/<motivation> regions parse as empty text with a warning. A missing
// or malformed <standard_tool_call> region is a parse error.
inline ParseOutcome parse_output(std::string_view raw) {
  ParseOutcome outcome;
  std::array<detail::Region, 4> regions;
  if (!detail::scan_regions(raw, regions, outcome.error)) {
    return outcome;
  }
  const auto& think = regions[0];
  const auto& meta = regions[1];
  const auto& motivation = regions[2];
  const auto& tool = regions[3];

  StructuredOutput out;
  if (think.present) {
    out.think = think.content;
  } else {
    out.warnings.push_back("missing <think> region");
  }
  if (motivation.present) {
    out.motivation = motivation.content;
  } else {
    out.warnings.push_back("missing <motivation> region");
  }

  if (!meta.present) {
    out.meta_ops.push_back(SkipOp{});
    out.warnings.push_back("missing <meta_tool_call> region; treated as skip");
  } else {
    const auto body = nlohmann::json::parse(meta.content, nullptr, false);
    if (body.is_discarded() || !body.is_array()) {
      outcome.error = {meta.position,
                       "meta_tool_call body must be a JSON array of op objects"};
      return outcome;
    }
    for (const auto& item : body) {
      try {
        out.meta_ops.push_back(meta_op_from_json(item, &out.warnings));
      } catch (const std::invalid_argument& e) {
        outcome.error = {meta.position, e.what()};
        return outcome;
      }
    }
  }

  if (!tool.present) {
    outcome.error = {0, "missing <standard_tool_call> region"};
    return outcome;
  }
  const auto body = nlohmann::json::parse(tool.content, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    outcome.error = {tool.position,
                     "standard_tool_call body must be a JSON object"};
    return outcome;
  }
  if (!body.contains("name") || !body.at("name").is_string()) {
    outcome.error = {tool.position,
                     "standard_tool_call requires a string 'name' field"};
    return outcome;
  }
  out.tool_call.name = body.at("name").get<std::string>();
  if (body.contains("arguments")) {
    if (!body.at("arguments").is_object()) {
      outcome.error = {tool.position,
                       "standard_tool_call 'arguments' must be an object"};
      return outcome;
    }
    out.tool_call.arguments = body.at("arguments");
  } else {
    out.tool_call.arguments = nlohmann::json::object();
    out.warnings.push_back("standard_tool_call has no 'arguments'; using {}");
  }

  outcome.output = std::move(out);
  return outcome;
}

// Canonical textual form: the four regions in fixed order, op objects in the
// documented wire grammar, compact JSON bodies. Deterministic: semantically
// equal outputs render byte-identically.
inline std::string render_output(const StructuredOutput& x) {
  nlohmann::ordered_json ops = nlohmann::ordered_json::array();
  for (const auto& op : x.meta_ops) ops.push_back(meta_op_to_json(op));

  nlohmann::ordered_json call;
  call["name"] = x.tool_call.name;
  call["arguments"] = x.tool_call.arguments;

  std::string out;
  out += "<think>" + x.think + "</think>\n";
  out += "<meta_tool_call>" + ops.dump() + "</meta_tool_call>\n";
  out += "<motivation>" + x.motivation + "</motivation>\n";
  out += "<standard_tool_call>" + call.dump() + "</standard_tool_call>";
  return out;
}

}  // namespace ectx
