#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ectx/meta_ops.hpp"
#include "ectx/structured_output.hpp"

namespace ectx {

inline constexpr const char* kTrajectorySchema = "ectx.trajectory.v1";

// What a baseline strategy did to the history this turn, recorded so replay
// needs neither backend nor tools. type is one of
// "discard" | "summary" | "summary-fallback-discard".
struct StrategyEvent {
  std::string type;
  std::string text;  // the summary text, for type == "summary"

  bool operator==(const StrategyEvent&) const = default;
};

// Durable per-turn record: everything needed to audit a turn and to replay
// the episode's rendered views bit-exactly.
struct TurnRecord {
  std::string episode_id;
  int round = 1;
  int turn = 1;  // 1-based within the round
  std::string rendered_view;  // the exact view sent to the backend
  std::string raw_output;     // the exact backend emission
  bool parse_ok = true;
  std::string parse_error;
  std::vector<std::string> warnings;
  std::vector<MetaOp> applied_ops;
  std::vector<OpError> batch_errors;
  std::optional<ToolCall> tool_call;
  bool tool_ok = true;
  std::string tool_result;
  std::optional<StrategyEvent> strategy_event;
  std::size_t tokens_before = 0;  // estimate of rendered_view
  std::size_t tokens_after = 0;   // estimate of the post-turn context
  std::int64_t ts_ms = 0;

  bool operator==(const TurnRecord&) const = default;
};

struct TrajectoryHeader {
  std::string schema = kTrajectorySchema;
  std::string estimator = kDefaultEstimatorName;
  std::string episode_id;
  std::string question;
  std::string strategy = "context-react";
  int window = 0;
  std::size_t threshold = 0;
  int max_tool_calls = 300;
  int max_rounds = 5;
  std::size_t token_budget = 0;
  std::string backend;

  bool operator==(const TrajectoryHeader&) const = default;
};

// ── JSON forms ──────────────────────────────────────────────────────────

inline nlohmann::ordered_json header_to_json(const TrajectoryHeader& h) {
  nlohmann::ordered_json j;
  j["schema"] = h.schema;
  j["estimator"] = h.estimator;
  j["episode_id"] = h.episode_id;
  j["question"] = h.question;
  j["strategy"] = h.strategy;
  j["window"] = h.window;
  j["threshold"] = h.threshold;
  j["max_tool_calls"] = h.max_tool_calls;
  j["max_rounds"] = h.max_rounds;
  j["token_budget"] = h.token_budget;
  j["backend"] = h.backend;
  return j;
}

inline TrajectoryHeader header_from_json(const nlohmann::json& j) {
  TrajectoryHeader h;
  h.schema = j.at("schema").get<std::string>();
  if (h.schema != kTrajectorySchema) {
    throw std::runtime_error("unsupported trajectory schema: " + h.schema);
  }
  h.estimator = j.at("estimator").get<std::string>();
  h.episode_id = j.at("episode_id").get<std::string>();
  h.question = j.at("question").get<std::string>();
  h.strategy = j.at("strategy").get<std::string>();
  h.window = j.at("window").get<int>();
  h.threshold = j.at("threshold").get<std::size_t>();
  h.max_tool_calls = j.at("max_tool_calls").get<int>();
  h.max_rounds = j.at("max_rounds").get<int>();
  h.token_budget = j.at("token_budget").get<std::size_t>();
  h.backend = j.at("backend").get<std::string>();
  return h;
}

inline nlohmann::ordered_json turn_to_json(const TurnRecord& r) {
  nlohmann::ordered_json j;
  j["episode_id"] = r.episode_id;
  j["round"] = r.round;
  j["turn"] = r.turn;
  j["rendered_view"] = r.rendered_view;
  j["raw_output"] = r.raw_output;
  j["parse_ok"] = r.parse_ok;
  j["parse_error"] = r.parse_error;
  j["warnings"] = r.warnings;
  j["applied_ops"] = nlohmann::ordered_json::array();
  for (const auto& op : r.applied_ops) j["applied_ops"].push_back(meta_op_to_json(op));
  j["batch_errors"] = nlohmann::ordered_json::array();
  for (const auto& e : r.batch_errors) j["batch_errors"].push_back(op_error_to_json(e));
  if (r.tool_call) {
    nlohmann::ordered_json call;
    call["name"] = r.tool_call->name;
    call["arguments"] = nlohmann::ordered_json(r.tool_call->arguments);
    j["tool_call"] = call;
  } else {
    j["tool_call"] = nullptr;
  }
  j["tool_ok"] = r.tool_ok;
  j["tool_result"] = r.tool_result;
  if (r.strategy_event) {
    j["strategy_event"] = {{"type", r.strategy_event->type},
                           {"text", r.strategy_event->text}};
  } else {
    j["strategy_event"] = nullptr;
  }
  j["tokens_before"] = r.tokens_before;
  j["tokens_after"] = r.tokens_after;
  j["ts_ms"] = r.ts_ms;
  return j;
}

inline TurnRecord turn_from_json(const nlohmann::json& j) {
  TurnRecord r;
  r.episode_id = j.at("episode_id").get<std::string>();
  r.round = j.at("round").get<int>();
  r.turn = j.at("turn").get<int>();
  r.rendered_view = j.at("rendered_view").get<std::string>();
  r.raw_output = j.at("raw_output").get<std::string>();
  r.parse_ok = j.at("parse_ok").get<bool>();
  r.parse_error = j.at("parse_error").get<std::string>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto& op : j.at("applied_ops")) {
    r.applied_ops.push_back(meta_op_from_json(op));
  }
  for (const auto& e : j.at("batch_errors")) {
    r.batch_errors.push_back(op_error_from_json(e));
  }
  if (!j.at("tool_call").is_null()) {
    r.tool_call = ToolCall{j.at("tool_call").at("name").get<std::string>(),
                           j.at("tool_call").at("arguments")};
  }
  r.tool_ok = j.at("tool_ok").get<bool>();
  r.tool_result = j.at("tool_result").get<std::string>();
  if (!j.at("strategy_event").is_null()) {
    r.strategy_event =
        StrategyEvent{j.at("strategy_event").at("type").get<std::string>(),
                      j.at("strategy_event").at("text").get<std::string>()};
  }
  r.tokens_before = j.at("tokens_before").get<std::size_t>();
  r.tokens_after = j.at("tokens_after").get<std::size_t>();
  r.ts_ms = j.at("ts_ms").get<std::int64_t>();
  return r;
}

// ── Writer / reader ─────────────────────────────────────────────────────

// Append-only JSONL file: one header line, then one line per turn, flushed
// after every append so a crash between turns loses at most the in-flight
// turn. One writer per file.
class JsonlTrajectoryWriter {
 public:
  JsonlTrajectoryWriter(std::string path, const TrajectoryHeader& header)
      : path_(std::move(path)), out_(path_, std::ios::binary | std::ios::trunc) {
    if (!out_) {
      throw std::runtime_error("cannot open trajectory file for writing: " +
                               path_);
    }
    out_ << header_to_json(header).dump() << "\n";
    out_.flush();
    if (!out_) throw std::runtime_error("trajectory write failed: " + path_);
  }

  void append_turn(const TurnRecord& record) {
    const auto key = std::make_pair(record.round, record.turn);
    if (!seen_.insert(key).second) {
      throw std::runtime_error(
          "duplicate turn record (round " + std::to_string(record.round) +
          ", turn " + std::to_string(record.turn) + ") in " + path_);
    }
    out_ << turn_to_json(record).dump() << "\n";
    out_.flush();
    if (!out_) throw std::runtime_error("trajectory write failed: " + path_);
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::set<std::pair<int, int>> seen_;
};

struct Trajectory {
  TrajectoryHeader header;
  std::vector<TurnRecord> turns;
};

inline Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  Trajectory traj;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error(path + ": malformed JSON on line " +
                               std::to_string(line_no));
    }
    try {
      if (line_no == 1) {
        traj.header = header_from_json(j);
      } else {
        traj.turns.push_back(turn_from_json(j));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  // a zero-line file reads back as an empty trajectory
  return traj;
}

}  // namespace ectx
