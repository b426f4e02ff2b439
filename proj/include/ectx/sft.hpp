#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ectx/trajectory.hpp"

namespace ectx {

// One fine-tuning pair: the exact rendered view the model conditioned on and
// the exact raw emission as the target. Both are verbatim copies of the
// stored turn fields.
struct SftRecord {
  std::string context;
  std::string target;
  std::string episode_id;
  int turn_index = 0;  // 1-based over the episode's records, across rounds

  bool operator==(const SftRecord&) const = default;
};

// Filtering is per episode: a single format-invalid turn (failed parse or
// backend failure) drops the whole episode, since every later context in that
// episode was built on the malformed turn.
inline std::vector<SftRecord> export_sft(
    const std::vector<Trajectory>& trajectories) {
  std::vector<SftRecord> records;
  for (const auto& t : trajectories) {
    bool clean = true;
    for (const auto& rec : t.turns) clean = clean && rec.parse_ok;
    if (!clean) continue;
    int index = 0;
    for (const auto& rec : t.turns) {
      SftRecord r;
      r.context = rec.rendered_view;
      r.target = rec.raw_output;
      r.episode_id = rec.episode_id;
      r.turn_index = ++index;
      records.push_back(std::move(r));
    }
  }
  return records;
}

inline std::string sft_jsonl(const std::vector<SftRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j;
    j["context"] = r.context;
    j["target"] = r.target;
    j["episode_id"] = r.episode_id;
    j["turn_index"] = r.turn_index;
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace ectx
