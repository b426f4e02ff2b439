#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "ectx/meta_ops.hpp"
#include "ectx/trajectory.hpp"

namespace ectx {

// ── Context growth curve ────────────────────────────────────────────────
//
// For each turn index (counted across rounds, in record order), the number of
// episodes still running at that turn and the mean post-management token
// estimate over those survivors. Terminated episodes drop out of the average.

struct GrowthPoint {
  int turn = 0;
  int survivors = 0;
  double mean_tokens = 0.0;
};

inline std::vector<GrowthPoint> growth_curve(
    const std::vector<Trajectory>& trajectories) {
  std::size_t longest = 0;
  for (const auto& t : trajectories) longest = std::max(longest, t.turns.size());
  std::vector<GrowthPoint> points;
  for (std::size_t i = 0; i < longest; ++i) {
    GrowthPoint p;
    p.turn = static_cast<int>(i) + 1;
    double sum = 0.0;
    for (const auto& t : trajectories) {
      if (i < t.turns.size()) {
        ++p.survivors;
        sum += static_cast<double>(t.turns[i].tokens_after);
      }
    }
    p.mean_tokens = p.survivors > 0 ? sum / p.survivors : 0.0;
    points.push_back(p);
  }
  return points;
}

inline std::string growth_csv(const std::vector<GrowthPoint>& points) {
  std::string out = "turn,survivors,mean_tokens\n";
  char buf[64];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.2f\n", p.turn, p.survivors,
                  p.mean_tokens);
    out += buf;
  }
  return out;
}

// ── Meta-operation usage distribution ───────────────────────────────────
//
// Counts successfully applied ops by kind across all turns. A turn whose
// batch ran but applied nothing and errored nothing (an empty op list)
// counts as one skip.

inline const std::array<std::string, 5>& op_kind_order() {
  static const std::array<std::string, 5> order = {"skip", "compress",
                                                   "rollback", "snippet",
                                                   "delete"};
  return order;
}

inline std::map<std::string, std::size_t> op_distribution(
    const std::vector<Trajectory>& trajectories) {
  std::map<std::string, std::size_t> counts;
  for (const auto& name : op_kind_order()) counts[name] = 0;
  for (const auto& t : trajectories) {
    for (const auto& rec : t.turns) {
      if (!rec.parse_ok) continue;
      if (rec.applied_ops.empty() && rec.batch_errors.empty()) {
        counts["skip"] += 1;
        continue;
      }
      for (const auto& op : rec.applied_ops) counts[op_name(op)] += 1;
    }
  }
  return counts;
}

inline std::string op_distribution_csv(
    const std::map<std::string, std::size_t>& counts) {
  std::string out = "op,count\n";
  for (const auto& name : op_kind_order()) {
    const auto it = counts.find(name);
    out += name + "," +
           std::to_string(it == counts.end() ? std::size_t{0} : it->second) +
           "\n";
  }
  return out;
}

}  // namespace ectx
