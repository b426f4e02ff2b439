#pragma once

#include <string>
#include <vector>

#include "ectx/episode.hpp"
#include "ectx/trajectory.hpp"

namespace ectx {

struct ReplayResult {
  bool ok = true;
  int divergent_round = 0;
  int divergent_turn = 0;
  std::string message;
  std::vector<std::string> views;  // reconstructed views, one per turn
};

// Reconstructs every turn's rendered view from the records alone, with no
// backend and no tools, by re-running the shared turn transition on the raw
// outputs, tool results and strategy events. Any byte of divergence from the
// stored rendered_view is a replay failure naming the turn.
inline ReplayResult replay_trajectory(const Trajectory& traj) {
  ReplayResult result;
  const TokenEstimator est = make_estimator(
      traj.header.estimator.empty() ? kDefaultEstimatorName
                                    : traj.header.estimator);
  StrategySpec strategy;
  strategy.kind = StrategySpec::kind_from_name(
      traj.header.strategy.empty() ? "context-react" : traj.header.strategy);
  strategy.window = traj.header.window;
  strategy.threshold = traj.header.threshold;

  History h;
  int current_round = 1;
  bool notice_pending = false;
  std::size_t last_estimate = 0;

  for (const TurnRecord& rec : traj.turns) {
    if (rec.round != current_round) {
      // round restart: fresh context, ids carry forward
      const auto carry = h.next_id;
      h = History{};
      h.next_id = carry;
      current_round = rec.round;
      notice_pending = false;
      last_estimate = 0;
    }
    const RenderFrame frame{traj.header.question, current_round,
                            traj.header.max_rounds};
    RenderOptions opts;
    opts.token_budget = traj.header.token_budget;
    opts.frame = frame;
    opts.estimator = est;
    if (notice_pending) {
      opts.notice = BudgetNotice{last_estimate, traj.header.token_budget};
    }
    const RenderedView view = render_view(h, opts);
    result.views.push_back(view.text);
    if (view.text != rec.rendered_view) {
      result.ok = false;
      result.divergent_round = rec.round;
      result.divergent_turn = rec.turn;
      result.message = "replay divergence at round " +
                       std::to_string(rec.round) + ", turn " +
                       std::to_string(rec.turn) +
                       ": reconstructed view differs from the stored one";
      return result;
    }

    // Re-parse the stored emission: parsing is deterministic, so this
    // reproduces exactly what the live loop saw (and catches tampered
    // raw_output when the stored parse flag disagrees).
    const ParseOutcome parsed = parse_output(rec.raw_output);
    if (rec.parse_ok && !parsed.ok()) {
      result.ok = false;
      result.divergent_round = rec.round;
      result.divergent_turn = rec.turn;
      result.message = "replay divergence at round " +
                       std::to_string(rec.round) + ", turn " +
                       std::to_string(rec.turn) +
                       ": stored raw output no longer parses: " +
                       parsed.error.reason;
      return result;
    }

    const TurnEffect effect =
        advance_history(h, strategy, parsed, rec.tool_result,
                        rec.strategy_event, frame, est);
    h = effect.history;
    notice_pending = traj.header.token_budget > 0 &&
                     effect.tokens_after > traj.header.token_budget;
    last_estimate = effect.tokens_after;
  }
  return result;
}

inline ReplayResult replay_trajectory(const std::string& path) {
  return replay_trajectory(read_trajectory(path));
}

}  // namespace ectx
