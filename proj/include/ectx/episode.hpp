#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ectx/backend.hpp"
#include "ectx/meta_ops.hpp"
#include "ectx/render.hpp"
#include "ectx/structured_output.hpp"
#include "ectx/tokens.hpp"
#include "ectx/tools.hpp"
#include "ectx/trajectory.hpp"

namespace ectx {

// ── Strategies ──────────────────────────────────────────────────────────

enum class StrategyKind {
  context_react,    // the model curates its own context via meta-ops
  append_only,      // standard loop: the history only grows
  sliding_window,   // keep the most recent `window` steps
  discard_all,      // clear the history when the estimate crosses `threshold`
  periodic_summary, // summarize the whole history when it crosses `threshold`
};

struct StrategySpec {
  StrategyKind kind = StrategyKind::context_react;
  int window = 8;             // sliding-window only
  std::size_t threshold = 0;  // discard-all / periodic-summary; 0 = never

  static StrategyKind kind_from_name(const std::string& name) {
    if (name == "context-react") return StrategyKind::context_react;
    if (name == "append-only") return StrategyKind::append_only;
    if (name == "sliding-window") return StrategyKind::sliding_window;
    if (name == "discard-all") return StrategyKind::discard_all;
    if (name == "periodic-summary") return StrategyKind::periodic_summary;
    throw std::invalid_argument("unknown strategy: " + name);
  }

  std::string name() const {
    switch (kind) {
      case StrategyKind::context_react: return "context-react";
      case StrategyKind::append_only: return "append-only";
      case StrategyKind::sliding_window: return "sliding-window";
      case StrategyKind::discard_all: return "discard-all";
      case StrategyKind::periodic_summary: return "periodic-summary";
    }
    return "context-react";
  }

  std::string canonical() const {
    if (kind == StrategyKind::sliding_window) {
      return name() + "(" + std::to_string(window) + ")";
    }
    if (kind == StrategyKind::discard_all ||
        kind == StrategyKind::periodic_summary) {
      return name() + "(" + std::to_string(threshold) + ")";
    }
    return name();
  }

  bool operator==(const StrategySpec&) const = default;
};

// ── Episode configuration and result ────────────────────────────────────

struct EpisodeConfig {
  std::string episode_id = "ep";
  std::string question;
  StrategySpec strategy;
  int max_tool_calls = 300;
  int max_rounds = 5;
  std::size_t token_budget = 0;  // advisory; 0 = no budget notices
  std::string system_prompt;
  std::string summarize_prompt;
  double temperature = 0.7;
  int max_output_tokens = 4096;
  TokenEstimator estimator;  // bytes/4 when unset
  std::string estimator_name = kDefaultEstimatorName;
  std::function<std::int64_t()> clock;  // wall clock ms when unset
  std::shared_ptr<Backend> backend;
  std::shared_ptr<const ToolRegistry> tools;

  void validate() const {
    if (max_tool_calls < 1) throw std::invalid_argument("max_tool_calls must be >= 1");
    if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
    if (strategy.kind == StrategyKind::sliding_window && strategy.window < 1) {
      throw std::invalid_argument("sliding-window requires window >= 1");
    }
    if (!backend) throw std::invalid_argument("episode requires a backend");
    if (!tools) throw std::invalid_argument("episode requires a tool registry");
  }

  TokenEstimator effective_estimator() const {
    return estimator ? estimator
                     : TokenEstimator([](std::string_view t) {
                         return bytes_per_token_estimate(t);
                       });
  }
};

enum class Termination { answered, step_limit, round_limit, backend_failure };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::answered: return "answered";
    case Termination::step_limit: return "step-limit";
    case Termination::round_limit: return "round-limit";
    case Termination::backend_failure: return "backend-failure";
  }
  return "backend-failure";
}

struct EpisodeResult {
  std::optional<std::string> answer;
  Termination termination = Termination::step_limit;
  int turns_used = 0;
  int rounds_used = 0;
  std::size_t final_token_estimate = 0;
  std::string trajectory_path;
};

// ── Pure turn transition ────────────────────────────────────────────────
//
// Everything that changes the history in one turn is factored into free
// functions of the recorded inputs, so the live loop and the replayer share
// one code path and replay is bit-exact by construction.

inline std::string compose_observation(const std::string& tool_result,
                                       const std::vector<OpError>& errors) {
  std::string obs = tool_result;
  if (!errors.empty()) {
    obs += "\n\n[meta-op errors]";
    for (const auto& e : errors) {
      obs += "\n- " + op_name(e.op) + " (" + to_string(e.code) + "): " + e.message;
    }
  }
  return obs;
}

inline std::string parse_failure_observation(const ParseError& error) {
  return "[format error] " + error.reason + " (at byte " +
         std::to_string(error.position) +
         "). Emit all four regions: <think>, <meta_tool_call>, <motivation>, "
         "<standard_tool_call>.";
}

// Engine-managed context transforms for the baseline strategies. The new
// step's content is appended after the strategy event (if any) is applied;
// sliding-window trims after the append.
inline History apply_strategy(const History& h, const StrategySpec& strategy,
                              const std::string& reasoning,
                              const std::optional<ToolCall>& call,
                              const std::string& observation,
                              const std::optional<StrategyEvent>& event) {
  History out = h;
  if (event) {
    if (event->type == "summary" && !out.empty()) {
      out = apply_compress(out, 1, static_cast<std::int64_t>(out.size()),
                           event->text);
    } else {  // "discard" and "summary-fallback-discard"
      History cleared;
      cleared.next_id = out.next_id;  // ids are never reused in an episode
      out = std::move(cleared);
    }
  }
  out.append_original(reasoning, call, observation);
  if (strategy.kind == StrategyKind::sliding_window) {
    while (out.size() > static_cast<std::size_t>(strategy.window)) {
      out.steps.erase(out.steps.begin());
    }
  }
  return out;
}

// Convenience overload: append an already-built step (its id and label are
// reassigned by the receiving history).
inline History apply_strategy(const History& h, const StrategySpec& strategy,
                              const Step& new_step,
                              const std::optional<StrategyEvent>& event =
                                  std::nullopt) {
  return apply_strategy(h, strategy, new_step.reasoning, new_step.tool_call,
                        new_step.observation, event);
}

// Decides whether a baseline strategy intervenes this turn. Thresholds are
// judged on the bare rendered-history estimate (frame excluded). The
// summarizer is only invoked for periodic-summary; if it throws, the engine
// falls back to a discard for that trigger and records it as such.
inline std::optional<StrategyEvent> decide_strategy_event(
    const History& h, const StrategySpec& strategy, const TokenEstimator& est,
    const std::function<std::string(const History&)>& summarize) {
  if (strategy.kind != StrategyKind::discard_all &&
      strategy.kind != StrategyKind::periodic_summary) {
    return std::nullopt;
  }
  if (strategy.threshold == 0 || h.empty()) return std::nullopt;
  RenderOptions opts;
  opts.estimator = est;
  if (render_view(h, opts).token_estimate <= strategy.threshold) {
    return std::nullopt;
  }
  if (strategy.kind == StrategyKind::discard_all) {
    return StrategyEvent{"discard", ""};
  }
  if (summarize) {
    try {
      return StrategyEvent{"summary", summarize(h)};
    } catch (const std::exception&) {
      // fall through
    }
  }
  return StrategyEvent{"summary-fallback-discard", ""};
}

struct TurnEffect {
  History history;
  std::vector<MetaOp> applied;
  std::vector<OpError> errors;
  std::size_t tokens_after = 0;
};

// Advances the history for one turn from the recorded inputs: the parse
// outcome of the raw emission, the tool result text, and (for baselines) the
// strategy event. Under context-react the only mutations are the model's
// applied meta-ops plus the single appended step.
inline TurnEffect advance_history(const History& h,
                                  const StrategySpec& strategy,
                                  const ParseOutcome& parsed,
                                  const std::string& tool_result,
                                  const std::optional<StrategyEvent>& event,
                                  const RenderFrame& frame,
                                  const TokenEstimator& est) {
  TurnEffect effect;
  if (!parsed.ok()) {
    const std::string obs = parse_failure_observation(parsed.error);
    if (strategy.kind == StrategyKind::context_react) {
      effect.history = h;
      effect.history.append_original("", std::nullopt, obs);
    } else {
      effect.history = apply_strategy(h, strategy, "", std::nullopt, obs, event);
    }
  } else if (strategy.kind == StrategyKind::context_react) {
    BatchOutcome outcome = apply_batch(h, parsed.output->meta_ops);
    effect.applied = outcome.applied;
    effect.errors = outcome.errors;
    effect.history = std::move(outcome.history);
    effect.history.append_original(parsed.output->think,
                                   parsed.output->tool_call,
                                   compose_observation(tool_result, effect.errors));
  } else {
    effect.history = apply_strategy(h, strategy, parsed.output->think,
                                    parsed.output->tool_call, tool_result,
                                    event);
  }
  RenderOptions opts;
  opts.frame = frame;
  opts.estimator = est;
  effect.tokens_after = render_view(effect.history, opts).token_estimate;
  return effect;
}

// ── The episode runner ──────────────────────────────────────────────────

using TurnObserver = std::function<void(const TurnRecord&)>;

inline TrajectoryHeader make_trajectory_header(const EpisodeConfig& cfg) {
  TrajectoryHeader h;
  h.estimator = cfg.estimator_name;
  h.episode_id = cfg.episode_id;
  h.question = cfg.question;
  h.strategy = cfg.strategy.name();
  h.window = cfg.strategy.window;
  h.threshold = cfg.strategy.threshold;
  h.max_tool_calls = cfg.max_tool_calls;
  h.max_rounds = cfg.max_rounds;
  h.token_budget = cfg.token_budget;
  h.backend = cfg.backend ? cfg.backend->name() : "";
  return h;
}

class EpisodeRunner {
 public:
  EpisodeRunner(EpisodeConfig config, JsonlTrajectoryWriter* writer = nullptr,
                TurnObserver observer = nullptr)
      : cfg_(std::move(config)),
        writer_(writer),
        observer_(std::move(observer)),
        estimator_(cfg_.effective_estimator()) {
    cfg_.validate();
  }

  TrajectoryHeader header() const { return make_trajectory_header(cfg_); }

  struct StepOutcome {
    TurnRecord record;
    bool answered = false;
    std::optional<std::string> answer;
    bool backend_failed = false;
    std::string backend_error;
  };

  // One loop iteration: render -> generate -> parse -> apply meta-ops ->
  // execute the tool -> append the new step. Meta-ops transform the context
  // before the new observation is appended, so the appended step's display
  // index equals the transformed length.
  StepOutcome step_once(History& h, int round, int turn) {
    StepOutcome out;
    const RenderFrame frame{cfg_.question, round, cfg_.max_rounds};
    RenderOptions opts;
    opts.token_budget = cfg_.token_budget;
    opts.frame = frame;
    opts.estimator = estimator_;
    if (notice_pending_) {
      opts.notice = BudgetNotice{last_estimate_, cfg_.token_budget};
    }
    const RenderedView view = render_view(h, opts);

    ++global_turn_;
    TurnRecord rec;
    rec.episode_id = cfg_.episode_id;
    rec.round = round;
    rec.turn = turn;
    rec.rendered_view = view.text;
    rec.tokens_before = view.token_estimate;

    BackendRequest req;
    req.system_prompt = cfg_.system_prompt;
    req.rendered_context = view.text;
    req.temperature = cfg_.temperature;
    req.max_output_tokens = cfg_.max_output_tokens;
    req.turn_index = global_turn_;

    std::string raw;
    try {
      raw = cfg_.backend->complete(req);
    } catch (const std::exception& e) {
      rec.parse_ok = false;
      rec.parse_error = std::string("backend-failure: ") + e.what();
      RenderOptions after_opts;
      after_opts.frame = frame;
      after_opts.estimator = estimator_;
      rec.tokens_after = render_view(h, after_opts).token_estimate;
      rec.ts_ms = now_ms();
      out.backend_failed = true;
      out.backend_error = e.what();
      out.record = std::move(rec);
      return out;
    }
    rec.raw_output = raw;

    const ParseOutcome parsed = parse_output(raw);
    std::string tool_text;
    if (parsed.ok()) {
      rec.warnings = parsed.output->warnings;
      const ToolCall& call = parsed.output->tool_call;
      rec.tool_call = call;
      const ToolResult result = cfg_.tools->execute(call);
      tool_text = result.text;
      rec.tool_result = result.text;
      rec.tool_ok = result.ok;
      if (call.name == kFinalAnswerTool && result.ok &&
          call.arguments.contains("answer")) {
        out.answered = true;
        out.answer = call.arguments["answer"].is_string()
                         ? call.arguments["answer"].get<std::string>()
                         : call.arguments["answer"].dump();
      }
    } else {
      rec.parse_ok = false;
      rec.parse_error = parsed.error.reason + " (byte " +
                        std::to_string(parsed.error.position) + ")";
    }

    std::optional<StrategyEvent> event;
    if (cfg_.strategy.kind != StrategyKind::context_react) {
      event = decide_strategy_event(h, cfg_.strategy, estimator_,
                                    make_summarizer(frame));
    }
    rec.strategy_event = event;

    const TurnEffect effect = advance_history(h, cfg_.strategy, parsed,
                                              tool_text, event, frame,
                                              estimator_);
    h = effect.history;
    rec.applied_ops = effect.applied;
    rec.batch_errors = effect.errors;
    rec.tokens_after = effect.tokens_after;
    rec.ts_ms = now_ms();

    notice_pending_ =
        cfg_.token_budget > 0 && effect.tokens_after > cfg_.token_budget;
    last_estimate_ = effect.tokens_after;

    out.record = std::move(rec);
    return out;
  }

  // Runs rounds of up to max_tool_calls turns each. On step-limit exhaustion
  // in multi-round mode the context is discarded outright and a fresh round
  // starts: no prior tool-call history carries over.
  EpisodeResult run() {
    EpisodeResult result;
    if (writer_) result.trajectory_path = writer_->path();
    std::uint64_t carry_next_id = 1;
    for (int round = 1; round <= cfg_.max_rounds; ++round) {
      result.rounds_used = round;
      History h;
      h.next_id = carry_next_id;
      notice_pending_ = false;
      last_estimate_ = 0;
      for (int turn = 1; turn <= cfg_.max_tool_calls; ++turn) {
        StepOutcome out = step_once(h, round, turn);
        ++result.turns_used;
        result.final_token_estimate = out.record.tokens_after;
        // persist before the next backend invocation
        if (writer_) writer_->append_turn(out.record);
        if (observer_) observer_(out.record);
        if (out.backend_failed) {
          result.termination = Termination::backend_failure;
          return result;
        }
        if (out.answered) {
          result.termination = Termination::answered;
          result.answer = out.answer;
          return result;
        }
      }
      carry_next_id = h.next_id;
    }
    result.termination = cfg_.max_rounds > 1 ? Termination::round_limit
                                             : Termination::step_limit;
    return result;
  }

 private:
  std::function<std::string(const History&)> make_summarizer(
      const RenderFrame& frame) {
    if (cfg_.strategy.kind != StrategyKind::periodic_summary) return nullptr;
    return [this, frame](const History& h) {
      RenderOptions opts;
      opts.frame = frame;
      opts.estimator = estimator_;
      BackendRequest req;
      req.system_prompt = cfg_.summarize_prompt;
      req.rendered_context =
          render_view(h, opts).text + "\n[summarization request]\n";
      req.temperature = cfg_.temperature;
      req.max_output_tokens = cfg_.max_output_tokens;
      req.turn_index = global_turn_;
      return cfg_.backend->complete(req);
    };
  }

  std::int64_t now_ms() const {
    if (cfg_.clock) return cfg_.clock();
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  EpisodeConfig cfg_;
  JsonlTrajectoryWriter* writer_;
  TurnObserver observer_;
  TokenEstimator estimator_;
  bool notice_pending_ = false;
  std::size_t last_estimate_ = 0;
  int global_turn_ = 0;
};

inline EpisodeResult run_episode(EpisodeConfig config,
                                 JsonlTrajectoryWriter* writer = nullptr,
                                 TurnObserver observer = nullptr) {
  EpisodeRunner runner(std::move(config), writer, std::move(observer));
  return runner.run();
}

}  // namespace ectx
