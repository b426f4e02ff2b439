#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "ectx/history.hpp"
#include "ectx/tokens.hpp"

namespace ectx {

// Immutable prompt frame rendered ahead of the step list: the task statement
// and, in multi-round runs, the round marker. Keeping the question in the
// frame (not as a history step) means no strategy or meta-op can evict it.
struct RenderFrame {
  std::string question;
  int round = 1;
  int rounds = 1;

  bool operator==(const RenderFrame&) const = default;
};

// Advisory notice appended when the previous turn's post-management context
// estimate exceeded the configured budget. The engine only informs; it never
// truncates on its own.
struct BudgetNotice {
  std::size_t estimate = 0;
  std::size_t budget = 0;
};

struct RenderOptions {
  std::size_t token_budget = 0;  // 0 = no budget
  std::optional<RenderFrame> frame;
  std::optional<BudgetNotice> notice;
  TokenEstimator estimator;  // bytes/4 when unset
};

struct RenderedView {
  std::string text;
  std::size_t token_estimate = 0;
  bool over_budget = false;
};

// Deterministic text rendering of a history. Steps are numbered 1..|h| in
// current order; those numbers are the display indices meta-operations refer
// to. Summary steps show the label span they replaced; snippet-trimmed
// observations carry a [snippet] marker. The exact format is documented with
// a golden example in docs/formats.md.
inline RenderedView render_view(const History& h,
                                const RenderOptions& opts = {}) {
  RenderedView view;
  const bool bare = !opts.frame && !opts.notice;
  if (bare && h.empty()) {
    return view;  // empty rendering, zero tokens
  }

  std::string& out = view.text;
  out.reserve(256);
  if (opts.frame) {
    out += "== task ==\n";
    out += opts.frame->question;
    out += "\n";
    if (opts.frame->rounds > 1) {
      out += "== round " + std::to_string(opts.frame->round) + " of " +
             std::to_string(opts.frame->rounds) + " ==\n";
    }
  }
  out += "== context: " + std::to_string(h.size()) + " step(s) ==\n";

  for (std::size_t i = 0; i < h.steps.size(); ++i) {
    const Step& s = h.steps[i];
    const std::string tag = "[" + std::to_string(i + 1) + "] ";
    out += "\n";
    if (s.kind == StepKind::summary) {
      out += tag + "[steps " + std::to_string(s.label_lo) + "-" +
             std::to_string(s.label_hi) + " | compressed]\n";
      out += s.observation;
      out += "\n";
      continue;
    }
    if (!s.reasoning.empty()) {
      out += tag + "reasoning:\n";
      out += s.reasoning;
      out += "\n";
    }
    if (s.tool_call) {
      out += tag + "tool_call: " + s.tool_call->name + " " +
             s.tool_call->arguments.dump() + "\n";
    }
    out += tag + (s.snippet_applied ? "observation [snippet]:\n"
                                    : "observation:\n");
    out += s.observation;
    out += "\n";
  }

  if (opts.notice) {
    out += "\n== notice: context is ~" + std::to_string(opts.notice->estimate) +
           " tokens, over the " + std::to_string(opts.notice->budget) +
           " token budget; consider compress/rollback/delete ==\n";
  }
  out += "== end of context ==\n";

  const TokenEstimator est =
      opts.estimator ? opts.estimator
                     : TokenEstimator([](std::string_view t) {
                         return bytes_per_token_estimate(t);
                       });
  view.token_estimate = est(view.text);
  view.over_budget =
      opts.token_budget > 0 && view.token_estimate > opts.token_budget;
  return view;
}

inline RenderedView render_view(const History& h, std::size_t token_budget) {
  RenderOptions opts;
  opts.token_budget = token_budget;
  return render_view(h, opts);
}

}  // namespace ectx
