#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ectx/history.hpp"

namespace ectx {

// ── The five context meta-operations ────────────────────────────────────
//
// Indices are 1-based display indices into the view the model was shown.
// Compress and Rollback produce a fresh summary step; Snippet trims one
// observation to a verbatim substring; Delete removes a step outright.

struct SkipOp {
  bool operator==(const SkipOp&) const = default;
};

struct CompressOp {
  std::int64_t from = 0;
  std::int64_t to = 0;
  std::string summary;
  bool operator==(const CompressOp&) const = default;
};

struct RollbackOp {
  std::int64_t k = 0;
  std::string summary;
  bool operator==(const RollbackOp&) const = default;
};

struct SnippetOp {
  std::int64_t k = 0;
  std::string pre;
  std::string suf;
  bool operator==(const SnippetOp&) const = default;
};

struct DeleteOp {
  std::int64_t k = 0;
  bool operator==(const DeleteOp&) const = default;
};

using MetaOp = std::variant<SkipOp, CompressOp, RollbackOp, SnippetOp, DeleteOp>;

inline std::string op_name(const MetaOp& op) {
  struct Visitor {
    std::string operator()(const SkipOp&) const { return "skip"; }
    std::string operator()(const CompressOp&) const { return "compress"; }
    std::string operator()(const RollbackOp&) const { return "rollback"; }
    std::string operator()(const SnippetOp&) const { return "snippet"; }
    std::string operator()(const DeleteOp&) const { return "delete"; }
  };
  return std::visit(Visitor{}, op);
}

// ── Operation failures ──────────────────────────────────────────────────

enum class OpErrorCode {
  out_of_range,
  consumed_reference,
  anchor_not_found,
  anchors_inverted,  // never emitted: subsumed by anchor_not_found under the
                     // ordered-search rule; kept so the wire schema is total
  malformed,
};

inline std::string to_string(OpErrorCode code) {
  switch (code) {
    case OpErrorCode::out_of_range: return "out-of-range";
    case OpErrorCode::consumed_reference: return "consumed-reference";
    case OpErrorCode::anchor_not_found: return "anchor-not-found";
    case OpErrorCode::anchors_inverted: return "anchors-inverted";
    case OpErrorCode::malformed: return "malformed";
  }
  return "malformed";
}

inline OpErrorCode op_error_code_from_string(const std::string& s) {
  if (s == "out-of-range") return OpErrorCode::out_of_range;
  if (s == "consumed-reference") return OpErrorCode::consumed_reference;
  if (s == "anchor-not-found") return OpErrorCode::anchor_not_found;
  if (s == "anchors-inverted") return OpErrorCode::anchors_inverted;
  if (s == "malformed") return OpErrorCode::malformed;
  throw std::invalid_argument("unknown op error code: " + s);
}

// A failed meta-operation. The message is remediation text rendered back to
// the model in the next observation, so it states what was wrong in terms of
// the view the model saw.
struct OpError {
  MetaOp op;
  OpErrorCode code = OpErrorCode::malformed;
  std::string message;

  bool operator==(const OpError&) const = default;
};

class MetaOpError : public std::runtime_error {
 public:
  MetaOpError(OpErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  OpErrorCode code() const { return code_; }

 private:
  OpErrorCode code_;
};

// ── Single-operator semantics ───────────────────────────────────────────

inline History apply_skip(const History& h) { return h; }

namespace detail {

inline void check_range(std::int64_t a, std::int64_t b, std::size_t n,
                        const std::string& what) {
  const auto len = static_cast<std::int64_t>(n);
  if (a < 1 || b < a || b > len) {
    throw MetaOpError(OpErrorCode::out_of_range,
                      what + " range " + std::to_string(a) + ".." +
                          std::to_string(b) + " is invalid; the context has " +
                          std::to_string(n) + " step(s)");
  }
}

inline Step make_summary(History& out, const Step& first, const Step& last,
                         std::string text) {
  Step s;
  s.id = out.next_id++;
  s.kind = StepKind::summary;
  s.observation = std::move(text);
  s.label_lo = first.label_lo;
  s.label_hi = last.label_hi;
  return s;
}

}  // namespace detail

// Replaces display positions a..b with one fresh summary step holding
// `summary`. An empty summary drops the replacement step entirely, so the
// range is simply removed.
inline History apply_compress(const History& h, std::int64_t a, std::int64_t b,
                              const std::string& summary) {
  detail::check_range(a, b, h.size(), "compress");
  History out;
  out.next_id = h.next_id;
  out.steps.reserve(h.size() - static_cast<std::size_t>(b - a));
  for (std::int64_t i = 1; i < a; ++i) out.steps.push_back(h.steps[i - 1]);
  if (!summary.empty()) {
    out.steps.push_back(
        detail::make_summary(out, h.steps[a - 1], h.steps[b - 1], summary));
  }
  for (std::int64_t i = b + 1; i <= static_cast<std::int64_t>(h.size()); ++i) {
    out.steps.push_back(h.steps[i - 1]);
  }
  return out;
}

// Truncates the history at display position k and records `summary` (the
// reason for abandoning the branch) as a fresh summary step in its place.
inline History apply_rollback(const History& h, std::int64_t k,
                              const std::string& summary) {
  detail::check_range(k, k, h.size(), "rollback");
  History out;
  out.next_id = h.next_id;
  out.steps.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 1; i < k; ++i) out.steps.push_back(h.steps[i - 1]);
  if (!summary.empty()) {
    out.steps.push_back(
        detail::make_summary(out, h.steps[k - 1], h.steps.back(), summary));
  }
  return out;
}

namespace detail {

// Ordered anchor search: first occurrence of pre, then the first occurrence
// of suf beginning at or after the end of that pre occurrence. Both anchors
// are included in the extracted text.
inline std::optional<std::string> extract_between_anchors(
    const std::string& text, const std::string& pre, const std::string& suf) {
  const auto pre_pos = text.find(pre);
  if (pre_pos == std::string::npos) return std::nullopt;
  const auto suf_pos = text.find(suf, pre_pos + pre.size());
  if (suf_pos == std::string::npos) return std::nullopt;
  return text.substr(pre_pos, suf_pos + suf.size() - pre_pos);
}

}  // namespace detail

// Trims the observation of step k to the verbatim substring spanning the two
// anchors. Reasoning and tool call of the step are preserved; nothing is
// regenerated.
inline History apply_snippet(const History& h, std::int64_t k,
                             const std::string& pre, const std::string& suf) {
  detail::check_range(k, k, h.size(), "snippet");
  if (pre.empty() || suf.empty()) {
    throw MetaOpError(OpErrorCode::malformed,
                      "snippet anchors must be non-empty");
  }
  const Step& target = h.steps[k - 1];
  auto extracted = detail::extract_between_anchors(target.observation, pre, suf);
  if (!extracted) {
    throw MetaOpError(OpErrorCode::anchor_not_found,
                      "snippet anchors did not match the observation of step " +
                          std::to_string(k) +
                          " (no 'pre' occurrence, or no 'suf' at or after it)");
  }
  History out = h;
  Step& s = out.steps[k - 1];
  s.observation = std::move(*extracted);
  s.snippet_applied = true;
  return out;
}

// Removes step k entirely.
inline History apply_delete(const History& h, std::int64_t k) {
  detail::check_range(k, k, h.size(), "delete");
  History out = h;
  out.steps.erase(out.steps.begin() + (k - 1));
  return out;
}

// ── Composite application ───────────────────────────────────────────────

struct BatchOutcome {
  History history;
  std::vector<MetaOp> applied;
  std::vector<OpError> errors;

  bool operator==(const BatchOutcome&) const = default;
};

namespace detail {

inline std::optional<std::size_t> display_of_id(const History& h,
                                                std::uint64_t id) {
  for (std::size_t i = 0; i < h.steps.size(); ++i) {
    if (h.steps[i].id == id) return i + 1;
  }
  return std::nullopt;
}

}  // namespace detail

// Applies a batch of meta-operations. Every display index in the batch refers
// to the snapshot view the model was shown, i.e. `h` before any op in this
// batch ran. Indices are resolved to persistent step ids up front, then the
// ops run in listed order against the evolving history. An op whose resolved
// endpoint was consumed by an earlier op fails with consumed-reference and
// leaves the history untouched; later ops still run.
inline BatchOutcome apply_batch(const History& h,
                                const std::vector<MetaOp>& ops) {
  BatchOutcome outcome;
  outcome.history = h;
  const auto snapshot_len = static_cast<std::int64_t>(h.size());

  auto snapshot_id = [&](std::int64_t display) {
    return h.steps[static_cast<std::size_t>(display) - 1].id;
  };
  auto fail = [&](const MetaOp& op, OpErrorCode code, std::string message) {
    outcome.errors.push_back(OpError{op, code, std::move(message)});
  };
  auto check_snapshot_range = [&](const MetaOp& op, std::int64_t a,
                                  std::int64_t b) {
    if (a < 1 || b < a || b > snapshot_len) {
      fail(op, OpErrorCode::out_of_range,
           op_name(op) + " target " + std::to_string(a) +
               (a == b ? "" : ".." + std::to_string(b)) +
               " is out of range; the view you saw had " +
               std::to_string(snapshot_len) + " step(s)");
      return false;
    }
    return true;
  };
  auto resolve = [&](const MetaOp& op, std::uint64_t id,
                     std::optional<std::size_t>& pos) {
    pos = detail::display_of_id(outcome.history, id);
    if (!pos) {
      fail(op, OpErrorCode::consumed_reference,
           op_name(op) + " refers to a step already rewritten by an earlier "
                         "operation in this batch");
      return false;
    }
    return true;
  };

  for (const MetaOp& op : ops) {
    if (std::holds_alternative<SkipOp>(op)) {
      outcome.applied.push_back(op);
      continue;
    }
    if (const auto* c = std::get_if<CompressOp>(&op)) {
      if (!check_snapshot_range(op, c->from, c->to)) continue;
      const auto id_a = snapshot_id(c->from);
      const auto id_b = snapshot_id(c->to);
      std::optional<std::size_t> pa, pb;
      if (!resolve(op, id_a, pa) || !resolve(op, id_b, pb)) continue;
      outcome.history =
          apply_compress(outcome.history, static_cast<std::int64_t>(*pa),
                         static_cast<std::int64_t>(*pb), c->summary);
      outcome.applied.push_back(op);
      continue;
    }
    if (const auto* r = std::get_if<RollbackOp>(&op)) {
      if (!check_snapshot_range(op, r->k, r->k)) continue;
      std::optional<std::size_t> pos;
      if (!resolve(op, snapshot_id(r->k), pos)) continue;
      outcome.history = apply_rollback(
          outcome.history, static_cast<std::int64_t>(*pos), r->summary);
      outcome.applied.push_back(op);
      continue;
    }
    if (const auto* s = std::get_if<SnippetOp>(&op)) {
      if (s->pre.empty() || s->suf.empty()) {
        fail(op, OpErrorCode::malformed, "snippet anchors must be non-empty");
        continue;
      }
      if (!check_snapshot_range(op, s->k, s->k)) continue;
      std::optional<std::size_t> pos;
      if (!resolve(op, snapshot_id(s->k), pos)) continue;
      try {
        outcome.history =
            apply_snippet(outcome.history, static_cast<std::int64_t>(*pos),
                          s->pre, s->suf);
        outcome.applied.push_back(op);
      } catch (const MetaOpError& e) {
        fail(op, e.code(), e.what());
      }
      continue;
    }
    const auto& d = std::get<DeleteOp>(op);
    if (!check_snapshot_range(op, d.k, d.k)) continue;
    std::optional<std::size_t> pos;
    if (!resolve(op, snapshot_id(d.k), pos)) continue;
    outcome.history =
        apply_delete(outcome.history, static_cast<std::int64_t>(*pos));
    outcome.applied.push_back(op);
  }
  return outcome;
}

// ── Wire form ───────────────────────────────────────────────────────────
//
// Op objects carry an "op" discriminator plus the operator's parameters:
//   {"op":"skip"}
//   {"op":"compress","from":a,"to":b,"summary":text}
//   {"op":"rollback","k":k,"summary":text}
//   {"op":"snippet","k":k,"pre":text,"suf":text}
//   {"op":"delete","k":k}
// "from"/"to" are the compress range endpoints (inclusive display indices).

inline nlohmann::ordered_json meta_op_to_json(const MetaOp& op) {
  nlohmann::ordered_json j;
  j["op"] = op_name(op);
  if (const auto* c = std::get_if<CompressOp>(&op)) {
    j["from"] = c->from;
    j["to"] = c->to;
    j["summary"] = c->summary;
  } else if (const auto* r = std::get_if<RollbackOp>(&op)) {
    j["k"] = r->k;
    j["summary"] = r->summary;
  } else if (const auto* s = std::get_if<SnippetOp>(&op)) {
    j["k"] = s->k;
    j["pre"] = s->pre;
    j["suf"] = s->suf;
  } else if (const auto* d = std::get_if<DeleteOp>(&op)) {
    j["k"] = d->k;
  }
  return j;
}

namespace detail {

inline std::int64_t require_index(const nlohmann::json& obj,
                                  const std::string& key,
                                  const std::string& op) {
  if (!obj.contains(key)) {
    throw std::invalid_argument("op '" + op + "' is missing field '" + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw std::invalid_argument("op '" + op + "' field '" + key +
                                "' must be an integer step index");
  }
  return v.get<std::int64_t>();
}

inline std::string require_text(const nlohmann::json& obj,
                                const std::string& key, const std::string& op) {
  if (!obj.contains(key)) {
    throw std::invalid_argument("op '" + op + "' is missing field '" + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    throw std::invalid_argument("op '" + op + "' field '" + key +
                                "' must be a string");
  }
  return v.get<std::string>();
}

inline void warn_extra_fields(const nlohmann::json& obj, const std::string& op,
                              std::initializer_list<const char*> known,
                              std::vector<std::string>* warnings) {
  if (!warnings) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = it.key() == "op";
    for (const char* k : known) is_known = is_known || it.key() == k;
    if (!is_known) {
      warnings->push_back("ignored unknown field '" + it.key() + "' on op '" +
                          op + "'");
    }
  }
}

}  // namespace detail

// Throws std::invalid_argument on unknown discriminators, missing fields,
// or non-numeric indices. Unknown extra fields are ignored with a warning.
inline MetaOp meta_op_from_json(const nlohmann::json& j,
                                std::vector<std::string>* warnings = nullptr) {
  if (!j.is_object() || !j.contains("op") || !j.at("op").is_string()) {
    throw std::invalid_argument(
        "meta-op must be an object with a string 'op' discriminator");
  }
  const auto op = j.at("op").get<std::string>();
  if (op == "skip") {
    detail::warn_extra_fields(j, op, {}, warnings);
    return SkipOp{};
  }
  if (op == "compress") {
    detail::warn_extra_fields(j, op, {"from", "to", "summary"}, warnings);
    return CompressOp{detail::require_index(j, "from", op),
                      detail::require_index(j, "to", op),
                      detail::require_text(j, "summary", op)};
  }
  if (op == "rollback") {
    detail::warn_extra_fields(j, op, {"k", "summary"}, warnings);
    return RollbackOp{detail::require_index(j, "k", op),
                      detail::require_text(j, "summary", op)};
  }
  if (op == "snippet") {
    detail::warn_extra_fields(j, op, {"k", "pre", "suf"}, warnings);
    return SnippetOp{detail::require_index(j, "k", op),
                     detail::require_text(j, "pre", op),
                     detail::require_text(j, "suf", op)};
  }
  if (op == "delete") {
    detail::warn_extra_fields(j, op, {"k"}, warnings);
    return DeleteOp{detail::require_index(j, "k", op)};
  }
  throw std::invalid_argument("unknown op discriminator '" + op + "'");
}

inline nlohmann::ordered_json op_error_to_json(const OpError& err) {
  nlohmann::ordered_json j;
  j["op"] = meta_op_to_json(err.op);
  j["code"] = to_string(err.code);
  j["message"] = err.message;
  return j;
}

inline OpError op_error_from_json(const nlohmann::json& j) {
  OpError err;
  err.op = meta_op_from_json(j.at("op"));
  err.code = op_error_code_from_string(j.at("code").get<std::string>());
  err.message = j.at("message").get<std::string>();
  return err;
}

}  // namespace ectx
