#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ectx {

// Token counting is deliberately pluggable: a run picks one estimator by name,
// records the name in every trajectory header, and uses it for all estimates
// in that run. The default is a model-agnostic bytes/4 heuristic.
using TokenEstimator = std::function<std::size_t(std::string_view)>;

inline std::size_t bytes_per_token_estimate(std::string_view text) {
  return (text.size() + 3) / 4;
}

inline const std::string kDefaultEstimatorName = "bytes/4";

inline TokenEstimator make_estimator(const std::string& name) {
  if (name == "bytes/4") {
    return [](std::string_view t) { return bytes_per_token_estimate(t); };
  }
  if (name == "bytes") {
    return [](std::string_view t) { return t.size(); };
  }
  throw std::invalid_argument("unknown token estimator '" + name +
                              "' (known: bytes/4, bytes)");
}

}  // namespace ectx
