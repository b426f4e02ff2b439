#pragma once

#include <stdexcept>
#include <string>

namespace ectx {

struct BackendRequest {
  std::string system_prompt;
  std::string rendered_context;  // exactly the render_view output
  double temperature = 0.7;
  int max_output_tokens = 4096;
  int turn_index = 0;  // 1-based backend-call index within the episode
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The generator abstraction: given the rendered context, return the raw model
// emission for parse_output. Implementations must be safe for concurrent use
// across episodes (per-request state only).
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const BackendRequest& request) = 0;
  virtual std::string name() const = 0;
};

}  // namespace ectx
