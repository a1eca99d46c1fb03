#pragma once

#include <stdexcept>
#include <string>

namespace mpqd {

/// Library error carrying a stable machine-readable code (e.g. "grid_mismatch")
/// next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail);

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace mpqd
