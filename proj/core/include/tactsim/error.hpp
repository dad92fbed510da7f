#pragma once

#include <stdexcept>
#include <string>

namespace tactsim {

/// File and format failures: missing paths, malformed images, bad manifests.
/// Everything else (precondition violations, degenerate inputs) throws
/// std::invalid_argument.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tactsim
