#ifndef COTV_ERROR_HPP_
#define COTV_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cotv {

// Coarse error categories. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  kInvalidArgument = 2,
  kConfig = 3,
  kParse = 4,
  kShapeMismatch = 5,
  kSimulation = 6,
  kNumerical = 7,
  kIo = 8,
};

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace cotv

#endif  // COTV_ERROR_HPP_
