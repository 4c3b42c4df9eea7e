#pragma once

#include <stdexcept>
#include <string>

namespace larf {

// Base for every error raised by the library. `code()` is the stable,
// machine-readable name used in service error bodies.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define LARF_DEFINE_ERROR(Name, code_name)                      \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& message)                   \
        : Error(code_name, message) {}                          \
  };

LARF_DEFINE_ERROR(RangeError, "range_error")
LARF_DEFINE_ERROR(OverlapError, "overlap_error")
LARF_DEFINE_ERROR(EmptyInput, "empty_input")
LARF_DEFINE_ERROR(EmptyCategories, "empty_categories")
LARF_DEFINE_ERROR(TransportError, "transport_error")
LARF_DEFINE_ERROR(AuthError, "auth_error")
LARF_DEFINE_ERROR(NoScoreFound, "no_score_found")
LARF_DEFINE_ERROR(ScoreOutOfRange, "score_out_of_range")
LARF_DEFINE_ERROR(FormatError, "format_error")

#undef LARF_DEFINE_ERROR

}  // namespace larf
