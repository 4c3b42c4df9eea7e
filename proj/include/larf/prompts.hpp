#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "larf/annotation.hpp"

namespace larf {

struct PromptCategory {
  std::string description;
  AnnotationKind kind = AnnotationKind::Emphasis;
};

struct PromptSpec {
  enum class Mode { Default, Custom };

  Mode mode = Mode::Default;
  std::vector<PromptCategory> categories;  // Custom mode only
  double temperature = 0.0;
  int max_output_tokens = 2048;

  static PromptSpec default_mode() { return {}; }
  static PromptSpec custom(std::vector<PromptCategory> categories);

  // Throws EmptyCategories for a custom spec without categories and
  // RangeError for negative temperature or non-positive token limits.
  void validate() const;
};

// The nine-rule annotation system prompt.
std::string build_default_prompt();

// Rules 1-3 replaced by one rule per category, in order; the shared rules
// follow, renumbered after them.
std::string build_custom_prompt(const PromptSpec& spec);

// Default or custom prompt as selected by spec.mode.
std::string build_system_prompt(const PromptSpec& spec);

// The text of rule 7 (content preservation), quoted in repair requests.
std::string_view preservation_rule();

}  // namespace larf
