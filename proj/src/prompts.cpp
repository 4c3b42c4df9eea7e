#include "larf/prompts.hpp"

#include <array>

#include "larf/errors.hpp"

namespace larf {

namespace {

constexpr std::string_view kHeader =
    "You are an intelligent reader helper and you will be given a string of text in string "
    "format, please annotate it by adding tags following these instructions:";

constexpr std::array<std::string_view, 3> kDefaultCategoryRules{
    "Please annotate every date, number, location, and name of people or events in the "
    "paragraph by adding <strong> tags around them.",
    "Please highlight sentences and phrases in the paragraph that can summarize the core "
    "content of the paragraph or serve as a conclusion to the description by adding <mark> "
    "tags around them.",
    "Please underline sentences and phrases in the paragraph that are unusual or need to be "
    "particularly noted by adding <u> tags around them.",
};

constexpr std::string_view kPreservationRule =
    "You are allowed to add only the above previously mentioned HTML tags, and that's the "
    "only change you can make to the text. YOUR OUTPUT MUST KEEP THE CONTENT OF THE ARTICLE "
    "THE SAME AS THE ORIGINAL ONE.";

// Rules shared by the default and custom prompts.
constexpr std::array<std::string_view, 6> kSharedRules{
    "You can add as many <mark>, <strong>, or <u> tags in one paragraph as necessary to "
    "highlight or bold important text.",
    "Please make sure to use and only use the 3 types of annotations above to annotate each "
    "paragraph of the text.",
    "Don't make the highlights or underlines too long or too often if it is not necessary.",
    kPreservationRule,
    "Your output should only contain the marked text with added tags, which can be directly "
    "presented in HTML. Don’t add anything else like \"Here is your output\" and so on.",
    "Keep the original language; i.e., if the context was given in Chinese, your output "
    "should be Chinese as well.",
};

std::string assemble(const std::vector<std::string>& leading_rules) {
  std::string out(kHeader);
  int number = 1;
  const auto add = [&](std::string_view rule) {
    out += '\n';
    out += std::to_string(number++);
    out += ". ";
    out += rule;
  };
  for (const auto& rule : leading_rules) add(rule);
  for (auto rule : kSharedRules) add(rule);
  return out;
}

}  // namespace

PromptSpec PromptSpec::custom(std::vector<PromptCategory> categories) {
  PromptSpec spec;
  spec.mode = Mode::Custom;
  spec.categories = std::move(categories);
  return spec;
}

void PromptSpec::validate() const {
  if (mode == Mode::Custom && categories.empty()) {
    throw EmptyCategories("custom prompt needs at least one category");
  }
  if (mode == Mode::Default && !categories.empty()) {
    throw RangeError("default prompt takes no categories");
  }
  if (!(temperature >= 0.0)) throw RangeError("temperature must be >= 0");
  if (max_output_tokens <= 0) throw RangeError("max_output_tokens must be positive");
}

std::string build_default_prompt() {
  return assemble({kDefaultCategoryRules.begin(), kDefaultCategoryRules.end()});
}

std::string build_custom_prompt(const PromptSpec& spec) {
  if (spec.categories.empty()) {
    throw EmptyCategories("custom prompt needs at least one category");
  }
  std::vector<std::string> rules;
  rules.reserve(spec.categories.size());
  for (const auto& category : spec.categories) {
    rules.push_back("Please annotate " + category.description + " by adding <" +
                    std::string(tag_name(category.kind)) + "> tags around them.");
  }
  return assemble(rules);
}

std::string build_system_prompt(const PromptSpec& spec) {
  return spec.mode == PromptSpec::Mode::Custom ? build_custom_prompt(spec)
                                               : build_default_prompt();
}

std::string_view preservation_rule() { return kPreservationRule; }

}  // namespace larf
