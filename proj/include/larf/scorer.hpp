#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "larf/llm.hpp"

namespace larf {

struct ScoreResult {
  int score = 0;  // 0..10
  std::string rationale;
  std::string raw_reply;
};

// The 0-10 completeness/accuracy rubric with its one-shot 6-point example,
// wrapping `article` between the ***** delimiters and ending with the
// answer to rate. Throws EmptyInput if either argument is blank.
std::string build_rater_prompt(std::string_view article, std::string_view answer);

// First integer after a case-insensitive "Score:" marker; the text after it
// (trimmed) is the rationale. Throws NoScoreFound or ScoreOutOfRange.
ScoreResult parse_score(std::string_view reply);

struct ScoreOutcome {
  ScoreResult result;
  ChatExchange exchange;
};

// Rater prompt -> one chat request at temperature 0 -> parse_score.
ScoreOutcome score(std::string_view article, std::string_view answer, const LLMConfig& config,
                   ChatBackend& backend);
ScoreResult score(std::string_view article, std::string_view answer, const LLMConfig& config);

// Scores each answer against the same article; results keep input order.
std::vector<ScoreOutcome> score_batch(std::string_view article,
                                      const std::vector<std::string>& answers,
                                      const LLMConfig& config, ChatBackend& backend);

}  // namespace larf
