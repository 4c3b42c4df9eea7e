#include "larf/scorer.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <future>

#include "larf/errors.hpp"
#include "larf/text.hpp"

namespace larf {

namespace {

constexpr std::string_view kRubric =
    "Please play the role of a rater and help me rate some answers. you will be given an "
    "article. Please read it, and you will be given some information about this article. I "
    "need you to score each item by their completeness and accuracy from 0 to 10.\n"
    "A 0-point represents the entrance is very poor and basically contains no correct or "
    "important information and a 10 means the entrance is almost perfect.\n"
    "A 5-point answer should have some details correct but misses or get some key information "
    "wrong, and the overall understanding of the article is partially correct.\n"
    "A 7-point entrance should contain some correct details, such as the correct name, time, "
    "data, etc., or provide a not-bad summary of the overall article. However, it may be a "
    "lack of coherent logic or could miss some important information.\n"
    "A 9-point entrance should contain most of the correct details, such as the correct name, "
    "time, data, etc., and it should also contain a logically coherent and accurate summary "
    "of the full text.\n"
    "\n"
    "Here is the original article\n"
    "*****\n";

constexpr std::string_view kOneShot =
    "\n*****\n"
    "Now you should directly give a score and the reason you give that score, and here is an "
    "example of 6-point entrance:\n"
    "The entrance is: 10.5 m high, with 13 false doors, there were tombs made of mud and clay "
    "before stone pyramids, the third Egyptian dynasty was the first to build of stone.\n"
    "And the answer is:\n"
    "Score: 6\n"
    "The entrance provides important details such as the height of the wall (10.5 meters) and "
    "the number of false doors (13). It also correctly mentions that tombs were made of mud "
    "and clay before the construction of stone pyramids and that the Third Dynasty of Egypt "
    "was the first to build with stone. However, it could have provided more information "
    "about the Step Pyramid itself, such as its final dimensions or its significance in "
    "Egyptian history. And its logic is not very coherent.\n"
    "\n"
    "Now score this entrance.\n"
    "The entrance is: ";

constexpr std::string_view kAnswerSuffix = "\nAnd the answer is:";

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return !std::isspace(static_cast<unsigned char>(c)); };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string build_rater_prompt(std::string_view article, std::string_view answer) {
  if (normalize(article).empty()) throw EmptyInput("article is empty");
  if (normalize(answer).empty()) throw EmptyInput("answer is empty");
  std::string prompt;
  prompt.reserve(kRubric.size() + article.size() + kOneShot.size() + answer.size() + 32);
  prompt += kRubric;
  prompt += article;
  prompt += kOneShot;
  prompt += answer;
  prompt += kAnswerSuffix;
  return prompt;
}

ScoreResult parse_score(std::string_view reply) {
  static constexpr std::string_view kMarker = "score:";
  std::size_t marker = std::string_view::npos;
  for (std::size_t i = 0; i + kMarker.size() <= reply.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < kMarker.size() && match; ++k) {
      match = std::tolower(static_cast<unsigned char>(reply[i + k])) == kMarker[k];
    }
    if (match) {
      marker = i;
      break;
    }
  }
  if (marker == std::string_view::npos) throw NoScoreFound("reply has no \"Score:\" marker");

  std::size_t i = marker + kMarker.size();
  while (i < reply.size() && !std::isdigit(static_cast<unsigned char>(reply[i])) &&
         reply[i] != '-') {
    if (!std::isspace(static_cast<unsigned char>(reply[i])) && reply[i] != '*') {
      throw NoScoreFound("no integer after \"Score:\"");
    }
    ++i;
  }
  bool negative = false;
  if (i < reply.size() && reply[i] == '-') {
    negative = true;
    ++i;
  }
  const std::size_t digits_start = i;
  while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
  if (i == digits_start) throw NoScoreFound("no integer after \"Score:\"");
  const std::string_view digits = reply.substr(digits_start, i - digits_start);
  if (negative || digits.size() > 2 || std::stoi(std::string(digits)) > 10) {
    throw ScoreOutOfRange("score " + std::string(negative ? "-" : "") + std::string(digits) +
                          " is outside 0..10");
  }

  ScoreResult result;
  result.score = std::stoi(std::string(digits));
  result.rationale = std::string(trim(reply.substr(i)));
  result.raw_reply = std::string(reply);
  return result;
}

ScoreOutcome score(std::string_view article, std::string_view answer, const LLMConfig& config,
                   ChatBackend& backend) {
  ChatRequest request;
  request.model = config.model_name;
  request.temperature = 0.0;
  request.messages = {{"user", build_rater_prompt(article, answer)}};
  ChatReply reply = backend.complete(request);
  ScoreOutcome outcome;
  outcome.exchange = {to_wire(request), reply.raw};
  outcome.result = parse_score(reply.content);
  return outcome;
}

ScoreResult score(std::string_view article, std::string_view answer, const LLMConfig& config) {
  HttpChatBackend backend(config);
  return score(article, answer, config, backend).result;
}

std::vector<ScoreOutcome> score_batch(std::string_view article,
                                      const std::vector<std::string>& answers,
                                      const LLMConfig& config, ChatBackend& backend) {
  std::vector<ScoreOutcome> out(answers.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < answers.size(); i = next++) {
      out[i] = score(article, answers[i], config, backend);
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(answers.size(), static_cast<std::size_t>(std::max(1, config.max_in_flight)));
  std::vector<std::future<void>> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  // get() rethrows the first failure after every worker has stopped.
  std::exception_ptr error;
  for (auto& f : pool) {
    try {
      f.get();
    } catch (...) {
      if (!error) error = std::current_exception();
      next = answers.size();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace larf
