#include "larf/annotator.hpp"

#include <algorithm>
#include <array>
#include <future>

#include "larf/errors.hpp"
#include "larf/text.hpp"

namespace larf {

namespace {

bool is_sentence_end(std::u32string_view text, std::size_t i) {
  const char32_t c = text[i];
  if (c != U'.' && c != U'!' && c != U'?') return false;
  return i + 1 == text.size() || is_space(text[i + 1]);
}

// Largest cut in (from, limit] that falls after a sentence end, else after
// whitespace, else limit itself.
std::size_t best_cut(std::u32string_view text, std::size_t from, std::size_t limit) {
  for (std::size_t i = limit; i > from + 1; --i) {
    if (is_sentence_end(text, i - 2) && is_space(text[i - 1])) return i;
  }
  for (std::size_t i = limit; i > from + 1; --i) {
    if (is_space(text[i - 1])) return i;
  }
  return limit;
}

}  // namespace

std::vector<TextChunk> chunk_text(std::u32string_view text, std::size_t max_chars) {
  if (max_chars == 0) throw RangeError("chunk size must be positive");
  std::vector<TextChunk> chunks;
  if (text.empty()) return chunks;

  std::vector<std::size_t> bounds = paragraph_starts(text);
  bounds.push_back(text.size());

  std::size_t chunk_start = 0;
  std::size_t chunk_end = 0;
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    const std::size_t para_start = bounds[p];
    const std::size_t para_end = bounds[p + 1];
    if (para_end - chunk_start <= max_chars) {
      chunk_end = para_end;
      continue;
    }
    if (chunk_end > chunk_start) {
      chunks.push_back({chunk_start, chunk_end});
      chunk_start = chunk_end;
    }
    // The paragraph alone may still be too long.
    std::size_t pos = para_start;
    while (para_end - pos > max_chars) {
      const std::size_t cut = best_cut(text, pos, pos + max_chars);
      chunks.push_back({pos, cut});
      pos = cut;
    }
    chunk_start = pos;
    chunk_end = para_end;
  }
  if (chunk_end > chunk_start) chunks.push_back({chunk_start, chunk_end});
  return chunks;
}

namespace {

struct WordRange {
  std::size_t start;
  std::size_t end;
};

std::vector<WordRange> word_ranges(std::u32string_view text) {
  std::vector<WordRange> words;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    words.push_back({start, i});
  }
  return words;
}

}  // namespace

std::vector<AnnotationSpan> project_spans(std::u32string_view original,
                                          const AnnotatedDocument& produced) {
  const std::u32string produced_text = to_u32(produced.text());
  if (produced_text == original) return produced.spans();
  const auto from = word_ranges(produced_text);
  const auto to = word_ranges(original);
  if (from.size() != to.size()) return {};

  std::vector<bool> identical(from.size());
  for (std::size_t k = 0; k < from.size(); ++k) {
    identical[k] = std::u32string_view(produced_text).substr(from[k].start, from[k].end - from[k].start) ==
                   original.substr(to[k].start, to[k].end - to[k].start);
  }

  const auto map_start = [&](std::size_t p) -> std::size_t {
    const auto it = std::upper_bound(from.begin(), from.end(), p,
                                     [](std::size_t v, const WordRange& w) { return v < w.end; });
    if (it == from.end()) return original.size();
    const auto k = static_cast<std::size_t>(it - from.begin());
    if (p <= from[k].start) return to[k].start;
    return identical[k] ? to[k].start + (p - from[k].start) : to[k].start;
  };
  const auto map_end = [&](std::size_t p) -> std::size_t {
    const auto it = std::lower_bound(from.begin(), from.end(), p,
                                     [](const WordRange& w, std::size_t v) { return w.start < v; });
    if (it == from.begin()) return 0;
    const auto k = static_cast<std::size_t>(it - from.begin()) - 1;
    if (p >= from[k].end) return to[k].end;
    return identical[k] ? to[k].start + (p - from[k].start) : to[k].start;
  };

  std::vector<AnnotationSpan> out;
  for (const auto& s : produced.spans()) {
    const std::size_t a = map_start(s.start);
    const std::size_t b = map_end(s.end);
    if (a < b) out.push_back({s.kind, a, b});
  }
  return merge_adjacent(std::move(out));
}

std::string corrective_message(const VerificationReport& report) {
  std::string msg =
      "Your previous output changed the text, which is not allowed. Rule: ";
  msg += preservation_rule();
  if (!report.diffs.empty()) {
    const auto& d = report.diffs.front();
    msg += "\nFirst difference, at character " + std::to_string(d.position) +
           " of the original: the original has \"" + d.original + "\" but your output has \"" +
           d.produced + "\".";
  }
  msg += "\nReturn the original text again, changing nothing except adding the permitted tags.";
  return msg;
}

namespace {

struct ChunkOutcome {
  bool passed = false;
  int attempts = 0;
  std::vector<AnnotationSpan> spans;  // chunk-local offsets
  std::string produced_text;          // text of the last parsed reply
  std::vector<std::string> replies;
  std::vector<ChatExchange> exchanges;
};

ChunkOutcome annotate_chunk(std::u32string_view chunk, const std::string& system_prompt,
                            const PromptSpec& prompt, const LLMConfig& config,
                            ChatBackend& backend) {
  const std::string chunk_utf8 = to_utf8(chunk);
  ChatRequest request;
  request.model = config.model_name;
  request.temperature = prompt.temperature;
  request.max_tokens = prompt.max_output_tokens;
  // The reply is read as HTML, so the text goes out in the same encoding.
  request.messages = {{"system", system_prompt}, {"user", escape_html_text(chunk_utf8)}};

  ChunkOutcome outcome;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    ChatReply reply = backend.complete(request);
    ++outcome.attempts;
    outcome.replies.push_back(reply.content);
    outcome.exchanges.push_back({to_wire(request), reply.raw});

    const ParsedMarkup parsed = parse_markup(reply.content);
    const VerificationReport report = verify_preservation(chunk_utf8, parsed);
    outcome.produced_text = parsed.document.text();
    if (report.passed) {
      outcome.passed = true;
      outcome.spans = project_spans(chunk, parsed.document);
      return outcome;
    }
    request.messages.push_back({"assistant", reply.content});
    request.messages.push_back({"user", corrective_message(report)});
  }
  return outcome;
}

}  // namespace

AnnotationResult annotate(std::string_view text, const PromptSpec& prompt,
                          const LLMConfig& config, ChatBackend& backend) {
  if (normalize(text).empty()) throw EmptyInput("nothing to annotate");
  prompt.validate();
  config.validate();

  const std::u32string chars = to_u32(text);
  const std::vector<TextChunk> chunks = chunk_text(chars);
  const std::string system_prompt = build_system_prompt(prompt);

  std::vector<ChunkOutcome> outcomes(chunks.size());
  if (chunks.size() == 1) {
    outcomes[0] = annotate_chunk(chars, system_prompt, prompt, config, backend);
  } else {
    // The backend's limiter bounds how many of these are in flight.
    std::vector<std::future<ChunkOutcome>> pending;
    pending.reserve(chunks.size());
    for (const auto& c : chunks) {
      const std::u32string_view piece = std::u32string_view(chars).substr(c.start, c.end - c.start);
      pending.push_back(std::async(std::launch::async, [&, piece] {
        return annotate_chunk(piece, system_prompt, prompt, config, backend);
      }));
    }
    for (std::size_t i = 0; i < pending.size(); ++i) outcomes[i] = pending[i].get();
  }

  AnnotationResult result;
  std::vector<AnnotationSpan> spans;
  std::string produced;
  bool all_passed = true;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    auto& o = outcomes[i];
    result.attempts += o.attempts;
    std::move(o.replies.begin(), o.replies.end(), std::back_inserter(result.raw_replies));
    std::move(o.exchanges.begin(), o.exchanges.end(), std::back_inserter(result.exchanges));
    all_passed = all_passed && o.passed;
    for (const auto& s : o.spans) {
      spans.push_back({s.kind, s.start + chunks[i].start, s.end + chunks[i].start});
    }
    if (!produced.empty()) produced += "\n\n";
    produced += o.produced_text;
  }

  ParsedMarkup combined;
  combined.document = AnnotatedDocument(produced, {});
  result.report = verify_preservation(text, combined);
  result.fallback_used = !all_passed;
  result.document = apply_annotations(std::string(text), result.fallback_used
                                                             ? std::vector<AnnotationSpan>{}
                                                             : std::move(spans));
  return result;
}

AnnotationResult annotate(std::string_view text, const PromptSpec& prompt,
                          const LLMConfig& config) {
  HttpChatBackend backend(config);
  return annotate(text, prompt, config, backend);
}

namespace {

constexpr std::array<std::u32string_view, 58> kFunctionWords{
    U"A",       U"About",   U"After",  U"All",     U"Also",   U"Although", U"An",
    U"And",     U"As",      U"At",     U"Because", U"Before", U"But",      U"By",
    U"Each",    U"Even",    U"Every",  U"For",     U"From",   U"He",       U"Her",
    U"Here",    U"His",     U"How",    U"However", U"I",      U"If",       U"In",
    U"It",      U"Its",     U"Many",   U"Most",    U"No",     U"Not",      U"Of",
    U"On",      U"Or",      U"Our",    U"She",     U"So",     U"Some",     U"That",
    U"The",     U"Their",   U"Then",   U"There",   U"These",  U"They",     U"This",
    U"Those",   U"To",      U"We",     U"What",    U"When",   U"Where",    U"Which",
    U"While",   U"Who",
};

bool is_function_word(std::u32string_view word) {
  return std::find(kFunctionWords.begin(), kFunctionWords.end(), word) != kFunctionWords.end();
}

// A capitalized word: uppercase first letter and at least one lowercase
// letter after it. All-caps abbreviations do not count.
bool is_capitalized(std::u32string_view word) {
  if (word.empty() || !is_upper(word[0])) return false;
  return std::any_of(word.begin() + 1, word.end(), [](char32_t c) { return is_lower(c); });
}

}  // namespace

AnnotatedDocument offline_annotate(std::string_view text) {
  const std::u32string chars = to_u32(text);
  std::vector<std::size_t> bounds = paragraph_starts(chars);
  bounds.push_back(chars.size());
  std::vector<AnnotationSpan> spans;

  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    std::size_t begin = bounds[p];
    const std::size_t end = bounds[p + 1];
    while (begin < end && is_space(chars[begin])) ++begin;
    if (begin == end) continue;
    std::size_t stop = begin;
    while (stop < end && !(is_sentence_end(std::u32string_view(chars).substr(0, end), stop))) ++stop;
    if (stop < end) {
      ++stop;
    } else {
      while (stop > begin && is_space(chars[stop - 1])) --stop;
    }
    spans.push_back({AnnotationKind::Highlight, begin, stop});
  }

  std::size_t i = 0;
  while (i < chars.size()) {
    if (is_digit(chars[i])) {
      const std::size_t start = i;
      while (i < chars.size() && is_digit(chars[i])) ++i;
      spans.push_back({AnnotationKind::Emphasis, start, i});
      continue;
    }
    if (!is_letter(chars[i])) {
      ++i;
      continue;
    }
    // Collect a run of capitalized words joined by single spaces.
    std::size_t run_start = i;
    std::size_t run_end = i;
    int words_in_run = 0;
    std::u32string_view first_word;
    std::size_t j = i;
    while (j < chars.size() && is_letter(chars[j])) {
      const std::size_t w_start = j;
      while (j < chars.size() && (is_letter(chars[j]) || is_mark(chars[j]))) ++j;
      const std::u32string_view word = std::u32string_view(chars).substr(w_start, j - w_start);
      if (!is_capitalized(word)) {
        if (words_in_run == 0) run_end = j;
        break;
      }
      if (words_in_run == 0) first_word = word;
      ++words_in_run;
      run_end = j;
      if (j + 1 < chars.size() && chars[j] == U' ' && is_letter(chars[j + 1])) {
        ++j;
        continue;
      }
      break;
    }
    if (words_in_run >= 2 || (words_in_run == 1 && !is_function_word(first_word))) {
      spans.push_back({AnnotationKind::Emphasis, run_start, run_end});
    }
    i = std::max(run_end, i + 1);
    while (i < chars.size() && (is_letter(chars[i]) || is_mark(chars[i]))) ++i;
  }
  return AnnotatedDocument(std::string(text), std::move(spans));
}

}  // namespace larf
