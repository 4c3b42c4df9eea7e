#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "larf/annotation.hpp"
#include "larf/llm.hpp"
#include "larf/markup.hpp"
#include "larf/prompts.hpp"

namespace larf {

inline constexpr std::size_t kMaxChunkChars = 4000;

struct AnnotationResult {
  AnnotatedDocument document;
  VerificationReport report;
  int attempts = 0;
  bool fallback_used = false;
  std::vector<std::string> raw_replies;
  std::vector<ChatExchange> exchanges;
};

// Code-point range [start, end) of the input.
struct TextChunk {
  std::size_t start;
  std::size_t end;
};

// Splits on paragraph boundaries into chunks of at most max_chars code
// points. Oversized paragraphs split at sentence ends, then whitespace, then
// anywhere. The chunks partition the text.
std::vector<TextChunk> chunk_text(std::u32string_view text, std::size_t max_chars = kMaxChunkChars);

// Maps the spans of `produced` onto `original`, two texts that normalize
// equal. Offsets inside words that differ only in composition snap to the
// word start; offsets in whitespace snap to the adjacent word.
std::vector<AnnotationSpan> project_spans(std::u32string_view original,
                                          const AnnotatedDocument& produced);

// The repair instruction sent after a reply fails verification.
std::string corrective_message(const VerificationReport& report);

// Per chunk: request, parse, verify; on a failed check the model is asked
// again with the first difference quoted, up to config.max_retries times.
// If any chunk never verifies, the whole document falls back to the plain
// input text. The returned document's text is always the input verbatim.
//
// Throws EmptyInput, TransportError, AuthError.
AnnotationResult annotate(std::string_view text, const PromptSpec& prompt,
                          const LLMConfig& config, ChatBackend& backend);
AnnotationResult annotate(std::string_view text, const PromptSpec& prompt,
                          const LLMConfig& config);

// Rule-based stand-in for the model: Emphasis on digit runs and runs of
// capitalized words, Highlight on each paragraph's first sentence.
AnnotatedDocument offline_annotate(std::string_view text);

}  // namespace larf
