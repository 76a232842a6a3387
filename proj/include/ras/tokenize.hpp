#pragma once

#include <string_view>

#include "ras/types.hpp"

namespace ras {

enum class TokenizeMode { whitespace, mixed_cjk };

struct TokenizeOptions {
  TokenizeMode mode = TokenizeMode::whitespace;
  bool lowercase = false;    // ASCII lowercasing of lexical words
  bool strip_punct = false;  // strip leading/trailing ASCII punctuation
};

// Splits raw text into a WordSeq. A whitespace-delimited token equal to
// "<ph>" (case-sensitive) becomes a placeholder and is never normalized.
// mixed_cjk additionally splits CJK ideographs into single-character words
// while keeping other runs intact, for code-switching corpora.
WordSeq tokenize(std::string_view text, const TokenizeOptions& opts = {});

bool is_cjk_codepoint(uint32_t cp);

}  // namespace ras
