#include "ras/tokenize.hpp"

#include <cctype>

namespace ras {

bool is_cjk_codepoint(uint32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // CJK Unified Ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // Extension A
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // Compatibility Ideographs
         (cp >= 0x20000 && cp <= 0x2EBEF);    // Extensions B..F
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

// Decodes the UTF-8 sequence at `pos`, advancing it. Malformed bytes are
// consumed one at a time and reported as U+FFFD so tokenization stays total.
uint32_t next_codepoint(std::string_view s, size_t& pos, size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  len = 1;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int extra = 0;
  uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) { extra = 1; cp = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { extra = 2; cp = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { extra = 3; cp = b0 & 0x07; }
  else { ++pos; return 0xFFFD; }
  if (pos + static_cast<size_t>(extra) >= s.size()) {  // truncated sequence
    ++pos;
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) { ++pos; return 0xFFFD; }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += static_cast<size_t>(extra) + 1;
  len = static_cast<size_t>(extra) + 1;
  return cp;
}

void emit_token(std::string token, const TokenizeOptions& opts, WordSeq& out) {
  if (token == kPhToken) {
    out.words.push_back(Word::placeholder());
    return;
  }
  if (opts.lowercase) {
    for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (opts.strip_punct) {
    size_t b = 0, e = token.size();
    while (b < e && is_ascii_punct(token[b])) ++b;
    while (e > b && is_ascii_punct(token[e - 1])) --e;
    token = token.substr(b, e - b);
  }
  if (token.empty()) return;

  if (opts.mode == TokenizeMode::whitespace) {
    out.words.push_back(Word::lexical(std::move(token)));
    return;
  }

  // mixed_cjk: each CJK codepoint becomes its own word, everything else in
  // the token stays grouped.
  std::string run;
  size_t pos = 0;
  while (pos < token.size()) {
    const size_t start = pos;
    size_t len = 1;
    const uint32_t cp = next_codepoint(token, pos, len);
    if (is_cjk_codepoint(cp)) {
      if (!run.empty()) {
        out.words.push_back(Word::lexical(std::move(run)));
        run.clear();
      }
      out.words.push_back(Word::lexical(token.substr(start, pos - start)));
    } else {
      run.append(token, start, pos - start);
    }
  }
  if (!run.empty()) out.words.push_back(Word::lexical(std::move(run)));
}

}  // namespace

WordSeq tokenize(std::string_view text, const TokenizeOptions& opts) {
  WordSeq out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) emit_token(std::string(text.substr(i, j - i)), opts, out);
    i = j;
  }
  return out;
}

}  // namespace ras
