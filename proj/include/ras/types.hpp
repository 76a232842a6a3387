#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ras {

// Surface form of the abstention placeholder in every text format.
inline constexpr std::string_view kPhToken = "<ph>";

// Default abstention cost factor, calibrated against human preference data.
inline constexpr double kDefaultAlpha = 0.5064;

enum class Errc {
  invalid_alpha,
  empty_reference,
  ref_contains_placeholder,
  placeholder_in_plain_alignment,
  bar_out_of_range,
  empty_corpus,
  empty_grid,
  empty_records,
  empty_group,
  parse_error,
  duplicate_id,
  confidence_length_mismatch,
  malformed_request,
  io_error,
  internal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

// One token of a transcript: a lexical word or the placeholder. Lexical text
// is expected to be non-empty and free of internal whitespace; the tokenizer
// guarantees this for sequences built from raw text.
struct Word {
  std::string text;  // empty for placeholders
  bool is_ph = false;

  static Word lexical(std::string t) { return {std::move(t), false}; }
  static Word placeholder() { return {std::string(), true}; }

  friend bool operator==(const Word&, const Word&) = default;
};

// Token sequence; the substrate of alignment and scoring.
struct WordSeq {
  std::vector<Word> words;

  WordSeq() = default;
  explicit WordSeq(std::vector<Word> w) : words(std::move(w)) {}

  int size() const { return static_cast<int>(words.size()); }
  bool empty() const { return words.empty(); }
  const Word& operator[](int i) const { return words[static_cast<size_t>(i)]; }

  bool has_placeholder() const;
  int placeholder_count() const;
  std::string to_string() const;  // space-joined, placeholders rendered as "<ph>"

  friend bool operator==(const WordSeq&, const WordSeq&) = default;
};

// Abstention cost factor, validated to lie strictly inside (0,1).
class AlphaParam {
 public:
  AlphaParam() : value_(kDefaultAlpha) {}
  explicit AlphaParam(double v) : value_(v) {
    if (!(v > 0.0 && v < 1.0))
      fail(Errc::invalid_alpha, "alpha must lie in (0,1), got " + std::to_string(v));
  }
  double value() const { return value_; }

 private:
  double value_;
};

}  // namespace ras
