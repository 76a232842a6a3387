#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ras/metric.hpp"
#include "ras/types.hpp"

namespace ras {

// Maps a text segment to the number of placeholder tokens it expands to.
// Deterministic; must return >= 1 for non-empty segments.
using TokenCountFn = std::function<int64_t(const std::string&)>;

// Default count: one placeholder per whitespace word of the segment.
int64_t whitespace_token_count(const std::string& segment);

// Sidecar table reproducing a subword tokenizer's segment lengths. Segments
// not listed fall back to the whitespace count.
class TokenCountTable {
 public:
  TokenCountTable() = default;
  static TokenCountTable load_json(std::istream& in);      // {"segment": count, ...}
  static TokenCountTable load_json_file(const std::string& path);

  void set(std::string segment, int64_t count);
  int64_t operator()(const std::string& segment) const;
  TokenCountFn fn() const;

 private:
  std::unordered_map<std::string, int64_t> counts_;
};

// Hypothesis words paired with aggregated word-level confidences in [0,1].
struct ConfidentWord {
  std::string word;
  double confidence = 1.0;
};

struct ConfidentHyp {
  std::vector<ConfidentWord> words;

  WordSeq to_word_seq() const;
};

// Builds a training target from the plain alignment of hyp against ref:
// matched words are kept; each maximal run of same-kind error ops becomes
// counts(segment) placeholders, where the segment is the hypothesis text for
// substitutions/insertions and the reference text for deletions. The output
// is deliberately not merge-normalized, so token counts survive for training
// targets. Neither input may contain placeholders.
WordSeq gt_guided_replace(const WordSeq& ref, const WordSeq& hyp, const TokenCountFn& counts);

// Replaces every word whose confidence is strictly below `bar` with a
// placeholder and merge-normalizes the result. bar must lie in [0,1].
WordSeq logit_replace(const ConfidentHyp& hyp, double bar);

struct BarSweepResult {
  double best_bar = 0.0;
  std::vector<std::pair<double, double>> curve;  // (bar, micro ras), grid order
};

// Applies logit_replace corpus-wide for every bar in the grid and picks the
// bar with the highest micro RAS (ties go to the smallest bar).
BarSweepResult sweep_bar(const std::vector<std::pair<WordSeq, ConfidentHyp>>& corpus,
                         AlphaParam alpha, const std::vector<double>& grid);

}  // namespace ras
