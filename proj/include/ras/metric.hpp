#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ras/alignment.hpp"
#include "ras/types.hpp"

namespace ras {

// Per-utterance score. ras == usefulness - cost, with usefulness = C/N and
// cost = g/N for the alignment that produced it. wer is present only when
// the hypothesis carries no placeholder (standard WER is undefined over
// placeholder tokens). The integer components back the derived values
// exactly and are what corpus pooling sums.
struct RasScore {
  double ras = 0.0;
  double usefulness = 0.0;
  double cost = 0.0;
  std::optional<double> wer;
  int64_t n_ref = 0;

  int64_t matches = 0;
  int64_t unit_ops = 0;
  int64_t ph_words = 0;
};

struct CorpusSummary {
  RasScore micro;  // pooled counts: usefulness = sum C / sum N, cost = sum g / sum N
  double macro_ras = 0.0;         // unweighted means of per-utterance values
  double macro_usefulness = 0.0;
  double macro_cost = 0.0;
  int64_t count = 0;
};

// Scores one hypothesis against its reference. The hypothesis is
// merge-normalized internally before alignment.
RasScore score_utterance(const WordSeq& ref, const WordSeq& hyp, AlphaParam alpha);

// Pools per-utterance scores into micro and macro aggregates. Deterministic
// regardless of accumulation order: micro sums are integers.
class SummaryAccumulator {
 public:
  void add(const RasScore& s);
  CorpusSummary finish(AlphaParam alpha) const;  // throws EmptyCorpus when empty

 private:
  int64_t matches_ = 0, unit_ops_ = 0, ph_words_ = 0, ref_words_ = 0;
  int64_t wer_edits_ = 0, wer_ref_words_ = 0;
  double ras_sum_ = 0.0, usefulness_sum_ = 0.0, cost_sum_ = 0.0;
  int64_t count_ = 0;
};

struct RowFailure {
  int64_t row = 0;
  std::string id;
  Errc code = Errc::internal;
  std::string message;
};

// Scores a corpus of (ref, hyp) pairs. With `failures` given, rows that fail
// are collected (indexed by position) and skipped; otherwise the first error
// propagates. Throws EmptyCorpus when no row scored.
CorpusSummary score_corpus(const std::vector<std::pair<WordSeq, WordSeq>>& pairs,
                           AlphaParam alpha, std::vector<RowFailure>* failures = nullptr);

}  // namespace ras
