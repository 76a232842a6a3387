#pragma once

#include <vector>

#include "ras/types.hpp"

namespace ras {

enum class OpKind { match, substitute, del, insert_word, ph_absorb, ph_insert };

const char* op_kind_name(OpKind k);

// One alignment step. Reference coverage is the half-open span
// [ref_start, ref_end); ops that consume no reference words carry an empty
// span at the position where they occur. hyp_idx is -1 for deletions.
// Costs: match 0; substitute/del/insert_word 1; ph_absorb alpha per covered
// reference word; ph_insert alpha.
struct AlignOp {
  OpKind kind = OpKind::match;
  int ref_start = 0;
  int ref_end = 0;
  int hyp_idx = -1;

  int ref_span() const { return ref_end - ref_start; }
  double cost(double alpha) const;

  friend bool operator==(const AlignOp&, const AlignOp&) = default;
};

// Outcome of the weighted alignment: minimal cost g under the max-matches
// tie-break, the match count C, the op trace in forward order, and the exact
// decomposition cost == unit_ops + alpha * ph_words.
struct AlignmentResult {
  double cost = 0.0;
  int matches = 0;
  std::vector<AlignOp> trace;
  int unit_ops = 0;
  int ph_words = 0;
};

struct WerCounts {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int hits = 0;
  int ref_len = 0;
};

struct WerAlignment {
  WerCounts counts;
  std::vector<AlignOp> trace;

  double wer() const {
    return static_cast<double>(counts.substitutions + counts.deletions + counts.insertions) /
           counts.ref_len;
  }
};

// Collapses every maximal run of placeholders to a single placeholder.
// Lexical words and their order are untouched.
WordSeq normalize_hypothesis(const WordSeq& raw);

// Abstention-aware weighted edit distance with full trace. The reference
// must be non-empty and placeholder-free; the hypothesis is expected in
// merge-normalized form (no two adjacent placeholders). A placeholder may
// absorb any contiguous non-empty span of reference words at alpha per word,
// or align to nothing at cost alpha. Among minimum-cost alignments the trace
// maximizes the match count; remaining ties resolve deterministically in
// forward trace order (diagonal op, then absorb with the shortest span, then
// deletion, then insertion).
//
// This variant evaluates the absorb transition by scanning all span starts:
// O(N^2 M) time. It is the readable reference implementation.
AlignmentResult weighted_edit_distance(const WordSeq& ref, const WordSeq& hyp, AlphaParam alpha);

// Same contract and bit-identical output as weighted_edit_distance, with the
// absorb scan folded into a running minimum per placeholder column: O(NM).
AlignmentResult weighted_edit_distance_fast(const WordSeq& ref, const WordSeq& hyp,
                                            AlphaParam alpha);

// Standard unit-cost word alignment. Neither side may contain placeholders.
// Among co-optimal alignments hits are maximized, then substitute is
// preferred over delete over insert at the first divergence in forward
// order, which pins the trace byte-for-byte.
WerAlignment wer_align(const WordSeq& ref, const WordSeq& hyp);

}  // namespace ras
