#include "ras/metric.hpp"

#include <string>

namespace ras {

RasScore score_utterance(const WordSeq& ref, const WordSeq& hyp, AlphaParam alpha) {
  const WordSeq norm = normalize_hypothesis(hyp);
  const AlignmentResult ar = weighted_edit_distance_fast(ref, norm, alpha);

  const auto n = static_cast<double>(ref.size());
  RasScore s;
  s.n_ref = ref.size();
  s.matches = ar.matches;
  s.unit_ops = ar.unit_ops;
  s.ph_words = ar.ph_words;
  s.usefulness = ar.matches / n;
  s.cost = ar.cost / n;
  // Scaling the ph term before the alpha multiply keeps the closed forms
  // exact: ras(ref,ref) == 1, ras(ref,[]) == -1, ras(ref,[ph]) == -alpha.
  s.ras = (ar.matches - ar.unit_ops) / n - alpha.value() * (ar.ph_words / n);
  if (!hyp.has_placeholder()) {
    // Placeholder-free hypotheses reduce to the standard alignment, so the
    // trace already carries the WER counts.
    s.wer = ar.unit_ops / n;
  }
  return s;
}

void SummaryAccumulator::add(const RasScore& s) {
  matches_ += s.matches;
  unit_ops_ += s.unit_ops;
  ph_words_ += s.ph_words;
  ref_words_ += s.n_ref;
  if (s.wer.has_value()) {
    wer_edits_ += s.unit_ops;
    wer_ref_words_ += s.n_ref;
  }
  ras_sum_ += s.ras;
  usefulness_sum_ += s.usefulness;
  cost_sum_ += s.cost;
  ++count_;
}

CorpusSummary SummaryAccumulator::finish(AlphaParam alpha) const {
  if (count_ == 0) fail(Errc::empty_corpus, "no utterances scored");
  CorpusSummary out;
  const auto n = static_cast<double>(ref_words_);
  out.micro.n_ref = ref_words_;
  out.micro.matches = matches_;
  out.micro.unit_ops = unit_ops_;
  out.micro.ph_words = ph_words_;
  out.micro.usefulness = matches_ / n;
  out.micro.cost = (unit_ops_ + alpha.value() * ph_words_) / n;
  out.micro.ras = (matches_ - unit_ops_) / n - alpha.value() * (ph_words_ / n);
  if (wer_ref_words_ > 0) out.micro.wer = wer_edits_ / static_cast<double>(wer_ref_words_);
  out.macro_ras = ras_sum_ / count_;
  out.macro_usefulness = usefulness_sum_ / count_;
  out.macro_cost = cost_sum_ / count_;
  out.count = count_;
  return out;
}

CorpusSummary score_corpus(const std::vector<std::pair<WordSeq, WordSeq>>& pairs,
                           AlphaParam alpha, std::vector<RowFailure>* failures) {
  if (pairs.empty()) fail(Errc::empty_corpus, "corpus is empty");
  SummaryAccumulator acc;
  for (size_t row = 0; row < pairs.size(); ++row) {
    try {
      acc.add(score_utterance(pairs[row].first, pairs[row].second, alpha));
    } catch (const Error& e) {
      if (!failures) throw;
      failures->push_back({static_cast<int64_t>(row), std::to_string(row), e.code(), e.what()});
    }
  }
  return acc.finish(alpha);
}

}  // namespace ras
