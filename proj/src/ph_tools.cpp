#include "ras/ph_tools.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "json.hpp"

#include "ras/alignment.hpp"

namespace ras {

int64_t whitespace_token_count(const std::string& segment) {
  int64_t n = 0;
  bool in_word = false;
  for (char c : segment) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return std::max<int64_t>(1, n);
}

TokenCountTable TokenCountTable::load_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("token count table: ") + e.what());
  }
  if (!doc.is_object()) fail(Errc::parse_error, "token count table must be a JSON object");
  TokenCountTable t;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it.value().is_number_integer() || it.value().get<int64_t>() < 1)
      fail(Errc::parse_error, "token count for \"" + it.key() + "\" must be a positive integer");
    t.set(it.key(), it.value().get<int64_t>());
  }
  return t;
}

TokenCountTable TokenCountTable::load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open token count table: " + path);
  return load_json(in);
}

void TokenCountTable::set(std::string segment, int64_t count) {
  counts_[std::move(segment)] = count;
}

int64_t TokenCountTable::operator()(const std::string& segment) const {
  auto it = counts_.find(segment);
  return it != counts_.end() ? it->second : whitespace_token_count(segment);
}

TokenCountFn TokenCountTable::fn() const {
  return [table = *this](const std::string& s) { return table(s); };
}

WordSeq ConfidentHyp::to_word_seq() const {
  WordSeq out;
  out.words.reserve(words.size());
  for (const ConfidentWord& w : words) out.words.push_back(Word::lexical(w.word));
  return out;
}

namespace {

std::string join_words(const WordSeq& seq, int begin, int end) {
  std::string s;
  for (int k = begin; k < end; ++k) {
    if (!s.empty()) s += ' ';
    s += seq[k].text;
  }
  return s;
}

void emit_ph(int64_t count, WordSeq& out) {
  for (int64_t k = 0; k < count; ++k) out.words.push_back(Word::placeholder());
}

}  // namespace

WordSeq gt_guided_replace(const WordSeq& ref, const WordSeq& hyp, const TokenCountFn& counts) {
  const WerAlignment wa = wer_align(ref, hyp);
  const std::vector<AlignOp>& trace = wa.trace;

  WordSeq out;
  size_t i = 0;
  while (i < trace.size()) {
    const AlignOp& op = trace[i];
    if (op.kind == OpKind::match) {
      out.words.push_back(hyp[op.hyp_idx]);
      ++i;
      continue;
    }
    // Group the maximal run of same-kind error ops into one segment before
    // counting; consecutive trace ops of one kind cover adjacent words.
    size_t j = i;
    while (j + 1 < trace.size() && trace[j + 1].kind == op.kind) ++j;
    std::string segment;
    if (op.kind == OpKind::del) {
      segment = join_words(ref, op.ref_start, trace[j].ref_end);
    } else {  // substitute or insert: the erroneous hypothesis text
      segment = join_words(hyp, op.hyp_idx, trace[j].hyp_idx + 1);
    }
    emit_ph(std::max<int64_t>(1, counts(segment)), out);
    i = j + 1;
  }
  return out;
}

WordSeq logit_replace(const ConfidentHyp& hyp, double bar) {
  if (!(bar >= 0.0 && bar <= 1.0))
    fail(Errc::bar_out_of_range, "confidence bar must lie in [0,1], got " + std::to_string(bar));
  WordSeq raw;
  raw.words.reserve(hyp.words.size());
  for (const ConfidentWord& w : hyp.words) {
    if (w.confidence < bar)
      raw.words.push_back(Word::placeholder());
    else
      raw.words.push_back(Word::lexical(w.word));
  }
  return normalize_hypothesis(raw);
}

BarSweepResult sweep_bar(const std::vector<std::pair<WordSeq, ConfidentHyp>>& corpus,
                         AlphaParam alpha, const std::vector<double>& grid) {
  if (corpus.empty()) fail(Errc::empty_corpus, "bar sweep needs a non-empty corpus");
  if (grid.empty()) fail(Errc::empty_grid, "bar sweep needs a non-empty grid");

  BarSweepResult out;
  bool have_best = false;
  double best_ras = 0.0;
  for (double bar : grid) {
    SummaryAccumulator acc;
    for (const auto& [ref, hyp] : corpus)
      acc.add(score_utterance(ref, logit_replace(hyp, bar), alpha));
    const double micro_ras = acc.finish(alpha).micro.ras;
    out.curve.emplace_back(bar, micro_ras);
    if (!have_best || micro_ras > best_ras ||
        (micro_ras == best_ras && bar < out.best_bar)) {
      best_ras = micro_ras;
      out.best_bar = bar;
      have_best = true;
    }
  }
  return out;
}

}  // namespace ras
