#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ras/metric.hpp"
#include "ras/ph_tools.hpp"
#include "ras/tokenize.hpp"
#include "ras/types.hpp"

namespace ras {

// One corpus row. confidences, when present, pair 1:1 with the hypothesis
// tokens under the active tokenization mode.
struct UtteranceRecord {
  std::string id;
  std::string ref;
  std::string hyp;
  std::optional<std::vector<double>> confidences;

  ConfidentHyp confident_hyp(const TokenizeOptions& opts = {}) const;
};

struct LoadResult {
  std::vector<UtteranceRecord> records;
  std::vector<RowFailure> errors;  // row = 1-based line number
};

// Line-delimited UTF-8 records with keys {"id","ref","hyp"}, optional
// {"confidences":[...]}; the shape {"id","ref","words":[{"w","conf"}]} is
// accepted as the confidence-corpus spelling of the same record. Rows that
// fail validation are collected, not fatal.
LoadResult load_corpus(std::istream& in, const TokenizeOptions& opts = {});
LoadResult load_corpus_file(const std::string& path, const TokenizeOptions& opts = {});
void write_corpus(const std::vector<UtteranceRecord>& records, std::ostream& out);

struct EvalRow {
  std::string id;
  RasScore score;
  int64_t ph_count = 0;  // placeholders after merge-normalization
};

struct ScatterPoint {
  std::string id;
  std::optional<double> wer;  // absent for rows with placeholders
  double ras = 0.0;
};

struct EvalReport {
  double alpha = kDefaultAlpha;
  std::vector<EvalRow> per_utterance;  // sorted by id
  CorpusSummary summary;
  std::vector<ScatterPoint> scatter;
  std::vector<RowFailure> failures;
};

// Scores every record; per-row failures are collected and excluded from the
// summary. Row order (and therefore output) is fixed by sorting on id.
EvalReport build_report(const std::vector<UtteranceRecord>& records, AlphaParam alpha,
                        const TokenizeOptions& opts = {});

void write_report_json(const EvalReport& report, std::ostream& out);
void write_report_tsv(const EvalReport& report, std::ostream& out);

}  // namespace ras
