#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ras/tokenize.hpp"
#include "ras/types.hpp"

namespace ras {

// One listening-test item: the reference transcript, a conventional
// hypothesis (no placeholders), an abstention-aware hypothesis, and the vote
// tallies for A, B and "can't decide". s is the total vote count.
struct PreferenceRecord {
  std::string id;
  std::string ref_text;
  std::string hyp_plain;    // A
  std::string hyp_abstain;  // B
  int64_t k_a = 0;
  int64_t k_b = 0;
  int64_t k_c = 0;
  int64_t s = 0;
};

struct LossBreakdown {
  double total = 0.0;
  double pref = 0.0;
  double tie = 0.0;
};

struct CalibrationResult {
  double alpha_star = 0.0;
  double total_loss = 0.0;
  double pref_loss = 0.0;
  double tie_loss = 0.0;
  double mean_delta_ras = 0.0;  // mean RAS gap B - A at alpha_star
  double tie_rate = 0.0;        // sum k_c / sum s
  std::vector<std::pair<double, double>> loss_curve;  // coarse grid (alpha, total loss)
  bool at_boundary = false;  // minimum sits on the edge of the search grid
  bool flat = false;         // every record has a zero RAS gap across the grid
};

// RAS gap of the abstention-aware hypothesis over the plain one against the
// shared reference, at the given alpha.
double delta_ras(const PreferenceRecord& record, AlphaParam alpha,
                 const TokenizeOptions& opts = {});

// Preference likelihood loss with tie regularization:
//   pref = -(1/K) sum [ (k_b/s) log p + (k_a/s) log(1-p) ],  p = sigmoid(delta_ras)
//   tie  =  (1/K) sum (k_c/s) * delta_ras^2
//   total = pref + lambda * tie
// p is clamped away from {0,1} before the logs.
LossBreakdown preference_loss(const std::vector<PreferenceRecord>& records, AlphaParam alpha,
                              double lambda, const TokenizeOptions& opts = {});

// Minimizes the total loss over alpha: a coarse grid on [0.01, 0.99] with
// step 0.01 followed by golden-section refinement of the best bracket to
// 1e-4. Alignments are recomputed at every alpha evaluation.
CalibrationResult fit_alpha(const std::vector<PreferenceRecord>& records, double lambda,
                            const TokenizeOptions& opts = {});

struct PreferenceLoadResult {
  std::vector<PreferenceRecord> records;
  struct RowError {
    int64_t line = 0;
    std::string id;
    std::string message;
  };
  std::vector<RowError> errors;
};

// Line-delimited records {id, ref, hyp_a, hyp_b, k_a, k_b, k_c}; hyp_a must
// not contain the placeholder token and all counts must be non-negative with
// a positive total.
PreferenceLoadResult load_preference_records(std::istream& in);
PreferenceLoadResult load_preference_records_file(const std::string& path);
void write_preference_records(const std::vector<PreferenceRecord>& records, std::ostream& out);

void write_calibration_json(const CalibrationResult& result, double lambda, int64_t n_records,
                            std::ostream& out);

}  // namespace ras
