#include "ras/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "ras/jsonw.hpp"
#include "ras/metric.hpp"

namespace ras {

namespace {

constexpr double kRefineTol = 1e-4;  // grid is 0.01..0.99 step 0.01, then refine
constexpr double kProbClamp = 1e-12;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct EvalResult {
  LossBreakdown loss;
  double mean_dr = 0.0;
  double max_abs_dr = 0.0;
};

EvalResult evaluate(const std::vector<PreferenceRecord>& records, AlphaParam alpha,
                    double lambda, const TokenizeOptions& opts) {
  EvalResult r;
  double pref = 0.0, tie = 0.0, dr_sum = 0.0;
  for (const PreferenceRecord& rec : records) {
    const double dr = delta_ras(rec, alpha, opts);
    const double s = static_cast<double>(rec.s);
    const double p = std::clamp(sigmoid(dr), kProbClamp, 1.0 - kProbClamp);
    pref -= (rec.k_b / s) * std::log(p) + (rec.k_a / s) * std::log(1.0 - p);
    tie += (rec.k_c / s) * dr * dr;
    dr_sum += dr;
    r.max_abs_dr = std::max(r.max_abs_dr, std::abs(dr));
  }
  const auto k = static_cast<double>(records.size());
  r.loss.pref = pref / k;
  r.loss.tie = tie / k;
  r.loss.total = r.loss.pref + lambda * r.loss.tie;
  r.mean_dr = dr_sum / k;
  return r;
}

}  // namespace

double delta_ras(const PreferenceRecord& record, AlphaParam alpha,
                 const TokenizeOptions& opts) {
  try {
    const WordSeq ref = tokenize(record.ref_text, opts);
    const WordSeq a = tokenize(record.hyp_plain, opts);
    const WordSeq b = tokenize(record.hyp_abstain, opts);
    if (a.has_placeholder())
      fail(Errc::parse_error, "plain hypothesis contains a placeholder token");
    return score_utterance(ref, b, alpha).ras - score_utterance(ref, a, alpha).ras;
  } catch (const Error& e) {
    fail(e.code(), "record " + record.id + ": " + e.what());
  }
}

LossBreakdown preference_loss(const std::vector<PreferenceRecord>& records, AlphaParam alpha,
                              double lambda, const TokenizeOptions& opts) {
  if (records.empty()) fail(Errc::empty_records, "preference loss needs at least one record");
  for (const PreferenceRecord& rec : records)
    if (rec.s <= 0) fail(Errc::parse_error, "record " + rec.id + ": vote total must be positive");
  return evaluate(records, alpha, lambda, opts).loss;
}

CalibrationResult fit_alpha(const std::vector<PreferenceRecord>& records, double lambda,
                            const TokenizeOptions& opts) {
  if (records.empty()) fail(Errc::empty_records, "calibration needs at least one record");

  CalibrationResult out;
  int64_t votes = 0, ties = 0;
  for (const PreferenceRecord& rec : records) {
    if (rec.s <= 0) fail(Errc::parse_error, "record " + rec.id + ": vote total must be positive");
    votes += rec.s;
    ties += rec.k_c;
  }
  out.tie_rate = static_cast<double>(ties) / static_cast<double>(votes);

  // Coarse grid pass.
  std::vector<double> grid;
  for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  size_t best = 0;
  double best_loss = 0.0;
  double max_abs_dr = 0.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const EvalResult r = evaluate(records, AlphaParam(grid[i]), lambda, opts);
    out.loss_curve.emplace_back(grid[i], r.loss.total);
    max_abs_dr = std::max(max_abs_dr, r.max_abs_dr);
    if (i == 0 || r.loss.total < best_loss) {
      best_loss = r.loss.total;
      best = i;
    }
  }

  if (max_abs_dr == 0.0) {
    // Degenerate data: the objective cannot depend on alpha.
    out.flat = true;
    out.alpha_star = grid[best];
    const EvalResult r = evaluate(records, AlphaParam(out.alpha_star), lambda, opts);
    out.total_loss = r.loss.total;
    out.pref_loss = r.loss.pref;
    out.tie_loss = r.loss.tie;
    out.mean_delta_ras = r.mean_dr;
    return out;
  }

  out.at_boundary = best == 0 || best + 1 == grid.size();

  // Golden-section refinement on the bracket around the best grid point.
  double lo = grid[best > 0 ? best - 1 : best];
  double hi = grid[best + 1 < grid.size() ? best + 1 : best];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto loss_at = [&](double a) {
    return evaluate(records, AlphaParam(a), lambda, opts).loss.total;
  };
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = loss_at(x1);
  double f2 = loss_at(x2);
  while (hi - lo > kRefineTol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = loss_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = loss_at(x2);
    }
  }
  out.alpha_star = (lo + hi) / 2.0;

  const EvalResult r = evaluate(records, AlphaParam(out.alpha_star), lambda, opts);
  out.total_loss = r.loss.total;
  out.pref_loss = r.loss.pref;
  out.tie_loss = r.loss.tie;
  out.mean_delta_ras = r.mean_dr;
  return out;
}

PreferenceLoadResult load_preference_records(std::istream& in) {
  PreferenceLoadResult out;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      out.errors.push_back({lineno, "", std::string("ParseError: ") + e.what()});
      continue;
    }
    try {
      PreferenceRecord rec;
      rec.id = doc.at("id").get<std::string>();
      rec.ref_text = doc.at("ref").get<std::string>();
      rec.hyp_plain = doc.at("hyp_a").get<std::string>();
      rec.hyp_abstain = doc.at("hyp_b").get<std::string>();
      rec.k_a = doc.at("k_a").get<int64_t>();
      rec.k_b = doc.at("k_b").get<int64_t>();
      rec.k_c = doc.at("k_c").get<int64_t>();
      if (rec.k_a < 0 || rec.k_b < 0 || rec.k_c < 0) {
        out.errors.push_back({lineno, rec.id, "ParseError: vote counts must be non-negative"});
        continue;
      }
      rec.s = rec.k_a + rec.k_b + rec.k_c;
      if (rec.s <= 0) {
        out.errors.push_back({lineno, rec.id, "ParseError: vote total must be positive"});
        continue;
      }
      if (tokenize(rec.hyp_plain).has_placeholder()) {
        out.errors.push_back(
            {lineno, rec.id, "ParseError: hyp_a must not contain the placeholder token"});
        continue;
      }
      out.records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      out.errors.push_back({lineno, "", std::string("ParseError: ") + e.what()});
    }
  }
  return out;
}

PreferenceLoadResult load_preference_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open preference file: " + path);
  return load_preference_records(in);
}

void write_preference_records(const std::vector<PreferenceRecord>& records, std::ostream& out) {
  for (const PreferenceRecord& r : records) {
    out << "{\"id\":" << json_str(r.id) << ",\"ref\":" << json_str(r.ref_text)
        << ",\"hyp_a\":" << json_str(r.hyp_plain) << ",\"hyp_b\":" << json_str(r.hyp_abstain)
        << ",\"k_a\":" << r.k_a << ",\"k_b\":" << r.k_b << ",\"k_c\":" << r.k_c << "}\n";
  }
}

void write_calibration_json(const CalibrationResult& result, double lambda, int64_t n_records,
                            std::ostream& out) {
  out << "{\"alpha_star\":" << fixed6(result.alpha_star)
      << ",\"total_loss\":" << fixed6(result.total_loss)
      << ",\"pref_loss\":" << fixed6(result.pref_loss)
      << ",\"tie_loss\":" << fixed6(result.tie_loss)
      << ",\"mean_delta_ras\":" << fixed6(result.mean_delta_ras)
      << ",\"tie_rate\":" << fixed6(result.tie_rate) << ",\"lambda\":" << fixed6(lambda)
      << ",\"records\":" << n_records << ",\"flags\":{\"boundary\":"
      << (result.at_boundary ? "true" : "false")
      << ",\"flat\":" << (result.flat ? "true" : "false") << "},\"loss_curve\":[";
  for (size_t i = 0; i < result.loss_curve.size(); ++i) {
    if (i) out << ',';
    out << "{\"alpha\":" << fixed6(result.loss_curve[i].first)
        << ",\"loss\":" << fixed6(result.loss_curve[i].second) << "}";
  }
  out << "]}\n";
}

}  // namespace ras
