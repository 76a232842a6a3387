#include "ras/calibration.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"

#include "ras/metric.hpp"
#include "ras/synth.hpp"
#include "ras/tokenize.hpp"

using namespace ras;

namespace {

PreferenceRecord make_record(std::string id, std::string ref, std::string a, std::string b,
                             int64_t ka, int64_t kb, int64_t kc) {
  PreferenceRecord r;
  r.id = std::move(id);
  r.ref_text = std::move(ref);
  r.hyp_plain = std::move(a);
  r.hyp_abstain = std::move(b);
  r.k_a = ka;
  r.k_b = kb;
  r.k_c = kc;
  r.s = ka + kb + kc;
  return r;
}

}  // namespace

TEST_CASE("delta_ras: identical hypotheses give zero") {
  const auto rec = make_record("r0", "a b c", "a x c", "a x c", 1, 1, 0);
  CHECK(delta_ras(rec, AlphaParam(0.5)) == 0.0);
  CHECK(delta_ras(rec, AlphaParam(0.9)) == 0.0);
}

TEST_CASE("delta_ras: abstention beats a wrong word") {
  const auto rec = make_record("r1", "a b", "x b", "<ph> b", 1, 1, 0);
  // R(A) = 1/2 - 1/2 = 0; R(B) = 1/2 - 0.5/2 = 0.25
  CHECK(std::abs(delta_ras(rec, AlphaParam(0.5)) - 0.25) < 1e-12);
}

TEST_CASE("delta_ras: masking a correct word shows up as lost usefulness") {
  // B additionally masks the correct word b; the extra placeholder absorbs
  // it, costing both a match and alpha mass.
  const auto rec = make_record("r2", "a b c", "x b c", "<ph> <ph> c", 1, 1, 0);
  const double alpha = 0.5;
  const WordSeq ref = tokenize("a b c");
  const double r_a = score_utterance(ref, tokenize("x b c"), AlphaParam(alpha)).ras;
  const double r_b = score_utterance(ref, tokenize("<ph> <ph> c"), AlphaParam(alpha)).ras;
  CHECK(delta_ras(rec, AlphaParam(alpha)) == r_b - r_a);
  // vs. masking errors only:
  const auto only_err = make_record("r3", "a b c", "x b c", "<ph> b c", 1, 1, 0);
  CHECK(delta_ras(rec, AlphaParam(alpha)) < delta_ras(only_err, AlphaParam(alpha)));
}

TEST_CASE("delta_ras attaches the record id to alignment errors") {
  const auto rec = make_record("bad-1", "", "a", "a", 1, 1, 0);
  CHECK_THROWS_WITH_AS(delta_ras(rec, AlphaParam(0.5)), doctest::Contains("bad-1"), Error);
}

TEST_CASE("preference_loss: balanced votes at zero gap give log 2") {
  const std::vector<PreferenceRecord> recs = {
      make_record("r0", "a b", "a b", "a b", 1, 1, 0)};
  const LossBreakdown l = preference_loss(recs, AlphaParam(0.5), 0.1);
  CHECK(std::abs(l.pref - std::log(2.0)) < 1e-12);
  CHECK(l.tie == 0.0);
  CHECK(l.total == l.pref);
}

TEST_CASE("preference_loss: all ties contribute only the squared gap") {
  const std::vector<PreferenceRecord> recs = {
      make_record("r0", "a b", "x b", "<ph> b", 0, 0, 5)};
  const double d = delta_ras(recs[0], AlphaParam(0.5));
  const LossBreakdown l = preference_loss(recs, AlphaParam(0.5), 0.1);
  CHECK(l.pref == 0.0);
  CHECK(std::abs(l.tie - d * d) < 1e-12);
  CHECK(std::abs(l.total - 0.1 * d * d) < 1e-12);
}

TEST_CASE("preference_loss rejects empty input") {
  CHECK_THROWS_AS(preference_loss({}, AlphaParam(0.5), 0.1), Error);
}

TEST_CASE("preference_loss stays finite and continuous over the grid") {
  const std::vector<PreferenceRecord> recs =
      gen_synth_prefs({.k = 40, .votes = 25, .alpha_true = 0.5, .tie_rate = 0.1, .seed = 5});
  for (int i = 1; i <= 99; ++i) {
    const double a = i / 100.0;
    const LossBreakdown l = preference_loss(recs, AlphaParam(a), 0.1);
    REQUIRE(std::isfinite(l.total));
    const LossBreakdown l2 = preference_loss(recs, AlphaParam(a + 1e-6), 0.1);
    CHECK(std::abs(l2.total - l.total) < 1e-3);
  }
}

TEST_CASE("fit_alpha recovers the generating alpha on synthetic data") {
  for (uint64_t seed : {1ull, 2ull}) {
    const auto recs =
        gen_synth_prefs({.k = 200, .votes = 25, .alpha_true = 0.5, .seed = seed});
    const CalibrationResult r = fit_alpha(recs, 0.1);
    CHECK(std::abs(r.alpha_star - 0.5) <= 0.05);
    CHECK(!r.flat);
    CHECK(std::abs(r.total_loss - (r.pref_loss + 0.1 * r.tie_loss)) < 1e-9);
    CHECK(r.loss_curve.size() == 99);
  }
}

TEST_CASE("fit_alpha: with lambda 0 the tie term has no influence") {
  const auto base =
      gen_synth_prefs({.k = 60, .votes = 20, .alpha_true = 0.45, .seed = 9});
  // Doubling every record's votes with ties scales each per-record weight by
  // the same 1/2, so the argmin is untouched and pref halves.
  std::vector<PreferenceRecord> with_ties = base;
  for (PreferenceRecord& r : with_ties) {
    r.k_c = r.k_a + r.k_b;
    r.s = r.k_a + r.k_b + r.k_c;
  }
  const CalibrationResult r0 = fit_alpha(base, 0.0);
  const CalibrationResult r1 = fit_alpha(with_ties, 0.0);
  CHECK(r0.alpha_star == r1.alpha_star);  // identical golden-section iterates
  CHECK(std::abs(r1.pref_loss - r0.pref_loss / 2) < 1e-12);
  CHECK(r0.total_loss == r0.pref_loss);
  CHECK(r1.total_loss == r1.pref_loss);
}

TEST_CASE("fit_alpha flags a boundary minimum") {
  // Every annotator prefers B and B improves as alpha shrinks: the minimum
  // runs into the lower edge of the search grid.
  std::vector<PreferenceRecord> recs;
  for (int i = 0; i < 20; ++i)
    recs.push_back(make_record("b" + std::to_string(i), "a b c d", "x y z d",
                               "<ph> d", 0, 10, 0));
  const CalibrationResult r = fit_alpha(recs, 0.1);
  CHECK(r.at_boundary);
  CHECK(r.alpha_star <= 0.02);
}

TEST_CASE("fit_alpha flags degenerate data") {
  std::vector<PreferenceRecord> recs;
  for (int i = 0; i < 5; ++i)
    recs.push_back(make_record("d" + std::to_string(i), "a b", "a b", "a b", 3, 4, 1));
  const CalibrationResult r = fit_alpha(recs, 0.1);
  CHECK(r.flat);
  CHECK(r.alpha_star == 0.01);  // grid minimum of a flat curve
  CHECK(r.mean_delta_ras == 0.0);
}

TEST_CASE("preference records round-trip through the line format") {
  const auto recs = gen_synth_prefs({.k = 10, .votes = 25, .tie_rate = 0.2, .seed = 3});
  std::stringstream buf;
  write_preference_records(recs, buf);
  const PreferenceLoadResult loaded = load_preference_records(buf);
  CHECK(loaded.errors.empty());
  REQUIRE(loaded.records.size() == recs.size());
  for (size_t i = 0; i < recs.size(); ++i) {
    CHECK(loaded.records[i].id == recs[i].id);
    CHECK(loaded.records[i].ref_text == recs[i].ref_text);
    CHECK(loaded.records[i].hyp_abstain == recs[i].hyp_abstain);
    CHECK(loaded.records[i].k_a == recs[i].k_a);
    CHECK(loaded.records[i].k_b == recs[i].k_b);
    CHECK(loaded.records[i].k_c == recs[i].k_c);
    CHECK(loaded.records[i].s == recs[i].s);
  }
}

TEST_CASE("preference loader reports invalid rows") {
  std::stringstream buf;
  buf << R"({"id":"ok","ref":"a b","hyp_a":"a b","hyp_b":"<ph> b","k_a":1,"k_b":2,"k_c":0})"
      << "\n"
      << "not json\n"
      << R"({"id":"zero","ref":"a","hyp_a":"a","hyp_b":"a","k_a":0,"k_b":0,"k_c":0})"
      << "\n"
      << R"({"id":"ph","ref":"a","hyp_a":"<ph>","hyp_b":"a","k_a":1,"k_b":1,"k_c":0})"
      << "\n"
      << R"({"id":"neg","ref":"a","hyp_a":"a","hyp_b":"a","k_a":-1,"k_b":2,"k_c":0})"
      << "\n";
  const PreferenceLoadResult loaded = load_preference_records(buf);
  CHECK(loaded.records.size() == 1);
  REQUIRE(loaded.errors.size() == 4);
  CHECK(loaded.errors[0].line == 2);
  CHECK(loaded.errors[1].id == "zero");
  CHECK(loaded.errors[2].id == "ph");
  CHECK(loaded.errors[3].id == "neg");
}
