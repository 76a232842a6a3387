// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits non-zero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "ras/calibration.hpp"
#include "ras/corpus_io.hpp"
#include "ras/metric.hpp"
#include "ras/ph_tools.hpp"
#include "ras/reward_service.hpp"
#include "ras/synth.hpp"
#include "ras/tokenize.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"
#include "support/proc.hpp"

using namespace ras;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      detail = msg;
    }
  }
  void note(const std::string& msg) {
    if (ok) detail = msg;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Instance {
  WordSeq ref;
  WordSeq hyp;
  double alpha;
};

std::vector<Instance> oracle_instances() {
  std::mt19937_64 rng(20240601);
  testsup::InstanceOptions opts;  // ref<=6 over 3 symbols, hyp<=6, ph 0.3
  const double alphas[] = {0.25, 0.5064, 0.75};
  std::vector<Instance> out;
  out.reserve(10000);
  for (int t = 0; t < 10000; ++t)
    out.push_back(
        {testsup::random_ref(rng, opts), testsup::random_hyp(rng, opts), alphas[t % 3]});
  return out;
}

Check criterion_oracle_equivalence(const std::vector<Instance>& instances) {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  for (const Instance& inst : instances) {
    const auto got = weighted_edit_distance(inst.ref, inst.hyp, AlphaParam(inst.alpha));
    const auto want = testsup::oracle_align(inst.ref, inst.hyp, inst.alpha);
    c.expect(std::abs(got.cost - want.cost) < 1e-9,
             "cost mismatch on ref=" + inst.ref.to_string() + " hyp=" + inst.hyp.to_string());
    c.expect(got.matches == want.matches,
             "match-count mismatch on ref=" + inst.ref.to_string() +
                 " hyp=" + inst.hyp.to_string());
    if (!c.ok) return c;
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 30.0, "took " + std::to_string(elapsed) + " s (budget 30 s)");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "10000 instances in %.2f s", elapsed);
  c.note(buf);
  return c;
}

Check criterion_fast_path(const std::vector<Instance>& instances) {
  Check c;
  for (const Instance& inst : instances) {
    const auto slow = weighted_edit_distance(inst.ref, inst.hyp, AlphaParam(inst.alpha));
    const auto fast = weighted_edit_distance_fast(inst.ref, inst.hyp, AlphaParam(inst.alpha));
    c.expect(slow.cost == fast.cost && slow.matches == fast.matches &&
                 slow.trace == fast.trace && slow.unit_ops == fast.unit_ops &&
                 slow.ph_words == fast.ph_words,
             "divergence on ref=" + inst.ref.to_string() + " hyp=" + inst.hyp.to_string());
    if (!c.ok) return c;
  }
  c.note("10000 instances bit-identical");
  return c;
}

Check criterion_wer_identity() {
  Check c;
  std::mt19937_64 rng(77);
  testsup::InstanceOptions opts;
  opts.ph_prob = 0.0;
  opts.max_ref = 8;
  opts.max_hyp = 8;
  for (int t = 0; t < 1000; ++t) {
    const WordSeq ref = testsup::random_ref(rng, opts);
    const WordSeq hyp = testsup::random_hyp(rng, opts);
    const RasScore s = score_utterance(ref, hyp, AlphaParam(0.5064));
    const WerAlignment wa = wer_align(ref, hyp);
    const double n = ref.size();
    const double identity =
        1.0 - (2.0 * (wa.counts.substitutions + wa.counts.deletions) + wa.counts.insertions) / n;
    c.expect(std::abs(s.ras - identity) < 1e-9, "identity violated at pair " + std::to_string(t));
    if (!c.ok) return c;
  }
  c.note("1000 placeholder-free pairs");
  return c;
}

Check criterion_closed_forms() {
  Check c;
  std::mt19937_64 rng(101);
  testsup::InstanceOptions opts;
  opts.max_ref = 10;
  const double alphas[] = {0.05, 0.25, 0.5064, 0.75, 0.95};
  for (int t = 0; t < 200; ++t) {
    const WordSeq ref = testsup::random_ref(rng, opts);
    const double alpha = alphas[t % 5];
    c.expect(score_utterance(ref, ref, AlphaParam(alpha)).ras == 1.0, "RAS(ref,ref) != 1");
    c.expect(score_utterance(ref, WordSeq{}, AlphaParam(alpha)).ras == -1.0,
             "RAS(ref,empty) != -1");
    c.expect(score_utterance(ref, tokenize("<ph>"), AlphaParam(alpha)).ras == -alpha,
             "RAS(ref,[ph]) != -alpha");
    if (!c.ok) return c;
  }
  c.note("exact over 200 references x 5 alphas");
  return c;
}

Check criterion_alpha_shape() {
  Check c;
  std::mt19937_64 rng(131);
  testsup::InstanceOptions opts;
  for (int t = 0; t < 100; ++t) {
    const WordSeq ref = testsup::random_ref(rng, opts);
    WordSeq hyp = testsup::random_hyp(rng, opts);
    hyp.words.push_back(Word::placeholder());
    hyp = normalize_hypothesis(hyp);
    std::vector<double> costs;
    for (int k = 1; k <= 19; ++k)
      costs.push_back(weighted_edit_distance_fast(ref, hyp, AlphaParam(0.05 * k)).cost);
    for (size_t k = 1; k < costs.size(); ++k)
      c.expect(costs[k] >= costs[k - 1] - 1e-9, "cost decreased in alpha");
    for (size_t k = 0; k + 2 < costs.size(); ++k)
      c.expect(costs[k + 1] >= (costs[k] + costs[k + 2]) / 2 - 1e-9,
               "midpoint concavity violated");
    if (!c.ok) return c;
  }
  c.note("100 placeholder-bearing pairs over alpha 0.05..0.95");
  return c;
}

Check criterion_calibration_recovery() {
  Check c;
  double worst = 0.0, worst_time = 0.0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    const auto records =
        gen_synth_prefs({.k = 200, .votes = 25, .alpha_true = 0.5, .seed = seed});
    const CalibrationResult r = fit_alpha(records, 0.1);
    const double elapsed = seconds_since(start);
    worst = std::max(worst, std::abs(r.alpha_star - 0.5));
    worst_time = std::max(worst_time, elapsed);
    c.expect(std::abs(r.alpha_star - 0.5) <= 0.05,
             "seed " + std::to_string(seed) + " recovered alpha " +
                 std::to_string(r.alpha_star));
    c.expect(elapsed < 60.0, "seed " + std::to_string(seed) + " took " +
                                 std::to_string(elapsed) + " s (budget 60 s)");
    if (!c.ok) return c;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "10 seeds, worst |error| %.4f, slowest seed %.2f s", worst,
                worst_time);
  c.note(buf);
  return c;
}

Check criterion_gt_guided_golden() {
  Check c;
  TokenCountTable table;
  table.set("her", 1);
  table.set("follicles", 3);
  table.set("spoculus", 3);
  const WordSeq out =
      gt_guided_replace(tokenize("chronic disease of hair follicles and sebaceous gland"),
                        tokenize("the chronic disease of her and spoculus gland"), table.fn());
  c.expect(out.to_string() ==
               "<ph> chronic disease of <ph> <ph> <ph> <ph> and <ph> <ph> <ph> gland",
           "got: " + out.to_string());
  c.note("golden replacement target reproduced");
  return c;
}

Check criterion_replacement_improves_ras() {
  Check c;
  std::mt19937_64 rng(151);
  testsup::InstanceOptions opts;
  opts.ph_prob = 0.0;
  opts.max_ref = 12;
  std::uniform_int_distribution<int> extra_err(0, 2);
  std::vector<std::pair<WordSeq, WordSeq>> raw, replaced;
  for (int t = 0; t < 50; ++t) {
    WordSeq ref;
    while (ref.size() < 3) ref = testsup::random_ref(rng, opts);
    WordSeq hyp = ref;
    std::uniform_int_distribution<int> pos(0, ref.size() - 1);
    const int n_err = 1 + extra_err(rng);
    for (int e = 0; e < n_err; ++e)
      hyp.words[static_cast<size_t>(pos(rng))] = Word::lexical("zz" + std::to_string(e));
    raw.emplace_back(ref, hyp);
    replaced.emplace_back(ref, gt_guided_replace(ref, hyp, whitespace_token_count));
  }
  const AlphaParam alpha(0.5064);
  const double raw_ras = score_corpus(raw, alpha).micro.ras;
  const double rep_ras = score_corpus(replaced, alpha).micro.ras;
  c.expect(rep_ras > raw_ras, "replaced " + std::to_string(rep_ras) + " <= raw " +
                                  std::to_string(raw_ras));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "micro RAS %.4f (replaced) > %.4f (raw)", rep_ras, raw_ras);
  c.note(buf);
  return c;
}

Check criterion_bar_sweep() {
  Check c;
  std::mt19937_64 rng(163);
  std::uniform_real_distribution<double> low(0.02, 0.28), high(0.55, 0.99);
  std::uniform_int_distribution<int> len(5, 14), gap(2, 4);
  std::vector<std::pair<WordSeq, ConfidentHyp>> corpus;
  for (int t = 0; t < 60; ++t) {
    const int n = len(rng);
    WordSeq ref;
    ConfidentHyp hyp;
    int next_err = gap(rng);
    for (int i = 0; i < n; ++i) {
      const std::string w = "w" + std::to_string(i);
      ref.words.push_back(Word::lexical(w));
      if (i == next_err) {
        hyp.words.push_back({"wrong" + std::to_string(i), low(rng)});
        next_err += gap(rng);
      } else {
        hyp.words.push_back({w, high(rng)});
      }
    }
    corpus.emplace_back(std::move(ref), std::move(hyp));
  }
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(i / 100.0);
  const BarSweepResult r = sweep_bar(corpus, AlphaParam(0.5064), grid);
  const double at_zero = r.curve.front().second;
  double best_ras = at_zero;
  for (const auto& [bar, ras_value] : r.curve)
    if (bar == r.best_bar) best_ras = ras_value;
  c.expect(r.best_bar > 0.0, "best bar stayed at 0");
  c.expect(best_ras > at_zero, "swept RAS did not beat bar=0");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "best bar %.2f: micro RAS %.4f > %.4f at bar 0", r.best_bar,
                best_ras, at_zero);
  c.note(buf);
  return c;
}

Check criterion_advantages() {
  Check c;
  std::mt19937_64 rng(173);
  std::uniform_real_distribution<double> reward(-1.0, 1.0);
  std::uniform_int_distribution<int> size(2, 12);
  for (int t = 0; t < 1000; ++t) {
    AdvantageGroup g;
    g.group_id = "g";
    const int n = size(rng);
    for (int i = 0; i < n; ++i) g.rewards.push_back(reward(rng));
    const auto out = group_advantages({{g}});
    if (out[0].degenerate) continue;
    double mean = 0.0, var = 0.0;
    for (double a : out[0].advantages) mean += a;
    mean /= n;
    for (double a : out[0].advantages) var += (a - mean) * (a - mean);
    c.expect(std::abs(mean) < 1e-9, "advantage mean off");
    c.expect(std::abs(std::sqrt(var / n) - 1.0) < 1e-9, "advantage std off");
    if (!c.ok) return c;
  }
  const auto flat = group_advantages({{{"flat", {0.25, 0.25, 0.25}}}});
  c.expect(flat[0].degenerate && flat[0].advantages == std::vector<double>{0, 0, 0},
           "zero-variance group not flagged");
  c.note("1000 random groups + degenerate guard");
  return c;
}

Check criterion_throughput() {
  Check c;
  std::mt19937_64 rng(181);
  std::uniform_int_distribution<int> len(18, 22), vocab(0, 199);
  std::bernoulli_distribution ph(0.1), err(0.15);
  std::vector<std::pair<WordSeq, WordSeq>> pairs;
  pairs.reserve(10000);
  for (int t = 0; t < 10000; ++t) {
    const int n = len(rng);
    WordSeq ref, hyp;
    for (int i = 0; i < n; ++i) {
      const std::string w = "w" + std::to_string(vocab(rng));
      ref.words.push_back(Word::lexical(w));
      if (ph(rng))
        hyp.words.push_back(Word::placeholder());
      else if (err(rng))
        hyp.words.push_back(Word::lexical("e" + std::to_string(vocab(rng))));
      else
        hyp.words.push_back(Word::lexical(w));
    }
    pairs.emplace_back(std::move(ref), normalize_hypothesis(hyp));
  }
  const auto start = std::chrono::steady_clock::now();
  double checksum = 0.0;
  const AlphaParam alpha(0.5064);
  for (const auto& [ref, hyp] : pairs)
    checksum += weighted_edit_distance_fast(ref, hyp, alpha).cost;
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 5.0, "took " + std::to_string(elapsed) + " s (budget 5 s)");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "10000 pairs in %.2f s (checksum %.1f)", elapsed, checksum);
  c.note(buf);
  return c;
}

Check criterion_cross_interface() {
  Check c;
  const std::string cli = RAS_CLI_PATH;
  const fs::path dir =
      fs::temp_directory_path() / ("ras_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  // 1000-row corpus shared by both interfaces.
  std::mt19937_64 rng(191);
  testsup::InstanceOptions opts;
  opts.max_ref = 10;
  opts.max_hyp = 10;
  opts.ph_prob = 0.2;
  std::vector<UtteranceRecord> records;
  {
    std::ofstream out(dir / "corpus.jsonl");
    for (int t = 0; t < 1000; ++t) {
      WordSeq ref = testsup::random_ref(rng, opts);
      const WordSeq hyp = testsup::random_hyp(rng, opts);
      UtteranceRecord rec;
      rec.id = "u" + std::to_string(1000 + t);
      rec.ref = ref.to_string();
      rec.hyp = hyp.to_string();
      records.push_back(rec);
    }
    write_corpus(records, out);
  }

  const std::string report_path = (dir / "report.json").string();
  const auto score_run = testsup::run_cmd(cli + " score --in " +
                                          (dir / "corpus.jsonl").string() + " --out " +
                                          report_path + " --alpha 0.5064");
  c.expect(score_run.exit_code == 0, "cli score failed");
  if (!c.ok) return c;

  const int port = 19375 + static_cast<int>(::getpid() % 400);
  const pid_t pid = testsup::spawn({cli, "serve", "--bind", "127.0.0.1", "--port",
                                    std::to_string(port)});
  c.expect(pid > 0, "failed to spawn serve");
  if (!c.ok) return c;

  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(0, 200000);
  client.set_read_timeout(30, 0);
  bool up = false;
  for (int attempt = 0; attempt < 100 && !up; ++attempt) {
    if (auto res = client.Get("/health"); res && res->status == 200)
      up = true;
    else
      ::usleep(50000);
  }
  c.expect(up, "service did not come up");
  if (!c.ok) {
    ::kill(pid, SIGKILL);
    testsup::wait_exit(pid);
    return c;
  }

  nlohmann::json req;
  req["alpha"] = 0.5064;
  req["items"] = nlohmann::json::array();
  for (const UtteranceRecord& r : records)
    req["items"].push_back({{"id", r.id}, {"ref", r.ref}, {"hyp", r.hyp}});
  const auto res = client.Post("/score", req.dump(), "application/json");
  c.expect(static_cast<bool>(res) && res->status == 200, "score endpoint failed");

  if (c.ok) {
    std::ifstream report_in(report_path);
    const auto report = nlohmann::json::parse(report_in);
    const auto service = nlohmann::json::parse(res->body);
    std::map<std::string, nlohmann::json> by_id;
    for (const auto& row : service.at("results")) by_id[row.at("id")] = row;
    int compared = 0;
    for (const auto& row : report.at("per_utterance")) {
      const auto& other = by_id.at(row.at("id"));
      // Parsed from the same fixed-format text, so equality here means the
      // emitted digits agree exactly.
      c.expect(row.at("ras").get<double>() == other.at("ras").get<double>(),
               "ras digits differ for " + row.at("id").get<std::string>());
      c.expect(row.at("usefulness").get<double>() == other.at("usefulness").get<double>(),
               "usefulness digits differ");
      c.expect(row.at("cost").get<double>() == other.at("cost").get<double>(),
               "cost digits differ");
      ++compared;
      if (!c.ok) break;
    }
    c.expect(compared == 1000, "compared only " + std::to_string(compared) + " rows");
  }

  ::kill(pid, SIGINT);
  const int exit_code = testsup::wait_exit(pid);
  c.expect(exit_code == 0, "serve exited with " + std::to_string(exit_code));
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (c.ok) c.note("1000 rows agree to the last emitted digit");
  return c;
}

}  // namespace

int main() {
  const std::vector<Instance> instances = oracle_instances();
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"alignment oracle equivalence (10^4 instances, exact)",
       [&] { return criterion_oracle_equivalence(instances); }},
      {"fast path bit-for-bit equal to the reference DP",
       [&] { return criterion_fast_path(instances); }},
      {"RAS/WER identity on placeholder-free pairs", criterion_wer_identity},
      {"closed-form scores are exact", criterion_closed_forms},
      {"cost is nondecreasing and concave in alpha", criterion_alpha_shape},
      {"calibration recovers alpha_true=0.5 within 0.05 over 10 seeds",
       criterion_calibration_recovery},
      {"GT-guided replacement reproduces the golden target", criterion_gt_guided_golden},
      {"GT-guided replacement raises corpus RAS", criterion_replacement_improves_ras},
      {"swept confidence bar beats bar=0 on separable data", criterion_bar_sweep},
      {"group advantages are standardized (10^3 groups)", criterion_advantages},
      {"throughput: 10^4 utterances scored in under 5 s", criterion_throughput},
      {"CLI and service scores agree digit-for-digit on 1000 rows",
       criterion_cross_interface},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2zu: %s%s%s\n", c.ok ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), c.detail.empty() ? "" : " -- ",
                c.detail.c_str());
    std::fflush(stdout);
    failures += c.ok ? 0 : 1;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
