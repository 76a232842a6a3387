#include "ras/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ras/metric.hpp"
#include "ras/tokenize.hpp"

namespace ras {

namespace {

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

// floor(x) + Bernoulli(frac(x)): an unbiased draw with sub-vote variance.
int64_t stratified_count(double x, std::mt19937_64& rng) {
  const double f = std::floor(x);
  const double frac = x - f;
  std::bernoulli_distribution extra(frac);
  return static_cast<int64_t>(f) + (extra(rng) ? 1 : 0);
}

}  // namespace

std::vector<PreferenceRecord> gen_synth_prefs(const SynthPrefOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> vocab_pick(0, 39);
  std::uniform_int_distribution<int> len_pick(6, 12);
  std::uniform_int_distribution<int> mask_pick(0, 2);

  std::vector<PreferenceRecord> out;
  out.reserve(static_cast<size_t>(opts.k));
  for (int64_t idx = 0; idx < opts.k; ++idx) {
    const int n = len_pick(rng);
    std::vector<std::string> ref(static_cast<size_t>(n));
    for (auto& w : ref) w = "w" + std::to_string(vocab_pick(rng));

    // Plain hypothesis: substitution errors at distinct positions.
    std::uniform_int_distribution<int> err_pick(2, std::min(5, n - 2));
    const int n_err = err_pick(rng);
    std::vector<int> positions(static_cast<size_t>(n));
    std::iota(positions.begin(), positions.end(), 0);
    std::shuffle(positions.begin(), positions.end(), rng);

    std::vector<std::string> hyp_a = ref;
    for (int e = 0; e < n_err; ++e)
      hyp_a[static_cast<size_t>(positions[e])] = "zz" + std::to_string(e);

    // Abstention-aware variant: errors masked, plus a little conservative
    // masking of correct words.
    std::vector<std::string> hyp_b = hyp_a;
    for (int e = 0; e < n_err; ++e)
      hyp_b[static_cast<size_t>(positions[e])] = std::string(kPhToken);
    const int n_mask = std::min(mask_pick(rng), n - n_err);
    for (int m = 0; m < n_mask; ++m)
      hyp_b[static_cast<size_t>(positions[n_err + m])] = std::string(kPhToken);

    PreferenceRecord rec;
    rec.id = "synth-" + std::to_string(idx);
    rec.ref_text = join(ref);
    rec.hyp_plain = join(hyp_a);
    rec.hyp_abstain = join(hyp_b);

    const double dr = delta_ras(rec, AlphaParam(opts.alpha_true));
    const double p_b = 1.0 / (1.0 + std::exp(-dr));

    int64_t k_c = 0;
    if (opts.tie_rate > 0.0) {
      if (opts.noise == VoteNoise::binomial) {
        std::binomial_distribution<int64_t> d(opts.votes, opts.tie_rate);
        k_c = d(rng);
      } else {
        k_c = stratified_count(opts.tie_rate * static_cast<double>(opts.votes), rng);
      }
    }
    const int64_t decided = opts.votes - k_c;
    int64_t k_b = 0;
    if (opts.noise == VoteNoise::binomial) {
      std::binomial_distribution<int64_t> d(decided, p_b);
      k_b = d(rng);
    } else {
      k_b = stratified_count(p_b * static_cast<double>(decided), rng);
    }
    rec.k_b = std::min(k_b, decided);
    rec.k_a = decided - rec.k_b;
    rec.k_c = k_c;
    rec.s = opts.votes;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace ras
