#pragma once

#include <cstdint>
#include <vector>

#include "ras/calibration.hpp"

namespace ras {

enum class VoteNoise {
  // floor/ceil randomization of the expected count: unbiased, with at most
  // one vote of variance per record. Default, because per-vote binomial
  // noise at listening-test sizes drowns the recovery signal.
  stratified,
  binomial,  // every vote an independent draw
};

struct SynthPrefOptions {
  int64_t k = 200;          // number of records
  int64_t votes = 25;       // votes per record
  double alpha_true = 0.5;  // alpha the simulated annotators embody
  double tie_rate = 0.0;    // expected fraction of "can't decide" votes
  uint64_t seed = 1;
  VoteNoise noise = VoteNoise::stratified;
};

// Forward-simulates listening-test data: random references, plain
// hypotheses with substitution errors, abstention-aware variants with the
// errors (and a few correct words) masked, and votes drawn from the
// Bradley-Terry probability sigmoid(delta RAS at alpha_true).
std::vector<PreferenceRecord> gen_synth_prefs(const SynthPrefOptions& opts);

}  // namespace ras
