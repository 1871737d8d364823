#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lscd/diachrony.hpp"
#include "lscd/synthgen.hpp"

namespace fixture {

// Background lexicon against which one target word's z-scores are computed.
inline const std::vector<std::pair<std::string, std::size_t>> &background() {
  static const std::vector<std::pair<std::string, std::size_t>> bg = {
      {"stable", 10}, {"fluid", 10}, {"genuine_shift", 10}, {"syntactic", 10}, {"burst", 1}, {"proper_name", 1}};
  return bg;
}

inline lscd::Store with_target(lscd::Store store, const std::string &preset, std::uint64_t seed,
                               const std::string &word = "target") {
  auto spec = lscd::synth::preset(preset, store.dim, lscd::synth::splitmix64(seed ^ 0xabcdefULL));
  spec.word = word;
  for (auto &m : lscd::synth::generate(spec, store.dim, lscd::synth::splitmix64(seed + 77)).bins)
    store.matrices.push_back(std::move(m));
  return store;
}

struct Classified {
  lscd::ChangePoint point;
  lscd::DiagnosticReport report;
};

// Scores the store with prt_apd, then classifies `word` at its peak column.
inline Classified classify_word(const lscd::Store &store, const std::string &word, std::uint64_t seed = 0) {
  const auto m = lscd::score_matrix(store, lscd::Method::PRT_APD);
  const auto z = lscd::zscores(m);
  const auto point = *lscd::word_peak(m, z, word);
  lscd::DiagnoseOptions opts;
  opts.seed = seed;
  return {point, lscd::diagnose(store, m, z, point, opts)};
}

}  // namespace fixture
