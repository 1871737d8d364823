#pragma once

// Synthetic diachronic usage data with known sense structure. A word is a
// set of sense directions plus per-bin mixture weights; each occurrence picks
// a sense, adds isotropic Gaussian noise and is renormalized to unit length.
//
// Noise has per-coordinate sd = spread / sqrt(dim), so `spread` is roughly the
// tangent of the typical angle between a sample and its sense direction,
// independent of the dimension.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lscd/error.hpp"
#include "lscd/types.hpp"

namespace lscd::synth {

struct SenseSpec {
  Vector direction;
  double spread = 0.0;
  std::optional<std::string> tag;
  double cased = 0.0;  // probability of a title-cased surface
};

struct SynthWordSpec {
  std::string word;
  std::vector<std::string> bins;
  std::vector<SenseSpec> senses;
  std::vector<std::vector<double>> weights;  // [bin][sense]
  std::vector<std::uint32_t> counts;         // rows per bin
};

inline constexpr std::uint32_t kDefaultCount = 500;
inline constexpr unsigned kDefaultDim = 64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline void validate(const SynthWordSpec &spec) {
  if (spec.word.empty()) throw DataError("synthetic word needs a name");
  if (spec.senses.empty()) throw DataError("synthetic word '" + spec.word + "' has no senses");
  const auto nb = spec.bins.size();
  if (nb == 0 || spec.weights.size() != nb || spec.counts.size() != nb)
    throw DataError("synthetic word '" + spec.word + "': bins, weights and counts must have equal length");
  const auto dim = spec.senses.front().direction.size();
  for (const auto &s : spec.senses) {
    if (s.direction.size() != dim) throw DataError("sense directions differ in dimension");
    if (std::abs(s.direction.norm() - 1.0) > 1e-9) throw DataError("sense direction is not unit length");
    if (!(s.spread >= 0.0)) throw DataError("sense spread must be non-negative");
    if (!(s.cased >= 0.0 && s.cased <= 1.0)) throw DataError("cased fraction must lie in [0,1]");
  }
  for (std::size_t b = 0; b < nb; ++b) {
    if (spec.weights[b].size() != spec.senses.size())
      throw DataError("weight vector length differs from sense count in bin " + spec.bins[b]);
    double sum = 0.0;
    for (double w : spec.weights[b]) {
      if (w < 0.0) throw DataError("negative sense weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("weights of bin " + spec.bins[b] + " do not sum to 1");
    if (spec.counts[b] < 1) throw DataError("bin " + spec.bins[b] + " needs at least one occurrence");
  }
}

struct GeneratedWord {
  std::vector<UsageMatrix> bins;
  std::vector<std::vector<std::size_t>> senses;  // generating sense of each row
};

namespace detail {

inline Vector sample_unit(const SenseSpec &s, std::mt19937_64 &rng, std::normal_distribution<double> &normal) {
  const double scale = s.spread / std::sqrt(static_cast<double>(s.direction.size()));
  if (scale <= 0.0) return s.direction;
  Vector v = s.direction;
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] += scale * normal(rng);
  const double n = v.norm();
  return n > 0.0 ? Vector(v / n) : s.direction;
}

inline std::string title_case(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

}  // namespace detail

// Rows are rounded to binary32 so synthetic stores survive a dump round trip.
inline GeneratedWord generate(const SynthWordSpec &spec, unsigned dim, std::uint64_t seed) {
  validate(spec);
  if (dim < 2) throw DataError("synthetic dimension must be at least 2");
  if (spec.senses.front().direction.size() != static_cast<Eigen::Index>(dim))
    throw DataError("sense directions do not match the requested dimension");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GeneratedWord out;
  for (std::size_t b = 0; b < spec.bins.size(); ++b) {
    std::discrete_distribution<std::size_t> pick(spec.weights[b].begin(), spec.weights[b].end());
    UsageMatrix m;
    m.word = spec.word;
    m.bin = {spec.bins[b], static_cast<std::uint16_t>(b)};
    m.vectors.resize(spec.counts[b], dim);
    std::vector<std::size_t> labels;
    for (std::uint32_t i = 0; i < spec.counts[b]; ++i) {
      const auto k = pick(rng);
      const auto &sense = spec.senses[k];
      const Vector v = detail::sample_unit(sense, rng, normal);
      m.vectors.row(i) = v.cast<float>().cast<double>().transpose();
      OccurrenceRecord occ;
      occ.doc_id = i;
      occ.sentence_index = 0;
      occ.token_index = 0;
      occ.lemma = spec.word;
      occ.surface = unit(rng) < sense.cased ? detail::title_case(spec.word) : spec.word;
      if (sense.tag) occ.tag = tag_id(*sense.tag);
      occ.context = "synthetic " + spec.word + " sense " + std::to_string(k);
      m.occurrences.push_back(std::move(occ));
      labels.push_back(k);
    }
    out.bins.push_back(std::move(m));
    out.senses.push_back(std::move(labels));
  }
  return out;
}

inline const std::vector<std::string> &preset_names() {
  static const std::vector<std::string> names = {"fluid",     "burst",         "proper_name",
                                                 "syntactic", "genuine_shift", "stable"};
  return names;
}

namespace detail {

// `k` random orthonormal directions (Gram-Schmidt on Gaussian draws).
inline std::vector<Vector> orthonormal_directions(unsigned dim, std::size_t k, std::mt19937_64 &rng) {
  if (k > dim) throw DataError("preset needs dimension >= " + std::to_string(k));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> out;
  while (out.size() < k) {
    Vector v(dim);
    for (auto &x : v) x = normal(rng);
    for (const auto &u : out) v -= v.dot(u) * u;
    const double n = v.norm();
    if (n < 1e-6) continue;
    out.push_back(v / n);
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string> &preset_bins() {
  static const std::vector<std::string> bins = {"t1", "t2", "t3", "t4", "t5"};
  return bins;
}

// Generative presets for the error classes, over five bins:
//   stable         one sense, spread 0.6
//   fluid          4 orthogonal senses, spread 1.0, equal constant weights
//   genuine_shift  3-sense base (spread 0.8) plus a tight new sense whose
//                  weight w ~ U(0.2, 0.4) appears in bin 4 and persists
//   burst          same base plus a tight extra sense of weight 0.6 in bin 3 only
//   proper_name    burst with weight 0.8, title-cased surfaces, tag PROPN
//   syntactic      two senses at cosine 0.707 tagged NOUN / VERB, weights
//                  (0.9, 0.1) in bins 1-2 and (0.1, 0.9) in bins 3-5
inline SynthWordSpec preset(std::string_view name, unsigned dim = kDefaultDim, std::uint64_t seed = 0,
                            std::uint32_t count = kDefaultCount) {
  std::mt19937_64 rng(splitmix64(seed ^ 0x5eedULL));
  SynthWordSpec spec;
  spec.word = std::string(name);
  spec.bins = preset_bins();
  spec.counts.assign(spec.bins.size(), count);
  auto constant = [&](std::vector<double> w) { spec.weights.assign(spec.bins.size(), std::move(w)); };

  if (name == "stable") {
    auto d = detail::orthonormal_directions(dim, 1, rng);
    spec.senses = {{d[0], 0.6, "NOUN", 0.0}};
    constant({1.0});
  } else if (name == "fluid") {
    auto d = detail::orthonormal_directions(dim, 4, rng);
    for (auto &v : d) spec.senses.push_back({v, 1.0, "NOUN", 0.0});
    constant({0.25, 0.25, 0.25, 0.25});
  } else if (name == "genuine_shift" || name == "burst" || name == "proper_name") {
    auto d = detail::orthonormal_directions(dim, 4, rng);
    for (int k = 0; k < 3; ++k) spec.senses.push_back({d[k], 0.8, "NOUN", 0.0});
    const bool pn = name == "proper_name";
    spec.senses.push_back({d[3], 0.3, pn ? "PROPN" : "NOUN", pn ? 1.0 : 0.0});
    double w = 0.6;
    if (name == "genuine_shift") w = std::uniform_real_distribution<double>(0.2, 0.4)(rng);
    if (pn) w = 0.8;
    const std::vector<double> base = {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0};
    const std::vector<double> with = {(1 - w) / 3, (1 - w) / 3, (1 - w) / 3, w};
    if (name == "genuine_shift")
      spec.weights = {base, base, base, with, with};
    else
      spec.weights = {base, base, with, base, base};
  } else if (name == "syntactic") {
    auto d = detail::orthonormal_directions(dim, 2, rng);
    const Vector second = (d[0] + d[1]).normalized();
    spec.senses = {{d[0], 0.5, "NOUN", 0.0}, {second, 0.5, "VERB", 0.0}};
    spec.weights = {{0.9, 0.1}, {0.9, 0.1}, {0.1, 0.9}, {0.1, 0.9}, {0.1, 0.9}};
  } else {
    throw DataError("unknown preset '" + std::string(name) + "'");
  }
  validate(spec);
  return spec;
}

// Largest total-variation distance between consecutive bins' sense mixtures.
inline double planted_change(const SynthWordSpec &spec) {
  double best = 0.0;
  for (std::size_t b = 0; b + 1 < spec.weights.size(); ++b) {
    double tv = 0.0;
    for (std::size_t k = 0; k < spec.senses.size(); ++k) tv += std::abs(spec.weights[b][k] - spec.weights[b + 1][k]);
    best = std::max(best, tv / 2.0);
  }
  return best;
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Monte-Carlo expectation of the cosine distance between an occurrence drawn
// from bin i and an independent one drawn from bin j.
inline MonteCarloEstimate expected_apd(const SynthWordSpec &spec, std::size_t bin_i, std::size_t bin_j,
                                       std::size_t n_mc, std::uint64_t seed) {
  validate(spec);
  if (n_mc < 10'000) throw DataError("expected_apd needs at least 10000 samples");
  if (bin_i >= spec.bins.size() || bin_j >= spec.bins.size()) throw DataError("bin index out of range");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::discrete_distribution<std::size_t> pick_i(spec.weights[bin_i].begin(), spec.weights[bin_i].end());
  std::discrete_distribution<std::size_t> pick_j(spec.weights[bin_j].begin(), spec.weights[bin_j].end());
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < n_mc; ++k) {
    const Vector x = detail::sample_unit(spec.senses[pick_i(rng)], rng, normal);
    const Vector y = detail::sample_unit(spec.senses[pick_j(rng)], rng, normal);
    const double d = 1.0 - x.dot(y);
    sum += d;
    sum_sq += d * d;
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) * n / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

struct Lexicon {
  Store store;
  std::vector<SynthWordSpec> specs;
  std::vector<GeneratedWord> generated;
};

// A store of preset words; word k of preset p is named "<p>_<k>" unless the
// preset occurs once, in which case it keeps the preset name.
inline Lexicon lexicon(const std::vector<std::pair<std::string, std::size_t>> &composition, unsigned dim,
                       std::uint64_t seed, std::uint32_t count = kDefaultCount) {
  Lexicon lex;
  lex.store.dim = dim;
  lex.store.bins = make_bins(preset_bins());
  std::uint64_t serial = 0;
  for (const auto &[name, how_many] : composition) {
    for (std::size_t k = 0; k < how_many; ++k, ++serial) {
      const auto word_seed = splitmix64(seed * 0x100000001b3ULL + serial);
      auto spec = preset(name, dim, word_seed, count);
      if (how_many > 1) spec.word = name + "_" + std::to_string(k);
      auto gen = generate(spec, dim, splitmix64(word_seed));
      for (const auto &m : gen.bins) lex.store.matrices.push_back(m);
      lex.specs.push_back(std::move(spec));
      lex.generated.push_back(std::move(gen));
    }
  }
  return lex;
}

// JSON configuration:
//   {"word": "...", "bins": ["t1", ...], "counts": [500, ...],
//    "senses": [{"direction": [...], "spread": 0.3, "tag": "NOUN", "cased": 0.0}, ...],
//    "weights": [[...], ...]}
inline nlohmann::json to_json(const SynthWordSpec &spec) {
  nlohmann::json j;
  j["word"] = spec.word;
  j["bins"] = spec.bins;
  j["counts"] = spec.counts;
  j["weights"] = spec.weights;
  j["senses"] = nlohmann::json::array();
  for (const auto &s : spec.senses) {
    nlohmann::json js;
    js["direction"] = std::vector<double>(s.direction.begin(), s.direction.end());
    js["spread"] = s.spread;
    js["tag"] = s.tag ? nlohmann::json(*s.tag) : nlohmann::json(nullptr);
    js["cased"] = s.cased;
    j["senses"].push_back(std::move(js));
  }
  return j;
}

inline SynthWordSpec spec_from_json(const nlohmann::json &j) {
  try {
    SynthWordSpec spec;
    spec.word = j.at("word").get<std::string>();
    spec.bins = j.at("bins").get<std::vector<std::string>>();
    spec.counts = j.at("counts").get<std::vector<std::uint32_t>>();
    spec.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    for (const auto &js : j.at("senses")) {
      SenseSpec s;
      const auto dir = js.at("direction").get<std::vector<double>>();
      s.direction = Eigen::Map<const Vector>(dir.data(), static_cast<Eigen::Index>(dir.size()));
      s.spread = js.value("spread", 0.0);
      if (js.contains("tag") && !js["tag"].is_null()) s.tag = js["tag"].get<std::string>();
      s.cased = js.value("cased", 0.0);
      spec.senses.push_back(std::move(s));
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("synthetic word spec: ") + e.what());
  }
}

}  // namespace lscd::synth
