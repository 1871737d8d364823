#pragma once

// Multi-bin analysis over a store: the words x consecutive-pairs score
// matrix, z-scores over the whole matrix, the highest change points, and
// diagnostics that separate genuine change from known false-positive classes.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lscd/error.hpp"
#include "lscd/metrics.hpp"
#include "lscd/parallel.hpp"
#include "lscd/score_matrix.hpp"
#include "lscd/types.hpp"

namespace lscd {

inline ScoreMatrix score_matrix(const Store &store, const std::vector<std::string> &words,
                                const std::vector<TimeBin> &bins, Method method, const ScoreOptions &opts = {}) {
  if (bins.empty()) throw DataError("score matrix needs at least one bin");
  if (method != Method::PRT && method != Method::APD && method != Method::PRT_APD)
    throw DataError("method " + std::string(to_string(method)) + " cannot score usage matrices");
  ScoreMatrix m;
  m.method = std::string(to_string(method));
  m.words = words;
  m.pairs = consecutive_pairs(bins);
  m.values.assign(words.size(), std::vector<std::optional<double>>(m.pairs.size()));
  validate(m);

  // Cells are independent and each is computed sequentially, so the matrix is
  // identical for every thread count.
  ScoreOptions cell_opts = opts;
  cell_opts.threads = 1;
  const std::size_t cols = m.pairs.size();
  parallel_for(words.size() * cols, opts.threads, [&](std::size_t cell) {
    const auto w = cell / cols;
    const auto p = cell % cols;
    const auto *a = store.find(words[w], m.pairs[p].first.ordinal);
    const auto *b = store.find(words[w], m.pairs[p].second.ordinal);
    if (a && b) m.values[w][p] = score(method, *a, *b, cell_opts).value;
  });
  return m;
}

inline ScoreMatrix score_matrix(const Store &store, Method method, const ScoreOptions &opts = {}) {
  return score_matrix(store, store.words(), store.bins, method, opts);
}

// (x - mean) / population sd over every present entry of the matrix.
inline ScoreMatrix zscores(const ScoreMatrix &m) {
  const auto v = m.present();
  if (v.size() < 2) throw DataError("degenerate matrix (fewer than 2 present entries)");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::abs(mean)))
    throw DataError("degenerate matrix (zero standard deviation)");
  ScoreMatrix z = m;
  z.method = m.method + "_z";
  for (auto &row : z.values)
    for (auto &x : row)
      if (x) x = (*x - mean) / sd;
  return z;
}

struct ChangePoint {
  std::string word;
  std::pair<TimeBin, TimeBin> pair;
  std::size_t column = 0;
  double score = 0.0;
  double z = 0.0;
};

// The k largest entries, descending; equal scores ordered by (word, column).
// z is 0 for every point when the matrix is too degenerate to standardize.
inline std::vector<ChangePoint> top_changes(const ScoreMatrix &m, std::size_t k) {
  std::optional<ScoreMatrix> z;
  try {
    z = zscores(m);
  } catch (const DataError &) {
  }
  std::vector<ChangePoint> points;
  for (std::size_t w = 0; w < m.rows(); ++w)
    for (std::size_t p = 0; p < m.cols(); ++p)
      if (m.values[w][p])
        points.push_back({m.words[w], m.pairs[p], p, *m.values[w][p], z ? *z->values[w][p] : 0.0});
  std::sort(points.begin(), points.end(), [](const ChangePoint &a, const ChangePoint &b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.word != b.word) return a.word < b.word;
    return a.column < b.column;
  });
  if (points.size() > k) points.resize(k);
  return points;
}

namespace detail {

inline UsageMatrix subset(const UsageMatrix &u, std::span<const std::size_t> rows) {
  UsageMatrix out;
  out.word = u.word;
  out.bin = u.bin;
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()), u.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.vectors.row(static_cast<Eigen::Index>(i)) = u.vectors.row(static_cast<Eigen::Index>(rows[i]));
    out.occurrences.push_back(u.occurrences[rows[i]]);
  }
  return out;
}

inline double split_score(const UsageMatrix &u, Method method, const ScoreOptions &opts, std::mt19937_64 &rng) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(u.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto half = idx.size() / 2;
  const auto a = subset(u, std::span(idx).first(half));
  const auto b = subset(u, std::span(idx).subspan(half));
  return score(method, a, b, opts).value;
}

}  // namespace detail

inline constexpr std::size_t kDefaultFluidityTrials = 10;

// Mean score between random halves of the same bin (averaged over both bins
// and all trials) divided by the score between the two bins. Values near 1
// mean the cross-bin score is no higher than within-bin variation.
inline double fluidity_ratio(const UsageMatrix &u1, const UsageMatrix &u2, std::size_t trials = kDefaultFluidityTrials,
                             std::uint64_t seed = 0, Method method = Method::PRT_APD, const ScoreOptions &opts = {}) {
  if (u1.rows() < 4 || u2.rows() < 4) throw DataError("fluidity ratio needs at least 4 occurrences per bin");
  if (trials < 1) throw DataError("fluidity ratio needs at least one trial");
  const double cross = score(method, u1, u2, opts).value;
  if (cross <= 1e-9) throw DataError("undefined ratio (cross-bin score is zero)");
  std::mt19937_64 rng(seed);
  double within = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double s1 = detail::split_score(u1, method, opts, rng);
    const double s2 = detail::split_score(u2, method, opts, rng);
    within += (s1 + s2) / 2.0;
  }
  return within / static_cast<double>(trials) / cross;
}

inline bool is_capitalized(const std::string &surface) {
  return !surface.empty() && std::isupper(static_cast<unsigned char>(surface[0]));
}

// Fraction of title-cased or all-caps surfaces, per bin.
inline std::vector<double> capitalization_profile(const std::vector<std::span<const OccurrenceRecord>> &per_bin) {
  std::vector<double> out;
  for (const auto &occ : per_bin) {
    if (occ.empty()) throw DataError("capitalization profile of an empty bin");
    const auto caps = std::count_if(occ.begin(), occ.end(), [](const auto &o) { return is_capitalized(o.surface); });
    out.push_back(static_cast<double>(caps) / static_cast<double>(occ.size()));
  }
  return out;
}

// Base-2 Jensen-Shannon divergence between the tag distributions of two bins,
// add-one smoothed over the union of observed tags.
inline double tag_divergence(std::span<const OccurrenceRecord> a, std::span<const OccurrenceRecord> b) {
  auto tally = [](std::span<const OccurrenceRecord> occ, std::map<TagId, double> &counts) {
    std::size_t tagged = 0;
    for (const auto &o : occ)
      if (o.tag) {
        counts[*o.tag] += 1.0;
        ++tagged;
      }
    return tagged;
  };
  std::map<TagId, double> ca, cb;
  const auto ta = tally(a, ca);
  const auto tb = tally(b, cb);
  if (a.empty() || b.empty() || 2 * ta < a.size() || 2 * tb < b.size())
    throw DataError("insufficient tag coverage");
  std::map<TagId, std::pair<double, double>> joint;
  for (const auto &[t, c] : ca) joint[t].first = c;
  for (const auto &[t, c] : cb) joint[t].second = c;
  const double k = static_cast<double>(joint.size());
  const double na = static_cast<double>(ta) + k;
  const double nb = static_cast<double>(tb) + k;
  double js = 0.0;
  for (const auto &[t, c] : joint) {
    const double p = (c.first + 1.0) / na;
    const double q = (c.second + 1.0) / nb;
    const double m = (p + q) / 2.0;
    js += 0.5 * p * std::log2(p / m) + 0.5 * q * std::log2(q / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

enum class ErrorClass { fluid, burst, proper_name, syntactic, unflagged };

inline std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::fluid: return "fluid";
    case ErrorClass::burst: return "burst";
    case ErrorClass::proper_name: return "proper_name";
    case ErrorClass::syntactic: return "syntactic";
    case ErrorClass::unflagged: return "unflagged";
  }
  return "?";
}

// Calibration defaults, validated only against the synthetic presets.
struct ClassifyThresholds {
  double fluid_ratio = 0.9;
  double capitalization_gap = 0.3;
  double tag_divergence = 0.2;
  double high_z = 2.0;
};

// Everything classify_point looks at for one word. Bins/columns without
// enough data are nullopt.
struct WordDiagnostics {
  std::optional<double> fluidity_ratio;                // for the point's pair
  std::vector<std::optional<double>> capitalization;   // per bin ordinal
  std::vector<std::optional<double>> tag_divergence;   // per matrix column
  std::vector<std::optional<double>> z_row;            // per matrix column
};

struct DiagnosticReport {
  std::string word;
  std::optional<double> fluidity_ratio;
  std::vector<std::optional<double>> capitalization_profile;
  std::vector<std::optional<double>> tag_divergence;
  ErrorClass suggested_class = ErrorClass::unflagged;
};

// Rules, first match wins: fluid, proper_name, syntactic, burst, unflagged.
inline DiagnosticReport classify_point(const ChangePoint &point, const WordDiagnostics &d,
                                       const ClassifyThresholds &th = {}) {
  DiagnosticReport r{point.word, d.fluidity_ratio, d.capitalization, d.tag_divergence, ErrorClass::unflagged};
  const bool fluid = d.fluidity_ratio && *d.fluidity_ratio >= th.fluid_ratio;
  if (fluid) {
    r.suggested_class = ErrorClass::fluid;
    return r;
  }
  for (const auto x : {point.pair.first.ordinal, point.pair.second.ordinal}) {
    if (x >= d.capitalization.size() || !d.capitalization[x]) continue;
    bool exceeds = true;
    for (std::size_t y = 0; y < d.capitalization.size(); ++y)
      if (y != x && d.capitalization[y] && *d.capitalization[x] - *d.capitalization[y] < th.capitalization_gap)
        exceeds = false;
    if (exceeds) {
      r.suggested_class = ErrorClass::proper_name;
      return r;
    }
  }
  if (point.column < d.tag_divergence.size() && d.tag_divergence[point.column] &&
      *d.tag_divergence[point.column] >= th.tag_divergence) {
    r.suggested_class = ErrorClass::syntactic;
    return r;
  }
  std::vector<std::size_t> high;
  for (std::size_t c = 0; c < d.z_row.size(); ++c)
    if (d.z_row[c] && *d.z_row[c] >= th.high_z) high.push_back(c);
  if (high.size() == 1 || (high.size() == 2 && high[1] == high[0] + 1)) r.suggested_class = ErrorClass::burst;
  return r;
}

struct DiagnoseOptions {
  Method method = Method::PRT_APD;
  std::size_t trials = kDefaultFluidityTrials;
  std::uint64_t seed = 0;
  ScoreOptions score;
  ClassifyThresholds thresholds;
};

// Computes the word's diagnostics against score matrix `m` (and its z-scores
// `z`) for the given change point.
inline WordDiagnostics diagnostics_for(const Store &store, const ScoreMatrix &m, const ScoreMatrix &z,
                                       const ChangePoint &point, const DiagnoseOptions &opts = {}) {
  WordDiagnostics d;
  const auto *a = store.find(point.word, point.pair.first.ordinal);
  const auto *b = store.find(point.word, point.pair.second.ordinal);
  if (a && b && a->rows() >= 4 && b->rows() >= 4) {
    try {
      d.fluidity_ratio = fluidity_ratio(*a, *b, opts.trials, opts.seed, opts.method, opts.score);
    } catch (const DataError &) {
    }
  }
  d.capitalization.resize(store.bins.size());
  for (const auto &bin : store.bins)
    if (const auto *u = store.find(point.word, bin.ordinal))
      d.capitalization[bin.ordinal] = capitalization_profile({std::span<const OccurrenceRecord>(u->occurrences)})[0];
  for (const auto &[first, second] : m.pairs) {
    std::optional<double> td;
    const auto *u1 = store.find(point.word, first.ordinal);
    const auto *u2 = store.find(point.word, second.ordinal);
    if (u1 && u2) {
      try {
        td = tag_divergence(u1->occurrences, u2->occurrences);
      } catch (const DataError &) {
      }
    }
    d.tag_divergence.push_back(td);
  }
  const auto row = std::find(z.words.begin(), z.words.end(), point.word);
  if (row != z.words.end()) d.z_row = z.values[static_cast<std::size_t>(row - z.words.begin())];
  return d;
}

// The highest-scoring column of `word`'s row, if any entry is present.
inline std::optional<ChangePoint> word_peak(const ScoreMatrix &m, const ScoreMatrix &z, const std::string &word) {
  const auto it = std::find(m.words.begin(), m.words.end(), word);
  if (it == m.words.end()) return std::nullopt;
  const auto w = static_cast<std::size_t>(it - m.words.begin());
  std::optional<ChangePoint> best;
  for (std::size_t p = 0; p < m.cols(); ++p)
    if (m.values[w][p] && (!best || *m.values[w][p] > best->score))
      best = ChangePoint{word, m.pairs[p], p, *m.values[w][p], z.values[w][p].value_or(0.0)};
  return best;
}

inline DiagnosticReport diagnose(const Store &store, const ScoreMatrix &m, const ScoreMatrix &z,
                                 const ChangePoint &point, const DiagnoseOptions &opts = {}) {
  return classify_point(point, diagnostics_for(store, m, z, point, opts), opts.thresholds);
}

}  // namespace lscd
