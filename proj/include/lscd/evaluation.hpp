#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lscd/error.hpp"

namespace lscd {

struct Correlation {
  double coefficient = 0.0;
  double p_value = 1.0;
};

inline constexpr std::size_t kExactPermutationMaxN = 8;

// 1-based ranks, ties get the average of the positions they span.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

inline void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("correlation inputs differ in length");
  if (x.size() < 3) throw DataError("correlation needs at least 3 observations");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("non-finite value in correlation input");
}

// Product-moment correlation; nullopt when either side has zero variance.
inline std::optional<double> product_moment(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double t_test_p(double r, std::size_t n) {
  if (std::abs(r) >= 1.0) return 0.0;
  const double dof = static_cast<double>(n - 2);
  const double t = r * std::sqrt(dof / ((1.0 + r) * (1.0 - r)));
  boost::math::students_t_distribution<double> dist(dof);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

// Two-sided: fraction of all orderings of `ry` whose |rho| reaches the observed one.
inline double exact_permutation_p(const std::vector<double> &rx, std::vector<double> ry, double observed) {
  std::sort(ry.begin(), ry.end());
  const double threshold = std::abs(observed) - 1e-12;
  std::size_t hits = 0, total = 0;
  std::vector<std::size_t> idx(ry.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> perm(ry.size());
  do {
    for (std::size_t i = 0; i < idx.size(); ++i) perm[i] = ry[idx[i]];
    ++total;
    if (std::abs(product_moment(rx, perm).value_or(0.0)) >= threshold) ++hits;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace detail

// Spearman's rho with average ranks for ties. Two-sided p-value: exact
// permutation test for n <= 8, Student t with n-2 dof otherwise.
inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
  detail::check_lengths(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto rho = detail::product_moment(rx, ry);
  if (!rho) throw DataError("degenerate ranking (constant input)");
  const double p = x.size() <= kExactPermutationMaxN ? detail::exact_permutation_p(rx, ry, *rho)
                                                     : detail::t_test_p(*rho, x.size());
  return {*rho, p};
}

inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
  detail::check_lengths(x, y);
  const auto r = detail::product_moment(x, y);
  if (!r) throw DataError("degenerate input (zero variance)");
  return {*r, detail::t_test_p(*r, x.size())};
}

struct GoldSet {
  std::string name;
  std::vector<std::pair<std::string, double>> entries;
};

struct EvalResult {
  std::string method;
  std::string gold_name;
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  double coverage = 0.0;
};

using ScoreTable = std::map<std::string, double>;

// "lemma<TAB>score" per line; '#' lines and blank lines are skipped.
inline std::vector<std::pair<std::string, double>> read_scored_lines(std::istream &is, const std::string &what) {
  std::vector<std::pair<std::string, double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw DataError(what + " line " + std::to_string(lineno) + ": expected lemma<TAB>score");
    try {
      std::size_t used = 0;
      const auto text = line.substr(tab + 1);
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
      out.emplace_back(line.substr(0, tab), v);
    } catch (const std::exception &) {
      throw DataError(what + " line " + std::to_string(lineno) + ": bad score");
    }
  }
  return out;
}

inline GoldSet read_gold(std::istream &is, std::string name) {
  GoldSet g{std::move(name), read_scored_lines(is, "gold")};
  std::map<std::string, int> seen;
  for (const auto &[w, _] : g.entries)
    if (seen[w]++) throw DataError("duplicate gold lemma '" + w + "'");
  if (g.entries.size() < 3) throw DataError("gold set needs at least 3 entries");
  return g;
}

inline GoldSet read_gold(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open gold file " + path.string());
  return read_gold(is, path.stem().string());
}

inline ScoreTable read_predictions(std::istream &is) {
  ScoreTable t;
  for (auto &[w, v] : read_scored_lines(is, "predictions"))
    if (!t.emplace(w, v).second) throw DataError("duplicate prediction for '" + w + "'");
  return t;
}

// Spearman over gold words that have a score; unscored words lower coverage.
inline EvalResult evaluate(const ScoreTable &scores, const GoldSet &gold, std::string method = "") {
  auto entries = gold.entries;
  std::sort(entries.begin(), entries.end());
  std::vector<double> pred, truth;
  for (const auto &[w, g] : entries) {
    if (auto it = scores.find(w); it != scores.end()) {
      pred.push_back(it->second);
      truth.push_back(g);
    }
  }
  if (pred.size() < 3)
    throw DataError("only " + std::to_string(pred.size()) + " gold words have predictions (need 3)");
  const auto c = spearman(pred, truth);
  return {std::move(method), gold.name, c.coefficient, c.p_value, pred.size(),
          static_cast<double>(pred.size()) / static_cast<double>(gold.entries.size())};
}

struct InterCorrelation {
  Correlation spearman;
  Correlation pearson;
  std::size_t n = 0;
};

inline InterCorrelation method_intercorrelation(const ScoreTable &a, const ScoreTable &b) {
  std::vector<double> x, y;
  for (const auto &[w, v] : a)
    if (auto it = b.find(w); it != b.end()) {
      x.push_back(v);
      y.push_back(it->second);
    }
  if (x.size() < 3) throw DataError("methods share fewer than 3 scored words");
  return {lscd::spearman(x, y), lscd::pearson(x, y), x.size()};
}

}  // namespace lscd
