#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lscd/error.hpp"
#include "lscd/types.hpp"

namespace lscd {

// Words x consecutive-bin-pairs change scores. Absent entries are nullopt.
struct ScoreMatrix {
  std::string method;
  std::vector<std::string> words;
  std::vector<std::pair<TimeBin, TimeBin>> pairs;
  std::vector<std::vector<std::optional<double>>> values;  // [word][pair]

  std::size_t rows() const { return words.size(); }
  std::size_t cols() const { return pairs.size(); }

  std::vector<double> present() const {
    std::vector<double> out;
    for (const auto &row : values)
      for (const auto &v : row)
        if (v) out.push_back(*v);
    return out;
  }
};

inline void validate(const ScoreMatrix &m) {
  std::set<std::string> seen;
  for (const auto &w : m.words)
    if (!seen.insert(w).second) throw DataError("duplicate row label '" + w + "' in score matrix");
  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    const auto &[a, b] = m.pairs[i];
    if (b.ordinal != a.ordinal + 1) throw DataError("score matrix column is not a consecutive bin pair");
    if (i > 0 && !(m.pairs[i - 1].second == a)) throw DataError("score matrix columns are not chronologically ordered");
  }
  if (m.values.size() != m.words.size()) throw DataError("score matrix row count mismatch");
  for (const auto &row : m.values)
    if (row.size() != m.pairs.size()) throw DataError("score matrix column count mismatch");
}

inline std::string pair_label(const std::pair<TimeBin, TimeBin> &p) { return p.first.label + "-" + p.second.label; }

}  // namespace lscd
