#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lscd/error.hpp"

namespace lscd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct TimeBin {
  std::string label;
  std::uint16_t ordinal = 0;

  friend bool operator==(const TimeBin &, const TimeBin &) = default;
};

// Universal POS tags. The numeric id is what dumps store.
using TagId = std::uint16_t;
inline constexpr TagId kNoTag = 0xFFFF;

inline constexpr std::array<std::string_view, 17> kUposTags = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

// "_" and "" are absent; anything outside UPOS collapses to X.
inline std::optional<TagId> tag_id(std::string_view name) {
  if (name.empty() || name == "_") return std::nullopt;
  for (std::size_t i = 0; i < kUposTags.size(); ++i)
    if (kUposTags[i] == name) return static_cast<TagId>(i);
  return static_cast<TagId>(kUposTags.size() - 1);
}

inline std::string_view tag_name(TagId id) {
  return id < kUposTags.size() ? kUposTags[id] : std::string_view{};
}

struct OccurrenceRecord {
  std::uint32_t doc_id = 0;
  std::uint32_t sentence_index = 0;
  std::uint32_t token_index = 0;
  std::string surface;
  std::string lemma;
  std::optional<TagId> tag;
  std::string context;

  friend bool operator==(const OccurrenceRecord &, const OccurrenceRecord &) = default;
};

// All token embeddings of one word in one bin, row i belonging to occurrences[i].
struct UsageMatrix {
  std::string word;
  TimeBin bin;
  RowMatrix vectors;
  std::vector<OccurrenceRecord> occurrences;

  Eigen::Index rows() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }

  friend bool operator==(const UsageMatrix &a, const UsageMatrix &b) {
    return a.word == b.word && a.bin == b.bin && a.vectors.rows() == b.vectors.rows() &&
           a.vectors.cols() == b.vectors.cols() && a.vectors == b.vectors &&
           a.occurrences == b.occurrences;
  }
};

inline void validate(const UsageMatrix &u) {
  if (u.word.empty()) throw DataError("usage matrix with empty word");
  if (u.vectors.rows() < 1) throw DataError("usage matrix for '" + u.word + "' has no rows");
  if (static_cast<std::size_t>(u.vectors.rows()) != u.occurrences.size())
    throw DataError("usage matrix for '" + u.word + "': occurrence count does not match rows");
  for (Eigen::Index i = 0; i < u.vectors.rows(); ++i)
    if (u.vectors.row(i).isZero(0.0))
      throw DataError("usage matrix for '" + u.word + "' has an all-zero row " + std::to_string(i));
  for (const auto &occ : u.occurrences)
    if (occ.surface.empty() || occ.lemma.empty())
      throw DataError("occurrence of '" + u.word + "' with empty surface or lemma");
}

// Bins plus one usage matrix per (word, bin) that has occurrences.
struct Store {
  std::uint32_t dim = 0;
  std::vector<TimeBin> bins;
  std::vector<UsageMatrix> matrices;

  const UsageMatrix *find(std::string_view word, std::uint16_t ordinal) const {
    for (const auto &m : matrices)
      if (m.word == word && m.bin.ordinal == ordinal) return &m;
    return nullptr;
  }

  // Words in order of first appearance.
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto &m : matrices)
      if (seen.insert(m.word).second) out.push_back(m.word);
    return out;
  }

  const TimeBin &bin(std::string_view label) const {
    for (const auto &b : bins)
      if (b.label == label) return b;
    throw DataError("unknown time bin '" + std::string(label) + "'");
  }

  friend bool operator==(const Store &, const Store &) = default;
};

inline void validate(const Store &store) {
  std::unordered_set<std::string> labels;
  for (std::size_t i = 0; i < store.bins.size(); ++i) {
    if (store.bins[i].ordinal != i) throw DataError("bin ordinals must be contiguous from 0");
    if (!labels.insert(store.bins[i].label).second)
      throw DataError("duplicate bin label '" + store.bins[i].label + "'");
  }
  std::unordered_set<std::string> keys;
  for (const auto &m : store.matrices) {
    validate(m);
    if (static_cast<std::uint32_t>(m.dim()) != store.dim)
      throw DumpError(DumpErrorKind::inconsistent_dimension,
                      "'" + m.word + "' has dimension " + std::to_string(m.dim()) + ", store has " +
                          std::to_string(store.dim));
    if (m.bin.ordinal >= store.bins.size() || !(store.bins[m.bin.ordinal] == m.bin))
      throw DataError("usage matrix for '" + m.word + "' refers to an unknown bin");
    if (!keys.insert(m.word + '\t' + std::to_string(m.bin.ordinal)).second)
      throw DataError("duplicate usage matrix for '" + m.word + "' in bin " + m.bin.label);
  }
}

// Consecutive bins ordered by ordinal: (b0,b1), (b1,b2), ...
inline std::vector<std::pair<TimeBin, TimeBin>> consecutive_pairs(const std::vector<TimeBin> &bins) {
  std::vector<std::pair<TimeBin, TimeBin>> out;
  for (std::size_t i = 0; i + 1 < bins.size(); ++i) out.emplace_back(bins[i], bins[i + 1]);
  return out;
}

inline std::vector<TimeBin> make_bins(const std::vector<std::string> &labels) {
  std::vector<TimeBin> bins;
  for (std::size_t i = 0; i < labels.size(); ++i)
    bins.push_back({labels[i], static_cast<std::uint16_t>(i)});
  return bins;
}

}  // namespace lscd
