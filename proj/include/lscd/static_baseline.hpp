#pragma once

// Baselines: cosine distance between static (type-level) embeddings aligned
// with orthogonal Procrustes, and the frequency-difference baseline.
//
// Static models are produced externally. The reference recipe is skip-gram
// with negative sampling, symmetric window 10, minimum frequency 5, 300
// dimensions, one model per time bin.

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lscd/corpus.hpp"
#include "lscd/error.hpp"
#include "lscd/metrics.hpp"
#include "lscd/score_matrix.hpp"
#include "lscd/types.hpp"

namespace lscd {

struct StaticModel {
  TimeBin bin;
  std::vector<std::string> vocab;
  RowMatrix matrix;  // row i is vocab[i]

  std::unordered_map<std::string, Eigen::Index> index() const {
    std::unordered_map<std::string, Eigen::Index> out;
    for (std::size_t i = 0; i < vocab.size(); ++i) out.emplace(vocab[i], static_cast<Eigen::Index>(i));
    return out;
  }
};

inline void validate(const StaticModel &m) {
  if (static_cast<std::size_t>(m.matrix.rows()) != m.vocab.size())
    throw DataError("static model row count does not match vocabulary size");
  std::unordered_map<std::string, int> seen;
  for (const auto &w : m.vocab)
    if (seen[w]++) throw DataError("duplicate vocabulary entry '" + w + "' in static model " + m.bin.label);
  for (Eigen::Index i = 0; i < m.matrix.rows(); ++i)
    if (m.matrix.row(i).isZero(0.0)) throw DataError("all-zero vector for '" + m.vocab[i] + "'");
}

// Text format: "V D" header, then "word x1 ... xD" per line.
inline StaticModel read_static_model(std::istream &is, TimeBin bin) {
  StaticModel m;
  m.bin = std::move(bin);
  std::string header;
  if (!std::getline(is, header)) throw DataError("static model: missing header");
  std::istringstream hs(header);
  long long v = -1, d = -1;
  if (!(hs >> v >> d) || v < 0 || d < 1) throw DataError("static model: malformed header '" + header + "'");
  m.vocab.reserve(static_cast<std::size_t>(v));
  m.matrix.resize(v, d);
  std::string line;
  for (long long i = 0; i < v; ++i) {
    if (!std::getline(is, line)) throw DataError("static model: expected " + std::to_string(v) + " rows, got " + std::to_string(i));
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    for (long long j = 0; j < d; ++j) {
      std::string tok;
      if (!(ls >> tok)) throw DataError("static model: row " + std::to_string(i + 2) + " has too few coordinates");
      try {
        m.matrix(i, j) = std::stod(tok);
      } catch (const std::exception &) {
        throw DataError("static model: bad coordinate '" + tok + "' on line " + std::to_string(i + 2));
      }
    }
    std::string extra;
    if (ls >> extra) throw DataError("static model: row " + std::to_string(i + 2) + " has too many coordinates");
    m.vocab.push_back(std::move(word));
  }
  validate(m);
  return m;
}

inline StaticModel read_static_model(const std::filesystem::path &path, TimeBin bin) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open static model " + path.string());
  return read_static_model(is, std::move(bin));
}

inline void write_static_model(std::ostream &os, const StaticModel &m) {
  os << m.matrix.rows() << ' ' << m.matrix.cols() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.matrix.rows(); ++i) {
    os << m.vocab[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.matrix.cols(); ++j) {
      std::snprintf(buf, sizeof buf, " %.17g", m.matrix(i, j));
      os << buf;
    }
    os << '\n';
  }
}

struct Alignment {
  RowMatrix rotation;  // D x D orthogonal; aligned = source * rotation
  TimeBin source_bin;
  TimeBin target_bin;
  double residual = 0.0;
  std::size_t shared = 0;
};

// Orthogonal Q minimizing ||XQ - Y||_F over the shared vocabulary, Q = U V^T
// from the SVD of X^T Y. Reflections are allowed. With `center`, both sides
// are mean-centered over the shared rows first.
inline Alignment procrustes_align(const StaticModel &source, const StaticModel &target, bool center = false) {
  if (source.matrix.cols() != target.matrix.cols())
    throw DataError("cannot align models of different dimensions");
  const auto tindex = target.index();
  std::vector<Eigen::Index> src_rows, tgt_rows;
  for (std::size_t i = 0; i < source.vocab.size(); ++i) {
    if (auto it = tindex.find(source.vocab[i]); it != tindex.end()) {
      src_rows.push_back(static_cast<Eigen::Index>(i));
      tgt_rows.push_back(it->second);
    }
  }
  if (src_rows.empty())
    throw DataError("no shared vocabulary between " + source.bin.label + " and " + target.bin.label);

  const auto d = source.matrix.cols();
  const auto n = static_cast<Eigen::Index>(src_rows.size());
  Eigen::MatrixXd x(n, d), y(n, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    x.row(k) = source.matrix.row(src_rows[k]);
    y.row(k) = target.matrix.row(tgt_rows[k]);
  }
  if (center) {
    x.rowwise() -= x.colwise().mean();
    y.rowwise() -= y.colwise().mean();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x.transpose() * y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Alignment a;
  a.rotation = svd.matrixU() * svd.matrixV().transpose();
  a.source_bin = source.bin;
  a.target_bin = target.bin;
  a.residual = (x * a.rotation - y).norm();
  a.shared = src_rows.size();
  return a;
}

// Aligns every model to `models[anchor]` and scores each word by cosine
// distance between its aligned vectors in consecutive bins. Models must be
// given in chronological order; missing words yield absent entries.
inline ScoreMatrix sgns_op_scores(const std::vector<StaticModel> &models, std::size_t anchor,
                                  const std::vector<std::string> &words, bool center = false) {
  if (models.empty()) throw DataError("no static models given");
  if (anchor >= models.size()) throw DataError("anchor bin out of range");
  const auto dim = models.front().matrix.cols();
  for (const auto &m : models)
    if (m.matrix.cols() != dim) throw DataError("static models differ in dimension");

  std::vector<RowMatrix> aligned;
  std::vector<std::unordered_map<std::string, Eigen::Index>> indices;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (i == anchor) {
      aligned.push_back(models[i].matrix);
    } else {
      const auto q = procrustes_align(models[i], models[anchor], center).rotation;
      aligned.push_back(models[i].matrix * q);
    }
    indices.push_back(models[i].index());
  }

  ScoreMatrix out;
  out.method = "SGNS_OP";
  out.words = words;
  std::vector<TimeBin> bins;
  for (const auto &m : models) bins.push_back(m.bin);
  out.pairs = consecutive_pairs(bins);
  for (const auto &w : words) {
    std::vector<std::optional<double>> row;
    for (std::size_t p = 0; p + 1 < models.size(); ++p) {
      auto a = indices[p].find(w);
      auto b = indices[p + 1].find(w);
      if (a == indices[p].end() || b == indices[p + 1].end()) {
        row.emplace_back();
        continue;
      }
      row.emplace_back(1.0 - cosine_similarity(aligned[p].row(a->second), aligned[p + 1].row(b->second)));
    }
    out.values.push_back(std::move(row));
  }
  validate(out);
  return out;
}

// |f1 - f2| with f the frequency per million tokens of the bin.
inline ScoreMatrix fd_scores(const CorpusStats &stats, const std::vector<std::string> &words,
                             const std::vector<TimeBin> &bins) {
  ScoreMatrix out;
  out.method = "FD";
  out.words = words;
  out.pairs = consecutive_pairs(bins);
  for (const auto &b : bins) {
    if (b.ordinal >= stats.bins.size() || !(stats.bins[b.ordinal] == b))
      throw DataError("bin '" + b.label + "' not present in corpus statistics");
    if (stats.bin_totals[b.ordinal] == 0) throw DataError("bin '" + b.label + "' has no tokens");
  }
  for (const auto &w : words) {
    auto it = stats.counts.find(w);
    if (it == stats.counts.end()) throw DataError("word '" + w + "' absent from corpus statistics");
    auto per_million = [&](const TimeBin &b) {
      return static_cast<double>(it->second[b.ordinal]) * 1e6 / static_cast<double>(stats.bin_totals[b.ordinal]);
    };
    std::vector<std::optional<double>> row;
    for (const auto &[a, b] : out.pairs) row.emplace_back(std::abs(per_million(a) - per_million(b)));
    out.values.push_back(std::move(row));
  }
  validate(out);
  return out;
}

}  // namespace lscd
