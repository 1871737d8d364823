#pragma once

// Change scores between two usage matrices of the same word:
//   PRT     1 / cos(mean(U1), mean(U2))
//   APD     mean over all row pairs of (1 - cos(x_i, y_j))
//   PRT_APD (PRT + APD) / 2

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lscd/error.hpp"
#include "lscd/parallel.hpp"
#include "lscd/types.hpp"

namespace lscd {

enum class Method { PRT, APD, PRT_APD, SGNS_OP, FD };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::PRT: return "PRT";
    case Method::APD: return "APD";
    case Method::PRT_APD: return "PRT_APD";
    case Method::SGNS_OP: return "SGNS_OP";
    case Method::FD: return "FD";
  }
  return "?";
}

// Accepts "prt", "apd", "prt_apd" / "prt-apd" / "PRT/APD" in any case.
inline Method parse_method(std::string_view name) {
  std::string s;
  for (char c : name) s += (c == '-' || c == '/') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto m : {Method::PRT, Method::APD, Method::PRT_APD, Method::SGNS_OP, Method::FD})
    if (to_string(m) == s) return m;
  throw DataError("unknown method '" + std::string(name) + "'");
}

struct ScoreFlags {
  bool clamped_inversion = false;
  bool subsampled_pairs = false;

  ScoreFlags operator|(const ScoreFlags &o) const {
    return {clamped_inversion || o.clamped_inversion, subsampled_pairs || o.subsampled_pairs};
  }
  friend bool operator==(const ScoreFlags &, const ScoreFlags &) = default;
};

struct ChangeScore {
  double value = 0.0;
  Method method = Method::PRT_APD;
  ScoreFlags flags;
};

// Pair sampling budget for APD. Unbounded by default.
struct PairBudget {
  std::optional<std::uint64_t> max_pairs;
  std::uint64_t seed = 0;
};

enum class ApdKernel {
  factorized,  // 1 - mean(x̂) · mean(ŷ); exact identity for the all-pairs mean
  pairwise,    // blocked GEMM over the pair grid
};

struct ScoreOptions {
  PairBudget budget;
  ApdKernel kernel = ApdKernel::factorized;
  unsigned threads = 1;
};

inline constexpr double kPrtClamp = 1e-6;
inline constexpr Eigen::Index kApdBlockRows = 64;

template <typename A, typename B>
double cosine_similarity(const Eigen::MatrixBase<A> &a, const Eigen::MatrixBase<B> &b) {
  if (a.size() != b.size()) throw DataError("cosine similarity of vectors with different dimensions");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DataError("degenerate vector (zero norm)");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

inline Vector prototype(const UsageMatrix &u) {
  if (u.rows() < 1) throw DataError("prototype of an empty usage matrix");
  return u.vectors.colwise().sum().transpose() / static_cast<double>(u.rows());
}

namespace detail {

inline void check_pair(const UsageMatrix &u1, const UsageMatrix &u2) {
  if (u1.rows() < 1 || u2.rows() < 1) throw DataError("empty usage matrix for '" + u1.word + "'");
  if (u1.dim() != u2.dim()) throw DataError("usage matrices of '" + u1.word + "' differ in dimension");
  if (u1.word != u2.word) throw DataError("comparing usage matrices of different words");
}

inline RowMatrix unit_rows(const RowMatrix &m) {
  RowMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n == 0.0) throw DataError("degenerate vector (zero-norm row " + std::to_string(i) + ")");
    out.row(i) = m.row(i) / n;
  }
  return out;
}

// Orders two matrices so that pair-order-dependent reductions are symmetric.
inline bool canonical_first(const RowMatrix &a, const RowMatrix &b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  return !std::lexicographical_compare(b.data(), b.data() + b.size(), a.data(), a.data() + a.size());
}

inline double apd_factorized(const RowMatrix &a, const RowMatrix &b) {
  const Vector ma = a.colwise().sum().transpose() / static_cast<double>(a.rows());
  const Vector mb = b.colwise().sum().transpose() / static_cast<double>(b.rows());
  return 1.0 - ma.dot(mb);
}

// Sum of cosines per fixed block of `a` rows, reduced in block order, so the
// result does not depend on the thread count.
inline double apd_blocked(const RowMatrix &a, const RowMatrix &b, unsigned threads) {
  const Eigen::Index blocks = (a.rows() + kApdBlockRows - 1) / kApdBlockRows;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
  const RowMatrix bt = b.transpose();
  parallel_for(partial.size(), threads, [&](std::size_t k) {
    const Eigen::Index first = static_cast<Eigen::Index>(k) * kApdBlockRows;
    const Eigen::Index len = std::min(kApdBlockRows, a.rows() - first);
    Eigen::MatrixXd sims = a.middleRows(first, len) * bt;
    partial[k] = sims.sum();
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return 1.0 - total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

inline double apd_sampled(const RowMatrix &a, const RowMatrix &b, std::uint64_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick_a(0, a.rows() - 1);
  std::uniform_int_distribution<Eigen::Index> pick_b(0, b.rows() - 1);
  double total = 0.0;
  for (std::uint64_t k = 0; k < pairs; ++k) {
    const auto i = pick_a(rng);
    const auto j = pick_b(rng);
    total += 1.0 - a.row(i).dot(b.row(j));
  }
  return total / static_cast<double>(pairs);
}

}  // namespace detail

inline ChangeScore prt(const UsageMatrix &u1, const UsageMatrix &u2) {
  detail::check_pair(u1, u2);
  const Vector p1 = prototype(u1);
  const Vector p2 = prototype(u2);
  ChangeScore s{0.0, Method::PRT, {}};
  double c = cosine_similarity(p1, p2);
  if (c <= kPrtClamp) {
    c = kPrtClamp;
    s.flags.clamped_inversion = true;
  }
  s.value = 1.0 / c;
  return s;
}

inline ChangeScore apd(const UsageMatrix &u1, const UsageMatrix &u2, const ScoreOptions &opts = {}) {
  detail::check_pair(u1, u2);
  if (opts.budget.max_pairs && *opts.budget.max_pairs < 1) throw DataError("pair budget must be at least 1");
  const RowMatrix a = detail::unit_rows(u1.vectors);
  const RowMatrix b = detail::unit_rows(u2.vectors);
  const bool a_first = detail::canonical_first(a, b);
  const RowMatrix &first = a_first ? a : b;
  const RowMatrix &second = a_first ? b : a;

  ChangeScore s{0.0, Method::APD, {}};
  const auto grid = static_cast<std::uint64_t>(a.rows()) * static_cast<std::uint64_t>(b.rows());
  if (opts.budget.max_pairs && grid > *opts.budget.max_pairs) {
    s.value = detail::apd_sampled(first, second, *opts.budget.max_pairs, opts.budget.seed);
    s.flags.subsampled_pairs = true;
  } else if (opts.kernel == ApdKernel::pairwise) {
    s.value = detail::apd_blocked(first, second, opts.threads);
  } else {
    s.value = detail::apd_factorized(first, second);
  }
  s.value = std::clamp(s.value, 0.0, 2.0);
  return s;
}

inline ChangeScore prt_apd(const UsageMatrix &u1, const UsageMatrix &u2, const ScoreOptions &opts = {}) {
  const auto p = prt(u1, u2);
  const auto d = apd(u1, u2, opts);
  return {(p.value + d.value) / 2.0, Method::PRT_APD, p.flags | d.flags};
}

inline ChangeScore score(Method method, const UsageMatrix &u1, const UsageMatrix &u2, const ScoreOptions &opts = {}) {
  switch (method) {
    case Method::PRT: return prt(u1, u2);
    case Method::APD: return apd(u1, u2, opts);
    case Method::PRT_APD: return prt_apd(u1, u2, opts);
    default: break;
  }
  throw DataError("method " + std::string(to_string(method)) + " does not operate on usage matrices");
}

}  // namespace lscd
