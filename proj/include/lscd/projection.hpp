#pragma once

// 2-D PCA of a word's token embeddings (one bin or all bins jointly), nearest
// occurrence sampling around a point of the projection, and plot exports.

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lscd/error.hpp"
#include "lscd/types.hpp"

namespace lscd {

struct PointRef {
  std::size_t matrix = 0;  // index into the matrices passed to pca2d
  std::size_t row = 0;

  friend bool operator==(const PointRef &, const PointRef &) = default;
};

struct ProjectionResult {
  std::string word;
  std::string scope;  // bin label, or "all"
  Eigen::MatrixX2d coords;
  Eigen::Matrix<double, 2, Eigen::Dynamic> components;
  std::array<double, 2> explained_variance{0.0, 0.0};
  std::vector<TimeBin> labels;
  std::vector<PointRef> occ_refs;
  std::vector<OccurrenceRecord> occurrences;

  std::size_t size() const { return labels.size(); }
};

// Top-2 principal axes of the mean-centered concatenation of all rows. Each
// axis is oriented so its largest-magnitude coordinate is positive.
inline ProjectionResult pca2d(const std::vector<UsageMatrix> &matrices) {
  if (matrices.empty()) throw DataError("nothing to project");
  const auto dim = matrices.front().dim();
  Eigen::Index n = 0;
  for (const auto &m : matrices) {
    if (m.dim() != dim) throw DataError("projected matrices differ in dimension");
    n += m.rows();
  }
  if (n < 3) throw DataError("projection needs at least 3 points");
  if (dim < 2) throw DataError("projection needs dimension >= 2");

  ProjectionResult r;
  r.word = matrices.front().word;
  r.scope = matrices.size() == 1 ? matrices.front().bin.label : "all";
  Eigen::MatrixXd x(n, dim);
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const auto &m = matrices[k];
    x.middleRows(at, m.rows()) = m.vectors;
    at += m.rows();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      r.labels.push_back(m.bin);
      r.occ_refs.push_back({k, static_cast<std::size_t>(i)});
      r.occurrences.push_back(m.occurrences[static_cast<std::size_t>(i)]);
    }
  }
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  const double total = cov.trace();
  if (!(total > 0.0)) throw DataError("zero variance data");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DataError("eigendecomposition failed");
  r.components.resize(2, dim);
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd axis = eig.eigenvectors().col(dim - 1 - c);
    Eigen::Index imax = 0;
    axis.cwiseAbs().maxCoeff(&imax);
    if (axis[imax] < 0) axis = -axis;
    r.components.row(c) = axis.transpose();
    r.explained_variance[static_cast<std::size_t>(c)] = std::max(0.0, eig.eigenvalues()[dim - 1 - c]) / total;
  }
  r.coords = x * r.components.transpose();
  return r;
}

struct SampledPoint {
  std::size_t index = 0;  // point index in the projection
  double distance = 0.0;
  OccurrenceRecord occurrence;
};

// The k points nearest to `center`; equal distances are ordered by a seeded shuffle.
inline std::vector<SampledPoint> sample_near(const ProjectionResult &proj, const Eigen::Vector2d &center,
                                             std::size_t k, std::uint64_t seed = 0) {
  if (proj.size() == 0) throw DataError("empty projection");
  if (k < 1) throw DataError("sample size must be at least 1");
  std::vector<std::size_t> order(proj.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> dist(proj.size());
  for (std::size_t i = 0; i < proj.size(); ++i)
    dist[i] = (proj.coords.row(static_cast<Eigen::Index>(i)).transpose() - center).norm();
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
  order.resize(std::min(k, order.size()));
  std::vector<SampledPoint> out;
  for (auto i : order) out.push_back({i, dist[i], proj.occurrences[i]});
  return out;
}

enum class PlotFormat { tsv, json, svg };

inline PlotFormat parse_plot_format(const std::string &s) {
  if (s == "tsv") return PlotFormat::tsv;
  if (s == "json" || s == "structured") return PlotFormat::json;
  if (s == "svg") return PlotFormat::svg;
  throw DataError("unknown plot format '" + s + "'");
}

namespace detail {

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string tsv_field(std::string s) {
  for (auto &c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return s;
}

inline std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline void export_plot_data(const ProjectionResult &proj, std::ostream &os, PlotFormat format) {
  switch (format) {
    case PlotFormat::tsv: {
      os << "x\ty\tbin\tdoc_id\tsentence_index\tsurface\tcontext\n";
      for (std::size_t i = 0; i < proj.size(); ++i) {
        const auto &o = proj.occurrences[i];
        os << detail::fmt12(proj.coords(static_cast<Eigen::Index>(i), 0)) << '\t'
           << detail::fmt12(proj.coords(static_cast<Eigen::Index>(i), 1)) << '\t' << proj.labels[i].label << '\t'
           << o.doc_id << '\t' << o.sentence_index << '\t' << detail::tsv_field(o.surface) << '\t'
           << detail::tsv_field(o.context) << '\n';
      }
      break;
    }
    case PlotFormat::json: {
      nlohmann::json j;
      j["word"] = proj.word;
      j["scope"] = proj.scope;
      j["explained_variance"] = proj.explained_variance;
      j["points"] = nlohmann::json::array();
      for (std::size_t i = 0; i < proj.size(); ++i) {
        const auto &o = proj.occurrences[i];
        j["points"].push_back({{"x", proj.coords(static_cast<Eigen::Index>(i), 0)},
                               {"y", proj.coords(static_cast<Eigen::Index>(i), 1)},
                               {"bin", proj.labels[i].label},
                               {"doc_id", o.doc_id},
                               {"sentence_index", o.sentence_index},
                               {"surface", o.surface},
                               {"context", o.context}});
      }
      os << j.dump(1) << '\n';
      break;
    }
    case PlotFormat::svg: {
      static constexpr std::array<const char *, 10> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
      const double w = 640, h = 480, pad = 40;
      double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
      if (proj.size() > 0) {
        x0 = proj.coords.col(0).minCoeff(), x1 = proj.coords.col(0).maxCoeff();
        y0 = proj.coords.col(1).minCoeff(), y1 = proj.coords.col(1).maxCoeff();
      }
      const double sx = (w - 2 * pad) / std::max(x1 - x0, 1e-12);
      const double sy = (h - 2 * pad) / std::max(y1 - y0, 1e-12);
      std::vector<std::string> bins;
      for (const auto &b : proj.labels)
        if (std::find(bins.begin(), bins.end(), b.label) == bins.end()) bins.push_back(b.label);
      auto color = [&](const std::string &label) {
        const auto k = static_cast<std::size_t>(std::find(bins.begin(), bins.end(), label) - bins.begin());
        return palette[k % palette.size()];
      };
      os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
      os << "<title>" << detail::xml_escape(proj.word) << " (" << detail::xml_escape(proj.scope) << ")</title>\n";
      for (std::size_t i = 0; i < proj.size(); ++i) {
        const double px = pad + (proj.coords(static_cast<Eigen::Index>(i), 0) - x0) * sx;
        const double py = h - pad - (proj.coords(static_cast<Eigen::Index>(i), 1) - y0) * sy;
        os << "<circle cx=\"" << detail::fmt12(px) << "\" cy=\"" << detail::fmt12(py) << "\" r=\"2\" fill=\""
           << color(proj.labels[i].label) << "\" fill-opacity=\"0.6\"/>\n";
      }
      for (std::size_t k = 0; k < bins.size(); ++k)
        os << "<text x=\"" << w - pad - 60 << "\" y=\"" << pad + 14 * k << "\" font-size=\"12\" fill=\""
           << palette[k % palette.size()] << "\">" << detail::xml_escape(bins[k]) << "</text>\n";
      os << "</svg>\n";
      break;
    }
  }
}

struct PlotRow {
  double x = 0.0;
  double y = 0.0;
  std::string bin;
  std::uint32_t doc_id = 0;
  std::uint32_t sentence_index = 0;
  std::string surface;
  std::string context;
};

inline std::vector<PlotRow> read_plot_tsv(std::istream &is) {
  std::vector<PlotRow> rows;
  std::string line;
  if (!std::getline(is, line)) throw DataError("plot file is empty");
  while (std::getline(is, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, '\t');) cols.push_back(c);
    if (cols.size() == 6) cols.emplace_back();
    if (cols.size() != 7) throw DataError("plot row with " + std::to_string(cols.size()) + " columns");
    rows.push_back({std::stod(cols[0]), std::stod(cols[1]), cols[2],
                    static_cast<std::uint32_t>(std::stoul(cols[3])), static_cast<std::uint32_t>(std::stoul(cols[4])),
                    cols[5], cols[6]});
  }
  return rows;
}

}  // namespace lscd
