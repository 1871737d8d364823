#pragma once

// Tabular and structured renderings shared by the CLI. Scores are printed
// with 6 decimals and z-scores with 2, so identical inputs give identical bytes.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lscd/diachrony.hpp"
#include "lscd/evaluation.hpp"
#include "lscd/score_matrix.hpp"

namespace lscd {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0.000000" || s == "-0.00") s.erase(0, 1);
  return s;
}

inline std::string score_text(const std::optional<double> &v) { return v ? fixed(*v, 6) : "NA"; }
inline std::string z_text(const std::optional<double> &v) { return v ? fixed(*v, 2) : "NA"; }

inline void write_matrix_tsv(std::ostream &os, const ScoreMatrix &m, bool z = false) {
  os << "word";
  for (const auto &p : m.pairs) os << '\t' << pair_label(p);
  os << '\n';
  for (std::size_t w = 0; w < m.rows(); ++w) {
    os << m.words[w];
    for (const auto &v : m.values[w]) os << '\t' << (z ? z_text(v) : score_text(v));
    os << '\n';
  }
}

inline nlohmann::json matrix_json(const ScoreMatrix &m) {
  nlohmann::json j;
  j["method"] = m.method;
  j["words"] = m.words;
  j["pairs"] = nlohmann::json::array();
  for (const auto &p : m.pairs) j["pairs"].push_back(pair_label(p));
  j["values"] = nlohmann::json::array();
  for (const auto &row : m.values) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto &v : row) r.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    j["values"].push_back(std::move(r));
  }
  return j;
}

inline void write_points_tsv(std::ostream &os, const std::vector<ChangePoint> &points,
                             const std::vector<DiagnosticReport> *reports = nullptr) {
  os << "word\tpair\tchange\tz";
  if (reports) os << "\tclass";
  os << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto &p = points[i];
    os << p.word << '\t' << pair_label(p.pair) << '\t' << fixed(p.score, 6) << '\t' << fixed(p.z, 2);
    if (reports) os << '\t' << to_string((*reports)[i].suggested_class);
    os << '\n';
  }
}

inline nlohmann::json optional_json(const std::optional<double> &v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json point_json(const ChangePoint &p) {
  return {{"word", p.word}, {"pair", pair_label(p.pair)}, {"change", p.score}, {"z", p.z}};
}

inline nlohmann::json report_json(const ChangePoint &p, const DiagnosticReport &r) {
  nlohmann::json j = point_json(p);
  j["class"] = std::string(to_string(r.suggested_class));
  j["fluidity_ratio"] = optional_json(r.fluidity_ratio);
  j["capitalization_profile"] = nlohmann::json::array();
  for (const auto &c : r.capitalization_profile) j["capitalization_profile"].push_back(optional_json(c));
  j["tag_divergence"] = nlohmann::json::array();
  for (const auto &t : r.tag_divergence) j["tag_divergence"].push_back(optional_json(t));
  return j;
}

inline void write_eval_tsv(std::ostream &os, const std::vector<EvalResult> &results) {
  os << "method\tgold\trho\tp_value\tsignificant\tn\tcoverage\n";
  for (const auto &r : results)
    os << r.method << '\t' << r.gold_name << '\t' << fixed(r.rho, 3) << '\t' << fixed(r.p_value, 6) << '\t'
       << (r.p_value < 0.05 ? "*" : "") << '\t' << r.n << '\t' << fixed(r.coverage, 3) << '\n';
}

}  // namespace lscd
