#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "lscd/diachrony.hpp"
#include "lscd/synthgen.hpp"
#include "oracles.hpp"

using namespace lscd;

namespace {

ScoreMatrix matrix_of(std::vector<std::vector<std::optional<double>>> values) {
  ScoreMatrix m;
  m.method = "X";
  std::vector<std::string> labels;
  for (std::size_t c = 0; c <= values.front().size(); ++c) labels.push_back("t" + std::to_string(c));
  m.pairs = consecutive_pairs(make_bins(labels));
  for (std::size_t w = 0; w < values.size(); ++w) m.words.push_back("w" + std::to_string(w));
  m.values = std::move(values);
  return m;
}

std::vector<OccurrenceRecord> records(const std::vector<std::string> &surfaces,
                                      const std::vector<std::string> &tags = {}) {
  std::vector<OccurrenceRecord> out;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    OccurrenceRecord r;
    r.surface = surfaces[i];
    r.lemma = "banish";
    if (i < tags.size()) r.tag = tag_id(tags[i]);
    out.push_back(r);
  }
  return out;
}

std::vector<OccurrenceRecord> tagged(std::size_t noun, std::size_t verb) {
  std::vector<std::string> tags(noun, "NOUN");
  tags.insert(tags.end(), verb, "VERB");
  return records(std::vector<std::string>(noun + verb, "x"), tags);
}

ChangePoint point_at(std::size_t column) {
  const auto b = make_bins(synth::preset_bins());
  return {"w", {b[column], b[column + 1]}, column, 1.0, 2.5};
}

WordDiagnostics quiet() {
  WordDiagnostics d;
  d.fluidity_ratio = 0.5;
  d.capitalization = {0.0, 0.0, 0.0, 0.0, 0.0};
  d.tag_divergence = {0.0, 0.0, 0.0, 0.0};
  d.z_row = {0.1, 0.2, 0.3, 0.1};
  return d;
}

}  // namespace

TEST(ScoreMatrix, IdenticalRepeatedVector) {
  Store s;
  s.dim = 2;
  s.bins = make_bins({"a", "b"});
  RowMatrix v(3, 2);
  v << 0.6, 0.8, 0.6, 0.8, 0.6, 0.8;
  s.matrices = {oracle::usage("w", s.bins[0], v), oracle::usage("w", s.bins[1], v)};
  const auto m = score_matrix(s, Method::APD);
  ASSERT_EQ(m.rows(), 1u);
  ASSERT_EQ(m.cols(), 1u);
  EXPECT_NEAR(*m.values[0][0], 0.0, 1e-15);
}

TEST(ScoreMatrix, MissingBinIsAbsent) {
  std::mt19937_64 rng(1);
  Store s;
  s.dim = 4;
  s.bins = make_bins({"a", "b", "c"});
  for (std::uint16_t b : {0, 2}) s.matrices.push_back(oracle::usage("w", s.bins[b], oracle::gaussian(rng, 5, 4, 1)));
  for (std::uint16_t b : {0, 1, 2}) s.matrices.push_back(oracle::usage("v", s.bins[b], oracle::gaussian(rng, 5, 4, 1)));
  const auto m = score_matrix(s, Method::PRT_APD);
  EXPECT_EQ(m.words, (std::vector<std::string>{"w", "v"}));
  EXPECT_FALSE(m.values[0][0]);
  EXPECT_FALSE(m.values[0][1]);
  EXPECT_TRUE(m.values[1][0]);
  EXPECT_THROW(score_matrix(s, Method::FD), DataError);
}

TEST(ScoreMatrix, BurstPresetSignature) {
  const auto g = synth::generate(synth::preset("burst", 64, 3), 64, 4);
  Store s;
  s.dim = 64;
  s.bins = make_bins(synth::preset_bins());
  s.matrices = g.bins;
  const auto m = score_matrix(s, Method::PRT_APD);
  const auto &r = m.values[0];
  EXPECT_GT(std::min(*r[1], *r[2]), std::max(*r[0], *r[3]));
}

TEST(ScoreMatrix, ThreadCountDoesNotMatter) {
  const auto lex = synth::lexicon({{"stable", 3}, {"burst", 2}, {"fluid", 2}}, 32, 5, 200);
  const auto one = score_matrix(lex.store, Method::PRT_APD, {{}, ApdKernel::pairwise, 1});
  for (unsigned t : {2u, 4u, 8u}) {
    const auto m = score_matrix(lex.store, Method::PRT_APD, {{}, ApdKernel::pairwise, t});
    EXPECT_EQ(m.values, one.values);
  }
}

TEST(ZScores, Examples) {
  const auto z = zscores(matrix_of({{0.6, 0.8}}));
  EXPECT_NEAR(*z.values[0][0], -1.0, 1e-12);
  EXPECT_NEAR(*z.values[0][1], 1.0, 1e-12);
  EXPECT_THROW(zscores(matrix_of({{0.7, 0.7}, {0.7, 0.7}})), DataError);
  EXPECT_THROW(zscores(matrix_of({{0.1, 0.1, 0.1}, {0.1, 0.1, 0.1}})), DataError);
  EXPECT_THROW(zscores(matrix_of({{0.7, std::nullopt}})), DataError);
}

TEST(ZScores, StandardizedAndAffineInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.7, 0.2);
  std::uniform_real_distribution<double> u(0.1, 20.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<std::optional<double>>> v(2 + rng() % 10, std::vector<std::optional<double>>(4));
    for (auto &row : v)
      for (auto &x : row)
        if (rng() % 7) x = g(rng);
    v[0][0] = 0.1;
    v[1][1] = 0.9;
    const auto m = matrix_of(v);
    const auto z = zscores(m);
    const auto p = z.present();
    double mean = 0.0, ss = 0.0;
    for (double x : p) mean += x;
    mean /= static_cast<double>(p.size());
    for (double x : p) ss += (x - mean) * (x - mean);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(ss / static_cast<double>(p.size())), 1.0, 1e-9);

    const double alpha = u(rng), beta = u(rng) - 10;
    auto scaled = m;
    for (auto &row : scaled.values)
      for (auto &x : row)
        if (x) x = alpha * *x + beta;
    const auto z2 = zscores(scaled);
    for (std::size_t w = 0; w < m.rows(); ++w)
      for (std::size_t c = 0; c < m.cols(); ++c) {
        ASSERT_EQ(z.values[w][c].has_value(), z2.values[w][c].has_value());
        if (z.values[w][c]) {
          EXPECT_NEAR(*z.values[w][c], *z2.values[w][c], 1e-9);
        }
      }
  }
}

TEST(TopChanges, OrderingAndTies) {
  const auto m = matrix_of({{0.5, 0.9, std::nullopt}, {0.9, 0.1, 0.3}});
  const auto all = top_changes(m, 100);
  ASSERT_EQ(all.size(), 5u);
  EXPECT_EQ(all[0].word, "w0");
  EXPECT_EQ(all[0].column, 1u);
  EXPECT_EQ(all[1].word, "w1");
  EXPECT_EQ(all[1].column, 0u);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_GE(all[i - 1].score, all[i].score);
  EXPECT_EQ(top_changes(m, 2).size(), 2u);
  EXPECT_NEAR(all[0].z, *zscores(m).values[0][1], 1e-15);
}

TEST(TopChanges, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::vector<std::optional<double>>> v(8, std::vector<std::optional<double>>(4));
    for (auto &row : v)
      for (auto &x : row) x = u(rng);
    const auto m = matrix_of(v);
    auto f = m;
    for (auto &row : f.values)
      for (auto &x : row) x = std::exp(3 * *x) + 1;
    for (std::size_t k : {1u, 5u, 12u}) {
      std::set<std::pair<std::string, std::size_t>> a, b;
      for (const auto &p : top_changes(m, k)) a.insert({p.word, p.column});
      for (const auto &p : top_changes(f, k)) b.insert({p.word, p.column});
      EXPECT_EQ(a, b);
    }
  }
}

TEST(TopChanges, BurstCellFirst) {
  auto lex = synth::lexicon({{"stable", 10}}, 64, 6);
  const auto store = fixture::with_target(lex.store, "burst", 6, "banish");
  const auto top = top_changes(score_matrix(store, Method::PRT_APD), 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].word, "banish");
  EXPECT_TRUE(top[0].column == 1 || top[0].column == 2);
}

TEST(Fluidity, SameMixtureNearOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = synth::generate(synth::preset("fluid", 64, seed), 64, seed + 100);
    const double r = fluidity_ratio(g.bins[0], g.bins[1], 10, seed);
    EXPECT_GE(r, 0.9) << seed;
    EXPECT_LE(r, 1.1) << seed;
  }
}

TEST(Fluidity, HardShiftIsLow) {
  auto spec = synth::preset("stable", 32, 1);
  spec.senses.push_back({Vector::Unit(32, 0), 0.6, "NOUN", 0.0});
  spec.senses[0].direction = Vector::Unit(32, 1);
  spec.weights = {{1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
  const auto g = synth::generate(spec, 32, 5);
  EXPECT_LT(fluidity_ratio(g.bins[0], g.bins[1]), 0.7);
  EXPECT_LT(fluidity_ratio(g.bins[0], g.bins[1], 10, 0, Method::APD), 0.7);
}

TEST(Fluidity, CopiedBinNearOne) {
  const auto g = synth::generate(synth::preset("genuine_shift", 64, 2), 64, 3);
  auto copy = g.bins[0];
  copy.bin = g.bins[1].bin;
  ASSERT_GE(copy.rows(), 200);
  const double r = fluidity_ratio(g.bins[0], copy);
  EXPECT_GE(r, 0.95);
  EXPECT_LE(r, 1.05);
}

TEST(Fluidity, RotationInvariant) {
  std::mt19937_64 rng(5);
  const auto g = synth::generate(synth::preset("burst", 16, 4), 16, 4);
  const Eigen::MatrixXd q = oracle::random_orthogonal(rng, 16);
  auto a = g.bins[1], b = g.bins[2];
  const double base = fluidity_ratio(a, b, 10, 9);
  a.vectors = a.vectors * q;
  b.vectors = b.vectors * q;
  EXPECT_NEAR(fluidity_ratio(a, b, 10, 9), base, 1e-9);
}

TEST(Capitalization, Examples) {
  const auto lower = records({"banish", "banish", "banish"});
  const auto mixed = records({"Banish", "Banish", "banish", "banish"});
  const auto p = capitalization_profile({lower, mixed});
  EXPECT_EQ(p, (std::vector<double>{0.0, 0.5}));
  EXPECT_THROW(capitalization_profile({std::span<const OccurrenceRecord>()}), DataError);
}

TEST(Capitalization, ProperNamePreset) {
  const auto g = synth::generate(synth::preset("proper_name", 64, 7), 64, 8);
  std::vector<std::span<const OccurrenceRecord>> bins;
  for (const auto &u : g.bins) bins.emplace_back(u.occurrences);
  const auto p = capitalization_profile(bins);
  EXPECT_GE(p[2], 0.75);
  for (std::size_t b : {0u, 1u, 3u, 4u}) EXPECT_LE(p[b], 0.05);
}

TEST(TagDivergence, Examples) {
  const auto same = tagged(30, 70);
  EXPECT_NEAR(tag_divergence(same, same), 0.0, 1e-15);
  const auto nouns = tagged(1000, 0), verbs = tagged(0, 1000);
  const double disjoint = tag_divergence(nouns, verbs);
  EXPECT_GE(disjoint, 0.9);
  EXPECT_LT(disjoint, 1.0);
  // Closed form: p = (1001/1002, 1/1002), q reversed, m = (1/2, 1/2).
  const double p = 1001.0 / 1002.0, q = 1.0 / 1002.0;
  const double closed = p * std::log2(2 * p) + q * std::log2(2 * q);
  EXPECT_NEAR(disjoint, closed, 1e-12);
  EXPECT_LT(tag_divergence(tagged(500, 500), tagged(500, 500)), 0.01);
  EXPECT_NEAR(tag_divergence(nouns, verbs), tag_divergence(verbs, nouns), 1e-15);
}

TEST(TagDivergence, NeedsCoverage) {
  auto half = records({"a", "b", "c", "d"}, {"NOUN", "NOUN"});
  EXPECT_NO_THROW(tag_divergence(half, half));
  auto sparse = records({"a", "b", "c", "d"}, {"NOUN"});
  EXPECT_THROW(tag_divergence(sparse, half), DataError);
}

TEST(Classify, RulesInOrder) {
  const auto pt = point_at(1);
  EXPECT_EQ(classify_point(pt, quiet()).suggested_class, ErrorClass::unflagged);

  auto d = quiet();
  d.fluidity_ratio = 0.95;
  d.capitalization = {0.0, 0.9, 0.0, 0.0, 0.0};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::fluid);

  d.fluidity_ratio = 0.5;
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::proper_name);
  d.capitalization = {0.0, 0.0, 0.9, 0.0, 0.0};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::proper_name);
  d.capitalization = {0.0, 0.0, 0.0, 0.9, 0.0};  // outside the point's pair
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::unflagged);
  d.capitalization = {0.7, 0.9, 0.0, 0.0, 0.0};  // gap below 0.3
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::unflagged);

  d = quiet();
  d.tag_divergence = {0.0, 0.25, 0.0, 0.0};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::syntactic);
  d.tag_divergence = {0.25, 0.0, 0.0, 0.0};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::unflagged);

  d = quiet();
  d.z_row = {0.0, 2.5, 0.0, 0.0};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::burst);
  d.z_row = {0.0, 2.5, 2.1, 0.0};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::burst);
  d.z_row = {2.2, 2.5, 0.0, 0.0};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::burst);
  d.z_row = {2.2, 0.0, 2.5, 0.0};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::unflagged);
  d.z_row = {0.0, 2.5, 2.1, 2.3};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::unflagged);

  d = quiet();
  d.fluidity_ratio.reset();
  d.tag_divergence = {std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  EXPECT_EQ(classify_point(pt, d).suggested_class, ErrorClass::unflagged);
}

TEST(Classify, ThresholdsAreConfigurable) {
  auto d = quiet();
  d.fluidity_ratio = 0.8;
  ClassifyThresholds th;
  EXPECT_EQ(classify_point(point_at(0), d, th).suggested_class, ErrorClass::unflagged);
  th.fluid_ratio = 0.75;
  EXPECT_EQ(classify_point(point_at(0), d, th).suggested_class, ErrorClass::fluid);
}

TEST(Classify, PresetExamples) {
  const auto bg = synth::lexicon(fixture::background(), 64, 11).store;
  EXPECT_EQ(fixture::classify_word(fixture::with_target(bg, "fluid", 1), "target").report.suggested_class,
            ErrorClass::fluid);
  EXPECT_EQ(fixture::classify_word(fixture::with_target(bg, "proper_name", 1), "target").report.suggested_class,
            ErrorClass::proper_name);
  EXPECT_EQ(fixture::classify_word(fixture::with_target(bg, "genuine_shift", 1), "target").report.suggested_class,
            ErrorClass::unflagged);
}

TEST(Diagnose, ReportFields) {
  const auto bg = synth::lexicon(fixture::background(), 64, 12).store;
  const auto c = fixture::classify_word(fixture::with_target(bg, "syntactic", 2), "target");
  EXPECT_EQ(c.report.word, "target");
  EXPECT_EQ(c.report.capitalization_profile.size(), 5u);
  EXPECT_EQ(c.report.tag_divergence.size(), 4u);
  ASSERT_TRUE(c.report.fluidity_ratio);
  EXPECT_EQ(c.point.column, 1u);
  EXPECT_EQ(c.report.suggested_class, ErrorClass::syntactic);
}
