#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lscd/corpus.hpp"
#include "oracles.hpp"

using namespace lscd;

namespace {

CorpusStats stats_with(const std::map<std::string, std::vector<std::uint64_t>> &counts,
                       const std::map<std::string, std::string> &tag = {}) {
  CorpusStats s;
  const auto nb = counts.begin()->second.size();
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < nb; ++b) labels.push_back("b" + std::to_string(b));
  s.bins = make_bins(labels);
  s.bin_totals.assign(nb, 1'000'000);
  s.counts = counts;
  for (const auto &[w, c] : counts) {
    std::uint64_t t = 0;
    for (auto x : c) t += x;
    auto it = tag.find(w);
    s.tags[w][it == tag.end() ? "NOUN" : it->second] = t;
  }
  return s;
}

}  // namespace

TEST(Corpus, OneSentenceIndex) {
  oracle::TempDir dir;
  const auto f = dir.write("1990.txt", "the\tthe\tDET\ncell\tcell\tNOUN\nrang\tring\tVERB\n");
  const auto idx = index_occurrences(corpus_from_paths({f}), {"cell"});
  ASSERT_EQ(idx.at("cell").size(), 1u);
  const auto &recs = idx.at("cell")[0];
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].token_index, 1u);
  EXPECT_EQ(recs[0].surface, "cell");
  EXPECT_EQ(recs[0].context, "the cell rang");
  EXPECT_EQ(tag_name(*recs[0].tag), "NOUN");
}

TEST(Corpus, LemmaColumnMatchingPreservesSurface) {
  oracle::TempDir dir;
  const auto f = dir.write("t1.txt", "Cells\tcell\tNOUN\ndivide\tdivide\tVERB\n");
  const auto idx = index_occurrences(corpus_from_paths({f}), {"cell"});
  ASSERT_EQ(idx.at("cell")[0].size(), 1u);
  EXPECT_EQ(idx.at("cell")[0][0].surface, "Cells");
  EXPECT_EQ(idx.at("cell")[0][0].lemma, "cell");
}

TEST(Corpus, AbsentWordGivesEmptyList) {
  oracle::TempDir dir;
  const auto f = dir.write("t1.txt", "a\ta\tDET\n");
  const auto idx = index_occurrences(corpus_from_paths({f}), {"virtual"});
  ASSERT_EQ(idx.count("virtual"), 1u);
  EXPECT_TRUE(idx.at("virtual")[0].empty());
}

TEST(Corpus, DocumentsAndSentences) {
  oracle::TempDir dir;
  const auto f = dir.write("t1.txt",
                           "#doc 17\nA\ta\tDET\ncell\tcell\tNOUN\n\nThe\tthe\tDET\ncell\tcell\tNOUN\n\n"
                           "#doc 18\ncell\tcell\tNOUN\n");
  const auto idx = index_occurrences(corpus_from_paths({f}), {"cell"});
  const auto &r = idx.at("cell")[0];
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].doc_id, 17u);
  EXPECT_EQ(r[0].sentence_index, 0u);
  EXPECT_EQ(r[1].doc_id, 17u);
  EXPECT_EQ(r[1].sentence_index, 1u);
  EXPECT_EQ(r[2].doc_id, 18u);
  EXPECT_EQ(r[2].sentence_index, 0u);
  EXPECT_EQ(r[2].token_index, 0u);
}

TEST(Corpus, MalformedLineNamesLine) {
  oracle::TempDir dir;
  const auto f = dir.write("t1.txt", "a\ta\tDET\nbroken line\n");
  try {
    corpus_stats(corpus_from_paths({f}));
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
}

TEST(Corpus, BinLabelsFromStems) {
  const auto files = corpus_from_paths({"/x/1990s.txt", "/y/2000s.vert"});
  EXPECT_EQ(files[0].bin, (TimeBin{"1990s", 0}));
  EXPECT_EQ(files[1].bin, (TimeBin{"2000s", 1}));
  EXPECT_THROW(corpus_from_paths({"/x/a.txt", "/y/a.txt"}), DataError);
}

TEST(Wordlist, ThresholdsAtBoundary) {
  const auto s = stats_with({{"cell", {200, 300, 400, 500, 600}},
                             {"edge", {101, 101, 101, 101, 596}},
                             {"flat", {100, 500, 500, 500, 500}},
                             {"few", {150, 150, 150, 150, 150}}});
  const auto w = build_wordlist(s, 100, 1000, {});
  EXPECT_EQ(w, (std::vector<std::string>{"cell", "edge"}));
}

TEST(Wordlist, AbsentFromOneBinExcluded) {
  const auto s = stats_with({{"gone", {5000, 5000, 0, 5000, 5000}}, {"cell", {200, 300, 400, 500, 600}}});
  EXPECT_EQ(build_wordlist(s, 100, 1000, {}), (std::vector<std::string>{"cell"}));
}

TEST(Wordlist, ExcludedMajorityTag) {
  const auto s = stats_with({{"two", {500, 500}}, {"cell", {500, 500}}}, {{"two", "NUM"}});
  EXPECT_EQ(build_wordlist(s, 100, 1000, {"NUM"}), (std::vector<std::string>{"cell"}));
  EXPECT_EQ(build_wordlist(s, 100, 1000, {}).size(), 2u);
}

TEST(Wordlist, MajorityTagTieBreak) {
  CorpusStats s = stats_with({{"run", {10}}});
  s.tags["run"] = {{"VERB", 5}, {"NOUN", 5}};
  EXPECT_EQ(s.majority_tag("run"), "NOUN");
}

TEST(Wordlist, MonotoneInThresholds) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> c(0, 400);
  std::map<std::string, std::vector<std::uint64_t>> counts;
  for (int w = 0; w < 200; ++w) counts["w" + std::to_string(w)] = {c(rng), c(rng), c(rng), c(rng)};
  const auto s = stats_with(counts);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = c(rng) / 2, t = c(rng) * 3;
    const auto base = build_wordlist(s, p, t, {});
    for (const auto &[p2, t2] : {std::pair{p + 1 + c(rng) / 4, t}, std::pair{p, t + 1 + c(rng)}}) {
      for (const auto &w : build_wordlist(s, p2, t2, {}))
        EXPECT_TRUE(std::binary_search(base.begin(), base.end(), w)) << w;
    }
  }
}

TEST(Corpus, IndexCountsMatchStats) {
  oracle::TempDir dir;
  std::mt19937_64 rng(3);
  const std::vector<std::string> lemmas = {"cell", "virtual", "the", "a", "ring", "mobile"};
  std::vector<std::filesystem::path> paths;
  for (int b = 0; b < 3; ++b) {
    std::string text;
    for (int doc = 0; doc < 4; ++doc) {
      text += "#doc " + std::to_string(doc) + "\n";
      for (int sent = 0; sent < 10; ++sent) {
        for (int t = 0; t < 8; ++t) {
          const auto &l = lemmas[rng() % lemmas.size()];
          const std::string surface = rng() % 4 == 0 ? std::string(1, static_cast<char>(std::toupper(l[0]))) + l.substr(1) : l;
          text += surface + "\t" + l + "\tNOUN\n";
        }
        text += "\n";
      }
    }
    paths.push_back(dir.write("bin" + std::to_string(b) + ".txt", text));
  }
  const auto files = corpus_from_paths(paths);
  const auto stats = corpus_stats(files);
  const auto idx = index_occurrences(files, lemmas);
  std::uint64_t grand = 0;
  for (const auto &l : lemmas)
    for (std::size_t b = 0; b < 3; ++b) {
      EXPECT_EQ(idx.at(l)[b].size(), stats.counts.at(l)[b]) << l << " bin " << b;
      grand += stats.counts.at(l)[b];
    }
  EXPECT_EQ(grand, 3u * 4 * 10 * 8);
  EXPECT_EQ(stats.bin_totals, (std::vector<std::uint64_t>{320, 320, 320}));
}

TEST(Corpus, IndexFileRoundTrip) {
  oracle::TempDir dir;
  const auto f1 = dir.write("1990s.txt", "#doc 3\nThe\tthe\tDET\nCell\tcell\tPROPN\n\ncell\tcell\t_\n");
  const auto f2 = dir.write("2000s.txt", "my\tmy\tPRON\ncell\tcell\tNOUN\n");
  const auto files = corpus_from_paths({f1, f2});
  const auto entries = flatten(index_occurrences(files, {"cell"}), {files[0].bin, files[1].bin});
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_FALSE(entries[1].record.tag);
  std::stringstream ss;
  write_index(ss, entries);
  const auto text = ss.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  const auto back = read_index(ss);
  ASSERT_EQ(back.size(), entries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].word, entries[i].word);
    EXPECT_EQ(back[i].bin, entries[i].bin);
    EXPECT_EQ(back[i].record.doc_id, entries[i].record.doc_id);
    EXPECT_EQ(back[i].record.sentence_index, entries[i].record.sentence_index);
    EXPECT_EQ(back[i].record.token_index, entries[i].record.token_index);
    EXPECT_EQ(back[i].record.surface, entries[i].record.surface);
    EXPECT_EQ(back[i].record.tag, entries[i].record.tag);
    EXPECT_EQ(back[i].record.context, entries[i].record.context);
  }
  std::stringstream bad("{\"word\": 1}\n");
  EXPECT_THROW(read_index(bad), DataError);
}
