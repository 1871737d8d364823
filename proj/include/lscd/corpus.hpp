#pragma once

// Corpus statistics, target word-list construction and occurrence indexing
// over vertical-format corpora (one file per time bin):
//
//   #doc <id>
//   surface<TAB>lemma<TAB>tag
//   ...
//   <blank line ends a sentence>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lscd/error.hpp"
#include "lscd/types.hpp"

namespace lscd {

struct CorpusFile {
  TimeBin bin;
  std::filesystem::path path;
};

// Bin labels come from file stems, ordinals from argument order.
inline std::vector<CorpusFile> corpus_from_paths(const std::vector<std::filesystem::path> &paths) {
  std::vector<CorpusFile> files;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    auto label = paths[i].stem().string();
    if (!seen.insert(label).second) throw DataError("duplicate bin label '" + label + "' in corpus paths");
    files.push_back({{label, static_cast<std::uint16_t>(i)}, paths[i]});
  }
  return files;
}

struct CorpusStats {
  std::vector<TimeBin> bins;
  std::vector<std::uint64_t> bin_totals;
  std::map<std::string, std::vector<std::uint64_t>> counts;           // lemma -> per-bin frequency
  std::map<std::string, std::map<std::string, std::uint64_t>> tags;   // lemma -> tag -> frequency

  std::uint64_t total(const std::string &lemma) const {
    auto it = counts.find(lemma);
    if (it == counts.end()) return 0;
    std::uint64_t t = 0;
    for (auto c : it->second) t += c;
    return t;
  }

  // Most frequent tag; ties go to the lexicographically smallest tag.
  std::optional<std::string> majority_tag(const std::string &lemma) const {
    auto it = tags.find(lemma);
    if (it == tags.end() || it->second.empty()) return std::nullopt;
    const auto best = std::max_element(it->second.begin(), it->second.end(),
                                       [](const auto &a, const auto &b) { return a.second < b.second; });
    return best->first;
  }
};

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct CorpusToken {
  std::string surface;
  std::string lemma;  // lowercased
  std::string tag;    // raw tag column
};

// Calls `on_sentence(doc_id, sentence_index, tokens)` for every sentence in
// file order. Throws DataError naming the line on a malformed token line.
inline void read_vertical(
    const std::filesystem::path &path,
    const std::function<void(std::uint32_t, std::uint32_t, const std::vector<CorpusToken> &)> &on_sentence) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open corpus file " + path.string());
  std::uint32_t doc = 0;
  std::uint32_t sentence = 0;
  std::vector<CorpusToken> tokens;
  auto flush = [&] {
    if (tokens.empty()) return;
    on_sentence(doc, sentence, tokens);
    ++sentence;
    tokens.clear();
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.rfind("#doc", 0) == 0 && line.find('\t') == std::string::npos) {
      flush();
      auto id = std::string_view(line).substr(4);
      while (!id.empty() && id.front() == ' ') id.remove_prefix(1);
      std::uint32_t value = 0;
      const auto [end, ec] = std::from_chars(id.data(), id.data() + id.size(), value);
      if (id.empty() || ec != std::errc{} || end != id.data() + id.size())
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed document marker");
      doc = value;
      sentence = 0;
      continue;
    }
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 3 tab-separated columns, got " +
                      std::to_string(cols.size()));
    tokens.push_back({std::move(cols[0]), lowercase(cols[1]), std::move(cols[2])});
  }
  flush();
}

inline CorpusStats corpus_stats(const std::vector<CorpusFile> &files) {
  CorpusStats stats;
  for (const auto &f : files) stats.bins.push_back(f.bin);
  stats.bin_totals.assign(files.size(), 0);
  for (std::size_t b = 0; b < files.size(); ++b) {
    read_vertical(files[b].path, [&](std::uint32_t, std::uint32_t, const std::vector<CorpusToken> &tokens) {
      for (const auto &t : tokens) {
        ++stats.bin_totals[b];
        auto &per_bin = stats.counts[t.lemma];
        per_bin.resize(files.size(), 0);
        ++per_bin[b];
        if (!t.tag.empty() && t.tag != "_") ++stats.tags[t.lemma][t.tag];
      }
    });
  }
  return stats;
}

// Lemmas occurring in every bin more than `min_per_bin` times, at least
// `min_total` times overall, and whose majority tag is not excluded. Sorted.
inline std::vector<std::string> build_wordlist(const CorpusStats &stats, std::uint64_t min_per_bin,
                                               std::uint64_t min_total, const std::set<std::string> &excluded_tags) {
  std::vector<std::string> out;
  for (const auto &[lemma, per_bin] : stats.counts) {
    if (per_bin.size() != stats.bins.size()) continue;
    bool everywhere = std::all_of(per_bin.begin(), per_bin.end(), [&](auto c) { return c > min_per_bin; });
    if (!everywhere || stats.total(lemma) < min_total) continue;
    if (auto tag = stats.majority_tag(lemma); tag && excluded_tags.count(*tag)) continue;
    out.push_back(lemma);
  }
  return out;  // std::map iteration is already sorted
}

inline std::string join_surfaces(const std::vector<CorpusToken> &tokens) {
  std::string s;
  for (const auto &t : tokens) {
    if (!s.empty()) s += ' ';
    s += t.surface;
  }
  return s;
}

// word -> per-bin records (indexed by bin ordinal), in corpus order.
using OccurrenceIndex = std::map<std::string, std::vector<std::vector<OccurrenceRecord>>>;

inline OccurrenceIndex index_occurrences(const std::vector<CorpusFile> &files,
                                         const std::vector<std::string> &wordlist) {
  OccurrenceIndex index;
  for (const auto &w : wordlist) index[lowercase(w)].assign(files.size(), {});
  for (std::size_t b = 0; b < files.size(); ++b) {
    read_vertical(files[b].path, [&](std::uint32_t doc, std::uint32_t sent, const std::vector<CorpusToken> &tokens) {
      std::string context;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = index.find(tokens[i].lemma);
        if (it == index.end()) continue;
        if (context.empty()) context = join_surfaces(tokens);
        OccurrenceRecord rec;
        rec.doc_id = doc;
        rec.sentence_index = sent;
        rec.token_index = static_cast<std::uint32_t>(i);
        rec.surface = tokens[i].surface;
        rec.lemma = tokens[i].lemma;
        rec.tag = tag_id(tokens[i].tag);
        rec.context = context;
        it->second[b].push_back(std::move(rec));
      }
    });
  }
  return index;
}

// Occurrence index exchange file: one JSON object per line.
struct IndexEntry {
  std::string word;
  std::string bin;
  OccurrenceRecord record;

  friend bool operator==(const IndexEntry &, const IndexEntry &) = default;
};

inline nlohmann::json to_json(const IndexEntry &e) {
  nlohmann::json j;
  j["word"] = e.word;
  j["bin"] = e.bin;
  j["doc_id"] = e.record.doc_id;
  j["sentence_index"] = e.record.sentence_index;
  j["token_index"] = e.record.token_index;
  j["surface"] = e.record.surface;
  j["tag"] = e.record.tag ? nlohmann::json(std::string(tag_name(*e.record.tag))) : nlohmann::json(nullptr);
  j["context"] = e.record.context;
  return j;
}

inline std::vector<IndexEntry> flatten(const OccurrenceIndex &index, const std::vector<TimeBin> &bins) {
  std::vector<IndexEntry> out;
  for (const auto &[word, per_bin] : index)
    for (std::size_t b = 0; b < per_bin.size(); ++b)
      for (const auto &rec : per_bin[b]) out.push_back({word, bins.at(b).label, rec});
  return out;
}

inline void write_index(std::ostream &os, const std::vector<IndexEntry> &entries) {
  for (const auto &e : entries) os << to_json(e).dump() << '\n';
}

inline std::vector<IndexEntry> read_index(std::istream &is) {
  std::vector<IndexEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      IndexEntry e;
      e.word = j.at("word").get<std::string>();
      e.bin = j.at("bin").get<std::string>();
      e.record.doc_id = j.at("doc_id").get<std::uint32_t>();
      e.record.sentence_index = j.at("sentence_index").get<std::uint32_t>();
      e.record.token_index = j.at("token_index").get<std::uint32_t>();
      e.record.surface = j.at("surface").get<std::string>();
      e.record.lemma = e.word;
      if (!j.at("tag").is_null()) e.record.tag = tag_id(j.at("tag").get<std::string>());
      e.record.context = j.value("context", std::string{});
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception &ex) {
      throw DataError("occurrence index line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace lscd
