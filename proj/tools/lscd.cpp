// lscd: command-line front end for the change-detection toolkit.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lscd/lscd.hpp"

namespace fs = std::filesystem;
using namespace lscd;

namespace {

struct Common {
  unsigned threads = 1;
  std::string format = "tsv";
};

std::vector<std::string> read_lines(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

// Writes to `path`, or stdout when empty / "-".
template <typename Fn>
void with_output(const std::string &path, Fn &&fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path + " for writing");
  fn(os);
  if (!os) throw DataError("write to " + path + " failed");
}

bool structured(const Common &c) {
  if (c.format == "tsv") return false;
  if (c.format == "structured" || c.format == "json") return true;
  throw DataError("unknown --format '" + c.format + "' (expected tsv or structured)");
}

ScoreOptions score_options(std::uint64_t max_pairs, std::uint64_t seed, const std::string &kernel, unsigned threads) {
  ScoreOptions o;
  if (max_pairs > 0) o.budget.max_pairs = max_pairs;
  o.budget.seed = seed;
  if (kernel == "pairwise")
    o.kernel = ApdKernel::pairwise;
  else if (kernel != "factorized")
    throw DataError("unknown --kernel '" + kernel + "'");
  o.threads = threads;
  return o;
}

std::vector<UsageMatrix> word_matrices(const Store &store, const std::string &word, const std::string &bin) {
  std::vector<UsageMatrix> out;
  for (const auto &b : store.bins) {
    if (bin != "all" && b.label != bin) continue;
    if (const auto *m = store.find(word, b.ordinal)) out.push_back(*m);
  }
  if (bin != "all") store.bin(bin);
  if (out.empty()) throw DataError("no occurrences of '" + word + "' in bin(s) " + bin);
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Lexical semantic change detection over contextualized token embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (results do not depend on this)")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--format", common.format, "Output format: tsv | structured");

  // wordlist
  auto *wordlist = app.add_subcommand("wordlist", "Build the target word list from corpus statistics");
  std::vector<std::string> wl_corpus;
  std::uint64_t min_per_bin = 100, min_total = 1000;
  std::string exclude = "NUM,DET,ADP,AUX,CCONJ,SCONJ,PART,PRON,PUNCT,SYM";
  std::string wl_out;
  wordlist->add_option("--corpus", wl_corpus, "Vertical corpus files, one per bin, chronological")->required();
  wordlist->add_option("--min-per-bin", min_per_bin, "Frequency must exceed this in every bin");
  wordlist->add_option("--min-total", min_total, "Minimum total frequency");
  wordlist->add_option("--exclude-tags", exclude, "Comma-separated majority tags to exclude");
  wordlist->add_option("--out", wl_out, "Output file (default stdout)");

  // index
  auto *index = app.add_subcommand("index", "Index target-word occurrences (JSON lines)");
  std::vector<std::string> ix_corpus;
  std::string ix_wordlist, ix_words, ix_out;
  index->add_option("--corpus", ix_corpus, "Vertical corpus files, one per bin, chronological")->required();
  auto *ix_wl = index->add_option("--wordlist", ix_wordlist, "File with one lemma per line");
  index->add_option("--words", ix_words, "Comma-separated lemmas")->excludes(ix_wl);
  index->add_option("--out", ix_out, "Output file (default stdout)");

  // score
  auto *score_cmd = app.add_subcommand("score", "Change score of one word between two bins");
  std::string store_path, word, from, to, method_name = "prt_apd", kernel = "factorized";
  std::uint64_t max_pairs = 0, seed = 0;
  score_cmd->add_option("--store", store_path, "Usage dump")->envname("LSCD_STORE")->required();
  score_cmd->add_option("--word", word)->required();
  score_cmd->add_option("--from", from, "Earlier bin label")->required();
  score_cmd->add_option("--to", to, "Later bin label")->required();
  score_cmd->add_option("--method", method_name, "prt | apd | prt_apd");
  score_cmd->add_option("--max-pairs", max_pairs, "APD pair budget (0 = unlimited)");
  score_cmd->add_option("--seed", seed);
  score_cmd->add_option("--kernel", kernel, "APD kernel: factorized | pairwise");

  // matrix
  auto *matrix = app.add_subcommand("matrix", "Score matrix over consecutive bins, z-scores and top changes");
  std::size_t top_k = 10;
  std::string words_file;
  matrix->add_option("--store", store_path, "Usage dump")->envname("LSCD_STORE")->required();
  matrix->add_option("--method", method_name, "prt | apd | prt_apd");
  matrix->add_option("--max-pairs", max_pairs, "APD pair budget (0 = unlimited)");
  matrix->add_option("--seed", seed);
  matrix->add_option("--kernel", kernel, "APD kernel: factorized | pairwise");
  matrix->add_option("--top", top_k, "Number of top change points to report");
  matrix->add_option("--words", words_file, "Restrict rows to the lemmas in this file");

  // eval
  auto *eval = app.add_subcommand("eval", "Spearman correlation of predictions with gold rankings");
  std::string pred_file, against_file, eval_label;
  std::vector<std::string> gold_files;
  eval->add_option("--gold", gold_files, "Gold file(s): lemma<TAB>score")->required();
  auto *pred_opt = eval->add_option("--pred", pred_file, "Predictions: lemma<TAB>score");
  eval->add_option("--against", against_file, "Second predictions file for method inter-correlation");
  eval->add_option("--label", eval_label, "Method label for the report");
  eval->add_option("--store", store_path, "Score gold words from this dump instead of --pred")
      ->envname("LSCD_STORE")
      ->excludes(pred_opt);
  eval->add_option("--from", from, "Earlier bin (with --store)");
  eval->add_option("--to", to, "Later bin (with --store)");
  eval->add_option("--method", method_name, "prt | apd | prt_apd (with --store)");

  // align
  auto *align = app.add_subcommand("align", "Orthogonal Procrustes alignment of static models");
  std::vector<std::string> models;
  std::string anchor;
  bool center = false, emit_scores = false;
  align->add_option("--model", models, "Static model files (text format), chronological")->required();
  align->add_option("--anchor", anchor, "Anchor bin label (default: last model)");
  align->add_flag("--center", center, "Mean-center before aligning");
  align->add_flag("--scores", emit_scores, "Also print the aligned cosine-distance score matrix");
  align->add_option("--words", words_file, "Lemmas to score (default: anchor vocabulary)");

  // fd
  auto *fd = app.add_subcommand("fd", "Frequency-difference baseline matrix");
  std::vector<std::string> fd_corpus;
  fd->add_option("--corpus", fd_corpus, "Vertical corpus files, one per bin, chronological")->required();
  fd->add_option("--words", words_file, "File with one lemma per line")->required();

  // project / export / sample
  std::string bin = "all", out_path;
  auto *project = app.add_subcommand("project", "2-D PCA projection of a word's token embeddings");
  project->add_option("--store", store_path, "Usage dump")->envname("LSCD_STORE")->required();
  project->add_option("--word", word)->required();
  project->add_option("--bin", bin, "Bin label or 'all'");

  auto *export_cmd = app.add_subcommand("export", "Write projection plot data (tsv, structured or svg)");
  std::string plot_format = "tsv";
  export_cmd->add_option("--store", store_path, "Usage dump")->envname("LSCD_STORE")->required();
  export_cmd->add_option("--word", word)->required();
  export_cmd->add_option("--bin", bin, "Bin label or 'all'");
  export_cmd->add_option("--out", out_path, "Output file")->required();
  export_cmd->add_option("--plot-format", plot_format, "tsv | structured | svg");

  auto *sample = app.add_subcommand("sample", "Occurrences nearest to a point of the projection");
  double cx = 0.0, cy = 0.0;
  std::size_t k = 20;
  sample->add_option("--store", store_path, "Usage dump")->envname("LSCD_STORE")->required();
  sample->add_option("--word", word)->required();
  sample->add_option("--bin", bin, "Bin label or 'all'");
  sample->add_option("--x", cx, "Center x")->required();
  sample->add_option("--y", cy, "Center y")->required();
  sample->add_option("-k,--k", k, "Number of occurrences");
  sample->add_option("--seed", seed);

  // diagnose
  auto *diagnose_cmd = app.add_subcommand("diagnose", "Error-class diagnostics for top change points");
  DiagnoseOptions dopts;
  diagnose_cmd->add_option("--store", store_path, "Usage dump")->envname("LSCD_STORE")->required();
  diagnose_cmd->add_option("--method", method_name, "prt | apd | prt_apd");
  diagnose_cmd->add_option("--top", top_k, "Number of top change points");
  diagnose_cmd->add_option("--word", word, "Diagnose this word's peak instead of the top points");
  diagnose_cmd->add_option("--trials", dopts.trials, "Within-bin split trials");
  diagnose_cmd->add_option("--seed", seed);
  diagnose_cmd->add_option("--fluid-ratio", dopts.thresholds.fluid_ratio);
  diagnose_cmd->add_option("--caps-gap", dopts.thresholds.capitalization_gap);
  diagnose_cmd->add_option("--tag-divergence", dopts.thresholds.tag_divergence);
  diagnose_cmd->add_option("--high-z", dopts.thresholds.high_z);

  // synth
  auto *synth_cmd = app.add_subcommand("synth", "Generate synthetic usage dumps from presets or spec files");
  std::vector<std::string> presets, spec_files;
  unsigned dim = synth::kDefaultDim;
  std::uint32_t count = synth::kDefaultCount;
  bool emit_spec = false;
  synth_cmd->add_option("--preset", presets, "Preset name, optionally name:count; repeatable");
  synth_cmd->add_option("--spec", spec_files, "JSON word spec file; repeatable");
  synth_cmd->add_option("--seed", seed);
  synth_cmd->add_option("--dim", dim, "Embedding dimension");
  synth_cmd->add_option("--n", count, "Occurrences per bin (presets)");
  synth_cmd->add_option("--out", out_path, "Output dump");
  synth_cmd->add_flag("--emit-spec", emit_spec, "Print the preset specs as JSON instead of writing a dump");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const bool json = structured(common);

    if (*wordlist) {
      const auto files = corpus_from_paths({wl_corpus.begin(), wl_corpus.end()});
      const auto stats = corpus_stats(files);
      const auto tags = split_csv(exclude);
      const auto words = build_wordlist(stats, min_per_bin, min_total, {tags.begin(), tags.end()});
      with_output(wl_out, [&](std::ostream &os) {
        if (json) {
          nlohmann::json j = nlohmann::json::array();
          for (const auto &w : words)
            j.push_back({{"lemma", w}, {"counts", stats.counts.at(w)}, {"tag", stats.majority_tag(w).value_or("")}});
          os << j.dump(1) << '\n';
        } else {
          for (const auto &w : words) os << w << '\n';
        }
      });
      std::cerr << words.size() << " words selected\n";
      return 0;
    }

    if (*index) {
      const auto files = corpus_from_paths({ix_corpus.begin(), ix_corpus.end()});
      const auto words = ix_wordlist.empty() ? split_csv(ix_words) : read_lines(ix_wordlist);
      if (words.empty()) throw DataError("no target words given (use --wordlist or --words)");
      const auto idx = index_occurrences(files, words);
      std::vector<TimeBin> bins;
      for (const auto &f : files) bins.push_back(f.bin);
      with_output(ix_out, [&](std::ostream &os) { write_index(os, flatten(idx, bins)); });
      return 0;
    }

    if (*score_cmd) {
      const auto store = read_dump(store_path);
      const auto method = parse_method(method_name);
      const auto *a = store.find(word, store.bin(from).ordinal);
      const auto *b = store.find(word, store.bin(to).ordinal);
      if (!a || !b) throw DataError("'" + word + "' has no occurrences in " + (a ? to : from));
      const auto s = lscd::score(method, *a, *b, score_options(max_pairs, seed, kernel, common.threads));
      std::string flags;
      if (s.flags.clamped_inversion) flags += "clamped_inversion";
      if (s.flags.subsampled_pairs) flags += std::string(flags.empty() ? "" : ",") + "subsampled_pairs";
      if (json) {
        std::cout << nlohmann::json{{"word", word}, {"from", from}, {"to", to}, {"method", to_string(method)},
                                    {"value", s.value}, {"flags", split_csv(flags)}}
                         .dump()
                  << '\n';
      } else {
        std::cout << "word\tfrom\tto\tmethod\tvalue\tflags\n"
                  << word << '\t' << from << '\t' << to << '\t' << to_string(method) << '\t' << fixed(s.value, 6)
                  << '\t' << (flags.empty() ? "-" : flags) << '\n';
      }
      return 0;
    }

    if (*matrix) {
      const auto store = read_dump(store_path);
      const auto method = parse_method(method_name);
      const auto words = words_file.empty() ? store.words() : read_lines(words_file);
      const auto m =
          score_matrix(store, words, store.bins, method, score_options(max_pairs, seed, kernel, common.threads));
      std::optional<ScoreMatrix> z;
      try {
        z = zscores(m);
      } catch (const DataError &e) {
        std::cerr << "z-scores unavailable: " << e.what() << '\n';
      }
      const auto top = top_changes(m, top_k);
      if (json) {
        nlohmann::json j;
        j["scores"] = matrix_json(m);
        j["zscores"] = z ? matrix_json(*z) : nlohmann::json(nullptr);
        j["top"] = nlohmann::json::array();
        for (const auto &p : top) j["top"].push_back(point_json(p));
        std::cout << j.dump(1) << '\n';
      } else {
        std::cout << "# scores " << m.method << '\n';
        write_matrix_tsv(std::cout, m);
        if (z) {
          std::cout << "\n# zscores\n";
          write_matrix_tsv(std::cout, *z, true);
        }
        std::cout << "\n# top " << top_k << '\n';
        write_points_tsv(std::cout, top);
      }
      return 0;
    }

    if (*eval) {
      std::vector<GoldSet> golds;
      for (const auto &g : gold_files) golds.push_back(read_gold(fs::path(g)));
      std::vector<EvalResult> results;
      if (!pred_file.empty()) {
        std::ifstream is(pred_file);
        if (!is) throw DataError("cannot open " + pred_file);
        const auto pred = read_predictions(is);
        const auto label = eval_label.empty() ? fs::path(pred_file).stem().string() : eval_label;
        for (const auto &g : golds) results.push_back(evaluate(pred, g, label));
        write_eval_tsv(std::cout, results);
        if (!against_file.empty()) {
          std::ifstream ia(against_file);
          if (!ia) throw DataError("cannot open " + against_file);
          const auto other = read_predictions(ia);
          const auto ic = method_intercorrelation(pred, other);
          std::cout << "\nstatistic\tvalue\tp_value\tn\n"
                    << "spearman\t" << fixed(ic.spearman.coefficient, 3) << '\t' << fixed(ic.spearman.p_value, 6)
                    << '\t' << ic.n << '\n'
                    << "pearson\t" << fixed(ic.pearson.coefficient, 3) << '\t' << fixed(ic.pearson.p_value, 6) << '\t'
                    << ic.n << '\n';
        }
      } else {
        if (store_path.empty() || from.empty() || to.empty())
          throw CLI::ValidationError("eval needs --pred, or --store with --from and --to");
        const auto store = read_dump(store_path);
        const auto method = parse_method(method_name);
        const auto fa = store.bin(from).ordinal, fb = store.bin(to).ordinal;
        for (const auto &g : golds) {
          ScoreTable pred;
          for (const auto &[w, _] : g.entries) {
            const auto *a = store.find(w, fa);
            const auto *b = store.find(w, fb);
            if (a && b) pred[w] = lscd::score(method, *a, *b).value;
          }
          results.push_back(evaluate(pred, g, eval_label.empty() ? std::string(to_string(method)) : eval_label));
        }
        write_eval_tsv(std::cout, results);
      }
      return 0;
    }

    if (*align) {
      if (models.size() < 2) throw CLI::ValidationError("align needs at least two --model files");
      std::vector<StaticModel> loaded;
      for (std::size_t i = 0; i < models.size(); ++i)
        loaded.push_back(read_static_model(fs::path(models[i]),
                                           {fs::path(models[i]).stem().string(), static_cast<std::uint16_t>(i)}));
      std::size_t anchor_idx = loaded.size() - 1;
      if (!anchor.empty()) {
        anchor_idx = loaded.size();
        for (std::size_t i = 0; i < loaded.size(); ++i)
          if (loaded[i].bin.label == anchor) anchor_idx = i;
        if (anchor_idx == loaded.size()) throw DataError("anchor '" + anchor + "' is not one of the models");
      }
      std::cout << "source\ttarget\tshared\tresidual\tdeterminant\n";
      for (std::size_t i = 0; i < loaded.size(); ++i) {
        if (i == anchor_idx) continue;
        const auto a = procrustes_align(loaded[i], loaded[anchor_idx], center);
        std::cout << a.source_bin.label << '\t' << a.target_bin.label << '\t' << a.shared << '\t'
                  << fixed(a.residual, 6) << '\t' << fixed(a.rotation.determinant(), 0) << '\n';
      }
      if (emit_scores) {
        const auto words = words_file.empty() ? loaded[anchor_idx].vocab : read_lines(words_file);
        std::cout << '\n';
        write_matrix_tsv(std::cout, sgns_op_scores(loaded, anchor_idx, words, center));
      }
      return 0;
    }

    if (*fd) {
      const auto files = corpus_from_paths({fd_corpus.begin(), fd_corpus.end()});
      const auto stats = corpus_stats(files);
      const auto m = fd_scores(stats, read_lines(words_file), stats.bins);
      if (json)
        std::cout << matrix_json(m).dump(1) << '\n';
      else
        write_matrix_tsv(std::cout, m);
      return 0;
    }

    if (*project || *export_cmd) {
      const auto store = read_dump(store_path);
      const auto proj = pca2d(word_matrices(store, word, bin));
      std::cerr << "explained variance: " << fixed(proj.explained_variance[0], 6) << ' '
                << fixed(proj.explained_variance[1], 6) << '\n';
      if (*project) {
        export_plot_data(proj, std::cout, json ? PlotFormat::json : PlotFormat::tsv);
      } else {
        const auto format = parse_plot_format(plot_format);
        with_output(out_path, [&](std::ostream &os) { export_plot_data(proj, os, format); });
      }
      return 0;
    }

    if (*sample) {
      const auto store = read_dump(store_path);
      const auto proj = pca2d(word_matrices(store, word, bin));
      const auto picked = sample_near(proj, {cx, cy}, k, seed);
      if (json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto &p : picked)
          j.push_back({{"index", p.index},
                       {"distance", p.distance},
                       {"bin", proj.labels[p.index].label},
                       {"doc_id", p.occurrence.doc_id},
                       {"sentence_index", p.occurrence.sentence_index},
                       {"token_index", p.occurrence.token_index},
                       {"surface", p.occurrence.surface},
                       {"context", p.occurrence.context}});
        std::cout << j.dump(1) << '\n';
      } else {
        std::cout << "index\tdistance\tbin\tdoc_id\tsentence_index\ttoken_index\tsurface\tcontext\n";
        for (const auto &p : picked)
          std::cout << p.index << '\t' << fixed(p.distance, 6) << '\t' << proj.labels[p.index].label << '\t'
                    << p.occurrence.doc_id << '\t' << p.occurrence.sentence_index << '\t'
                    << p.occurrence.token_index << '\t' << p.occurrence.surface << '\t' << p.occurrence.context
                    << '\n';
      }
      return 0;
    }

    if (*diagnose_cmd) {
      const auto store = read_dump(store_path);
      dopts.method = parse_method(method_name);
      dopts.seed = seed;
      dopts.score.threads = 1;
      const auto m = score_matrix(store, store.words(), store.bins, dopts.method, {{}, ApdKernel::factorized, common.threads});
      const auto z = zscores(m);
      std::vector<ChangePoint> points;
      if (!word.empty()) {
        auto peak = word_peak(m, z, word);
        if (!peak) throw DataError("'" + word + "' has no scored bin pair");
        points.push_back(*peak);
      } else {
        points = top_changes(m, top_k);
      }
      std::vector<DiagnosticReport> reports(points.size());
      parallel_for(points.size(), common.threads,
                   [&](std::size_t i) { reports[i] = diagnose(store, m, z, points[i], dopts); });
      if (json) {
        nlohmann::json j = nlohmann::json::array();
        for (std::size_t i = 0; i < points.size(); ++i) j.push_back(report_json(points[i], reports[i]));
        std::cout << j.dump(1) << '\n';
      } else {
        write_points_tsv(std::cout, points, &reports);
      }
      return 0;
    }

    if (*synth_cmd) {
      if (presets.empty() && spec_files.empty()) throw CLI::ValidationError("synth needs --preset or --spec");
      if (emit_spec) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto &p : presets) j.push_back(synth::to_json(synth::preset(p.substr(0, p.find(':')), dim, seed, count)));
        std::cout << j.dump(1) << '\n';
        return 0;
      }
      if (out_path.empty()) throw CLI::ValidationError("synth needs --out");
      std::vector<std::pair<std::string, std::size_t>> composition;
      for (const auto &p : presets) {
        const auto colon = p.find(':');
        std::size_t n = 1;
        if (colon != std::string::npos) {
          try {
            n = std::stoul(p.substr(colon + 1));
          } catch (const std::exception &) {
            throw CLI::ValidationError("bad preset count in '" + p + "'");
          }
        }
        composition.emplace_back(p.substr(0, colon), n);
      }
      auto lex = synth::lexicon(composition, dim, seed, count);
      for (std::size_t i = 0; i < spec_files.size(); ++i) {
        std::ifstream is(spec_files[i]);
        if (!is) throw DataError("cannot open " + spec_files[i]);
        nlohmann::json j;
        try {
          is >> j;
        } catch (const nlohmann::json::exception &e) {
          throw DataError(spec_files[i] + ": " + e.what());
        }
        const auto spec = synth::spec_from_json(j);
        const auto sdim = static_cast<unsigned>(spec.senses.front().direction.size());
        if (lex.store.matrices.empty()) {
          lex.store.dim = sdim;
          lex.store.bins = make_bins(spec.bins);
        }
        if (sdim != lex.store.dim) throw DataError(spec_files[i] + ": dimension differs from other words");
        std::vector<std::string> labels;
        for (const auto &b : lex.store.bins) labels.push_back(b.label);
        if (spec.bins != labels) throw DataError(spec_files[i] + ": bins differ from other words");
        for (auto &m : synth::generate(spec, sdim, synth::splitmix64(seed + 1000 + i)).bins)
          lex.store.matrices.push_back(std::move(m));
      }
      write_dump(lex.store, out_path);
      std::cerr << "wrote " << lex.store.words().size() << " words x " << lex.store.bins.size() << " bins to "
                << out_path << '\n';
      return 0;
    }
  } catch (const CLI::ValidationError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
