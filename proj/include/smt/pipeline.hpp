#pragma once

// Pipeline orchestration: INI-style configs with section.key overrides, a
// fixed artifact graph under one work directory, a JSON manifest per stage,
// and a matrix runner that evaluates several configurations side by side.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "smt/align.hpp"
#include "smt/corpus.hpp"
#include "smt/decoder.hpp"
#include "smt/lexicon.hpp"
#include "smt/lm.hpp"
#include "smt/mert.hpp"
#include "smt/metrics.hpp"
#include "smt/phrase.hpp"
#include "smt/util.hpp"

namespace smt {

// ---------------------------------------------------------------------------
// Config: INI sections of key = value pairs. '#' and ';' start comments,
// whitespace is trimmed everywhere, later assignments win. Overrides use the
// flat "section.key=value" form so a single run can depart from its file.
// ---------------------------------------------------------------------------

class Config {
 public:
  using Section = std::map<std::string, std::string>;

  static Config parse(const std::string& text,
                      const std::string& origin = "<config>") {
    Config cfg;
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw : split_char(text, '\n')) {
      ++line_no;
      std::string line = trim(raw);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      const auto where = [&] {
        return origin + ": line " + std::to_string(line_no);
      };
      if (line.front() == '[') {
        if (line.back() != ']')
          fail(where() + ": unterminated section header '" + line + "'");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(where() + ": empty section name");
        cfg.data_[section];  // section may legitimately stay empty
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        fail(where() + ": expected 'key = value', got '" + line + "'");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) fail(where() + ": empty key");
      if (section.empty())
        fail(where() + ": key '" + key + "' appears before any [section]");
      cfg.data_[section][key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    return parse(read_file(path), path);
  }

  void set(const std::string& section, const std::string& key,
           const std::string& value) {
    data_[section][key] = value;
  }

  // "section.key=value"
  void apply_override(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      fail("override '" + spec + "': expected section.key=value");
    const std::string lhs = trim(spec.substr(0, eq));
    const auto dot = lhs.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= lhs.size())
      fail("override '" + spec + "': expected section.key=value");
    set(lhs.substr(0, dot), lhs.substr(dot + 1), trim(spec.substr(eq + 1)));
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const {
    const auto s = data_.find(section);
    if (s == data_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  std::string get_required(const std::string& section,
                           const std::string& key) const {
    if (!has(section, key))
      fail("config: [" + section + "] " + key + " is required");
    return get(section, key, "");
  }

  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail("config: [" + section + "] " + key + ": expected a boolean, got '" +
         v + "'");
  }

  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    try {
      std::size_t used = 0;
      const long long out = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      fail("config: [" + section + "] " + key + ": expected an integer, got '" +
           v + "'");
    }
  }

  std::size_t get_size(const std::string& section, const std::string& key,
                       std::size_t fallback) const {
    const long long v =
        get_int(section, key, static_cast<long long>(fallback));
    if (v < 0)
      fail("config: [" + section + "] " + key + " must be >= 0");
    return static_cast<std::size_t>(v);
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      fail("config: [" + section + "] " + key + ": expected a number, got '" +
           v + "'");
    }
  }

  // Space-separated list of doubles; empty or absent -> empty vector.
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const {
    std::vector<double> out;
    for (const auto& part : split_whitespace(get(section, key, ""))) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } catch (const std::exception&) {
        fail("config: [" + section + "] " + key + ": expected numbers, got '" +
             part + "'");
      }
    }
    return out;
  }

  const std::map<std::string, Section>& sections() const { return data_; }

 private:
  std::map<std::string, Section> data_;
};

// ---------------------------------------------------------------------------
// Pipeline: each stage reads its upstream artifacts from the work directory,
// writes its own, and drops a `<stage>.manifest.json` recording the config,
// input hashes and output hashes, so a finished directory is self-describing
// and reruns are byte-comparable.
// ---------------------------------------------------------------------------

namespace artifact_names {
inline constexpr const char* kTokSource = "corpus.tok.src";
inline constexpr const char* kTokTarget = "corpus.tok.tgt";
inline constexpr const char* kFlags = "corpus.flags.tsv";
inline constexpr const char* kCleanSource = "corpus.clean.src";
inline constexpr const char* kCleanTarget = "corpus.clean.tgt";
inline constexpr const char* kAugSource = "augmented.src";
inline constexpr const char* kAugTarget = "augmented.tgt";
inline constexpr const char* kTtableFwd = "ttable.fwd.tsv";
inline constexpr const char* kTtableBwd = "ttable.bwd.tsv";
inline constexpr const char* kAlignments = "alignments.sym.txt";
inline constexpr const char* kPhraseTable = "phrase_table.txt";
inline constexpr const char* kLm = "lm.txt";
inline constexpr const char* kWeights = "weights.tsv";
inline constexpr const char* kTuningLog = "tuning.log";
inline constexpr const char* kOutput = "output.tok.txt";
inline constexpr const char* kNbest = "output.nbest.txt";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kReportTsv = "report.tsv";
}  // namespace artifact_names

enum class WeightsPolicy { automatic, defaults, tuned };

class Pipeline {
 public:
  explicit Pipeline(Config config) : cfg_(std::move(config)) {
    work_dir_ = cfg_.get_required("data", "work_dir");
    std::filesystem::create_directories(work_dir_);
  }

  const Config& config() const { return cfg_; }
  const std::string& work_dir() const { return work_dir_; }

  std::string artifact(const std::string& name) const {
    return work_dir_ + "/" + name;
  }

  // -------------------------------------------------------------- clean ---
  // Tokenizes the raw bitext, applies the mechanical cleaning rules (unless
  // [clean] enabled = false, which passes everything through), and writes
  // the tokenized corpus, the flag report and the surviving pairs.
  void run_clean() {
    namespace an = artifact_names;
    const std::string src_path = cfg_.get_required("data", "source");
    const std::string tgt_path = cfg_.get_required("data", "target");
    const ParallelCorpus raw = load_corpus(src_path, tgt_path);
    raw.save(artifact(an::kTokSource), artifact(an::kTokTarget));

    ParallelCorpus flagged = raw;
    if (cfg_.get_bool("clean", "enabled", true))
      flagged = clean(raw, cleaning_rules());
    const ParallelCorpus kept = flagged.clean_subset();
    if (kept.empty()) fail("clean: no sentence pairs survived cleaning");
    write_file(artifact(an::kFlags), flag_report(flagged));
    kept.save(artifact(an::kCleanSource), artifact(an::kCleanTarget));

    const CorpusStats st = corpus_stats(flagged);
    nlohmann::json stats;
    stats["total_pairs"] = st.total_pairs;
    stats["clean_pairs"] = st.clean_pairs;
    stats["flagged_pairs"] = st.flagged_pairs;
    stats["source_tokens"] = st.source_tokens;
    stats["target_tokens"] = st.target_tokens;
    stats["source_vocab"] = st.source_vocab_size;
    stats["target_vocab"] = st.target_vocab_size;
    write_manifest("clean", {{src_path, src_path}, {tgt_path, tgt_path}},
                   {an::kTokSource, an::kTokTarget, an::kFlags,
                    an::kCleanSource, an::kCleanTarget},
                   std::move(stats));
  }

  // ------------------------------------------------------------ augment ---
  // Optional morphological suffix splitting followed by lexicon injection
  // (synset expansions, function words, verb phrases). With nothing
  // configured the cleaned corpus passes through unchanged, so downstream
  // stages always read the same artifact names.
  void run_augment() {
    namespace an = artifact_names;
    require(an::kCleanSource, "clean");
    require(an::kCleanTarget, "clean");
    ParallelCorpus corpus =
        load_artifact_corpus(an::kCleanSource, an::kCleanTarget);
    const std::size_t pairs_before = corpus.size();

    std::vector<std::pair<std::string, std::string>> inputs = {
        {an::kCleanSource, artifact(an::kCleanSource)},
        {an::kCleanTarget, artifact(an::kCleanTarget)}};

    if (cfg_.get_bool("augment", "suffix_split", false)) {
      const std::string sfx_path = cfg_.get_required("augment", "suffix_file");
      corpus = split_suffixes(corpus, suffix_inventory(), augment_side());
      inputs.push_back({sfx_path, sfx_path});
    }

    std::vector<LexiconEntry> entries;
    std::size_t n_synset = 0, n_function = 0, n_verb = 0;
    if (cfg_.has("augment", "synset_file")) {
      const std::string path = cfg_.get_required("augment", "synset_file");
      const auto expanded = expand_synsets(load_synsets(path));
      n_synset = expanded.size();
      entries.insert(entries.end(), expanded.begin(), expanded.end());
      inputs.push_back({path, path});
    }
    if (cfg_.has("augment", "function_words")) {
      const std::string path = cfg_.get_required("augment", "function_words");
      const auto loaded = load_lexicon(path, LexCategory::function_word);
      n_function = loaded.size();
      entries.insert(entries.end(), loaded.begin(), loaded.end());
      inputs.push_back({path, path});
    }
    if (cfg_.has("augment", "verb_phrases")) {
      const std::string path = cfg_.get_required("augment", "verb_phrases");
      const auto loaded = load_lexicon(path, LexCategory::verb_phrase);
      n_verb = loaded.size();
      entries.insert(entries.end(), loaded.begin(), loaded.end());
      inputs.push_back({path, path});
    }
    const std::size_t repeat = cfg_.get_size("augment", "inject_repeat", 1);
    if (!entries.empty()) corpus = inject(corpus, entries, repeat);

    corpus.save(artifact(an::kAugSource), artifact(an::kAugTarget));

    nlohmann::json stats;
    stats["pairs_before"] = pairs_before;
    stats["pairs_after"] = corpus.size();
    stats["suffix_split"] = cfg_.get_bool("augment", "suffix_split", false);
    stats["synset_entries"] = n_synset;
    stats["function_word_entries"] = n_function;
    stats["verb_phrase_entries"] = n_verb;
    stats["inject_repeat"] = repeat;
    write_manifest("augment", inputs, {an::kAugSource, an::kAugTarget},
                   std::move(stats));
  }

  // -------------------------------------------------------------- align ---
  // Trains word-translation tables in both directions, Viterbi-aligns the
  // corpus each way, and symmetrizes.
  void run_align() {
    namespace an = artifact_names;
    require(an::kAugSource, "augment");
    require(an::kAugTarget, "augment");
    const ParallelCorpus corpus =
        load_artifact_corpus(an::kAugSource, an::kAugTarget);

    Model1Options opt;
    opt.iterations = cfg_.get_size("align", "iterations", opt.iterations);
    opt.use_null = cfg_.get_bool("align", "use_null", opt.use_null);
    opt.min_gain_per_pair =
        cfg_.get_double("align", "min_gain", opt.min_gain_per_pair);

    const Model1Result fwd = train_model1(corpus, opt);
    const ParallelCorpus swapped = swap_sides(corpus);
    const Model1Result bwd = train_model1(swapped, opt);
    save_ttable(fwd.table, artifact(an::kTtableFwd));
    save_ttable(bwd.table, artifact(an::kTtableBwd));

    const auto fwd_links = align_corpus(fwd.table, corpus, opt.use_null);
    auto bwd_links = align_corpus(bwd.table, swapped, opt.use_null);
    for (auto& a : bwd_links) a = transpose(a);
    const SymmetrizationMode mode =
        parse_symmetrization(cfg_.get("align", "symmetrization", "grow_diag"));
    const auto sym = symmetrize_corpus(fwd_links, bwd_links, mode);
    save_alignments(sym, artifact(an::kAlignments));

    nlohmann::json stats;
    stats["pairs"] = corpus.size();
    stats["forward_ll"] = fwd.ll_history;
    stats["backward_ll"] = bwd.ll_history;
    stats["symmetrization"] = to_string(mode);
    write_manifest("align",
                   {{an::kAugSource, artifact(an::kAugSource)},
                    {an::kAugTarget, artifact(an::kAugTarget)}},
                   {an::kTtableFwd, an::kTtableBwd, an::kAlignments},
                   std::move(stats));
  }

  // ------------------------------------------------------------ phrases ---
  void run_phrases() {
    namespace an = artifact_names;
    require(an::kAugSource, "augment");
    require(an::kAugTarget, "augment");
    require(an::kAlignments, "align");
    require(an::kTtableFwd, "align");
    require(an::kTtableBwd, "align");
    const ParallelCorpus corpus =
        load_artifact_corpus(an::kAugSource, an::kAugTarget);
    const auto link_sets = load_alignment_links(artifact(an::kAlignments));
    if (link_sets.size() != corpus.size())
      fail("phrases: " + std::string(an::kAlignments) + " has " +
           std::to_string(link_sets.size()) + " lines but the corpus has " +
           std::to_string(corpus.size()) + " pairs");
    std::vector<SentenceAlignment> alignments;
    alignments.reserve(corpus.size());
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      SentenceAlignment a;
      a.source_len = corpus[k].source.size();
      a.target_len = corpus[k].target.size();
      a.links = link_sets[k];
      a.validate();
      alignments.push_back(std::move(a));
    }

    PhraseExtractionOptions opt;
    opt.max_phrase_len =
        cfg_.get_size("phrases", "max_phrase_len", opt.max_phrase_len);
    const auto pairs = extract_corpus_phrases(corpus, alignments, opt);
    const PhraseTable table =
        build_phrase_table(pairs, load_ttable(artifact(an::kTtableFwd)),
                           load_ttable(artifact(an::kTtableBwd)));
    save_phrase_table(table, artifact(an::kPhraseTable));

    nlohmann::json stats;
    stats["extracted_pairs"] = pairs.size();
    stats["distinct_sources"] = table.source_count();
    stats["options"] = table.option_count();
    write_manifest("phrases",
                   {{an::kAugSource, artifact(an::kAugSource)},
                    {an::kAugTarget, artifact(an::kAugTarget)},
                    {an::kAlignments, artifact(an::kAlignments)},
                    {an::kTtableFwd, artifact(an::kTtableFwd)},
                    {an::kTtableBwd, artifact(an::kTtableBwd)}},
                   {an::kPhraseTable}, std::move(stats));
  }

  // ----------------------------------------------------------------- lm ---
  void run_lm() {
    namespace an = artifact_names;
    require(an::kAugSource, "augment");
    require(an::kAugTarget, "augment");
    const ParallelCorpus corpus =
        load_artifact_corpus(an::kAugSource, an::kAugTarget);
    const NgramLm lm = train_lm(corpus.sentences(Side::target), lm_options());
    save_lm(lm, artifact(an::kLm));

    nlohmann::json stats;
    stats["order"] = lm.order();
    stats["vocab"] = lm.vocab().size();
    std::vector<std::size_t> grams;
    for (const auto& g : lm.gram_counts()) grams.push_back(g.size());
    stats["distinct_grams"] = grams;
    write_manifest("lm", {{an::kAugTarget, artifact(an::kAugTarget)}},
                   {an::kLm}, std::move(stats));
  }

  // --------------------------------------------------------------- tune ---
  // Line-search tuning of the decoder weights against the dev bitext.
  void run_tune() {
    namespace an = artifact_names;
    require(an::kPhraseTable, "phrases");
    require(an::kLm, "lm");
    ParallelCorpus dev = load_corpus(cfg_.get_required("data", "dev_source"),
                                     cfg_.get_required("data", "dev_target"));
    dev = apply_eval_preprocess(std::move(dev));

    const PhraseTable table = load_phrase_table(artifact(an::kPhraseTable));
    const NgramLm lm = load_lm(artifact(an::kLm));
    const DecoderConfig dconf = decoder_config();

    TuneOptions topt;
    topt.outer_iters = cfg_.get_size("tune", "outer_iters", topt.outer_iters);
    topt.nbest_size = cfg_.get_size("tune", "nbest_size", topt.nbest_size);
    topt.random_directions =
        cfg_.get_size("tune", "random_directions", topt.random_directions);
    topt.seed = static_cast<std::uint64_t>(
        cfg_.get_int("tune", "seed", static_cast<long long>(topt.seed)));
    topt.min_gain = cfg_.get_double("tune", "min_gain", topt.min_gain);

    const NBestFn fn = [&](const std::vector<std::string>& source,
                           const WeightVector& w, std::size_t n) {
      return nbest(source, table, lm, w, dconf, n);
    };
    const TuneResult result = tune(dev.sentences(Side::source),
                                   dev.sentences(Side::target), fn,
                                   WeightVector{}, topt);
    save_weights(result.weights, artifact(an::kWeights));
    write_file(artifact(an::kTuningLog), format_tuning_log(result));

    nlohmann::json stats;
    stats["iterations"] = result.iterations;
    stats["failed_sentences"] = result.failed_sentences;
    stats["bleu_history"] = result.bleu_history;
    stats["weights"] = std::vector<double>(result.weights.values.begin(),
                                           result.weights.values.end());
    write_manifest("tune",
                   {{an::kPhraseTable, artifact(an::kPhraseTable)},
                    {an::kLm, artifact(an::kLm)}},
                   {an::kWeights, an::kTuningLog}, std::move(stats));
  }

  // ---------------------------------------------------------- translate ---
  // Decodes the test source. `automatic` uses tuned weights when a weights
  // artifact exists and the built-in defaults otherwise.
  void run_translate(WeightsPolicy policy = WeightsPolicy::automatic) {
    namespace an = artifact_names;
    require(an::kPhraseTable, "phrases");
    require(an::kLm, "lm");
    const std::string test_src = cfg_.get_required("data", "test_source");

    ParallelCorpus test = one_sided_corpus(test_src, Side::source);
    test = apply_eval_preprocess(std::move(test));

    bool tuned = false;
    WeightVector weights;
    if (policy == WeightsPolicy::tuned ||
        (policy == WeightsPolicy::automatic &&
         file_exists(artifact(an::kWeights)))) {
      require(an::kWeights, "tune");
      weights = load_weights(artifact(an::kWeights));
      tuned = true;
    }

    const PhraseTable table = load_phrase_table(artifact(an::kPhraseTable));
    const NgramLm lm = load_lm(artifact(an::kLm));
    const DecoderConfig dconf = decoder_config();
    const std::size_t n_best = cfg_.get_size("decoder", "nbest", 1);

    std::string out, nb;
    for (std::size_t k = 0; k < test.size(); ++k) {
      const auto derivs =
          nbest(test[k].source, table, lm, weights, dconf,
                std::max<std::size_t>(1, n_best));
      out += join(derivs.front().target);
      out += '\n';
      if (n_best > 1)
        for (const auto& d : derivs) {
          nb += format_nbest_line(k, d);
          nb += '\n';
        }
    }
    write_file(artifact(an::kOutput), out);
    std::vector<std::string> outputs = {an::kOutput};
    if (n_best > 1) {
      write_file(artifact(an::kNbest), nb);
      outputs.push_back(an::kNbest);
    }

    std::vector<std::pair<std::string, std::string>> inputs = {
        {test_src, test_src},
        {an::kPhraseTable, artifact(an::kPhraseTable)},
        {an::kLm, artifact(an::kLm)}};
    if (tuned) inputs.push_back({an::kWeights, artifact(an::kWeights)});
    nlohmann::json stats;
    stats["sentences"] = test.size();
    stats["weights"] = tuned ? "tuned" : "default";
    write_manifest("translate", inputs, outputs, std::move(stats));
  }

  // ----------------------------------------------------------- evaluate ---
  EvalReport run_evaluate() {
    namespace an = artifact_names;
    require(an::kOutput, "translate");
    const std::string ref_path = cfg_.get_required("data", "test_target");
    ParallelCorpus refs = one_sided_corpus(ref_path, Side::target);
    refs = apply_eval_preprocess(std::move(refs));

    std::vector<std::vector<std::string>> hyps;
    for (const auto& line : read_lines(artifact(an::kOutput)))
      hyps.push_back(split_whitespace(line));
    const EvalReport report =
        evaluate_corpus(hyps, refs.sentences(Side::target));

    const std::string name = cfg_.get("meta", "name", "system");
    write_file(artifact(an::kReportText),
               format_report_table({{name, report}}));
    write_file(artifact(an::kReportTsv), format_report_tsv(report));

    nlohmann::json stats;
    stats["bleu"] = report.bleu.score;
    stats["meteor"] = report.meteor;
    stats["ter"] = report.ter;
    stats["sentences"] = report.per_sentence.size();
    write_manifest("evaluate",
                   {{an::kOutput, artifact(an::kOutput)},
                    {ref_path, ref_path}},
                   {an::kReportText, an::kReportTsv}, std::move(stats));
    return report;
  }

  // Full ladder; tuning only when [tune] enabled = true.
  EvalReport run_all() {
    run_clean();
    run_augment();
    run_align();
    run_phrases();
    run_lm();
    if (cfg_.get_bool("tune", "enabled", false)) {
      run_tune();
      run_translate(WeightsPolicy::tuned);
    } else {
      run_translate(WeightsPolicy::defaults);
    }
    return run_evaluate();
  }

 private:
  void require(const std::string& name, const std::string& stage) const {
    if (!file_exists(artifact(name)))
      fail("missing artifact " + artifact(name) + "; run the '" + stage +
           "' stage first");
  }

  // Artifacts are already tokenized; reread them verbatim on whitespace so a
  // round trip can never reshape a token.
  ParallelCorpus load_artifact_corpus(const std::string& src_name,
                                      const std::string& tgt_name) const {
    const auto src = read_lines(artifact(src_name));
    const auto tgt = read_lines(artifact(tgt_name));
    if (src.size() != tgt.size())
      fail("artifact line count mismatch: " + artifact(src_name) + " has " +
           std::to_string(src.size()) + " lines, " + artifact(tgt_name) +
           " has " + std::to_string(tgt.size()));
    std::vector<SentencePair> pairs;
    pairs.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      SentencePair p;
      p.source = split_whitespace(src[i]);
      p.target = split_whitespace(tgt[i]);
      p.origin_file = artifact(src_name);
      p.origin_line = i + 1;
      pairs.push_back(std::move(p));
    }
    return ParallelCorpus(std::move(pairs));
  }

  CleaningRules cleaning_rules() const {
    CleaningRules r;
    r.max_tokens = cfg_.get_size("clean", "max_tokens", r.max_tokens);
    r.max_length_ratio =
        cfg_.get_double("clean", "max_length_ratio", r.max_length_ratio);
    r.drop_empty = cfg_.get_bool("clean", "drop_empty", r.drop_empty);
    r.drop_duplicates =
        cfg_.get_bool("clean", "drop_duplicates", r.drop_duplicates);
    r.source_scripts = parse_script_ranges("source_scripts");
    r.target_scripts = parse_script_ranges("target_scripts");
    return r;
  }

  // Space-separated inclusive code point ranges, e.g. "0900-097F 0020-007E".
  std::vector<std::pair<std::uint32_t, std::uint32_t>> parse_script_ranges(
      const std::string& key) const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (const auto& part : split_whitespace(cfg_.get("clean", key, ""))) {
      const auto bad = [&] {
        fail("config: [clean] " + key + ": expected hex ranges like " +
             "0900-097F, got '" + part + "'");
      };
      const auto dash = part.find('-');
      if (dash == std::string::npos || dash == 0 || dash + 1 >= part.size())
        bad();
      const auto hex = [&](std::string s) -> std::uint32_t {
        if (s.rfind("0x", 0) == 0 || s.rfind("U+", 0) == 0) s = s.substr(2);
        try {
          std::size_t used = 0;
          const unsigned long v = std::stoul(s, &used, 16);
          if (used != s.size() || v > 0x10ffff) throw std::invalid_argument(s);
          return static_cast<std::uint32_t>(v);
        } catch (const std::exception&) {
          bad();
        }
        return 0;  // unreachable
      };
      const std::uint32_t lo = hex(part.substr(0, dash));
      const std::uint32_t hi = hex(part.substr(dash + 1));
      if (lo > hi) bad();
      out.push_back({lo, hi});
    }
    return out;
  }

  SuffixInventory suffix_inventory() const {
    return load_suffixes(cfg_.get_required("augment", "suffix_file"),
                         cfg_.get_size("augment", "min_stem", 1));
  }

  Side augment_side() const {
    const std::string s = cfg_.get("augment", "suffix_side", "target");
    if (s == "source") return Side::source;
    if (s == "target") return Side::target;
    fail("config: [augment] suffix_side: expected source|target, got '" + s +
         "'");
  }

  // Dev/test text gets the same suffix treatment as the training corpus so
  // phrase table keys (source side) and references (target side) line up
  // with what the models saw.
  ParallelCorpus apply_eval_preprocess(ParallelCorpus corpus) const {
    if (!cfg_.get_bool("augment", "suffix_split", false)) return corpus;
    return split_suffixes(corpus, suffix_inventory(), augment_side());
  }

  // Loads a single text file as the given side of a corpus; the other side
  // stays empty.
  ParallelCorpus one_sided_corpus(const std::string& path, Side side) const {
    const auto lines = read_lines(path);
    std::vector<SentencePair> pairs;
    pairs.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      SentencePair p;
      (side == Side::source ? p.source : p.target) = tokenize(lines[i]);
      p.origin_file = path;
      p.origin_line = i + 1;
      pairs.push_back(std::move(p));
    }
    return ParallelCorpus(std::move(pairs));
  }

  LmOptions lm_options() const {
    LmOptions opt;
    opt.order = cfg_.get_size("lm", "order", opt.order);
    opt.smoothing = parse_smoothing(
        cfg_.get("lm", "smoothing", to_string(opt.smoothing)));
    opt.k = cfg_.get_double("lm", "k", opt.k);
    opt.interpolation = cfg_.get_doubles("lm", "interpolation");
    opt.unk_threshold =
        cfg_.get_size("lm", "unk_threshold", opt.unk_threshold);
    opt.validate();
    return opt;
  }

  DecoderConfig decoder_config() const {
    DecoderConfig d;
    d.beam_size = cfg_.get_size("decoder", "beam_size", d.beam_size);
    d.distortion_limit = static_cast<int>(cfg_.get_int(
        "decoder", "distortion_limit", d.distortion_limit));
    d.top_k = cfg_.get_size("decoder", "top_k", d.top_k);
    d.max_phrase_len = cfg_.get_size("phrases", "max_phrase_len",
                                     d.max_phrase_len);
    d.validate();
    return d;
  }

  nlohmann::json config_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [sec, kv] : cfg_.sections()) {
      nlohmann::json s = nlohmann::json::object();
      for (const auto& [k, v] : kv) s[k] = v;
      j[sec] = std::move(s);
    }
    return j;
  }

  void write_manifest(
      const std::string& stage,
      const std::vector<std::pair<std::string, std::string>>& inputs,
      const std::vector<std::string>& output_names,
      nlohmann::json stats) const {
    nlohmann::json m;
    m["stage"] = stage;
    m["config"] = config_json();
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [label, path] : inputs) in[label] = content_hash(path);
    m["inputs"] = std::move(in);
    nlohmann::json out = nlohmann::json::object();
    for (const auto& name : output_names)
      out[name] = content_hash(artifact(name));
    m["outputs"] = std::move(out);
    m["stats"] = std::move(stats);
    write_file(artifact(stage + ".manifest.json"), m.dump(2) + "\n");
  }

  Config cfg_;
  std::string work_dir_;
};

// ---------------------------------------------------------------------------
// Matrix runs: a config listing other configs. Each one runs end to end with
// default weights, and again with tuned weights when its [tune] section is
// enabled; results land in one comparison table. A failing configuration is
// reported and does not stop the others.
// ---------------------------------------------------------------------------

struct MatrixResult {
  std::vector<std::pair<std::string, EvalReport>> rows;
  std::vector<std::pair<std::string, std::string>> failures;  // name, error
  std::string table;
};

inline MatrixResult run_matrix(const Config& matrix_cfg) {
  const std::string work_dir = matrix_cfg.get_required("matrix", "work_dir");
  std::filesystem::create_directories(work_dir);
  const auto config_paths =
      split_whitespace(matrix_cfg.get_required("matrix", "configs"));
  if (config_paths.empty()) fail("matrix: [matrix] configs lists no files");

  MatrixResult result;
  for (const auto& path : config_paths) {
    Config cfg = Config::load(path);
    const std::string name =
        cfg.get("meta", "name", std::filesystem::path(path).stem().string());
    try {
      Pipeline p(cfg);
      p.run_clean();
      p.run_augment();
      p.run_align();
      p.run_phrases();
      p.run_lm();
      p.run_translate(WeightsPolicy::defaults);
      result.rows.push_back({name, p.run_evaluate()});
      if (cfg.get_bool("tune", "enabled", false)) {
        p.run_tune();
        p.run_translate(WeightsPolicy::tuned);
        result.rows.push_back({name + "+tuned", p.run_evaluate()});
      }
    } catch (const std::exception& e) {
      result.failures.push_back({name, e.what()});
    }
  }

  result.table = format_report_table(result.rows);
  for (const auto& [name, error] : result.failures)
    result.table += "FAILED " + name + ": " + error + "\n";
  write_file(work_dir + "/matrix_report.txt", result.table);

  std::string tsv = "configuration\tbleu\tmeteor\tter\n";
  for (const auto& [name, rep] : result.rows)
    tsv += name + "\t" + format_double(rep.bleu.score * 100) + "\t" +
           format_double(rep.meteor) + "\t" + format_double(rep.ter * 100) +
           "\n";
  write_file(work_dir + "/matrix_report.tsv", tsv);
  return result;
}

}  // namespace smt
