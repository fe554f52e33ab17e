// smt: command line front end for the phrase-based translation toolkit.
// Every pipeline stage is a subcommand over one config file; `matrix` runs
// several configs side by side and `synth` fabricates test corpora.

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smt/smt.hpp"

namespace {

struct SynthArgs {
  std::string out_dir;
  std::size_t pairs = 2000;
  std::size_t vocab = 50;
  std::size_t min_len = 3, max_len = 8;
  std::string word_order = "monotone";
  double inflection = 0.0;
  double holdout = 0.0;
  double noise = 0.0;
  double f_train = 0.8, f_dev = 0.1, f_test = 0.1;
  std::uint64_t seed = 1;
};

void run_synth(const SynthArgs& a) {
  smt::SynthSpec spec;
  spec.vocab_size = a.vocab;
  spec.min_len = a.min_len;
  spec.max_len = a.max_len;
  spec.word_order = smt::parse_word_order(a.word_order);
  spec.inflection_rate = a.inflection;
  spec.oov_holdout = a.holdout;
  spec.seed = a.seed;

  const smt::SynthResult gen = smt::generate_corpus(spec, a.pairs);
  const smt::SplitCorpora parts =
      smt::split_corpus(gen.corpus, a.f_train, a.f_dev, a.f_test, a.seed);
  smt::ParallelCorpus train = parts.train;
  if (a.noise > 0) train = smt::inject_noise(train, a.noise, a.seed + 1);

  const std::string d = a.out_dir + "/";
  std::filesystem::create_directories(a.out_dir);
  train.save(d + "train.src", d + "train.tgt");
  parts.dev.save(d + "dev.src", d + "dev.tgt");
  parts.test.save(d + "test.src", d + "test.tgt");

  std::vector<smt::LexiconEntry> nouns, verbs;
  for (const auto& e : gen.lexicon)
    (e.category == smt::LexCategory::verb_phrase ? verbs : nouns).push_back(e);
  smt::save_lexicon(gen.lexicon, d + "lexicon.tsv");
  smt::save_lexicon(nouns, d + "function_words.tsv");
  smt::save_lexicon(verbs, d + "verb_phrases.tsv");
  smt::write_file(d + "suffixes.txt", smt::join(gen.suffixes, "\n") + "\n");
  std::string held;
  for (std::size_t id : gen.holdout_ids)
    held += smt::synth_source_word(id) + "\n";
  smt::write_file(d + "holdout.txt", held);

  std::printf("synth: %zu pairs (train %zu, dev %zu, test %zu) in %s\n",
              gen.corpus.size(), train.size(), parts.dev.size(),
              parts.test.size(), a.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phrase-based statistical machine translation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "pipeline config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--stage-overrides", overrides,
                    "config overrides as section.key=value");
  };

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"clean", "tokenize the raw bitext and apply cleaning rules"},
      {"augment", "suffix splitting and lexicon injection"},
      {"align", "train word translation tables and symmetrized alignments"},
      {"phrases", "extract and score the phrase table"},
      {"lm", "train the target language model"},
      {"tune", "optimize decoder weights on the dev set"},
      {"translate", "decode the test source"},
      {"evaluate", "score the translation against the reference"},
  };
  for (const auto& [name, desc] : stages) add_common(app.add_subcommand(name, desc));
  add_common(app.add_subcommand(
      "matrix", "run every config listed in a matrix config and tabulate"));

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a deterministic synthetic parallel corpus");
  synth->add_option("--out-dir", sa.out_dir, "output directory")->required();
  synth->add_option("--pairs", sa.pairs, "sentence pairs to generate");
  synth->add_option("--vocab", sa.vocab, "vocabulary size (>= 5)");
  synth->add_option("--min-len", sa.min_len, "minimum source length");
  synth->add_option("--max-len", sa.max_len, "maximum source length");
  synth->add_option("--word-order", sa.word_order,
                    "monotone|reversed|svo_to_sov");
  synth->add_option("--inflection", sa.inflection,
                    "per-noun target suffix probability");
  synth->add_option("--holdout", sa.holdout,
                    "fraction of noun lexicon never sampled");
  synth->add_option("--noise", sa.noise,
                    "fraction of garbage pairs appended to the train split");
  synth->add_option("--train", sa.f_train, "train fraction");
  synth->add_option("--dev", sa.f_dev, "dev fraction");
  synth->add_option("--test", sa.f_test, "test fraction");
  synth->add_option("--seed", sa.seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      run_synth(sa);
      return 0;
    }

    smt::Config cfg = smt::Config::load(config_path);
    for (const auto& o : overrides) cfg.apply_override(o);

    if (app.get_subcommand("matrix")->parsed()) {
      const smt::MatrixResult result = smt::run_matrix(cfg);
      std::fputs(result.table.c_str(), stdout);
      return result.failures.empty() ? 0 : 1;
    }

    smt::Pipeline pipeline(cfg);
    const std::map<std::string, std::function<void()>> dispatch = {
        {"clean", [&] { pipeline.run_clean(); }},
        {"augment", [&] { pipeline.run_augment(); }},
        {"align", [&] { pipeline.run_align(); }},
        {"phrases", [&] { pipeline.run_phrases(); }},
        {"lm", [&] { pipeline.run_lm(); }},
        {"tune", [&] { pipeline.run_tune(); }},
        {"translate", [&] { pipeline.run_translate(); }},
        {"evaluate",
         [&] {
           const smt::EvalReport report = pipeline.run_evaluate();
           const std::string name = cfg.get("meta", "name", "system");
           std::fputs(smt::format_report_table({{name, report}}).c_str(),
                      stdout);
         }},
    };
    for (const auto& [name, fn] : dispatch)
      if (app.get_subcommand(name)->parsed()) {
        fn();
        return 0;
      }
    std::fputs("error: no subcommand\n", stderr);
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
