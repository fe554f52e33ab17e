#pragma once

// Deterministic synthetic bilingual corpora for end-to-end tests:
// controllable vocabulary, word order divergence, inflection, held-out
// lexicon entries, and mechanically detectable noise.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "smt/corpus.hpp"
#include "smt/lexicon.hpp"
#include "smt/util.hpp"

namespace smt {

enum class WordOrder { monotone, reversed, svo_to_sov };

inline WordOrder parse_word_order(const std::string& name) {
  if (name == "monotone") return WordOrder::monotone;
  if (name == "reversed") return WordOrder::reversed;
  if (name == "svo_to_sov" || name == "svo-to-sov") return WordOrder::svo_to_sov;
  fail("unknown word order '" + name +
       "' (expected monotone|reversed|svo_to_sov)");
}

inline const char* to_string(WordOrder o) {
  switch (o) {
    case WordOrder::monotone: return "monotone";
    case WordOrder::reversed: return "reversed";
    case WordOrder::svo_to_sov: return "svo_to_sov";
  }
  return "?";
}

struct SynthSpec {
  std::size_t vocab_size = 50;  // word ids; the low fifth act as verbs
  std::size_t min_len = 3, max_len = 8;
  WordOrder word_order = WordOrder::monotone;
  double inflection_rate = 0.0;  // chance a noun's target gets a suffix
  double oov_holdout = 0.0;      // fraction of noun entries never sampled
  std::uint64_t seed = 1;

  void validate() const {
    if (vocab_size < 5) fail("synth: vocab_size must be >= 5");
    if (min_len < 1 || min_len > max_len) fail("synth: bad length range");
    if (inflection_rate < 0 || inflection_rate > 1)
      fail("synth: inflection_rate must be in [0,1]");
    if (oov_holdout < 0 || oov_holdout > 1)
      fail("synth: oov_holdout must be in [0,1]");
  }
};

struct SynthResult {
  ParallelCorpus corpus;
  // Full bijective ground truth, including held-out entries, so tests can
  // build augmentation resources. Verbs are tagged verb_phrase, nouns
  // function_word.
  std::vector<LexiconEntry> lexicon;
  std::vector<std::string> suffixes;      // the inflection suffix inventory
  std::vector<std::size_t> holdout_ids;   // noun ids excluded from sampling
};

inline std::string synth_source_word(std::size_t id) {
  return "sw" + std::to_string(id);
}
inline std::string synth_target_word(std::size_t id) {
  return "tw" + std::to_string(id);
}

// Sentences are nouns with a single verb in the middle; the target is the
// word-for-word image, reordered per word_order, with optional suffixes on
// noun targets. Pure function of (spec, n_pairs).
inline SynthResult generate_corpus(const SynthSpec& spec,
                                   std::size_t n_pairs) {
  spec.validate();
  if (n_pairs < 1) fail("synth: n_pairs must be >= 1");
  Rng rng(spec.seed);

  const std::size_t n_verbs = spec.vocab_size / 5;
  std::vector<std::size_t> noun_ids;
  for (std::size_t id = n_verbs; id < spec.vocab_size; ++id)
    noun_ids.push_back(id);

  SynthResult result;
  result.suffixes = {"oo", "ee", "aa"};

  const std::size_t n_holdout = static_cast<std::size_t>(
      spec.oov_holdout * static_cast<double>(noun_ids.size()));
  std::vector<std::size_t> shuffled = noun_ids;
  rng.shuffle(shuffled);
  result.holdout_ids.assign(shuffled.begin(),
                            shuffled.begin() + static_cast<long>(n_holdout));
  std::sort(result.holdout_ids.begin(), result.holdout_ids.end());

  std::set<std::size_t> held(result.holdout_ids.begin(),
                             result.holdout_ids.end());
  std::vector<std::size_t> samplable;
  for (std::size_t id : noun_ids)
    if (!held.count(id)) samplable.push_back(id);
  if (samplable.empty()) fail("synth: oov_holdout leaves no nouns to sample");

  std::vector<SentencePair> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const std::size_t len = static_cast<std::size_t>(
        rng.next_int(static_cast<std::int64_t>(spec.min_len),
                     static_cast<std::int64_t>(spec.max_len)));
    const std::size_t verb_pos = len / 2;
    std::vector<std::size_t> ids(len);
    for (std::size_t i = 0; i < len; ++i)
      ids[i] = i == verb_pos ? rng.next_below(n_verbs)
                             : samplable[rng.next_below(samplable.size())];

    std::vector<std::size_t> tgt_ids = ids;
    switch (spec.word_order) {
      case WordOrder::monotone: break;
      case WordOrder::reversed:
        std::reverse(tgt_ids.begin(), tgt_ids.end());
        break;
      case WordOrder::svo_to_sov:
        tgt_ids.erase(tgt_ids.begin() + static_cast<long>(verb_pos));
        tgt_ids.push_back(ids[verb_pos]);
        break;
    }

    SentencePair p;
    for (std::size_t id : ids) p.source.push_back(synth_source_word(id));
    for (std::size_t id : tgt_ids) {
      std::string w = synth_target_word(id);
      if (id >= n_verbs && rng.next_bernoulli(spec.inflection_rate))
        w += result.suffixes[rng.next_below(result.suffixes.size())];
      p.target.push_back(std::move(w));
    }
    p.origin_file = "<synth>";
    p.origin_line = k + 1;
    pairs.push_back(std::move(p));
  }
  result.corpus = ParallelCorpus(std::move(pairs));

  for (std::size_t id = 0; id < spec.vocab_size; ++id) {
    LexiconEntry e;
    e.source = {synth_source_word(id)};
    e.target = {synth_target_word(id)};
    e.category = id < n_verbs ? LexCategory::verb_phrase
                              : LexCategory::function_word;
    result.lexicon.push_back(std::move(e));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Deterministic train/dev/test partition: shuffled assignment with
// largest-remainder bucket sizes, original order preserved inside each
// bucket.
// ---------------------------------------------------------------------------

struct SplitCorpora {
  ParallelCorpus train, dev, test;
};

inline SplitCorpora split_corpus(const ParallelCorpus& corpus, double f_train,
                                 double f_dev, double f_test,
                                 std::uint64_t seed) {
  const double sum = f_train + f_dev + f_test;
  if (std::abs(sum - 1.0) > 1e-9)
    fail("split: fractions sum to " + format_double(sum) + ", expected 1");
  if (f_train < 0 || f_dev < 0 || f_test < 0)
    fail("split: fractions must be >= 0");
  const std::size_t n = corpus.size();

  const double exact[3] = {f_train * static_cast<double>(n),
                           f_dev * static_cast<double>(n),
                           f_test * static_cast<double>(n)};
  std::size_t count[3];
  double frac[3];
  std::size_t assigned = 0;
  for (int b = 0; b < 3; ++b) {
    count[b] = static_cast<std::size_t>(exact[b]);
    frac[b] = exact[b] - static_cast<double>(count[b]);
    assigned += count[b];
  }
  while (assigned < n) {  // largest remainder; ties to the earlier bucket
    int best = 0;
    for (int b = 1; b < 3; ++b)
      if (frac[b] > frac[best]) best = b;
    count[best]++;
    frac[best] = -1;
    assigned++;
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::size_t> bucket_of(n, 0);
  std::size_t pos = 0;
  for (int b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < count[b]; ++k)
      bucket_of[order[pos++]] = static_cast<std::size_t>(b);

  std::vector<SentencePair> parts[3];
  for (std::size_t i = 0; i < n; ++i)
    parts[bucket_of[i]].push_back(corpus.pairs()[i]);
  return {ParallelCorpus(std::move(parts[0])),
          ParallelCorpus(std::move(parts[1])),
          ParallelCorpus(std::move(parts[2]))};
}

// ---------------------------------------------------------------------------
// Noise injection: appends `fraction * size` corrupted pairs, each reusing a
// real source with a garbage over-length target (> 3x the source length), so
// default cleaning rules flag every one of them via the length ratio.
// ---------------------------------------------------------------------------

inline ParallelCorpus inject_noise(const ParallelCorpus& corpus,
                                   double fraction, std::uint64_t seed) {
  if (fraction < 0) fail("inject_noise: fraction must be >= 0");
  if (corpus.size() == 0) fail("inject_noise: empty corpus");
  std::set<std::string> tgt_vocab_set;
  for (const auto& p : corpus.pairs())
    for (const auto& w : p.target) tgt_vocab_set.insert(w);
  const std::vector<std::string> tgt_vocab(tgt_vocab_set.begin(),
                                           tgt_vocab_set.end());
  if (tgt_vocab.empty()) fail("inject_noise: no target vocabulary");

  Rng rng(seed);
  const std::size_t n_noise = static_cast<std::size_t>(
      fraction * static_cast<double>(corpus.size()));
  std::vector<SentencePair> out = corpus.pairs();
  for (std::size_t k = 0; k < n_noise; ++k) {
    const auto& src_pair =
        corpus.pairs()[rng.next_below(corpus.size())];
    SentencePair noise;
    noise.source = src_pair.source;
    const std::size_t garbage_len = 3 * noise.source.size() + 1;
    for (std::size_t i = 0; i < garbage_len; ++i)
      noise.target.push_back(tgt_vocab[rng.next_below(tgt_vocab.size())]);
    noise.origin_file = "<noise>";
    noise.origin_line = k + 1;
    out.push_back(std::move(noise));
  }
  return ParallelCorpus(std::move(out));
}

}  // namespace smt
