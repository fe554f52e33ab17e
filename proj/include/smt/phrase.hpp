#pragma once

// Phrase pair extraction from word-aligned sentence pairs, and phrase table
// construction with forward/backward phrase and lexical scores.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "smt/align.hpp"
#include "smt/corpus.hpp"
#include "smt/util.hpp"

namespace smt {

struct PhraseExtractionOptions {
  std::size_t max_phrase_len = 7;

  void validate() const {
    if (max_phrase_len < 1) fail("extract: max_phrase_len must be >= 1");
  }
};

struct PhrasePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
  // Links relative to the spans below.
  std::set<std::pair<std::size_t, std::size_t>> links;
  std::size_t src_begin = 0, src_end = 0;  // inclusive token indices
  std::size_t tgt_begin = 0, tgt_end = 0;
};

// All phrase pairs consistent with the alignment: every link touching the
// source span lands inside the target span and vice versa. The target span
// may absorb adjacent unaligned tokens; source spans without any link yield
// nothing. Emission order: source start, source end, then target spans from
// widest-left to widest-right.
inline std::vector<PhrasePair> extract_phrases(
    const std::vector<std::string>& source,
    const std::vector<std::string>& target, const SentenceAlignment& alignment,
    const PhraseExtractionOptions& opt = {}) {
  opt.validate();
  alignment.validate();
  if (alignment.source_len != source.size() ||
      alignment.target_len != target.size())
    fail("extract: alignment dimensions do not match the sentence pair");

  const std::size_t slen = source.size(), tlen = target.size();
  std::vector<std::size_t> tgt_links(tlen, 0);
  for (const auto& [i, j] : alignment.links) {
    (void)i;
    tgt_links[j]++;
  }

  std::vector<PhrasePair> out;
  for (std::size_t i1 = 0; i1 < slen; ++i1) {
    for (std::size_t i2 = i1; i2 < slen && i2 - i1 < opt.max_phrase_len;
         ++i2) {
      std::size_t j_min = tlen, j_max = 0;
      bool any = false;
      for (const auto& [i, j] : alignment.links) {
        if (i < i1 || i > i2) continue;
        any = true;
        j_min = std::min(j_min, j);
        j_max = std::max(j_max, j);
      }
      if (!any) continue;
      bool consistent = true;
      for (const auto& [i, j] : alignment.links) {
        if (j < j_min || j > j_max) continue;
        if (i < i1 || i > i2) {
          consistent = false;
          break;
        }
      }
      if (!consistent) continue;

      for (long j1 = static_cast<long>(j_min);
           j1 >= 0 && (j1 == static_cast<long>(j_min) ||
                       tgt_links[static_cast<std::size_t>(j1)] == 0);
           --j1) {
        for (std::size_t j2 = j_max;
             j2 < tlen && (j2 == j_max || tgt_links[j2] == 0); ++j2) {
          if (j2 - static_cast<std::size_t>(j1) + 1 > opt.max_phrase_len)
            break;
          PhrasePair pp;
          pp.src_begin = i1;
          pp.src_end = i2;
          pp.tgt_begin = static_cast<std::size_t>(j1);
          pp.tgt_end = j2;
          pp.source.assign(source.begin() + static_cast<long>(i1),
                           source.begin() + static_cast<long>(i2) + 1);
          pp.target.assign(target.begin() + j1,
                           target.begin() + static_cast<long>(j2) + 1);
          for (const auto& [i, j] : alignment.links)
            if (i >= i1 && i <= i2)
              pp.links.insert({i - i1, j - static_cast<std::size_t>(j1)});
          out.push_back(std::move(pp));
        }
      }
    }
  }
  return out;
}

inline std::vector<PhrasePair> extract_corpus_phrases(
    const ParallelCorpus& corpus,
    const std::vector<SentenceAlignment>& alignments,
    const PhraseExtractionOptions& opt = {}) {
  if (corpus.size() != alignments.size())
    fail("extract: corpus has " + std::to_string(corpus.size()) +
         " pairs but " + std::to_string(alignments.size()) + " alignments");
  std::vector<PhrasePair> out;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    auto pairs = extract_phrases(corpus.pairs()[k].source,
                                 corpus.pairs()[k].target, alignments[k], opt);
    out.insert(out.end(), std::make_move_iterator(pairs.begin()),
               std::make_move_iterator(pairs.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phrase table: per source phrase, translation options carrying the four
// probabilities used as decoder features. All four live in (0, 1].
// ---------------------------------------------------------------------------

struct PhraseOption {
  std::vector<std::string> target;
  double phrase_fwd = 0;  // p(target phrase | source phrase)
  double lex_fwd = 0;     // lexical weight, forward
  double phrase_bwd = 0;  // p(source phrase | target phrase)
  double lex_bwd = 0;     // lexical weight, backward
};

class PhraseTable {
 public:
  void add(const std::string& source_key, PhraseOption option) {
    entries_[source_key].push_back(std::move(option));
  }

  // Sort each option list by forward phrase probability (ties: target
  // string ascending) and check basic sanity.
  void finalize() {
    for (auto& [key, options] : entries_) {
      for (const auto& o : options) {
        if (o.target.empty()) fail("phrase table: empty target for '" + key +
                                   "'");
        for (double p : {o.phrase_fwd, o.lex_fwd, o.phrase_bwd, o.lex_bwd})
          if (!(p > 0.0 && p <= 1.0 + 1e-9))
            fail("phrase table: score out of (0,1] for '" + key + "'");
      }
      std::stable_sort(options.begin(), options.end(),
                       [](const PhraseOption& a, const PhraseOption& b) {
                         if (a.phrase_fwd != b.phrase_fwd)
                           return a.phrase_fwd > b.phrase_fwd;
                         return join(a.target) < join(b.target);
                       });
    }
  }

  const std::vector<PhraseOption>* find(const std::string& source_key) const {
    auto it = entries_.find(source_key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::vector<PhraseOption> lookup(const std::string& source_key,
                                   std::size_t top_k = 20) const {
    const auto* options = find(source_key);
    if (!options) return {};
    std::vector<PhraseOption> out(
        options->begin(),
        options->begin() +
            static_cast<long>(std::min(top_k, options->size())));
    return out;
  }

  const std::map<std::string, std::vector<PhraseOption>>& entries() const {
    return entries_;
  }
  std::size_t source_count() const { return entries_.size(); }
  std::size_t option_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : entries_) n += v.size();
    return n;
  }

 private:
  std::map<std::string, std::vector<PhraseOption>> entries_;
};

namespace detail {

// Koehn-style lexical weight of one phrase pair under one alignment pattern:
// geometric structure is a product over target words of the average lexical
// probability of their linked source words (NULL when unlinked).
inline double lex_weight(const std::vector<std::string>& source,
                         const std::vector<std::string>& target,
                         const std::set<std::pair<std::size_t, std::size_t>>&
                             links,
                         const TranslationTable& table) {
  double w = 1.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [li, lj] : links) {
      if (lj != j) continue;
      sum += table.prob(source[li], target[j]);
      ++n;
    }
    w *= (n == 0) ? table.prob(kNullWord, target[j])
                  : sum / static_cast<double>(n);
  }
  return w;
}

struct PhraseGroup {
  std::vector<std::string> source, target;
  std::size_t count = 0;
  std::set<std::set<std::pair<std::size_t, std::size_t>>> patterns;
};

}  // namespace detail

// Relative-frequency phrase probabilities in both directions plus lexical
// weights (maximum over the distinct alignment patterns seen for the pair).
// `forward` is t(target|source) from the source->target model, `backward`
// t(source|target) from the swapped model.
inline PhraseTable build_phrase_table(const std::vector<PhrasePair>& pairs,
                                      const TranslationTable& forward,
                                      const TranslationTable& backward) {
  if (pairs.empty()) fail("phrase table: no extracted phrase pairs");
  std::map<std::string, std::map<std::string, detail::PhraseGroup>> groups;
  std::map<std::string, std::size_t> src_totals, tgt_totals;
  for (const auto& pp : pairs) {
    const std::string sk = join(pp.source), tk = join(pp.target);
    auto& g = groups[sk][tk];
    if (g.count == 0) {
      g.source = pp.source;
      g.target = pp.target;
    }
    g.count++;
    g.patterns.insert(pp.links);
    src_totals[sk]++;
    tgt_totals[tk]++;
  }

  PhraseTable table;
  for (const auto& [sk, row] : groups) {
    for (const auto& [tk, g] : row) {
      PhraseOption o;
      o.target = g.target;
      o.phrase_fwd = static_cast<double>(g.count) /
                     static_cast<double>(src_totals.at(sk));
      o.phrase_bwd = static_cast<double>(g.count) /
                     static_cast<double>(tgt_totals.at(tk));
      double best_fwd = 0.0, best_bwd = 0.0;
      for (const auto& pattern : g.patterns) {
        best_fwd = std::max(
            best_fwd, detail::lex_weight(g.source, g.target, pattern, forward));
        std::set<std::pair<std::size_t, std::size_t>> flipped;
        for (const auto& [i, j] : pattern) flipped.insert({j, i});
        best_bwd = std::max(
            best_bwd, detail::lex_weight(g.target, g.source, flipped,
                                         backward));
      }
      o.lex_fwd = best_fwd;
      o.lex_bwd = best_bwd;
      table.add(sk, std::move(o));
    }
  }
  table.finalize();
  return table;
}

// ---------------------------------------------------------------------------
// Serialization: `source ||| target ||| phrase_fwd lex_fwd phrase_bwd
// lex_bwd`, sources ascending, options in table order.
// ---------------------------------------------------------------------------

inline void save_phrase_table(const PhraseTable& table,
                              const std::string& path) {
  std::string out;
  for (const auto& [sk, options] : table.entries()) {
    for (const auto& o : options) {
      out += sk;
      out += " ||| ";
      out += join(o.target);
      out += " ||| ";
      out += format_double(o.phrase_fwd);
      out += ' ';
      out += format_double(o.lex_fwd);
      out += ' ';
      out += format_double(o.phrase_bwd);
      out += ' ';
      out += format_double(o.lex_bwd);
      out += '\n';
    }
  }
  write_file(path, out);
}

inline PhraseTable load_phrase_table(const std::string& path) {
  PhraseTable table;
  const auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    if (line.empty()) continue;
    const std::string sep = " ||| ";
    const auto p1 = line.find(sep);
    const auto p2 = (p1 == std::string::npos)
                        ? std::string::npos
                        : line.find(sep, p1 + sep.size());
    if (p1 == std::string::npos || p2 == std::string::npos)
      fail(path + ": line " + std::to_string(n + 1) +
           ": expected `source ||| target ||| scores`");
    const std::string sk = line.substr(0, p1);
    const std::string tk =
        line.substr(p1 + sep.size(), p2 - p1 - sep.size());
    const auto nums = split_whitespace(line.substr(p2 + sep.size()));
    if (nums.size() != 4)
      fail(path + ": line " + std::to_string(n + 1) + ": expected 4 scores");
    PhraseOption o;
    o.target = split_whitespace(tk);
    try {
      o.phrase_fwd = std::stod(nums[0]);
      o.lex_fwd = std::stod(nums[1]);
      o.phrase_bwd = std::stod(nums[2]);
      o.lex_bwd = std::stod(nums[3]);
    } catch (const std::exception&) {
      fail(path + ": line " + std::to_string(n + 1) + ": bad score");
    }
    if (sk.empty() || o.target.empty())
      fail(path + ": line " + std::to_string(n + 1) + ": empty phrase");
    table.add(sk, std::move(o));
  }
  table.finalize();
  return table;
}

}  // namespace smt
