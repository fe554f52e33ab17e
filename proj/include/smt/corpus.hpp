#pragma once

// Parallel corpus loading, tokenization, mechanical cleaning and statistics.
// A corpus is an ordered list of sentence pairs; cleaning flags pairs rather
// than deleting them, so the original material stays auditable.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "smt/util.hpp"

namespace smt {

enum class Side { source, target };

struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
  std::string origin_file;
  std::size_t origin_line = 1;  // 1-based
  std::string flag;             // empty = clean, otherwise the first failed rule

  bool is_clean() const { return flag.empty(); }
};

struct CleaningRules {
  double max_length_ratio = 3.0;
  std::size_t max_tokens = 80;
  // Inclusive code point ranges per side; an empty list allows any script.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> source_scripts;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> target_scripts;
  bool drop_empty = true;
  bool drop_duplicates = true;

  void validate() const {
    if (max_length_ratio < 1.0) fail("max_length_ratio must be >= 1");
    if (max_tokens < 1) fail("max_tokens must be >= 1");
  }
};

struct CorpusStats {
  std::size_t total_pairs = 0;
  std::size_t clean_pairs = 0;
  std::size_t flagged_pairs = 0;
  std::size_t source_tokens = 0;  // over clean pairs
  std::size_t target_tokens = 0;
  std::size_t source_vocab_size = 0;
  std::size_t target_vocab_size = 0;
  std::map<std::size_t, std::size_t> source_length_histogram;
  std::map<std::size_t, std::size_t> target_length_histogram;
};

class ParallelCorpus {
 public:
  ParallelCorpus() = default;
  explicit ParallelCorpus(std::vector<SentencePair> pairs)
      : pairs_(std::move(pairs)) {}

  const std::vector<SentencePair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const SentencePair& operator[](std::size_t i) const { return pairs_[i]; }

  // Vocab with frequencies over clean pairs only.
  std::map<std::string, std::size_t> vocab(Side side) const {
    std::map<std::string, std::size_t> v;
    for (const auto& p : pairs_) {
      if (!p.is_clean()) continue;
      for (const auto& tok : (side == Side::source ? p.source : p.target))
        ++v[tok];
    }
    return v;
  }

  std::map<std::string, std::size_t> source_vocab() const {
    return vocab(Side::source);
  }
  std::map<std::string, std::size_t> target_vocab() const {
    return vocab(Side::target);
  }

  // The filter view: only pairs that passed cleaning.
  ParallelCorpus clean_subset() const {
    std::vector<SentencePair> keep;
    for (const auto& p : pairs_)
      if (p.is_clean()) keep.push_back(p);
    return ParallelCorpus(std::move(keep));
  }

  std::vector<std::vector<std::string>> sentences(Side side) const {
    std::vector<std::vector<std::string>> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_)
      out.push_back(side == Side::source ? p.source : p.target);
    return out;
  }

  void append(SentencePair p) { pairs_.push_back(std::move(p)); }

  // Writes the two-file interchange format: one sentence per line, tokens
  // separated by single spaces.
  void save(const std::string& source_path,
            const std::string& target_path) const {
    std::string src, tgt;
    for (const auto& p : pairs_) {
      src += join(p.source);
      src += '\n';
      tgt += join(p.target);
      tgt += '\n';
    }
    write_file(source_path, src);
    write_file(target_path, tgt);
  }

 private:
  std::vector<SentencePair> pairs_;
};

// ---------------------------------------------------------------------------
// Tokenization: whitespace split, then terminal punctuation (. , ? ! and the
// Devanagari danda) detached as separate tokens. The danda normalizes to "."
// so both languages share one sentence-terminal symbol. Splits never land
// inside a multi-byte sequence, so Devanagari clusters stay intact.
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::uint32_t kDanda = 0x0964;

inline bool is_terminal_punct(std::uint32_t cp) {
  return cp == '.' || cp == ',' || cp == '?' || cp == '!' || cp == kDanda;
}

// Byte length of the trailing code point, 0 if it is not terminal punctuation.
inline std::size_t trailing_punct_bytes(const std::string& tok,
                                        std::uint32_t& cp) {
  if (tok.empty()) return 0;
  // Walk back to the start of the last code point (at most 4 bytes).
  std::size_t start = tok.size() - 1;
  while (start > 0 && (static_cast<unsigned char>(tok[start]) & 0xc0u) == 0x80u)
    --start;
  if (tok.size() - start > 4) return 0;
  std::size_t n = utf8_decode(tok, start, cp);
  if (n != tok.size() - start) return 0;
  return is_terminal_punct(cp) ? n : 0;
}

inline std::string normalize_punct(std::uint32_t cp) {
  return cp == kDanda ? "." : std::string(1, static_cast<char>(cp));
}

}  // namespace detail

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  for (std::string word : split_whitespace(line)) {
    std::vector<std::string> detached;
    std::uint32_t cp = 0;
    std::size_t n;
    while (word.size() > 0 && (n = detail::trailing_punct_bytes(word, cp)) > 0 &&
           n < word.size()) {
      detached.push_back(detail::normalize_punct(cp));
      word.resize(word.size() - n);
    }
    // A token that is itself a single punctuation mark stays one token.
    if (detail::trailing_punct_bytes(word, cp) == word.size() &&
        !word.empty()) {
      word = detail::normalize_punct(cp);
    }
    out.push_back(std::move(word));
    out.insert(out.end(), detached.rbegin(), detached.rend());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

inline ParallelCorpus load_corpus(const std::string& source_path,
                                  const std::string& target_path) {
  const auto check_utf8 = [](const std::string& path) {
    const std::string bytes = read_file(path);
    std::ptrdiff_t bad = utf8_find_invalid(bytes);
    if (bad >= 0)
      fail("invalid UTF-8 in " + path + " at byte offset " +
           std::to_string(bad));
  };
  check_utf8(source_path);
  check_utf8(target_path);

  const auto src_lines = read_lines(source_path);
  const auto tgt_lines = read_lines(target_path);
  if (src_lines.size() != tgt_lines.size())
    fail("line count mismatch: " + source_path + " has " +
         std::to_string(src_lines.size()) + " lines, " + target_path + " has " +
         std::to_string(tgt_lines.size()));

  std::vector<SentencePair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    SentencePair p;
    p.source = tokenize(src_lines[i]);
    p.target = tokenize(tgt_lines[i]);
    p.origin_file = source_path;
    p.origin_line = i + 1;
    pairs.push_back(std::move(p));
  }
  return ParallelCorpus(std::move(pairs));
}

// ---------------------------------------------------------------------------
// Cleaning. Statuses are recomputed from scratch, so the operation is
// idempotent; rule order is fixed: empty, length, ratio, script, duplicate.
// ---------------------------------------------------------------------------

namespace detail {

inline bool tokens_in_ranges(
    const std::vector<std::string>& tokens,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& ranges) {
  if (ranges.empty()) return true;
  for (const auto& tok : tokens) {
    for (std::uint32_t cp : utf8_codepoints(tok)) {
      bool ok = false;
      for (const auto& [lo, hi] : ranges)
        if (cp >= lo && cp <= hi) {
          ok = true;
          break;
        }
      if (!ok) return false;
    }
  }
  return true;
}

}  // namespace detail

inline ParallelCorpus clean(const ParallelCorpus& corpus,
                            const CleaningRules& rules) {
  rules.validate();
  std::vector<SentencePair> out = corpus.pairs();
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& p : out) {
    p.flag.clear();
    const std::size_t ls = p.source.size(), lt = p.target.size();
    const std::pair<std::string, std::string> key(join(p.source),
                                                  join(p.target));
    if (rules.drop_empty && (ls == 0 || lt == 0)) {
      p.flag = "empty";
    } else if (ls > rules.max_tokens || lt > rules.max_tokens) {
      p.flag = "length";
    } else if ([&] {
                 if (ls == 0 && lt == 0) return false;
                 if (ls == 0 || lt == 0) return true;  // ratio is unbounded
                 const double ratio =
                     static_cast<double>(std::max(ls, lt)) /
                     static_cast<double>(std::min(ls, lt));
                 return ratio > rules.max_length_ratio;
               }()) {
      p.flag = "ratio";
    } else if (!detail::tokens_in_ranges(p.source, rules.source_scripts) ||
               !detail::tokens_in_ranges(p.target, rules.target_scripts)) {
      p.flag = "script";
    } else if (rules.drop_duplicates && seen.count(key)) {
      p.flag = "duplicate";
    }
    seen.insert(key);
  }
  return ParallelCorpus(std::move(out));
}

inline CorpusStats corpus_stats(const ParallelCorpus& corpus) {
  CorpusStats s;
  s.total_pairs = corpus.size();
  for (const auto& p : corpus.pairs()) {
    if (!p.is_clean()) {
      ++s.flagged_pairs;
      continue;
    }
    ++s.clean_pairs;
    s.source_tokens += p.source.size();
    s.target_tokens += p.target.size();
    ++s.source_length_histogram[p.source.size()];
    ++s.target_length_histogram[p.target.size()];
  }
  s.source_vocab_size = corpus.source_vocab().size();
  s.target_vocab_size = corpus.target_vocab().size();
  return s;
}

// Flag report: `line<TAB>reason<TAB>source<TAB>target`, flagged pairs only.
inline std::string flag_report(const ParallelCorpus& corpus) {
  std::string out;
  for (const auto& p : corpus.pairs()) {
    if (p.is_clean()) continue;
    out += std::to_string(p.origin_line);
    out += '\t';
    out += p.flag;
    out += '\t';
    out += join(p.source);
    out += '\t';
    out += join(p.target);
    out += '\n';
  }
  return out;
}

inline ParallelCorpus swap_sides(const ParallelCorpus& corpus) {
  std::vector<SentencePair> out = corpus.pairs();
  for (auto& p : out) std::swap(p.source, p.target);
  return ParallelCorpus(std::move(out));
}

}  // namespace smt
