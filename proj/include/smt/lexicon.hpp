#pragma once

// Lexical resources: synset expansion, function word / verb phrase lexicons,
// suffix splitting, and injection of entries into a training corpus.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "smt/corpus.hpp"
#include "smt/util.hpp"

namespace smt {

enum class LexCategory { synset, function_word, verb_phrase };

inline const char* to_string(LexCategory c) {
  switch (c) {
    case LexCategory::synset: return "synset";
    case LexCategory::function_word: return "function_word";
    case LexCategory::verb_phrase: return "verb_phrase";
  }
  return "?";
}

struct LexiconEntry {
  std::vector<std::string> source;
  std::vector<std::string> target;
  LexCategory category = LexCategory::function_word;
};

struct SynsetRecord {
  std::vector<std::string> headword;
  std::vector<std::vector<std::string>> synonyms;  // deduplicated, in order
};

struct SuffixInventory {
  // Longest first (bytes, then lexicographic) so greedy matching is
  // deterministic.
  std::vector<std::string> suffixes;
  std::size_t min_stem_length = 1;  // grapheme clusters

  void validate() const {
    if (min_stem_length < 1) fail("min_stem_length must be >= 1");
    for (std::size_t i = 0; i < suffixes.size(); ++i) {
      if (suffixes[i].empty()) fail("empty suffix in inventory");
      if (i > 0) {
        const auto& a = suffixes[i - 1];
        const auto& b = suffixes[i];
        if (a.size() < b.size() || (a.size() == b.size() && a > b))
          fail("suffix inventory not in longest-first order");
      }
    }
  }

  static SuffixInventory from_list(std::vector<std::string> list,
                                   std::size_t min_stem = 1) {
    std::sort(list.begin(), list.end(),
              [](const std::string& a, const std::string& b) {
                if (a.size() != b.size()) return a.size() > b.size();
                return a < b;
              });
    list.erase(std::unique(list.begin(), list.end()), list.end());
    SuffixInventory inv{std::move(list), min_stem};
    inv.validate();
    return inv;
  }
};

// ---------------------------------------------------------------------------
// Synset expansion: one entry per (headword, synonym), deduplicated across
// records of the same headword. Multi-word synonyms arrive underscore-joined
// and become token sequences.
// ---------------------------------------------------------------------------

inline std::vector<std::string> underscores_to_tokens(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& part : split_char(s, '_'))
    if (!part.empty()) out.push_back(part);
  return out;
}

inline std::vector<LexiconEntry> expand_synsets(
    const std::vector<SynsetRecord>& records) {
  std::vector<LexiconEntry> out;
  std::set<std::pair<std::string, std::string>> emitted;
  for (const auto& rec : records) {
    if (rec.headword.empty()) fail("synset record with empty headword");
    if (rec.synonyms.empty())
      fail("synset record for '" + join(rec.headword) + "' has no synonyms");
    for (const auto& syn : rec.synonyms) {
      if (syn.empty()) fail("empty synonym in synset record");
      const std::pair<std::string, std::string> key(join(rec.headword),
                                                    join(syn));
      if (!emitted.insert(key).second) continue;
      out.push_back({rec.headword, syn, LexCategory::synset});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suffix splitting: greedy longest suffix, at most one split per token, stem
// must keep at least min_stem_length grapheme clusters and the split point
// must fall on a cluster boundary.
// ---------------------------------------------------------------------------

namespace detail {

inline bool starts_with_combining_mark(const std::string& s) {
  std::uint32_t cp = 0;
  return !s.empty() && utf8_decode(s, 0, cp) > 0 && is_combining_mark(cp);
}

}  // namespace detail

// Returns true and fills (stem, suffix) on a split.
inline bool split_token(const std::string& token, const SuffixInventory& inv,
                        std::string& stem, std::string& suffix) {
  for (const auto& sfx : inv.suffixes) {
    if (sfx.size() >= token.size()) continue;
    if (!token.ends_with(sfx)) continue;
    if (detail::starts_with_combining_mark(sfx)) continue;  // inside a cluster
    std::string candidate = token.substr(0, token.size() - sfx.size());
    if (utf8_find_invalid(candidate) >= 0) continue;  // split mid-codepoint
    if (grapheme_count(candidate) < inv.min_stem_length) continue;
    stem = std::move(candidate);
    suffix = sfx;
    return true;
  }
  return false;
}

inline ParallelCorpus split_suffixes(const ParallelCorpus& corpus,
                                     const SuffixInventory& inv, Side side) {
  inv.validate();
  std::vector<SentencePair> out = corpus.pairs();
  for (auto& p : out) {
    auto& tokens = (side == Side::source) ? p.source : p.target;
    std::vector<std::string> rebuilt;
    rebuilt.reserve(tokens.size());
    for (const auto& tok : tokens) {
      std::string stem, suffix;
      if (split_token(tok, inv, stem, suffix)) {
        rebuilt.push_back(std::move(stem));
        rebuilt.push_back(std::move(suffix));
      } else {
        rebuilt.push_back(tok);
      }
    }
    tokens = std::move(rebuilt);
  }
  return ParallelCorpus(std::move(out));
}

// ---------------------------------------------------------------------------
// Injection: entries appended after the original pairs, `repeat` copies each,
// entry order preserved. Duplicates of existing pairs are appended anyway;
// the added frequency mass is the point of the augmentation.
// ---------------------------------------------------------------------------

inline ParallelCorpus inject(const ParallelCorpus& corpus,
                             const std::vector<LexiconEntry>& entries,
                             std::size_t repeat = 1) {
  if (repeat < 1) fail("inject: repeat must be >= 1");
  std::vector<SentencePair> out = corpus.pairs();
  out.reserve(out.size() + entries.size() * repeat);
  std::size_t index = 0;
  for (const auto& e : entries) {
    ++index;
    if (e.source.empty() || e.target.empty())
      fail("lexicon entry " + std::to_string(index) + " has an empty side");
    for (std::size_t r = 0; r < repeat; ++r) {
      SentencePair p;
      p.source = e.source;
      p.target = e.target;
      p.origin_file = std::string("<lexicon:") + to_string(e.category) + ">";
      p.origin_line = index;
      out.push_back(std::move(p));
    }
  }
  return ParallelCorpus(std::move(out));
}

// ---------------------------------------------------------------------------
// File formats. Lexicons: `source<TAB>target` lines, `#` comments. Synsets:
// `headword<TAB>syn1,syn2,...` with underscore-joined multi-word synonyms.
// Suffix files: one suffix per line; the loader orders them.
// ---------------------------------------------------------------------------

inline std::vector<LexiconEntry> load_lexicon(const std::string& path,
                                              LexCategory category) {
  std::vector<LexiconEntry> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_char(line, '\t');
    if (fields.size() != 2)
      fail(path + ": line " + std::to_string(i + 1) +
           ": expected `source<TAB>target`");
    LexiconEntry e;
    e.source = tokenize(fields[0]);
    e.target = tokenize(fields[1]);
    e.category = category;
    if (e.source.empty() || e.target.empty())
      fail(path + ": line " + std::to_string(i + 1) + ": empty side");
    out.push_back(std::move(e));
  }
  return out;
}

inline void save_lexicon(const std::vector<LexiconEntry>& entries,
                         const std::string& path) {
  std::string out;
  for (const auto& e : entries) {
    out += join(e.source);
    out += '\t';
    out += join(e.target);
    out += '\n';
  }
  write_file(path, out);
}

inline std::vector<SynsetRecord> load_synsets(const std::string& path) {
  std::vector<SynsetRecord> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_char(line, '\t');
    if (fields.size() != 2)
      fail(path + ": line " + std::to_string(i + 1) +
           ": expected `headword<TAB>syn1,syn2,...`");
    SynsetRecord rec;
    rec.headword = underscores_to_tokens(fields[0]);
    std::set<std::string> seen;
    for (const auto& raw : split_char(fields[1], ',')) {
      const std::string t = trim(raw);
      if (t.empty()) continue;
      if (!seen.insert(t).second) continue;
      rec.synonyms.push_back(underscores_to_tokens(t));
    }
    if (rec.headword.empty() || rec.synonyms.empty())
      fail(path + ": line " + std::to_string(i + 1) +
           ": synset record needs a headword and at least one synonym");
    out.push_back(std::move(rec));
  }
  return out;
}

inline SuffixInventory load_suffixes(const std::string& path,
                                     std::size_t min_stem = 1) {
  std::vector<std::string> list;
  for (const auto& line : read_lines(path)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    list.push_back(t);
  }
  return SuffixInventory::from_list(std::move(list), min_stem);
}

}  // namespace smt
