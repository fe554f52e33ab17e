#pragma once

// Word alignment: IBM Model 1 EM training, Viterbi alignment, and
// symmetrization of bidirectional alignments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "smt/corpus.hpp"
#include "smt/util.hpp"

namespace smt {

inline constexpr const char* kNullWord = "<NULL>";
inline constexpr double kLexFloor = 1e-7;  // probability for unseen pairs

struct Model1Options {
  std::size_t iterations = 10;
  bool use_null = true;
  // Stop early once the log-likelihood gain per sentence pair drops below
  // this; 0 disables early stopping.
  double min_gain_per_pair = 1e-6;

  void validate() const {
    if (iterations < 1) fail("model1: iterations must be >= 1");
    if (min_gain_per_pair < 0) fail("model1: min_gain_per_pair must be >= 0");
  }
};

// t(target | source), one normalized distribution per source word.
class TranslationTable {
 public:
  using Row = std::map<std::string, double>;

  double prob(const std::string& source, const std::string& target) const {
    auto row = rows_.find(source);
    if (row == rows_.end()) return kLexFloor;
    auto cell = row->second.find(target);
    return cell == row->second.end() ? kLexFloor : cell->second;
  }

  bool has_source(const std::string& source) const {
    return rows_.count(source) > 0;
  }

  void set(const std::string& source, const std::string& target, double p) {
    if (!(p >= 0.0) || !std::isfinite(p))
      fail("translation table: probability must be finite and >= 0");
    rows_[source][target] = p;
  }

  const Row& row(const std::string& source) const {
    auto it = rows_.find(source);
    if (it == rows_.end()) fail("translation table: unknown source word '" +
                                source + "'");
    return it->second;
  }

  const std::map<std::string, Row>& rows() const { return rows_; }
  std::size_t source_count() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

 private:
  std::map<std::string, Row> rows_;
};

struct Model1Result {
  TranslationTable table;
  // Log-likelihood of the training data after each completed EM iteration.
  std::vector<double> ll_history;
};

namespace detail {

struct IndexedPairs {
  std::vector<std::vector<int>> source;  // incl. NULL at position 0 if used
  std::vector<std::vector<int>> target;
  std::vector<std::string> source_words;
  std::vector<std::string> target_words;
};

inline IndexedPairs index_pairs(const ParallelCorpus& corpus, bool use_null) {
  IndexedPairs ix;
  std::unordered_map<std::string, int> sid, tid;
  auto intern = [](std::unordered_map<std::string, int>& m,
                   std::vector<std::string>& words,
                   const std::string& w) -> int {
    auto it = m.find(w);
    if (it != m.end()) return it->second;
    const int id = static_cast<int>(words.size());
    m.emplace(w, id);
    words.push_back(w);
    return id;
  };
  if (use_null) intern(sid, ix.source_words, kNullWord);
  for (const auto& p : corpus.pairs()) {
    if (p.source.empty() || p.target.empty()) continue;
    std::vector<int> s, t;
    if (use_null) s.push_back(0);
    for (const auto& w : p.source) s.push_back(intern(sid, ix.source_words, w));
    for (const auto& w : p.target) t.push_back(intern(tid, ix.target_words, w));
    ix.source.push_back(std::move(s));
    ix.target.push_back(std::move(t));
  }
  return ix;
}

}  // namespace detail

// EM training. Initialization is uniform over the target words co-occurring
// with each source word, so every row is a proper distribution from the
// start. Rows stay normalized after every M-step.
inline Model1Result train_model1(const ParallelCorpus& corpus,
                                 const Model1Options& opt = {}) {
  opt.validate();
  const auto ix = detail::index_pairs(corpus, opt.use_null);
  if (ix.source.empty()) fail("model1: no usable sentence pairs");

  const std::size_t n_src = ix.source_words.size();
  std::vector<std::map<int, double>> t(n_src);

  for (std::size_t k = 0; k < ix.source.size(); ++k)
    for (int s : ix.source[k])
      for (int w : ix.target[k]) t[static_cast<std::size_t>(s)][w] = 0.0;
  for (auto& row : t) {
    if (row.empty()) continue;
    const double u = 1.0 / static_cast<double>(row.size());
    for (auto& cell : row) cell.second = u;
  }

  std::vector<double> ll_history;
  const double num_pairs = static_cast<double>(ix.source.size());
  for (std::size_t iter = 0; iter < opt.iterations; ++iter) {
    std::vector<std::map<int, double>> count(n_src);
    std::vector<double> total(n_src, 0.0);
    for (std::size_t k = 0; k < ix.source.size(); ++k) {
      const auto& src = ix.source[k];
      for (int w : ix.target[k]) {
        double denom = 0.0;
        for (int s : src) denom += t[static_cast<std::size_t>(s)].at(w);
        for (int s : src) {
          const double share = t[static_cast<std::size_t>(s)].at(w) / denom;
          count[static_cast<std::size_t>(s)][w] += share;
          total[static_cast<std::size_t>(s)] += share;
        }
      }
    }
    for (std::size_t s = 0; s < n_src; ++s) {
      if (total[s] <= 0.0) continue;
      for (auto& cell : t[s]) cell.second = count[s][cell.first] / total[s];
    }

    double ll = 0.0;
    for (std::size_t k = 0; k < ix.source.size(); ++k) {
      const auto& src = ix.source[k];
      const double log_len = std::log(static_cast<double>(src.size()));
      for (int w : ix.target[k]) {
        double denom = 0.0;
        for (int s : src) denom += t[static_cast<std::size_t>(s)].at(w);
        ll += std::log(denom) - log_len;
      }
    }
    ll_history.push_back(ll);
    if (opt.min_gain_per_pair > 0 && ll_history.size() >= 2) {
      const double gain = ll_history[ll_history.size() - 1] -
                          ll_history[ll_history.size() - 2];
      if (gain / num_pairs < opt.min_gain_per_pair) break;
    }
  }

  Model1Result result;
  result.ll_history = std::move(ll_history);
  for (std::size_t s = 0; s < n_src; ++s)
    for (const auto& cell : t[s])
      result.table.set(ix.source_words[s],
                       ix.target_words[static_cast<std::size_t>(cell.first)],
                       cell.second);
  return result;
}

// ---------------------------------------------------------------------------
// Alignments: links are (source index, target index). NULL alignments are
// represented by omitting the link.
// ---------------------------------------------------------------------------

struct SentenceAlignment {
  std::size_t source_len = 0;
  std::size_t target_len = 0;
  std::set<std::pair<std::size_t, std::size_t>> links;

  void validate() const {
    for (const auto& [i, j] : links)
      if (i >= source_len || j >= target_len)
        fail("alignment link " + std::to_string(i) + "-" + std::to_string(j) +
             " out of range for " + std::to_string(source_len) + "x" +
             std::to_string(target_len));
  }
};

// Best single source position per target word. Ties go to the lowest source
// index; NULL wins only when no word is strictly better.
inline SentenceAlignment viterbi_align(const TranslationTable& table,
                                       const std::vector<std::string>& source,
                                       const std::vector<std::string>& target,
                                       bool use_null = true) {
  SentenceAlignment a;
  a.source_len = source.size();
  a.target_len = target.size();
  for (std::size_t j = 0; j < target.size(); ++j) {
    double best = use_null ? table.prob(kNullWord, target[j])
                           : -std::numeric_limits<double>::infinity();
    long best_i = -1;
    for (std::size_t i = 0; i < source.size(); ++i) {
      const double p = table.prob(source[i], target[j]);
      if (p > best) {
        best = p;
        best_i = static_cast<long>(i);
      }
    }
    if (best_i >= 0) a.links.insert({static_cast<std::size_t>(best_i), j});
  }
  return a;
}

inline std::vector<SentenceAlignment> align_corpus(
    const TranslationTable& table, const ParallelCorpus& corpus,
    bool use_null = true) {
  std::vector<SentenceAlignment> out;
  out.reserve(corpus.size());
  for (const auto& p : corpus.pairs())
    out.push_back(viterbi_align(table, p.source, p.target, use_null));
  return out;
}

inline SentenceAlignment transpose(const SentenceAlignment& a) {
  SentenceAlignment t;
  t.source_len = a.target_len;
  t.target_len = a.source_len;
  for (const auto& [i, j] : a.links) t.links.insert({j, i});
  return t;
}

enum class SymmetrizationMode { intersection, union_links, grow_diag };

inline SymmetrizationMode parse_symmetrization(const std::string& name) {
  if (name == "intersection") return SymmetrizationMode::intersection;
  if (name == "union") return SymmetrizationMode::union_links;
  if (name == "grow-diag" || name == "grow_diag")
    return SymmetrizationMode::grow_diag;
  fail("unknown symmetrization mode '" + name +
       "' (expected intersection|union|grow-diag)");
}

inline const char* to_string(SymmetrizationMode m) {
  switch (m) {
    case SymmetrizationMode::intersection: return "intersection";
    case SymmetrizationMode::union_links: return "union";
    case SymmetrizationMode::grow_diag: return "grow-diag";
  }
  return "?";
}

// Both inputs must already be in source->target orientation (transpose the
// reverse-model alignment first).
inline SentenceAlignment symmetrize(const SentenceAlignment& fwd,
                                    const SentenceAlignment& bwd,
                                    SymmetrizationMode mode) {
  if (fwd.source_len != bwd.source_len || fwd.target_len != bwd.target_len)
    fail("symmetrize: dimension mismatch (" + std::to_string(fwd.source_len) +
         "x" + std::to_string(fwd.target_len) + " vs " +
         std::to_string(bwd.source_len) + "x" + std::to_string(bwd.target_len) +
         ")");
  SentenceAlignment out;
  out.source_len = fwd.source_len;
  out.target_len = fwd.target_len;

  std::set<std::pair<std::size_t, std::size_t>> inter, uni;
  for (const auto& l : fwd.links)
    if (bwd.links.count(l)) inter.insert(l);
  uni = fwd.links;
  uni.insert(bwd.links.begin(), bwd.links.end());

  switch (mode) {
    case SymmetrizationMode::intersection:
      out.links = std::move(inter);
      return out;
    case SymmetrizationMode::union_links:
      out.links = std::move(uni);
      return out;
    case SymmetrizationMode::grow_diag: break;
  }

  // grow-diag: start from the intersection, then repeatedly adopt union
  // links adjacent (incl. diagonals) to the current set whenever at least
  // one of their endpoints is still uncovered. New links take effect
  // immediately; iterate to a fixpoint.
  std::set<std::pair<std::size_t, std::size_t>> cur = inter;
  std::vector<bool> src_cov(out.source_len, false), tgt_cov(out.target_len,
                                                            false);
  for (const auto& [i, j] : cur) {
    src_cov[i] = true;
    tgt_cov[j] = true;
  }
  auto adjacent = [&](std::size_t i, std::size_t j) {
    for (long di = -1; di <= 1; ++di)
      for (long dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const long ni = static_cast<long>(i) + di;
        const long nj = static_cast<long>(j) + dj;
        if (ni < 0 || nj < 0) continue;
        if (cur.count({static_cast<std::size_t>(ni),
                       static_cast<std::size_t>(nj)}))
          return true;
      }
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [i, j] : uni) {
      if (cur.count({i, j})) continue;
      if (src_cov[i] && tgt_cov[j]) continue;
      if (!adjacent(i, j)) continue;
      cur.insert({i, j});
      src_cov[i] = true;
      tgt_cov[j] = true;
      changed = true;
    }
  }
  out.links = std::move(cur);
  return out;
}

inline std::vector<SentenceAlignment> symmetrize_corpus(
    const std::vector<SentenceAlignment>& fwd,
    const std::vector<SentenceAlignment>& bwd_transposed,
    SymmetrizationMode mode) {
  if (fwd.size() != bwd_transposed.size())
    fail("symmetrize: corpus size mismatch (" + std::to_string(fwd.size()) +
         " vs " + std::to_string(bwd_transposed.size()) + ")");
  std::vector<SentenceAlignment> out;
  out.reserve(fwd.size());
  for (std::size_t k = 0; k < fwd.size(); ++k)
    out.push_back(symmetrize(fwd[k], bwd_transposed[k], mode));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization. Translation tables: `source<TAB>target<TAB>prob`, sorted by
// source, then probability descending, then target. Alignments: one line per
// sentence of space-separated `i-j` links (source-target).
// ---------------------------------------------------------------------------

inline void save_ttable(const TranslationTable& table,
                        const std::string& path) {
  std::string out;
  for (const auto& [src, row] : table.rows()) {
    std::vector<std::pair<std::string, double>> cells(row.begin(), row.end());
    std::stable_sort(cells.begin(), cells.end(),
                     [](const auto& a, const auto& b) {
                       if (a.second != b.second) return a.second > b.second;
                       return a.first < b.first;
                     });
    for (const auto& [tgt, p] : cells) {
      out += src;
      out += '\t';
      out += tgt;
      out += '\t';
      out += format_double(p);
      out += '\n';
    }
  }
  write_file(path, out);
}

inline TranslationTable load_ttable(const std::string& path) {
  TranslationTable table;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_char(lines[i], '\t');
    if (fields.size() != 3)
      fail(path + ": line " + std::to_string(i + 1) +
           ": expected `source<TAB>target<TAB>prob`");
    try {
      table.set(fields[0], fields[1], std::stod(fields[2]));
    } catch (const std::exception&) {
      fail(path + ": line " + std::to_string(i + 1) + ": bad probability '" +
           fields[2] + "'");
    }
  }
  return table;
}

inline std::string format_alignment(const SentenceAlignment& a) {
  std::vector<std::string> parts;
  parts.reserve(a.links.size());
  for (const auto& [i, j] : a.links)
    parts.push_back(std::to_string(i) + "-" + std::to_string(j));
  return join(parts);
}

inline void save_alignments(const std::vector<SentenceAlignment>& alignments,
                            const std::string& path) {
  std::string out;
  for (const auto& a : alignments) {
    out += format_alignment(a);
    out += '\n';
  }
  write_file(path, out);
}

// Links only; sentence lengths are recovered from the corpus by the caller.
inline std::vector<std::set<std::pair<std::size_t, std::size_t>>>
load_alignment_links(const std::string& path) {
  std::vector<std::set<std::pair<std::size_t, std::size_t>>> out;
  const auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::set<std::pair<std::size_t, std::size_t>> links;
    for (const auto& part : split_whitespace(lines[n])) {
      const auto dash = part.find('-');
      if (dash == std::string::npos || dash == 0 || dash + 1 >= part.size())
        fail(path + ": line " + std::to_string(n + 1) + ": bad link '" + part +
             "'");
      try {
        links.insert({std::stoul(part.substr(0, dash)),
                      std::stoul(part.substr(dash + 1))});
      } catch (const std::exception&) {
        fail(path + ": line " + std::to_string(n + 1) + ": bad link '" + part +
             "'");
      }
    }
    out.push_back(std::move(links));
  }
  return out;
}

}  // namespace smt
