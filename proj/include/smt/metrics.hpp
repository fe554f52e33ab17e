#pragma once

// Evaluation metrics: corpus BLEU (pooled, clipped), TER with greedy block
// shifts, and a simplified exact-match METEOR. Tokenized, case-sensitive,
// single reference.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "smt/util.hpp"

namespace smt {

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

enum class BleuSmoothing { none, add1 };

struct BleuResult {
  double score = 0;
  double brevity_penalty = 1;
  std::size_t hyp_len = 0, ref_len = 0;
  std::vector<std::size_t> matches, totals;  // per order, index n-1
  std::vector<double> precisions;            // 0 where no n-grams exist
};

namespace detail {

inline std::map<std::string, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    counts[join(std::vector<std::string>(
        tokens.begin() + static_cast<long>(i),
        tokens.begin() + static_cast<long>(i + n)))]++;
  return counts;
}

}  // namespace detail

// Clipped n-gram sufficient statistics; one sentence's stats add into a
// corpus total, and totals support subtraction so a corpus score can be
// updated incrementally (used by the tuner's line search).
struct BleuStats {
  std::vector<std::size_t> matches, totals;
  std::size_t hyp_len = 0, ref_len = 0;

  explicit BleuStats(std::size_t max_n = 4)
      : matches(max_n, 0), totals(max_n, 0) {}

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t i = 0; i < matches.size(); ++i) {
      matches[i] += o.matches[i];
      totals[i] += o.totals[i];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    return *this;
  }

  BleuStats& operator-=(const BleuStats& o) {
    for (std::size_t i = 0; i < matches.size(); ++i) {
      matches[i] -= o.matches[i];
      totals[i] -= o.totals[i];
    }
    hyp_len -= o.hyp_len;
    ref_len -= o.ref_len;
    return *this;
  }
};

inline BleuStats sentence_bleu_stats(const std::vector<std::string>& hyp,
                                     const std::vector<std::string>& ref,
                                     std::size_t max_n = 4) {
  BleuStats s(max_n);
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto hc = detail::ngram_counts(hyp, n);
    if (hc.empty()) continue;
    const auto rc = detail::ngram_counts(ref, n);
    for (const auto& [gram, c] : hc) {
      s.totals[n - 1] += c;
      auto it = rc.find(gram);
      if (it != rc.end()) s.matches[n - 1] += std::min(c, it->second);
    }
  }
  return s;
}

// Score from pooled statistics: geometric mean of clipped precisions over
// the orders that have any n-grams, times the brevity penalty. With
// smoothing=none any zero precision zeroes the score; add1 smooths orders
// >= 2 only (so identity still scores exactly 1).
inline BleuResult bleu_from_stats(const BleuStats& stats,
                                  BleuSmoothing smoothing =
                                      BleuSmoothing::none) {
  const std::size_t max_n = stats.totals.size();
  BleuResult r;
  r.matches = stats.matches;
  r.totals = stats.totals;
  r.hyp_len = stats.hyp_len;
  r.ref_len = stats.ref_len;
  r.precisions.assign(max_n, 0.0);
  double log_sum = 0;
  std::size_t used = 0;
  bool zero = false;
  for (std::size_t n = 1; n <= max_n; ++n) {
    if (r.totals[n - 1] == 0) continue;  // order impossible at these lengths
    double p;
    if (smoothing == BleuSmoothing::add1 && n >= 2)
      p = (static_cast<double>(r.matches[n - 1]) + 1.0) /
          (static_cast<double>(r.totals[n - 1]) + 1.0);
    else
      p = static_cast<double>(r.matches[n - 1]) /
          static_cast<double>(r.totals[n - 1]);
    r.precisions[n - 1] = p;
    if (p <= 0) zero = true;
    else log_sum += std::log(p);
    ++used;
  }
  if (r.hyp_len == 0 || used == 0 || zero) {
    r.brevity_penalty = 0;
    r.score = 0;
    return r;
  }
  r.brevity_penalty =
      r.hyp_len < r.ref_len
          ? std::exp(1.0 - static_cast<double>(r.ref_len) /
                               static_cast<double>(r.hyp_len))
          : 1.0;
  r.score = r.brevity_penalty * std::exp(log_sum / static_cast<double>(used));
  return r;
}

inline BleuResult bleu(const std::vector<std::vector<std::string>>& hyps,
                       const std::vector<std::vector<std::string>>& refs,
                       std::size_t max_n = 4,
                       BleuSmoothing smoothing = BleuSmoothing::none) {
  if (hyps.size() != refs.size())
    fail("bleu: " + std::to_string(hyps.size()) + " hypotheses vs " +
         std::to_string(refs.size()) + " references");
  if (max_n < 1) fail("bleu: max_n must be >= 1");
  BleuStats total(max_n);
  for (std::size_t k = 0; k < hyps.size(); ++k)
    total += sentence_bleu_stats(hyps[k], refs[k], max_n);
  return bleu_from_stats(total, smoothing);
}

// ---------------------------------------------------------------------------
// TER
// ---------------------------------------------------------------------------

struct TerOptions {
  bool enable_shifts = true;
  std::size_t max_block = 10;
  std::size_t max_shifts = 50;
};

struct TerResult {
  std::size_t edits = 0;   // shifts + remaining edit distance
  std::size_t shifts = 0;
  std::size_t ref_len = 0;
  double score = 0;        // edits / ref_len
};

inline std::size_t edit_distance(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Greedy-shift TER: repeatedly apply the block shift (block must match the
// reference at its destination exactly) that most reduces the word edit
// distance; each shift costs 1. Ties break to the smallest block start,
// shortest block, then smallest destination.
inline TerResult ter(const std::vector<std::string>& hyp,
                     const std::vector<std::string>& ref,
                     const TerOptions& opt = {}) {
  if (ref.empty()) fail("ter: empty reference");
  TerResult result;
  result.ref_len = ref.size();

  std::vector<std::string> cur = hyp;
  std::size_t cur_ed = edit_distance(cur, ref);
  while (opt.enable_shifts && result.shifts < opt.max_shifts && cur_ed > 0) {
    std::size_t best_ed = cur_ed;
    std::vector<std::string> best_seq;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const std::size_t max_len = std::min(opt.max_block, cur.size() - i);
      for (std::size_t len = 1; len <= max_len; ++len) {
        // Does the block occur in the reference?
        for (std::size_t j = 0; j + len <= ref.size(); ++j) {
          bool match = true;
          for (std::size_t t = 0; t < len && match; ++t)
            match = cur[i + t] == ref[j + t];
          if (!match) continue;
          std::vector<std::string> moved(cur.begin(),
                                         cur.begin() + static_cast<long>(i));
          moved.insert(moved.end(),
                       cur.begin() + static_cast<long>(i + len), cur.end());
          const std::size_t pos = std::min(j, moved.size());
          moved.insert(moved.begin() + static_cast<long>(pos),
                       cur.begin() + static_cast<long>(i),
                       cur.begin() + static_cast<long>(i + len));
          if (moved == cur) continue;
          const std::size_t ed = edit_distance(moved, ref);
          if (ed < best_ed) {
            best_ed = ed;
            best_seq = std::move(moved);
          }
        }
      }
    }
    if (best_ed >= cur_ed) break;  // no strictly improving shift
    cur = std::move(best_seq);
    cur_ed = best_ed;
    result.shifts++;
  }
  result.edits = result.shifts + cur_ed;
  result.score =
      static_cast<double>(result.edits) / static_cast<double>(ref.size());
  return result;
}

// ---------------------------------------------------------------------------
// METEOR (simplified: exact surface matches only)
// ---------------------------------------------------------------------------

struct MeteorResult {
  double score = 0;
  double precision = 0, recall = 0, fmean = 0, penalty = 0;
  std::size_t matches = 0, chunks = 0;
};

inline MeteorResult meteor_lite(const std::vector<std::string>& hyp,
                                const std::vector<std::string>& ref,
                                double alpha = 0.9, double beta = 3.0,
                                double gamma = 0.5) {
  MeteorResult r;
  std::map<std::string, std::size_t> hyp_count, ref_count;
  for (const auto& w : hyp) hyp_count[w]++;
  for (const auto& w : ref) ref_count[w]++;
  std::map<std::string, std::size_t> quota;  // matched occurrences per type
  std::size_t m = 0;
  for (const auto& [w, hc] : hyp_count) {
    auto it = ref_count.find(w);
    if (it == ref_count.end()) continue;
    quota[w] = std::min(hc, it->second);
    m += quota[w];
  }
  r.matches = m;
  if (m == 0) return r;

  // Align matched hypothesis tokens (first occurrences, left to right) to
  // reference positions, preferring the position that continues the current
  // chunk; chunks require adjacency on both sides.
  std::vector<bool> ref_used(ref.size(), false);
  long prev_hyp = -2, prev_ref = -2;
  std::size_t chunks = 0;
  auto remaining = quota;
  for (std::size_t h = 0; h < hyp.size(); ++h) {
    auto q = remaining.find(hyp[h]);
    if (q == remaining.end() || q->second == 0) continue;
    q->second--;
    long pick = -1;
    const long cont = prev_ref + 1;
    if (cont >= 0 && cont < static_cast<long>(ref.size()) &&
        !ref_used[static_cast<std::size_t>(cont)] &&
        ref[static_cast<std::size_t>(cont)] == hyp[h])
      pick = cont;
    else
      for (std::size_t j = 0; j < ref.size(); ++j)
        if (!ref_used[j] && ref[j] == hyp[h]) {
          pick = static_cast<long>(j);
          break;
        }
    ref_used[static_cast<std::size_t>(pick)] = true;
    if (static_cast<long>(h) != prev_hyp + 1 || pick != prev_ref + 1)
      ++chunks;
    prev_hyp = static_cast<long>(h);
    prev_ref = pick;
  }
  r.chunks = chunks;

  r.precision = static_cast<double>(m) / static_cast<double>(hyp.size());
  r.recall = static_cast<double>(m) / static_cast<double>(ref.size());
  r.fmean = r.precision * r.recall /
            (alpha * r.precision + (1 - alpha) * r.recall);
  r.penalty = gamma * std::pow(static_cast<double>(chunks) /
                                   static_cast<double>(m),
                               beta);
  r.score = r.fmean * (1 - r.penalty);
  return r;
}

// ---------------------------------------------------------------------------
// Corpus evaluation and reports. BLEU and TER are conventionally reported
// x100, METEOR on its 0-1 scale.
// ---------------------------------------------------------------------------

struct SentenceEval {
  TerResult ter;
  MeteorResult meteor;
};

struct EvalReport {
  BleuResult bleu;          // corpus-pooled, unsmoothed
  double ter = 0;           // total edits / total reference length
  double meteor = 0;        // mean of per-sentence scores
  std::size_t total_edits = 0, total_ref_len = 0;
  std::size_t total_matches = 0, total_chunks = 0;
  std::vector<SentenceEval> per_sentence;
};

inline EvalReport evaluate_corpus(
    const std::vector<std::vector<std::string>>& hyps,
    const std::vector<std::vector<std::string>>& refs) {
  if (hyps.size() != refs.size())
    fail("evaluate: " + std::to_string(hyps.size()) + " hypotheses vs " +
         std::to_string(refs.size()) + " references");
  if (hyps.empty()) fail("evaluate: empty corpus");
  EvalReport report;
  report.bleu = bleu(hyps, refs, 4, BleuSmoothing::none);
  double meteor_sum = 0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    SentenceEval se;
    se.ter = ter(hyps[k], refs[k]);
    se.meteor = meteor_lite(hyps[k], refs[k]);
    report.total_edits += se.ter.edits;
    report.total_ref_len += se.ter.ref_len;
    report.total_matches += se.meteor.matches;
    report.total_chunks += se.meteor.chunks;
    meteor_sum += se.meteor.score;
    report.per_sentence.push_back(std::move(se));
  }
  report.ter = static_cast<double>(report.total_edits) /
               static_cast<double>(report.total_ref_len);
  report.meteor = meteor_sum / static_cast<double>(hyps.size());
  return report;
}

inline EvalReport evaluate_files(const std::string& hyp_path,
                                 const std::string& ref_path) {
  const auto hyp_lines = read_lines(hyp_path);
  const auto ref_lines = read_lines(ref_path);
  if (hyp_lines.size() != ref_lines.size())
    fail("evaluate: " + hyp_path + " has " +
         std::to_string(hyp_lines.size()) + " lines but " + ref_path +
         " has " + std::to_string(ref_lines.size()));
  std::vector<std::vector<std::string>> hyps, refs;
  for (const auto& l : hyp_lines) hyps.push_back(split_whitespace(l));
  for (const auto& l : ref_lines) refs.push_back(split_whitespace(l));
  return evaluate_corpus(hyps, refs);
}

// Text table: one row per configuration, three metric columns.
inline std::string format_report_table(
    const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::size_t name_w = std::string("configuration").size();
  for (const auto& [name, rep] : rows) name_w = std::max(name_w, name.size());
  auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  std::string out = pad("configuration", name_w) + "  " +
                    pad("BLEU score", 10) + "  " + pad("METEOR", 6) + "  " +
                    "TER\n";
  for (const auto& [name, rep] : rows) {
    out += pad(name, name_w) + "  " +
           pad(format_fixed(rep.bleu.score * 100, 2), 10) + "  " +
           pad(format_fixed(rep.meteor, 3), 6) + "  " +
           format_fixed(rep.ter * 100, 2) + "\n";
  }
  return out;
}

inline std::string format_report_tsv(const EvalReport& report) {
  std::string out;
  out += "bleu\t" + format_double(report.bleu.score * 100) + "\n";
  out += "meteor\t" + format_double(report.meteor) + "\n";
  out += "ter\t" + format_double(report.ter * 100) + "\n";
  return out;
}

}  // namespace smt
