#pragma once

// Stack/beam decoder over phrase segmentations under a 7-feature log-linear
// model, with hypothesis recombination, future-cost pruning, and n-best
// extraction.
//
// Feature order (fixed): phrase_fwd, lex_fwd, phrase_bwd, lex_bwd, lm,
// word_penalty, distortion. Phrase and LM features are natural logs;
// word_penalty is the target length; distortion is the negative jump
// distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "smt/lm.hpp"
#include "smt/phrase.hpp"
#include "smt/util.hpp"

namespace smt {

inline constexpr std::size_t kNumFeatures = 7;
using FeatureVector = std::array<double, kNumFeatures>;

enum : std::size_t {
  kFeatPhraseFwd = 0,
  kFeatLexFwd = 1,
  kFeatPhraseBwd = 2,
  kFeatLexBwd = 3,
  kFeatLm = 4,
  kFeatWordPenalty = 5,
  kFeatDistortion = 6,
};

inline const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = {
      "phrase_fwd", "lex_fwd", "phrase_bwd", "lex_bwd",
      "lm",         "word_penalty", "distortion"};
  return names;
}

struct WeightVector {
  FeatureVector values = {0.2, 0.2, 0.2, 0.2, 0.5, -0.3, 0.3};

  double dot(const FeatureVector& f) const {
    double s = 0;
    for (std::size_t i = 0; i < kNumFeatures; ++i) s += values[i] * f[i];
    return s;
  }

  void validate() const {
    for (double v : values)
      if (!std::isfinite(v)) fail("weights must be finite");
  }
};

struct DecoderConfig {
  std::size_t beam_size = 100;
  long distortion_limit = 6;  // -1 = unlimited
  std::size_t max_phrase_len = 7;
  std::size_t top_k = 20;  // translation options kept per source span

  void validate() const {
    if (beam_size < 1) fail("decoder: beam_size must be >= 1");
    if (max_phrase_len < 1) fail("decoder: max_phrase_len must be >= 1");
    if (top_k < 1) fail("decoder: top_k must be >= 1");
    if (distortion_limit < -1) fail("decoder: bad distortion_limit");
  }
};

// One applicable translation option for a source span [begin, end).
struct TransOption {
  std::size_t begin = 0, end = 0;
  std::vector<std::string> target;
  // Natural logs of the four phrase-table scores.
  std::array<double, 4> log_scores = {0, 0, 0, 0};
  bool oov = false;
};

// Table lookups for every span up to max_phrase_len; any source position not
// covered by at least one option gets a synthetic identity option with floor
// scores so decoding never dies on OOV tokens.
inline std::vector<TransOption> build_options(
    const std::vector<std::string>& tokens, const PhraseTable& table,
    const DecoderConfig& config = {}) {
  config.validate();
  std::vector<TransOption> out;
  std::vector<bool> covered(tokens.size(), false);
  for (std::size_t begin = 0; begin < tokens.size(); ++begin) {
    std::vector<std::string> span;
    for (std::size_t end = begin + 1;
         end <= tokens.size() && end - begin <= config.max_phrase_len;
         ++end) {
      span.push_back(tokens[end - 1]);
      for (const auto& po : table.lookup(join(span), config.top_k)) {
        TransOption o;
        o.begin = begin;
        o.end = end;
        o.target = po.target;
        o.log_scores = {std::log(po.phrase_fwd), std::log(po.lex_fwd),
                        std::log(po.phrase_bwd), std::log(po.lex_bwd)};
        out.push_back(std::move(o));
        for (std::size_t i = begin; i < end; ++i) covered[i] = true;
      }
    }
  }
  const double floor_log = std::log(kLexFloor);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (covered[i]) continue;
    TransOption o;
    o.begin = i;
    o.end = i + 1;
    o.target = {tokens[i]};
    o.log_scores = {floor_log, floor_log, floor_log, floor_log};
    o.oov = true;
    out.push_back(std::move(o));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TransOption& a, const TransOption& b) {
                     if (a.begin != b.begin) return a.begin < b.begin;
                     return a.end < b.end;
                   });
  return out;
}

// Weighted score of an option ignoring context: the four phrase features,
// word penalty, and a context-free LM estimate of the target. Used by the
// future-cost heuristic.
inline double option_local_score(const TransOption& o, const NgramLm& lm,
                                 const WeightVector& weights) {
  double s = 0;
  for (std::size_t i = 0; i < 4; ++i) s += weights.values[i] * o.log_scores[i];
  s += weights.values[kFeatWordPenalty] * static_cast<double>(o.target.size());
  double lm_est = 0;
  std::vector<std::string> prefix;
  for (const auto& w : o.target) {
    lm_est += lm.score_estimate(prefix, w);
    prefix.push_back(w);
  }
  s += weights.values[kFeatLm] * lm_est;
  return s;
}

// Best achievable span scores: fc[i][j] covers source span [i, j) by one
// option or any split; distortion is ignored (estimate, not bound).
inline std::vector<std::vector<double>> future_cost(
    const std::vector<std::string>& tokens,
    const std::vector<TransOption>& options, const NgramLm& lm,
    const WeightVector& weights) {
  const std::size_t n = tokens.size();
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> fc(n + 1, std::vector<double>(n + 1, ninf));
  for (const auto& o : options)
    fc[o.begin][o.end] =
        std::max(fc[o.begin][o.end], option_local_score(o, lm, weights));
  for (std::size_t len = 2; len <= n; ++len)
    for (std::size_t i = 0; i + len <= n; ++i) {
      const std::size_t j = i + len;
      for (std::size_t m = i + 1; m < j; ++m)
        if (fc[i][m] > ninf && fc[m][j] > ninf)
          fc[i][j] = std::max(fc[i][j], fc[i][m] + fc[m][j]);
    }
  return fc;
}

// A complete decoding result: the target tokens, the 7 accumulated features,
// their weighted score, and the applied phrases in application order.
struct Derivation {
  double score = 0;
  FeatureVector features = {0, 0, 0, 0, 0, 0, 0};
  std::vector<std::string> target;
  std::vector<TransOption> phrases;
};

namespace detail {

struct SearchEdge {
  long parent = -1;
  std::size_t option = 0;
  FeatureVector delta = {0, 0, 0, 0, 0, 0, 0};
  double delta_score = 0;
};

struct SearchState {
  std::string coverage;  // '0'/'1' per source position
  std::vector<std::string> lm_ctx;
  long last_end = -1;  // inclusive source index of the newest phrase
  std::size_t covered = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<SearchEdge> edges;
  bool alive = false;
  std::string key;
};

inline std::string state_key(const std::string& coverage,
                             const std::vector<std::string>& lm_ctx,
                             long last_end) {
  return coverage + '\x1f' + join(lm_ctx) + '\x1f' + std::to_string(last_end);
}

// Derivations ordered by score desc, then shorter target, then lexicographic
// target — the tie-break contract everywhere.
struct DerivCandidate {
  double score = 0;
  FeatureVector features = {0, 0, 0, 0, 0, 0, 0};
  std::vector<std::string> target;
  std::vector<std::size_t> options;  // indices of applied options, in order
};

inline bool deriv_before(const DerivCandidate& a, const DerivCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.target.size() != b.target.size())
    return a.target.size() < b.target.size();
  return join(a.target) < join(b.target);
}

class Search {
 public:
  Search(const std::vector<std::string>& tokens, const PhraseTable& table,
         const NgramLm& lm, const WeightVector& weights,
         const DecoderConfig& config)
      : tokens_(tokens), lm_(lm), weights_(weights), config_(config) {
    config_.validate();
    weights_.validate();
    options_ = build_options(tokens, table, config_);
    fc_ = future_cost(tokens, options_, lm, weights_);
  }

  std::vector<Derivation> run(std::size_t nbest) {
    const std::size_t n = tokens_.size();
    stacks_.assign(n + 1, {});
    states_.clear();
    index_.clear();

    SearchState init;
    init.coverage.assign(n, '0');
    init.lm_ctx.assign(lm_.order() > 0 ? lm_.order() - 1 : 0, kSentStart);
    init.last_end = -1;
    init.covered = 0;
    init.best_score = 0;
    init.key = state_key(init.coverage, init.lm_ctx, init.last_end);
    index_[init.key] = 0;
    states_.push_back(std::move(init));
    stacks_[0].push_back(0);

    for (std::size_t k = 0; k <= n; ++k) {
      prune_stack(k);
      if (k == n) break;
      for (std::size_t sid : stacks_[k]) {
        if (!states_[sid].alive) continue;
        extend(sid);
      }
    }

    // Gather complete hypotheses; apply the </s> completion per state.
    std::vector<DerivCandidate> pool;
    for (std::size_t sid : stacks_[n]) {
      const auto& st = states_[sid];
      if (!st.alive) continue;
      const double lm_done = lm_.score_continuation(st.lm_ctx, kSentEnd);
      for (const auto& d : derivations(sid, nbest)) {
        DerivCandidate c = d;
        c.features[kFeatLm] += lm_done;
        c.score += weights_.values[kFeatLm] * lm_done;
        pool.push_back(std::move(c));
      }
    }
    if (pool.empty()) {
      std::size_t best_sid = 0;
      for (std::size_t sid = 0; sid < states_.size(); ++sid)
        if (states_[sid].alive &&
            states_[sid].covered >= states_[best_sid].covered)
          best_sid = sid;
      fail("decoder: no complete hypothesis; stuck at coverage " +
           states_[best_sid].coverage + " (distortion_limit=" +
           std::to_string(config_.distortion_limit) + ")");
    }
    std::stable_sort(pool.begin(), pool.end(), deriv_before);
    std::vector<Derivation> out;
    std::set<std::string> seen;
    for (const auto& c : pool) {
      if (!seen.insert(join(c.target)).second) continue;
      Derivation d;
      d.score = c.score;
      d.features = c.features;
      d.target = c.target;
      for (std::size_t oi : c.options) d.phrases.push_back(options_[oi]);
      out.push_back(std::move(d));
      if (out.size() >= nbest) break;
    }
    return out;
  }

 private:
  void prune_stack(std::size_t k) {
    auto& stack = stacks_[k];
    std::stable_sort(stack.begin(), stack.end(),
                     [&](std::size_t a, std::size_t b) {
                       const double pa = prune_score(a), pb = prune_score(b);
                       if (pa != pb) return pa > pb;
                       return states_[a].key < states_[b].key;
                     });
    for (std::size_t i = 0; i < stack.size(); ++i)
      states_[stack[i]].alive = i < config_.beam_size;
  }

  double prune_score(std::size_t sid) const {
    const auto& st = states_[sid];
    double future = 0;
    std::size_t i = 0;
    const std::size_t n = st.coverage.size();
    while (i < n) {
      if (st.coverage[i] == '1') {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < n && st.coverage[j] == '0') ++j;
      future += fc_[i][j];
      i = j;
    }
    return st.best_score + future;
  }

  void extend(std::size_t sid) {
    // states_ may reallocate while we create successors; copy what we need.
    const std::string coverage = states_[sid].coverage;
    const std::vector<std::string> lm_ctx = states_[sid].lm_ctx;
    const long last_end = states_[sid].last_end;
    const double base_score = states_[sid].best_score;
    (void)base_score;

    for (std::size_t oi = 0; oi < options_.size(); ++oi) {
      const auto& o = options_[oi];
      bool free = true;
      for (std::size_t i = o.begin; i < o.end && free; ++i)
        free = coverage[i] == '0';
      if (!free) continue;
      const long jump =
          std::labs(static_cast<long>(o.begin) - (last_end + 1));
      if (config_.distortion_limit >= 0 && jump > config_.distortion_limit)
        continue;

      SearchEdge e;
      e.parent = static_cast<long>(sid);
      e.option = oi;
      for (std::size_t f = 0; f < 4; ++f) e.delta[f] = o.log_scores[f];
      e.delta[kFeatWordPenalty] = static_cast<double>(o.target.size());
      e.delta[kFeatDistortion] = -static_cast<double>(jump);
      std::vector<std::string> ctx = lm_ctx;
      double lm_delta = 0;
      for (const auto& w : o.target) {
        lm_delta += lm_.score_continuation(ctx, w);
        push_ctx(ctx, w);
      }
      e.delta[kFeatLm] = lm_delta;
      e.delta_score = weights_.dot(e.delta);

      std::string cov = coverage;
      for (std::size_t i = o.begin; i < o.end; ++i) cov[i] = '1';
      const long new_last = static_cast<long>(o.end) - 1;
      const std::string key = state_key(cov, ctx, new_last);
      auto [it, inserted] = index_.try_emplace(key, states_.size());
      if (inserted) {
        SearchState st;
        st.coverage = std::move(cov);
        st.lm_ctx = std::move(ctx);
        st.last_end = new_last;
        st.covered = static_cast<std::size_t>(
            std::count(st.coverage.begin(), st.coverage.end(), '1'));
        st.key = key;
        states_.push_back(std::move(st));
        stacks_[states_.back().covered].push_back(it->second);
      }
      auto& succ = states_[it->second];
      succ.best_score = std::max(succ.best_score,
                                 states_[sid].best_score + e.delta_score);
      succ.edges.push_back(std::move(e));
    }
  }

  void push_ctx(std::vector<std::string>& ctx, const std::string& w) const {
    if (lm_.order() <= 1) return;
    ctx.push_back(w);
    if (ctx.size() > lm_.order() - 1) ctx.erase(ctx.begin());
  }

  // Top-`want` prefix derivations reaching a state, memoized over the
  // acyclic recombination graph.
  const std::vector<DerivCandidate>& derivations(std::size_t sid,
                                                 std::size_t want) {
    if (memo_.size() < states_.size()) memo_.resize(states_.size());
    auto& slot = memo_[sid];
    if (slot) return *slot;
    std::vector<DerivCandidate> result;
    if (states_[sid].edges.empty()) {
      result.push_back({});  // the initial state: empty prefix, score 0
    } else {
      const auto edges = states_[sid].edges;  // copy: recursion grows memo_
      for (const auto& e : edges) {
        const auto& parents =
            derivations(static_cast<std::size_t>(e.parent), want);
        for (const auto& pd : parents) {
          DerivCandidate c = pd;
          c.score += e.delta_score;
          for (std::size_t f = 0; f < kNumFeatures; ++f)
            c.features[f] += e.delta[f];
          const auto& tgt = options_[e.option].target;
          c.target.insert(c.target.end(), tgt.begin(), tgt.end());
          c.options.push_back(e.option);
          result.push_back(std::move(c));
        }
      }
      std::stable_sort(result.begin(), result.end(), deriv_before);
      if (result.size() > want) result.resize(want);
    }
    slot = std::move(result);
    return *memo_[sid];
  }

  std::vector<std::string> tokens_;
  NgramLm lm_;
  WeightVector weights_;
  DecoderConfig config_;
  std::vector<TransOption> options_;
  std::vector<std::vector<double>> fc_;
  std::vector<SearchState> states_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> stacks_;
  std::vector<std::optional<std::vector<DerivCandidate>>> memo_;
};

}  // namespace detail

// Up to n highest-scoring distinct translations, best first. Ties: shorter
// target, then lexicographic.
inline std::vector<Derivation> nbest(const std::vector<std::string>& sentence,
                                     const PhraseTable& table,
                                     const NgramLm& lm,
                                     const WeightVector& weights,
                                     const DecoderConfig& config,
                                     std::size_t n) {
  if (n < 1) fail("nbest: n must be >= 1");
  detail::Search search(sentence, table, lm, weights, config);
  return search.run(n);
}

inline Derivation decode(const std::vector<std::string>& sentence,
                         const PhraseTable& table, const NgramLm& lm,
                         const WeightVector& weights,
                         const DecoderConfig& config = {}) {
  return nbest(sentence, table, lm, weights, config, 1).front();
}

// ---------------------------------------------------------------------------
// Weights and n-best serialization.
// ---------------------------------------------------------------------------

inline void save_weights(const WeightVector& w, const std::string& path) {
  std::string out;
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    out += feature_names()[i] + "\t" + format_double(w.values[i], 17) + "\n";
  write_file(path, out);
}

inline WeightVector load_weights(const std::string& path) {
  WeightVector w;
  std::vector<bool> seen(kNumFeatures, false);
  const auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty() || lines[n][0] == '#') continue;
    const auto f = split_char(lines[n], '\t');
    if (f.size() != 2)
      fail(path + ": line " + std::to_string(n + 1) +
           ": expected `name<TAB>value`");
    bool known = false;
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      if (f[0] != feature_names()[i]) continue;
      try {
        w.values[i] = std::stod(f[1]);
      } catch (const std::exception&) {
        fail(path + ": line " + std::to_string(n + 1) + ": bad value");
      }
      seen[i] = true;
      known = true;
    }
    if (!known) fail(path + ": unknown feature '" + f[0] + "'");
  }
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (!seen[i]) fail(path + ": missing feature '" + feature_names()[i] + "'");
  w.validate();
  return w;
}

inline std::string format_nbest_line(std::size_t sentence_id,
                                     const Derivation& d) {
  std::string out = std::to_string(sentence_id) + " ||| " + join(d.target) +
                    " ||| ";
  std::vector<std::string> feats;
  for (double f : d.features) feats.push_back(format_double(f));
  out += join(feats) + " ||| " + format_double(d.score);
  return out;
}

}  // namespace smt
