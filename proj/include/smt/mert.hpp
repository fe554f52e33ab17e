#pragma once

// MERT: minimum-error-rate tuning of the 7 log-linear weights by n-best
// rescoring with an exact line search over per-sentence upper envelopes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "smt/decoder.hpp"
#include "smt/metrics.hpp"
#include "smt/util.hpp"

namespace smt {

// One pooled n-best entry: features, target, and the precomputed BLEU
// sufficient statistics against its sentence's reference.
struct PoolEntry {
  FeatureVector features = {0, 0, 0, 0, 0, 0, 0};
  std::vector<std::string> target;
  BleuStats stats;
};

inline PoolEntry make_pool_entry(const FeatureVector& features,
                                 std::vector<std::string> target,
                                 const std::vector<std::string>& reference) {
  PoolEntry e;
  e.features = features;
  e.stats = sentence_bleu_stats(target, reference);
  e.target = std::move(target);
  return e;
}

// Corpus BLEU of the per-sentence argmax selection under `weights` (ties:
// lowest pool index). This is the quantity the tuner maximizes.
inline double pool_bleu(const std::vector<std::vector<PoolEntry>>& pools,
                        const WeightVector& weights,
                        BleuSmoothing smoothing = BleuSmoothing::add1) {
  BleuStats total;
  for (const auto& pool : pools) {
    if (pool.empty()) fail("tuning pool is empty");
    std::size_t best = 0;
    double best_score = weights.dot(pool[0].features);
    for (std::size_t i = 1; i < pool.size(); ++i) {
      const double s = weights.dot(pool[i].features);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    total += pool[best].stats;
  }
  return bleu_from_stats(total, smoothing).score;
}

struct LineSearchResult {
  double gamma = 0;
  double bleu = 0;
};

// Exact search along weights + gamma*direction. Each hypothesis's score is
// linear in gamma; per sentence the argmax traces the upper envelope of
// those lines, so corpus BLEU is piecewise constant with breakpoints at
// envelope intersections. Scans every interval (candidate = midpoint, or one
// beyond the outermost breakpoints) updating pooled BLEU statistics
// incrementally. Ties prefer smaller |gamma|, then smaller gamma.
inline LineSearchResult line_search(
    const std::vector<std::vector<PoolEntry>>& pools,
    const WeightVector& weights, const FeatureVector& direction,
    BleuSmoothing smoothing = BleuSmoothing::add1) {
  bool nonzero = false;
  for (double d : direction) nonzero = nonzero || d != 0;
  if (!nonzero) fail("line_search: direction is zero");

  struct Event {
    double x;
    std::size_t sentence;
    std::size_t from, to;  // pool indices whose selection changes at x
  };
  std::vector<Event> events;
  BleuStats total;

  for (std::size_t s = 0; s < pools.size(); ++s) {
    const auto& pool = pools[s];
    if (pool.empty()) fail("tuning pool is empty");
    // Lines (slope, intercept) per hypothesis; keep, per slope, only the
    // highest intercept (tie: lowest pool index).
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) order[i] = i;
    std::vector<double> slope(pool.size()), icept(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double b = 0;
      for (std::size_t f = 0; f < kNumFeatures; ++f)
        b += direction[f] * pool[i].features[f];
      slope[i] = b;
      icept[i] = weights.dot(pool[i].features);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (slope[a] != slope[b]) return slope[a] < slope[b];
      if (icept[a] != icept[b]) return icept[a] > icept[b];
      return a < b;
    });

    // Upper envelope: (pool index, interval start).
    std::vector<std::pair<std::size_t, double>> hull;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
      const std::size_t i = order[oi];
      if (!hull.empty() && slope[hull.back().first] == slope[i])
        continue;  // same slope, lower (or equal) intercept: never wins
      double x = -std::numeric_limits<double>::infinity();
      while (!hull.empty()) {
        const std::size_t top = hull.back().first;
        x = (icept[top] - icept[i]) / (slope[i] - slope[top]);
        if (x > hull.back().second) break;
        hull.pop_back();
        x = -std::numeric_limits<double>::infinity();
      }
      hull.push_back({i, x});
    }

    total += pool[hull.front().first].stats;
    for (std::size_t h = 1; h < hull.size(); ++h)
      events.push_back(
          {hull[h].second, s, hull[h - 1].first, hull[h].first});
  }

  auto better = [](const LineSearchResult& a, const LineSearchResult& b) {
    if (a.bleu != b.bleu) return a.bleu > b.bleu;
    if (std::abs(a.gamma) != std::abs(b.gamma))
      return std::abs(a.gamma) < std::abs(b.gamma);
    return a.gamma < b.gamma;
  };

  if (events.empty())
    return {0.0, bleu_from_stats(total, smoothing).score};

  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.sentence != b.sentence) return a.sentence < b.sentence;
    return a.to < b.to;
  });

  LineSearchResult best{events.front().x - 1.0,
                        bleu_from_stats(total, smoothing).score};
  std::size_t e = 0;
  while (e < events.size()) {
    const double x = events[e].x;
    while (e < events.size() && events[e].x == x) {
      total -= pools[events[e].sentence][events[e].from].stats;
      total += pools[events[e].sentence][events[e].to].stats;
      ++e;
    }
    const double next = e < events.size()
                            ? events[e].x
                            : std::numeric_limits<double>::infinity();
    const double gamma = std::isinf(next) ? x + 1.0 : (x + next) / 2.0;
    LineSearchResult cand{gamma, bleu_from_stats(total, smoothing).score};
    if (better(cand, best)) best = cand;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Outer tuning loop.
// ---------------------------------------------------------------------------

// Produces up to n scored derivations for one source sentence under the
// given weights. Throwing marks the sentence as failed for this run.
using NBestFn = std::function<std::vector<Derivation>(
    const std::vector<std::string>& source, const WeightVector& weights,
    std::size_t n)>;

struct TuneOptions {
  std::size_t outer_iters = 10;
  std::size_t nbest_size = 100;
  std::size_t random_directions = 8;
  std::uint64_t seed = 1;
  double min_gain = 1e-4;
  BleuSmoothing smoothing = BleuSmoothing::add1;

  void validate() const {
    if (nbest_size < 1) fail("tune: nbest_size must be >= 1");
    if (min_gain < 0) fail("tune: min_gain must be >= 0");
  }
};

struct TuneResult {
  WeightVector weights;
  // Best pool BLEU achieved up to each completed outer iteration;
  // non-decreasing because steps are only accepted on improvement.
  std::vector<double> bleu_history;
  std::vector<WeightVector> weight_history;  // after each iteration
  std::size_t failed_sentences = 0;
  std::size_t iterations = 0;
};

inline TuneResult tune(const std::vector<std::vector<std::string>>& dev_source,
                       const std::vector<std::vector<std::string>>& dev_refs,
                       const NBestFn& nbest_fn, const WeightVector& init,
                       const TuneOptions& opt = {}) {
  opt.validate();
  init.validate();
  if (dev_source.empty()) fail("tune: empty dev corpus");
  if (dev_source.size() != dev_refs.size())
    fail("tune: " + std::to_string(dev_source.size()) + " sources vs " +
         std::to_string(dev_refs.size()) + " references");

  TuneResult result;
  result.weights = init;
  Rng rng(opt.seed);

  std::vector<std::vector<PoolEntry>> pools(dev_source.size());
  std::vector<std::set<std::string>> seen(dev_source.size());
  std::vector<bool> failed(dev_source.size(), false);
  double running_best = -1;

  for (std::size_t iter = 0; iter < opt.outer_iters; ++iter) {
    for (std::size_t s = 0; s < dev_source.size(); ++s) {
      if (failed[s]) continue;
      std::vector<Derivation> derivs;
      try {
        derivs = nbest_fn(dev_source[s], result.weights, opt.nbest_size);
      } catch (const std::exception&) {
        failed[s] = true;
        result.failed_sentences++;
        pools[s].clear();
        continue;
      }
      for (auto& d : derivs) {
        if (!seen[s].insert(join(d.target)).second) continue;
        pools[s].push_back(make_pool_entry(d.features, std::move(d.target),
                                           dev_refs[s]));
      }
    }

    std::vector<std::vector<PoolEntry>> active;
    for (std::size_t s = 0; s < pools.size(); ++s)
      if (!failed[s] && !pools[s].empty()) active.push_back(pools[s]);
    if (active.empty()) fail("tune: every dev sentence failed to decode");

    const double base = pool_bleu(active, result.weights, opt.smoothing);
    if (running_best < 0) running_best = base;
    running_best = std::max(running_best, base);

    // Candidate directions: the 7 coordinates plus seeded random ones.
    std::vector<FeatureVector> directions;
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      FeatureVector d{};
      d[f] = 1.0;
      directions.push_back(d);
    }
    for (std::size_t rd = 0; rd < opt.random_directions; ++rd) {
      FeatureVector d{};
      for (std::size_t f = 0; f < kNumFeatures; ++f)
        d[f] = rng.next_signed_unit();
      directions.push_back(d);
    }

    WeightVector best_w = result.weights;
    double best_achieved = running_best;
    for (const auto& d : directions) {
      const auto ls = line_search(active, result.weights, d, opt.smoothing);
      if (ls.bleu <= best_achieved) continue;
      WeightVector cand = result.weights;
      for (std::size_t f = 0; f < kNumFeatures; ++f)
        cand.values[f] += ls.gamma * d[f];
      // Verify against the canonical selection rule before accepting.
      const double achieved = pool_bleu(active, cand, opt.smoothing);
      if (achieved > best_achieved) {
        best_achieved = achieved;
        best_w = cand;
      }
    }

    const double gain = best_achieved - running_best;
    if (best_achieved > running_best) {
      result.weights = best_w;
      running_best = best_achieved;
    }
    result.bleu_history.push_back(running_best);
    result.weight_history.push_back(result.weights);
    result.iterations = iter + 1;
    if (gain < opt.min_gain) break;
  }
  return result;
}

// Tuning log: one `iteration<TAB>pool_bleu<TAB>w0 .. w6` line per completed
// iteration.
inline std::string format_tuning_log(const TuneResult& r) {
  std::string out;
  for (std::size_t i = 0; i < r.bleu_history.size(); ++i) {
    out += std::to_string(i + 1) + "\t" + format_double(r.bleu_history[i]);
    std::vector<std::string> w;
    for (double v : r.weight_history[i].values)
      w.push_back(format_double(v, 17));
    out += "\t" + join(w) + "\n";
  }
  return out;
}

}  // namespace smt
