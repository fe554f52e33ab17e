#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "smt/mert.hpp"
#include "test_support.hpp"

using namespace smt;

namespace {

std::vector<std::string> toks(const std::string& s) {
  return split_whitespace(s);
}

// Build an entry whose model score along a coordinate-1 direction from
// weights (1,0,...) is exactly `icept + gamma * slope`.
PoolEntry line_entry(double icept, double slope, const std::string& target,
                     const std::string& ref) {
  return make_pool_entry({icept, slope, 0, 0, 0, 0, 0}, toks(target),
                         toks(ref));
}

WeightVector unit_w() {
  WeightVector w;
  w.values = {1, 0, 0, 0, 0, 0, 0};
  return w;
}

FeatureVector coord(std::size_t f) {
  FeatureVector d{};
  d[f] = 1.0;
  return d;
}

WeightVector step(const WeightVector& w, const FeatureVector& d, double g) {
  WeightVector out = w;
  for (std::size_t f = 0; f < kNumFeatures; ++f) out.values[f] += g * d[f];
  return out;
}

}  // namespace

TEST_CASE("line search picks the interval where the good entry wins") {
  // good: score 0.5 - gamma, matches the reference exactly.
  // bad:  score -0.5 + gamma, shares nothing with it.
  // They cross at gamma = 0.5; below it the good entry is selected.
  std::vector<std::vector<PoolEntry>> pools = {
      {line_entry(0.5, -1.0, "a b", "a b"),
       line_entry(-0.5, 1.0, "x y", "a b")}};
  const auto ls = line_search(pools, unit_w(), coord(1));
  REQUIRE(ls.bleu == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(ls.gamma == Catch::Approx(-0.5).margin(1e-12));
  REQUIRE(pool_bleu(pools, step(unit_w(), coord(1), ls.gamma)) ==
          Catch::Approx(ls.bleu).margin(1e-12));
}

TEST_CASE("line search with no crossings returns gamma zero") {
  // Identical feature vectors collapse onto one line: no breakpoints.
  std::vector<std::vector<PoolEntry>> pools = {
      {line_entry(0.25, 0.5, "x", "a b"), line_entry(0.25, 0.5, "a b", "a b")}};
  const auto ls = line_search(pools, unit_w(), coord(1));
  REQUIRE(ls.gamma == 0.0);
  REQUIRE(ls.bleu == 0.0);  // lowest-index entry wins the tie
}

TEST_CASE("line search rejects degenerate inputs") {
  std::vector<std::vector<PoolEntry>> pools = {
      {line_entry(0.0, 1.0, "a", "a")}};
  REQUIRE_THROWS_AS(line_search(pools, unit_w(), FeatureVector{}),
                    std::runtime_error);
  pools.push_back({});
  REQUIRE_THROWS_AS(line_search(pools, unit_w(), coord(0)),
                    std::runtime_error);
  REQUIRE_THROWS_AS(pool_bleu({{}}, unit_w()), std::runtime_error);
}

TEST_CASE("pool selection breaks score ties by pool order") {
  std::vector<std::vector<PoolEntry>> pools = {
      {line_entry(0.0, 0.0, "x y", "a b"), line_entry(0.0, 0.0, "a b", "a b")}};
  REQUIRE(pool_bleu(pools, unit_w()) == 0.0);
  std::swap(pools[0][0], pools[0][1]);
  REQUIRE(pool_bleu(pools, unit_w()) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("line search matches a dense grid scan") {
  smt::Rng rng(97);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n_sent = 2 + rng.next_below(3);
    std::vector<std::vector<PoolEntry>> pools(n_sent);
    std::vector<std::vector<std::string>> refs;
    for (std::size_t s = 0; s < n_sent; ++s) {
      refs.push_back(testsupport::sentence(rng, 4, 2, 5));
      const std::size_t n_entries = 2 + rng.next_below(4);
      for (std::size_t i = 0; i < n_entries; ++i) {
        FeatureVector f{};
        for (std::size_t k = 0; k < kNumFeatures; ++k)
          f[k] = 2.0 * rng.next_signed_unit();
        pools[s].push_back(make_pool_entry(
            f, testsupport::sentence(rng, 4, 1, 5), refs[s]));
      }
    }
    WeightVector w;
    FeatureVector d{};
    bool nonzero = false;
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      w.values[k] = rng.next_signed_unit();
      d[k] = rng.next_signed_unit();
      nonzero = nonzero || d[k] != 0;
    }
    if (!nonzero) d[0] = 1.0;

    const auto ls = line_search(pools, w, d);
    double grid_best = 0;
    for (int g = 0; g <= 2000; ++g) {
      const double gamma = -5.0 + 10.0 * g / 2000.0;
      grid_best = std::max(grid_best, pool_bleu(pools, step(w, d, gamma)));
    }
    REQUIRE(ls.bleu >= grid_best - 1e-12);
    REQUIRE(pool_bleu(pools, step(w, d, ls.gamma)) ==
            Catch::Approx(ls.bleu).margin(1e-9));
  }
}

TEST_CASE("tuning flips a sign to rank the correct hypothesis first") {
  // One sentence, fixed 2-best: the bad hypothesis starts ahead because the
  // default first weight is positive; one coordinate step fixes that.
  const std::vector<std::vector<std::string>> src = {toks("s")};
  const std::vector<std::vector<std::string>> refs = {toks("good")};
  NBestFn fn = [](const std::vector<std::string>&, const WeightVector&,
                  std::size_t) {
    Derivation bad;
    bad.features = {1, 0, 0, 0, 0, 0, 0};
    bad.target = toks("bad");
    Derivation good;
    good.features = {-1, 0, 0, 0, 0, 0, 0};
    good.target = toks("good");
    return std::vector<Derivation>{bad, good};
  };

  const auto r = tune(src, refs, fn, WeightVector{});
  REQUIRE(r.failed_sentences == 0);
  REQUIRE_FALSE(r.bleu_history.empty());
  REQUIRE(r.bleu_history.back() == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t i = 1; i < r.bleu_history.size(); ++i)
    REQUIRE(r.bleu_history[i] >= r.bleu_history[i - 1]);
  // The first coordinate crossed zero: good now outscores bad.
  REQUIRE(r.weights.values[0] == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(r.weights.values[4] == 0.5);  // untouched coordinate
  REQUIRE(r.weights.dot({-1, 0, 0, 0, 0, 0, 0}) >
          r.weights.dot({1, 0, 0, 0, 0, 0, 0}));
}

TEST_CASE("tuning history is a running maximum on random pools") {
  smt::Rng rng(151);
  std::vector<std::vector<std::string>> src, refs;
  std::vector<std::vector<Derivation>> fixed(3);
  for (std::size_t s = 0; s < 3; ++s) {
    src.push_back({"s" + std::to_string(s)});
    refs.push_back(testsupport::sentence(rng, 3, 2, 4));
    for (int i = 0; i < 4; ++i) {
      Derivation d;
      for (std::size_t k = 0; k < kNumFeatures; ++k)
        d.features[k] = rng.next_signed_unit();
      d.target = testsupport::sentence(rng, 3, 1, 4);
      fixed[s].push_back(d);
    }
  }
  NBestFn fn = [&](const std::vector<std::string>& s, const WeightVector&,
                   std::size_t) {
    return fixed[static_cast<std::size_t>(s[0][1] - '0')];
  };

  TuneOptions opt;
  opt.outer_iters = 5;
  opt.min_gain = 0.0;
  const auto r = tune(src, refs, fn, WeightVector{}, opt);
  REQUIRE(r.iterations == 5);
  REQUIRE(r.bleu_history.size() == 5);
  REQUIRE(r.weight_history.size() == 5);
  for (std::size_t i = 1; i < r.bleu_history.size(); ++i)
    REQUIRE(r.bleu_history[i] >= r.bleu_history[i - 1]);
  REQUIRE(r.bleu_history.back() >= r.bleu_history.front());
}

TEST_CASE("sentences whose decode throws are dropped, not fatal") {
  const std::vector<std::vector<std::string>> src = {toks("ok"), toks("boom")};
  const std::vector<std::vector<std::string>> refs = {toks("a"), toks("b")};
  NBestFn fn = [](const std::vector<std::string>& s, const WeightVector&,
                  std::size_t) {
    if (s[0] == "boom") throw std::runtime_error("no path");
    Derivation d;
    d.target = toks("a");
    return std::vector<Derivation>{d};
  };
  const auto r = tune(src, refs, fn, WeightVector{});
  REQUIRE(r.failed_sentences == 1);
  REQUIRE(r.bleu_history.back() == Catch::Approx(1.0).margin(1e-12));

  NBestFn always = [](const std::vector<std::string>&, const WeightVector&,
                      std::size_t) -> std::vector<Derivation> {
    throw std::runtime_error("no path");
  };
  REQUIRE_THROWS_AS(tune(src, refs, always, WeightVector{}),
                    std::runtime_error);
}

TEST_CASE("tuning input validation") {
  NBestFn fn = [](const std::vector<std::string>&, const WeightVector&,
                  std::size_t) { return std::vector<Derivation>{}; };
  REQUIRE_THROWS_AS(tune({}, {}, fn, WeightVector{}), std::runtime_error);
  REQUIRE_THROWS_AS(tune({toks("a")}, {}, fn, WeightVector{}),
                    std::runtime_error);
  TuneOptions bad;
  bad.nbest_size = 0;
  REQUIRE_THROWS_AS(tune({toks("a")}, {toks("b")}, fn, WeightVector{}, bad),
                    std::runtime_error);
  bad = TuneOptions{};
  bad.min_gain = -1;
  REQUIRE_THROWS_AS(tune({toks("a")}, {toks("b")}, fn, WeightVector{}, bad),
                    std::runtime_error);

  TuneOptions none;
  none.outer_iters = 0;
  const auto r = tune({toks("a")}, {toks("b")}, fn, WeightVector{}, none);
  REQUIRE(r.iterations == 0);
  REQUIRE(r.bleu_history.empty());
  REQUIRE(r.weights.values == WeightVector{}.values);
}

TEST_CASE("tuning log is one tab-separated line per iteration") {
  TuneResult r;
  r.bleu_history = {0.25, 0.5};
  WeightVector w1;
  w1.values = {1, 0, 0, 0, 0, 0, 0};
  WeightVector w2;
  w2.values = {1, 0.5, 0, 0, 0, 0, 0};
  r.weight_history = {w1, w2};
  REQUIRE(format_tuning_log(r) ==
          "1\t0.25\t1 0 0 0 0 0 0\n"
          "2\t0.5\t1 0.5 0 0 0 0 0\n");
}
