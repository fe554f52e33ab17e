#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <set>

#include "smt/phrase.hpp"
#include "test_support.hpp"

using namespace smt;

namespace {

SentenceAlignment make_align(std::size_t sl, std::size_t tl,
                             std::initializer_list<std::pair<std::size_t,
                                                             std::size_t>>
                                 links) {
  SentenceAlignment a;
  a.source_len = sl;
  a.target_len = tl;
  for (const auto& l : links) a.links.insert(l);
  return a;
}

std::set<std::pair<std::string, std::string>> as_strings(
    const std::vector<PhrasePair>& pairs) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& pp : pairs) out.insert({join(pp.source), join(pp.target)});
  return out;
}

using SpanTuple = std::array<std::size_t, 4>;

// Reference implementation: enumerate every span pair and keep the ones
// consistent with the alignment (all links crossing either span stay inside
// the other) that cover at least one link.
std::set<SpanTuple> consistent_spans(std::size_t slen, std::size_t tlen,
                                     const std::set<std::pair<std::size_t,
                                                              std::size_t>>&
                                         links,
                                     std::size_t max_len) {
  std::set<SpanTuple> out;
  for (std::size_t i1 = 0; i1 < slen; ++i1)
    for (std::size_t i2 = i1; i2 < slen && i2 - i1 < max_len; ++i2)
      for (std::size_t j1 = 0; j1 < tlen; ++j1)
        for (std::size_t j2 = j1; j2 < tlen && j2 - j1 < max_len; ++j2) {
          bool any = false, ok = true;
          for (const auto& [i, j] : links) {
            const bool in_src = (i >= i1 && i <= i2);
            const bool in_tgt = (j >= j1 && j <= j2);
            if (in_src) any = true;
            if (in_src != in_tgt) {
              ok = false;
              break;
            }
          }
          if (any && ok) out.insert({i1, i2, j1, j2});
        }
  return out;
}

std::set<SpanTuple> spans_of(const std::vector<PhrasePair>& pairs) {
  std::set<SpanTuple> out;
  for (const auto& pp : pairs) {
    // No duplicate span tuples may be emitted.
    REQUIRE(out.insert({pp.src_begin, pp.src_end, pp.tgt_begin, pp.tgt_end})
                .second);
  }
  return out;
}

}  // namespace

TEST_CASE("single-link sentence yields the four expansions") {
  const auto pairs = extract_phrases({"a", "b"}, {"x", "y"},
                                     make_align(2, 2, {{0, 0}}));
  REQUIRE(as_strings(pairs) ==
          std::set<std::pair<std::string, std::string>>{
              {"a", "x"}, {"a", "x y"}, {"a b", "x"}, {"a b", "x y"}});
}

TEST_CASE("diagonal alignment yields exactly the three blocks") {
  const auto pairs = extract_phrases({"a", "b"}, {"x", "y"},
                                     make_align(2, 2, {{0, 0}, {1, 1}}));
  REQUIRE(as_strings(pairs) ==
          std::set<std::pair<std::string, std::string>>{
              {"a", "x"}, {"b", "y"}, {"a b", "x y"}});
}

TEST_CASE("unaligned target neighbours are absorbed in both directions") {
  const auto pairs = extract_phrases({"a"}, {"x", "y", "z"},
                                     make_align(1, 3, {{0, 1}}));
  REQUIRE(as_strings(pairs) ==
          std::set<std::pair<std::string, std::string>>{
              {"a", "y"}, {"a", "x y"}, {"a", "y z"}, {"a", "x y z"}});
}

TEST_CASE("unaligned source words never form a phrase on their own") {
  const auto pairs = extract_phrases({"a", "b"}, {"x"},
                                     make_align(2, 1, {{0, 0}}));
  const auto s = as_strings(pairs);
  REQUIRE(s == std::set<std::pair<std::string, std::string>>{{"a", "x"},
                                                             {"a b", "x"}});
}

TEST_CASE("phrase length cap applies to both sides") {
  PhraseExtractionOptions opt;
  opt.max_phrase_len = 2;
  const auto a3 = make_align(3, 3, {{0, 0}, {1, 1}, {2, 2}});
  const auto pairs = extract_phrases({"a", "b", "c"}, {"x", "y", "z"}, a3,
                                     opt);
  for (const auto& pp : pairs) {
    REQUIRE(pp.source.size() <= 2);
    REQUIRE(pp.target.size() <= 2);
  }
  REQUIRE(spans_of(pairs) == consistent_spans(3, 3, a3.links, 2));

  opt.max_phrase_len = 0;
  REQUIRE_THROWS_AS(extract_phrases({"a"}, {"x"}, make_align(1, 1, {{0, 0}}),
                                    opt),
                    std::runtime_error);
}

TEST_CASE("extraction rejects mismatched dimensions") {
  REQUIRE_THROWS_AS(extract_phrases({"a", "b"}, {"x"},
                                    make_align(1, 1, {{0, 0}})),
                    std::runtime_error);
}

TEST_CASE("extraction equals the exhaustive consistency definition") {
  smt::Rng rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t slen = 1 + rng.next_below(6);
    const std::size_t tlen = 1 + rng.next_below(6);
    SentenceAlignment a;
    a.source_len = slen;
    a.target_len = tlen;
    const double density = 0.1 + 0.5 * rng.next_double();
    for (std::size_t i = 0; i < slen; ++i)
      for (std::size_t j = 0; j < tlen; ++j)
        if (rng.next_bernoulli(density)) a.links.insert({i, j});

    std::vector<std::string> src, tgt;
    for (std::size_t i = 0; i < slen; ++i) src.push_back("s" +
                                                         std::to_string(i));
    for (std::size_t j = 0; j < tlen; ++j) tgt.push_back("t" +
                                                         std::to_string(j));

    PhraseExtractionOptions opt;
    opt.max_phrase_len = 1 + rng.next_below(6);
    const auto pairs = extract_phrases(src, tgt, a, opt);
    REQUIRE(spans_of(pairs) ==
            consistent_spans(slen, tlen, a.links, opt.max_phrase_len));

    // Tokens and relative links must match the span indices.
    for (const auto& pp : pairs) {
      REQUIRE(pp.source.front() == src[pp.src_begin]);
      REQUIRE(pp.source.back() == src[pp.src_end]);
      REQUIRE(pp.target.front() == tgt[pp.tgt_begin]);
      REQUIRE(pp.target.back() == tgt[pp.tgt_end]);
      for (const auto& [ri, rj] : pp.links) {
        REQUIRE(a.links.count({ri + pp.src_begin, rj + pp.tgt_begin}) == 1);
        REQUIRE(ri < pp.source.size());
        REQUIRE(rj < pp.target.size());
      }
    }
  }
}

TEST_CASE("phrase table scores are relative frequencies") {
  std::vector<PhrasePair> pairs(3);
  pairs[0].source = {"a"};
  pairs[0].target = {"x"};
  pairs[0].links = {{0, 0}};
  pairs[1] = pairs[0];
  pairs[2].source = {"a"};
  pairs[2].target = {"y"};
  pairs[2].links = {{0, 0}};

  TranslationTable fwd, bwd;
  fwd.set("a", "x", 0.8);
  fwd.set("a", "y", 0.4);
  bwd.set("x", "a", 0.9);
  bwd.set("y", "a", 0.7);

  const auto table = build_phrase_table(pairs, fwd, bwd);
  const auto* options = table.find("a");
  REQUIRE(options != nullptr);
  REQUIRE(options->size() == 2);
  REQUIRE((*options)[0].target == std::vector<std::string>{"x"});
  REQUIRE((*options)[0].phrase_fwd == Catch::Approx(2.0 / 3.0));
  REQUIRE((*options)[0].phrase_bwd == Catch::Approx(1.0));
  REQUIRE((*options)[0].lex_fwd == Catch::Approx(0.8));
  REQUIRE((*options)[0].lex_bwd == Catch::Approx(0.9));
  REQUIRE((*options)[1].target == std::vector<std::string>{"y"});
  REQUIRE((*options)[1].phrase_fwd == Catch::Approx(1.0 / 3.0));
  REQUIRE((*options)[1].lex_fwd == Catch::Approx(0.4));

  REQUIRE(table.source_count() == 1);
  REQUIRE(table.option_count() == 2);
  REQUIRE_THROWS_AS(build_phrase_table({}, fwd, bwd), std::runtime_error);
}

TEST_CASE("lexical weights use NULL for unlinked target words") {
  std::vector<PhrasePair> pairs(1);
  pairs[0].source = {"a"};
  pairs[0].target = {"x", "y"};
  pairs[0].links = {{0, 0}};

  TranslationTable fwd, bwd;
  fwd.set("a", "x", 0.8);
  fwd.set(kNullWord, "y", 0.3);
  bwd.set("x", "a", 0.9);
  bwd.set("y", "a", 0.2);

  const auto table = build_phrase_table(pairs, fwd, bwd);
  const auto& o = (*table.find("a"))[0];
  REQUIRE(o.lex_fwd == Catch::Approx(0.8 * 0.3));
  // Backward: source side "x y", target "a" linked to "x" only.
  REQUIRE(o.lex_bwd == Catch::Approx(0.9));
}

TEST_CASE("lexical weight takes the best alignment pattern") {
  std::vector<PhrasePair> pairs(2);
  pairs[0].source = {"a", "b"};
  pairs[0].target = {"x"};
  pairs[0].links = {{0, 0}};
  pairs[1].source = {"a", "b"};
  pairs[1].target = {"x"};
  pairs[1].links = {{1, 0}};

  TranslationTable fwd, bwd;
  fwd.set("a", "x", 0.2);
  fwd.set("b", "x", 0.9);
  bwd.set("x", "a", 0.5);
  bwd.set("x", "b", 0.6);
  bwd.set(kNullWord, "a", 0.4);
  bwd.set(kNullWord, "b", 0.1);

  const auto table = build_phrase_table(pairs, fwd, bwd);
  const auto& o = (*table.find("a b"))[0];
  REQUIRE(o.phrase_fwd == Catch::Approx(1.0));
  // Forward: best of t(x|a)=0.2 and t(x|b)=0.9.
  REQUIRE(o.lex_fwd == Catch::Approx(0.9));
  // Backward patterns: {a<-x, b<-NULL} = 0.5*0.1 vs {a<-NULL, b<-x} = 0.4*0.6.
  REQUIRE(o.lex_bwd == Catch::Approx(0.4 * 0.6));
}

TEST_CASE("forward probabilities sum to one per source phrase") {
  smt::Rng rng(13);
  const auto corpus = testsupport::random_corpus(rng, 25, 6, 5);
  const auto fwd = train_model1(corpus);
  const auto bwd = train_model1(swap_sides(corpus));
  const auto fa = align_corpus(fwd.table, corpus);
  std::vector<SentenceAlignment> ba;
  for (const auto& p : align_corpus(bwd.table, swap_sides(corpus)))
    ba.push_back(transpose(p));
  const auto sym = symmetrize_corpus(fa, ba, SymmetrizationMode::grow_diag);
  const auto phrases = extract_corpus_phrases(corpus, sym);
  const auto table = build_phrase_table(phrases, fwd.table, bwd.table);

  for (const auto& [sk, options] : table.entries()) {
    double sum = 0.0;
    double prev = 2.0;
    for (const auto& o : options) {
      sum += o.phrase_fwd;
      REQUIRE(o.phrase_fwd <= prev);
      prev = o.phrase_fwd;
      for (double p : {o.phrase_fwd, o.lex_fwd, o.phrase_bwd, o.lex_bwd}) {
        REQUIRE(p > 0.0);
        REQUIRE(p <= 1.0 + 1e-9);
      }
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("phrase table lookup honors top_k and finalize validates") {
  PhraseTable t;
  t.add("s", {{"t3"}, 0.2, 0.5, 0.5, 0.5});
  t.add("s", {{"t1"}, 0.5, 0.5, 0.5, 0.5});
  t.add("s", {{"t2"}, 0.3, 0.5, 0.5, 0.5});
  t.finalize();
  const auto top = t.lookup("s", 2);
  REQUIRE(top.size() == 2);
  REQUIRE(top[0].target == std::vector<std::string>{"t1"});
  REQUIRE(top[1].target == std::vector<std::string>{"t2"});
  REQUIRE(t.lookup("missing").empty());
  REQUIRE(t.find("missing") == nullptr);

  PhraseTable bad;
  bad.add("s", {{"t"}, 0.0, 0.5, 0.5, 0.5});
  REQUIRE_THROWS_AS(bad.finalize(), std::runtime_error);
  PhraseTable bad2;
  bad2.add("s", {{}, 0.5, 0.5, 0.5, 0.5});
  REQUIRE_THROWS_AS(bad2.finalize(), std::runtime_error);
  PhraseTable bad3;
  bad3.add("s", {{"t"}, 1.5, 0.5, 0.5, 0.5});
  REQUIRE_THROWS_AS(bad3.finalize(), std::runtime_error);
}

TEST_CASE("phrase tables round trip through disk") {
  testsupport::TempDir dir;
  PhraseTable t;
  t.add("a b", {{"x"}, 0.75, 0.5, 0.25, 0.125});
  t.add("a b", {{"y", "z"}, 0.25, 0.0625, 1.0, 0.3});
  t.add("c", {{"w"}, 1.0, 1.0, 1.0, 1.0});
  t.finalize();
  save_phrase_table(t, dir.file("pt.txt"));
  const auto back = load_phrase_table(dir.file("pt.txt"));
  REQUIRE(back.source_count() == 2);
  REQUIRE(back.option_count() == 3);
  const auto& o = (*back.find("a b"))[1];
  REQUIRE(o.target == std::vector<std::string>{"y", "z"});
  REQUIRE(o.phrase_fwd == Catch::Approx(0.25));
  REQUIRE(o.lex_bwd == Catch::Approx(0.3));

  write_file(dir.file("bad1.txt"), "a b ||| x\n");
  REQUIRE_THROWS_AS(load_phrase_table(dir.file("bad1.txt")),
                    std::runtime_error);
  write_file(dir.file("bad2.txt"), "a ||| x ||| 0.5 0.5 0.5\n");
  REQUIRE_THROWS_AS(load_phrase_table(dir.file("bad2.txt")),
                    std::runtime_error);
  write_file(dir.file("bad3.txt"), "a ||| x ||| 0.5 q 0.5 0.5\n");
  REQUIRE_THROWS_AS(load_phrase_table(dir.file("bad3.txt")),
                    std::runtime_error);
}

TEST_CASE("extract_corpus_phrases needs one alignment per pair") {
  smt::Rng rng(3);
  const auto corpus = testsupport::random_corpus(rng, 3, 4, 4);
  REQUIRE_THROWS_AS(extract_corpus_phrases(corpus, {}), std::runtime_error);
}
