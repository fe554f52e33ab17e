#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "smt/util.hpp"
#include "test_support.hpp"

using namespace smt;

TEST_CASE("rng is deterministic and well-ranged") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double d = r.next_double();
    REQUIRE(d >= 0.0);
    REQUIRE(d < 1.0);
    const auto n = r.next_below(13);
    REQUIRE(n < 13);
    const auto k = r.next_int(-3, 3);
    REQUIRE(k >= -3);
    REQUIRE(k <= 3);
    const double u = r.next_signed_unit();
    REQUIRE(u >= -1.0);
    REQUIRE(u <= 1.0);
  }
  REQUIRE(Rng(1).next_below(0) == 0);
}

TEST_CASE("rng shuffle permutes") {
  Rng r(3);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  auto sorted = v;
  r.shuffle(v);
  auto copy = v;
  std::sort(copy.begin(), copy.end());
  REQUIRE(copy == sorted);
  // Same seed, same permutation.
  Rng r2(3);
  std::vector<int> w{1, 2, 3, 4, 5, 6, 7, 8};
  r2.shuffle(w);
  REQUIRE(w == v);
}

TEST_CASE("utf8 decode/encode round trip") {
  const std::vector<std::uint32_t> cps = {0x41,   0x7f,   0x80,   0x3b1,
                                          0x905,  0x93e,  0x964,  0xffff,
                                          0x10000, 0x1f600, 0x10ffff};
  for (std::uint32_t cp : cps) {
    const std::string bytes = utf8_encode(cp);
    std::uint32_t back = 0;
    REQUIRE(utf8_decode(bytes, 0, back) == bytes.size());
    REQUIRE(back == cp);
  }
  std::string all;
  for (std::uint32_t cp : cps) all += utf8_encode(cp);
  REQUIRE(utf8_codepoints(all) == cps);
  REQUIRE(utf8_find_invalid(all) < 0);
}

TEST_CASE("utf8 invalid sequences are located") {
  REQUIRE(utf8_find_invalid("ok") < 0);
  REQUIRE(utf8_find_invalid(std::string("a\xc3")) == 1);        // truncated
  REQUIRE(utf8_find_invalid(std::string("\xc0\xaf")) == 0);     // overlong
  REQUIRE(utf8_find_invalid(std::string("ab\xed\xa0\x80")) == 2);  // surrogate
  REQUIRE(utf8_find_invalid(std::string("\x80")) == 0);  // stray continuation
}

TEST_CASE("grapheme clusters fold combining marks") {
  // Devanagari: consonant + vowel sign forms one cluster.
  const std::string kii = utf8_encode(0x915) + utf8_encode(0x940);
  REQUIRE(grapheme_count(kii) == 1);
  REQUIRE(grapheme_count(kii + utf8_encode(0x932)) == 2);
  REQUIRE(grapheme_count("abc") == 3);
  REQUIRE(grapheme_count("") == 0);
  REQUIRE(is_combining_mark(0x93e));
  REQUIRE_FALSE(is_combining_mark(0x915));
}

TEST_CASE("string helpers") {
  REQUIRE(split_whitespace("  a  bb\tc \n") ==
          std::vector<std::string>{"a", "bb", "c"});
  REQUIRE(split_whitespace("").empty());
  REQUIRE(split_char("a,b,,c", ',') ==
          std::vector<std::string>{"a", "b", "", "c"});
  REQUIRE(split_char("", ',') == std::vector<std::string>{""});
  REQUIRE(join({"x", "y", "z"}) == "x y z");
  REQUIRE(join({}) == "");
  REQUIRE(trim("  hi \t") == "hi");
  REQUIRE(trim("") == "");
}

TEST_CASE("number formatting") {
  REQUIRE(format_double(0.4) == "0.4");
  REQUIRE(format_double(1.0) == "1");
  REQUIRE(format_double(0.25, 17) == "0.25");
  REQUIRE(format_fixed(1.2345, 2) == "1.23");
  REQUIRE(format_fixed(2.0, 3) == "2.000");
  // 17 significant digits round-trip doubles exactly.
  const double x = 0.1234567890123456789;
  REQUIRE(std::stod(format_double(x, 17)) == x);
}

TEST_CASE("file helpers") {
  testsupport::TempDir dir;
  const std::string p = dir.file("f.txt");
  REQUIRE_FALSE(file_exists(p));
  write_file(p, "one\r\ntwo\nthree");
  REQUIRE(file_exists(p));
  REQUIRE(read_lines(p) == std::vector<std::string>{"one", "two", "three"});
  REQUIRE(read_file(p) == "one\r\ntwo\nthree");
  REQUIRE_THROWS_AS(read_file(dir.file("missing")), std::runtime_error);

  const std::string h1 = content_hash(p);
  write_file(p, "changed");
  REQUIRE(content_hash(p) != h1);
  write_file(p, "one\r\ntwo\nthree");
  REQUIRE(content_hash(p) == h1);
}

TEST_CASE("fnv1a64 known vectors") {
  REQUIRE(fnv1a64("") == 0xcbf29ce484222325ull);
  REQUIRE(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  REQUIRE(fnv1a64("hello") == fnv1a64("hello"));
  REQUIRE(fnv1a64("hello") != fnv1a64("hellp"));
}
