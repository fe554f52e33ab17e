#pragma once

// Small shared utilities: deterministic RNG, UTF-8 handling, string and
// file helpers. Everything here is dependency-free.

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smt {

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64). std::uniform_* distributions are
// implementation-defined, so everything that must be reproducible across
// builds draws from this instead.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0,n). Plain modulo; bias is irrelevant at these ranges and
  // determinism is what matters.
  std::uint64_t next_below(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
  }

  // Uniform integer in [lo,hi] inclusive.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Uniform in [-1,1], used for random search directions.
  double next_signed_unit() { return next_double() * 2.0 - 1.0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// UTF-8
// ---------------------------------------------------------------------------

// Decodes the code point starting at byte `pos`. Returns the number of bytes
// consumed, or 0 if the sequence is invalid (overlong, surrogate, truncated,
// or out of range).
inline std::size_t utf8_decode(std::string_view s, std::size_t pos,
                               std::uint32_t& cp) {
  const auto b = [&](std::size_t k) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + k]));
  };
  const auto is_cont = [&](std::size_t k) {
    return pos + k < s.size() && (b(k) & 0xc0u) == 0x80u;
  };
  const std::uint32_t b0 = b(0);
  if (b0 < 0x80u) {
    cp = b0;
    return 1;
  }
  if ((b0 & 0xe0u) == 0xc0u) {
    if (!is_cont(1)) return 0;
    cp = ((b0 & 0x1fu) << 6) | (b(1) & 0x3fu);
    return cp >= 0x80u ? 2 : 0;
  }
  if ((b0 & 0xf0u) == 0xe0u) {
    if (!is_cont(1) || !is_cont(2)) return 0;
    cp = ((b0 & 0x0fu) << 12) | ((b(1) & 0x3fu) << 6) | (b(2) & 0x3fu);
    if (cp < 0x800u || (cp >= 0xd800u && cp <= 0xdfffu)) return 0;
    return 3;
  }
  if ((b0 & 0xf8u) == 0xf0u) {
    if (!is_cont(1) || !is_cont(2) || !is_cont(3)) return 0;
    cp = ((b0 & 0x07u) << 18) | ((b(1) & 0x3fu) << 12) | ((b(2) & 0x3fu) << 6) |
         (b(3) & 0x3fu);
    if (cp < 0x10000u || cp > 0x10ffffu) return 0;
    return 4;
  }
  return 0;
}

// Byte offset of the first invalid UTF-8 sequence, or -1 if valid.
inline std::ptrdiff_t utf8_find_invalid(std::string_view s) {
  std::size_t pos = 0;
  std::uint32_t cp = 0;
  while (pos < s.size()) {
    std::size_t n = utf8_decode(s, pos, cp);
    if (n == 0) return static_cast<std::ptrdiff_t>(pos);
    pos += n;
  }
  return -1;
}

inline std::vector<std::uint32_t> utf8_codepoints(std::string_view s) {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  std::uint32_t cp = 0;
  while (pos < s.size()) {
    std::size_t n = utf8_decode(s, pos, cp);
    if (n == 0) fail("invalid UTF-8 at byte offset " + std::to_string(pos));
    out.push_back(cp);
    pos += n;
  }
  return out;
}

inline std::string utf8_encode(std::uint32_t cp) {
  std::string out;
  if (cp < 0x80u) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800u) {
    out.push_back(static_cast<char>(0xc0u | (cp >> 6)));
    out.push_back(static_cast<char>(0x80u | (cp & 0x3fu)));
  } else if (cp < 0x10000u) {
    out.push_back(static_cast<char>(0xe0u | (cp >> 12)));
    out.push_back(static_cast<char>(0x80u | ((cp >> 6) & 0x3fu)));
    out.push_back(static_cast<char>(0x80u | (cp & 0x3fu)));
  } else {
    out.push_back(static_cast<char>(0xf0u | (cp >> 18)));
    out.push_back(static_cast<char>(0x80u | ((cp >> 12) & 0x3fu)));
    out.push_back(static_cast<char>(0x80u | ((cp >> 6) & 0x3fu)));
    out.push_back(static_cast<char>(0x80u | (cp & 0x3fu)));
  }
  return out;
}

// Combining marks that attach to the preceding base character. Covers the
// generic combining block plus the Devanagari dependent signs, which is what
// the corpus side of this toolkit needs.
inline bool is_combining_mark(std::uint32_t cp) {
  return (cp >= 0x0300u && cp <= 0x036fu) ||  // combining diacritics
         (cp >= 0x0900u && cp <= 0x0903u) ||  // candrabindu/anusvara/visarga
         (cp >= 0x093au && cp <= 0x093cu) ||  // vowel sign oe, ooe, nukta
         (cp >= 0x093eu && cp <= 0x094fu) ||  // matras + virama
         (cp >= 0x0951u && cp <= 0x0957u) ||  // stress/vedic signs
         (cp >= 0x0962u && cp <= 0x0963u);    // vocalic matras
}

// Grapheme clusters, counted as base characters: a combining mark extends
// the cluster of the character before it.
inline std::size_t grapheme_count(std::string_view s) {
  std::size_t clusters = 0;
  for (std::uint32_t cp : utf8_codepoints(s)) {
    if (!is_combining_mark(cp) || clusters == 0) ++clusters;
  }
  return clusters;
}

// ---------------------------------------------------------------------------
// Strings
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> split_char(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == delim) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string join(const std::vector<std::string>& tokens,
                        std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::string format_double(double x, int significant = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant, x);
  return buf;
}

inline std::string format_fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write file: " + path);
  out << content;
  if (!out) fail("write failed: " + path);
}

inline bool file_exists(const std::string& path) {
  std::ifstream in(path);
  return in.good();
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string content_hash(const std::string& path) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file(path))));
  return buf;
}

}  // namespace smt
