#pragma once

// Shared helpers for the test suites: scratch directories and small random
// data generators driven by the toolkit's own deterministic RNG.

#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "smt/corpus.hpp"
#include "smt/util.hpp"

namespace testsupport {

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("smt_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline std::string word(smt::Rng& rng, std::size_t vocab,
                        const char* prefix = "w") {
  return std::string(prefix) + std::to_string(rng.next_below(vocab));
}

inline std::vector<std::string> sentence(smt::Rng& rng, std::size_t vocab,
                                         std::size_t min_len,
                                         std::size_t max_len,
                                         const char* prefix = "w") {
  const std::size_t len =
      min_len + rng.next_below(max_len - min_len + 1);
  std::vector<std::string> out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) out.push_back(word(rng, vocab, prefix));
  return out;
}

inline smt::ParallelCorpus random_corpus(smt::Rng& rng, std::size_t n_pairs,
                                         std::size_t vocab,
                                         std::size_t max_len) {
  std::vector<smt::SentencePair> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    smt::SentencePair p;
    p.source = sentence(rng, vocab, 1, max_len, "s");
    p.target = sentence(rng, vocab, 1, max_len, "t");
    p.origin_line = k + 1;
    pairs.push_back(std::move(p));
  }
  return smt::ParallelCorpus(std::move(pairs));
}

}  // namespace testsupport
