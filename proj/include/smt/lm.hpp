#pragma once

// Interpolated add-k n-gram language model over the target side.
// Natural-log scores everywhere; dump/reload is exact because the dump
// carries raw counts, not just rounded probabilities.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "smt/util.hpp"

namespace smt {

inline constexpr const char* kSentStart = "<s>";
inline constexpr const char* kSentEnd = "</s>";
inline constexpr const char* kUnk = "<unk>";
inline constexpr double kLmFloor = 1e-12;  // queried probabilities stay > 0

enum class Smoothing { mle, add_k };

inline Smoothing parse_smoothing(const std::string& name) {
  if (name == "mle") return Smoothing::mle;
  if (name == "add_k" || name == "add-k") return Smoothing::add_k;
  fail("unknown smoothing '" + name + "' (expected mle|add_k)");
}

inline const char* to_string(Smoothing s) {
  return s == Smoothing::mle ? "mle" : "add_k";
}

struct LmOptions {
  std::size_t order = 3;
  Smoothing smoothing = Smoothing::add_k;
  double k = 0.1;
  // One weight per order 1..order, summing to 1. Empty selects the default:
  // all mass on the highest order.
  std::vector<double> interpolation;
  // Map training tokens with frequency <= threshold to <unk>; 0 disables.
  std::size_t unk_threshold = 0;

  std::vector<double> effective_interpolation() const {
    if (interpolation.empty()) {
      std::vector<double> w(order, 0.0);
      w.back() = 1.0;
      return w;
    }
    return interpolation;
  }

  void validate() const {
    if (order < 1) fail("lm: order must be >= 1");
    if (smoothing == Smoothing::add_k && !(k > 0))
      fail("lm: add_k requires k > 0");
    if (!interpolation.empty()) {
      if (interpolation.size() != order)
        fail("lm: need one interpolation weight per order");
      double sum = 0;
      for (double w : interpolation) {
        if (w < 0) fail("lm: interpolation weights must be >= 0");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        fail("lm: interpolation weights must sum to 1");
    }
  }
};

class NgramLm {
 public:
  NgramLm() = default;
  NgramLm(LmOptions opt, std::vector<std::map<std::string, std::size_t>> grams)
      : opt_(std::move(opt)), grams_(std::move(grams)) {
    opt_.validate();
    if (grams_.size() != opt_.order) fail("lm: count table order mismatch");
    rebuild_derived();
  }

  const LmOptions& options() const { return opt_; }
  std::size_t order() const { return opt_.order; }
  const std::set<std::string>& vocab() const { return vocab_; }
  const std::vector<std::map<std::string, std::size_t>>& gram_counts() const {
    return grams_;
  }

  std::size_t count(const std::vector<std::string>& gram) const {
    if (gram.empty() || gram.size() > opt_.order) return 0;
    const auto& m = grams_[gram.size() - 1];
    auto it = m.find(join(gram));
    return it == m.end() ? 0 : it->second;
  }

  std::string map_word(const std::string& w) const {
    return vocab_.count(w) ? w : std::string(kUnk);
  }

  // ln p(word | context), context truncated to the last order-1 tokens and
  // left-padded with <s> when shorter.
  double score_continuation(const std::vector<std::string>& context,
                            const std::string& word) const {
    const std::vector<std::string> ctx = padded_context(context);
    const std::string w = map_word(word);
    const auto lambda = opt_.effective_interpolation();
    double p = 0.0;
    for (std::size_t m = 1; m <= opt_.order; ++m) {
      if (lambda[m - 1] <= 0) continue;
      p += lambda[m - 1] * order_m_prob(ctx, w, m);
    }
    return std::log(std::max(p, kLmFloor));
  }

  // ln p of the whole sentence including the </s> transition.
  double log_prob(const std::vector<std::string>& sentence) const {
    std::vector<std::string> ctx(opt_.order > 0 ? opt_.order - 1 : 0,
                                 kSentStart);
    double total = 0.0;
    for (const auto& w : sentence) {
      total += score_continuation(ctx, w);
      push_context(ctx, map_word(w));
    }
    total += score_continuation(ctx, kSentEnd);
    return total;
  }

  // Context-free estimate for future-cost heuristics: no sentence-boundary
  // padding; only orders the prefix can support participate, with their
  // interpolation weights renormalized.
  double score_estimate(const std::vector<std::string>& prefix,
                        const std::string& word) const {
    const std::size_t avail =
        std::min(prefix.size(), opt_.order - 1);
    std::vector<std::string> ctx(prefix.end() - static_cast<long>(avail),
                                 prefix.end());
    for (auto& t : ctx)
      if (t != kSentStart) t = map_word(t);
    const std::string w = map_word(word);
    const auto lambda = opt_.effective_interpolation();
    double mass = 0.0;
    for (std::size_t m = 1; m <= avail + 1; ++m) mass += lambda[m - 1];
    double p = 0.0;
    if (mass > 0) {
      for (std::size_t m = 1; m <= avail + 1; ++m) {
        if (lambda[m - 1] <= 0) continue;
        p += lambda[m - 1] / mass * estimate_m_prob(ctx, w, m);
      }
    } else {
      p = estimate_m_prob(ctx, w, avail + 1);
    }
    return std::log(std::max(p, kLmFloor));
  }

 private:
  friend NgramLm train_lm(const std::vector<std::vector<std::string>>&,
                          const LmOptions&);

  std::vector<std::string> padded_context(
      const std::vector<std::string>& context) const {
    const std::size_t need = opt_.order - 1;
    std::vector<std::string> ctx;
    if (context.size() < need)
      ctx.assign(need - context.size(), kSentStart);
    const std::size_t take = std::min(context.size(), need);
    for (std::size_t i = context.size() - take; i < context.size(); ++i) {
      const auto& t = context[i];
      ctx.push_back(t == kSentStart ? t : map_word(t));
    }
    return ctx;
  }

  void push_context(std::vector<std::string>& ctx,
                    const std::string& w) const {
    if (opt_.order <= 1) return;
    ctx.push_back(w);
    if (ctx.size() > opt_.order - 1) ctx.erase(ctx.begin());
  }

  // p_m(w | last m-1 context tokens) for one interpolation order.
  double order_m_prob(const std::vector<std::string>& ctx,
                      const std::string& w, std::size_t m) const {
    std::vector<std::string> gram(ctx.end() - static_cast<long>(m - 1),
                                  ctx.end());
    gram.push_back(w);
    return raw_prob(gram, m);
  }

  double estimate_m_prob(const std::vector<std::string>& ctx,
                         const std::string& w, std::size_t m) const {
    if (ctx.size() + 1 < m) return 0.0;
    std::vector<std::string> gram(ctx.end() - static_cast<long>(m - 1),
                                  ctx.end());
    gram.push_back(w);
    return raw_prob(gram, m);
  }

  double raw_prob(const std::vector<std::string>& gram, std::size_t m) const {
    const std::string key = join(gram);
    const std::string ctx_key =
        join(std::vector<std::string>(gram.begin(), gram.end() - 1));
    const auto& cm = grams_[m - 1];
    auto it = cm.find(key);
    const double c = it == cm.end() ? 0.0 : static_cast<double>(it->second);
    const auto& xm = contexts_[m - 1];
    auto xt = xm.find(ctx_key);
    const double cx = xt == xm.end() ? 0.0 : static_cast<double>(xt->second);
    if (opt_.smoothing == Smoothing::mle)
      return cx > 0 ? c / cx : 0.0;
    return (c + opt_.k) /
           (cx + opt_.k * static_cast<double>(vocab_.size()));
  }

  void rebuild_derived() {
    contexts_.assign(opt_.order, {});
    for (std::size_t m = 1; m <= opt_.order; ++m) {
      for (const auto& [key, c] : grams_[m - 1]) {
        const auto toks = split_whitespace(key);
        if (toks.size() != m) fail("lm: malformed " + std::to_string(m) +
                                   "-gram '" + key + "'");
        const std::string ctx_key =
            join(std::vector<std::string>(toks.begin(), toks.end() - 1));
        contexts_[m - 1][ctx_key] += c;
      }
    }
    vocab_.clear();
    for (const auto& [key, c] : grams_[0]) {
      (void)c;
      vocab_.insert(key);
    }
    vocab_.insert(kUnk);
    vocab_.erase(kSentStart);
  }

  LmOptions opt_;
  std::vector<std::map<std::string, std::size_t>> grams_;
  // contexts_[m-1]: occurrence count of each (m-1)-gram as an m-gram
  // context; index 0 holds the total unigram event count under key "".
  std::vector<std::map<std::string, std::size_t>> contexts_;
  std::set<std::string> vocab_;
};

// Counts every n-gram of order 1..order over <s>-padded sentences (order-1
// start pads, one </s>), skipping windows that end in <s>.
inline NgramLm train_lm(const std::vector<std::vector<std::string>>& sentences,
                        const LmOptions& opt = {}) {
  opt.validate();
  if (sentences.empty()) fail("lm: no training sentences");

  std::map<std::string, std::size_t> freq;
  for (const auto& s : sentences)
    for (const auto& w : s) freq[w]++;
  auto mapped = [&](const std::string& w) -> std::string {
    if (opt.unk_threshold > 0 && freq.at(w) <= opt.unk_threshold) return kUnk;
    return w;
  };

  std::vector<std::map<std::string, std::size_t>> grams(opt.order);
  for (const auto& s : sentences) {
    std::vector<std::string> padded(opt.order - 1, kSentStart);
    for (const auto& w : s) padded.push_back(mapped(w));
    padded.push_back(kSentEnd);
    for (std::size_t m = 1; m <= opt.order; ++m) {
      if (padded.size() < m) continue;
      for (std::size_t start = 0; start + m <= padded.size(); ++start) {
        if (padded[start + m - 1] == kSentStart) continue;
        grams[m - 1][join(std::vector<std::string>(
            padded.begin() + static_cast<long>(start),
            padded.begin() + static_cast<long>(start + m)))]++;
      }
    }
  }
  return NgramLm(opt, std::move(grams));
}

// ---------------------------------------------------------------------------
// Serialization: conventional text layout (`\data\` header, per-order
// `log10prob<TAB>ngram` sections) extended with `\config\` and `\counts m\`
// sections so a reload reproduces the model exactly. The probability lines
// are informational; reload uses config + counts.
// ---------------------------------------------------------------------------

inline void save_lm(const NgramLm& lm, const std::string& path) {
  const auto& opt = lm.options();
  std::string out = "\\data\\\n";
  for (std::size_t m = 1; m <= opt.order; ++m)
    out += "ngram " + std::to_string(m) + "=" +
           std::to_string(lm.gram_counts()[m - 1].size()) + "\n";
  out += "\n";
  for (std::size_t m = 1; m <= opt.order; ++m) {
    out += "\\" + std::to_string(m) + "-grams:\n";
    for (const auto& [key, c] : lm.gram_counts()[m - 1]) {
      (void)c;
      const auto toks = split_whitespace(key);
      const std::vector<std::string> ctx(toks.begin(), toks.end() - 1);
      const double lp = lm.score_continuation(ctx, toks.back());
      out += format_double(lp / std::log(10.0));
      out += '\t';
      out += key;
      out += '\n';
    }
    out += "\n";
  }
  out += "\\config\\\n";
  out += "order\t" + std::to_string(opt.order) + "\n";
  out += std::string("smoothing\t") + to_string(opt.smoothing) + "\n";
  out += "k\t" + format_double(opt.k, 17) + "\n";
  std::vector<std::string> lam;
  for (double w : opt.effective_interpolation())
    lam.push_back(format_double(w, 17));
  out += "interpolation\t" + join(lam) + "\n";
  out += "unk_threshold\t" + std::to_string(opt.unk_threshold) + "\n";
  out += "\n";
  for (std::size_t m = 1; m <= opt.order; ++m) {
    out += "\\counts " + std::to_string(m) + "\\\n";
    for (const auto& [key, c] : lm.gram_counts()[m - 1])
      out += std::to_string(c) + "\t" + key + "\n";
    out += "\n";
  }
  out += "\\end\\\n";
  write_file(path, out);
}

inline NgramLm load_lm(const std::string& path) {
  const auto lines = read_lines(path);
  LmOptions opt;
  opt.interpolation.clear();
  std::vector<std::map<std::string, std::size_t>> grams;
  bool saw_config = false;
  std::size_t counts_order = 0;  // current \counts m\ section, 0 = none
  bool in_config = false;

  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    if (line.empty()) continue;
    if (line[0] == '\\') {
      in_config = false;
      counts_order = 0;
      if (line == "\\config\\") {
        in_config = true;
        saw_config = true;
      } else if (line.rfind("\\counts ", 0) == 0 && line.back() == '\\') {
        try {
          counts_order = std::stoul(line.substr(8));
        } catch (const std::exception&) {
          counts_order = 0;
        }
        if (counts_order < 1) fail(path + ": bad counts section header");
        if (grams.size() < counts_order) grams.resize(counts_order);
      }
      continue;
    }
    try {
      if (in_config) {
        const auto f = split_char(line, '\t');
        if (f.size() != 2)
          fail(path + ": line " + std::to_string(n + 1) + ": bad config line");
        if (f[0] == "order") opt.order = std::stoul(f[1]);
        else if (f[0] == "smoothing") opt.smoothing = parse_smoothing(f[1]);
        else if (f[0] == "k") opt.k = std::stod(f[1]);
        else if (f[0] == "interpolation") {
          opt.interpolation.clear();
          for (const auto& x : split_whitespace(f[1]))
            opt.interpolation.push_back(std::stod(x));
        } else if (f[0] == "unk_threshold")
          opt.unk_threshold = std::stoul(f[1]);
        else fail(path + ": unknown config key '" + f[0] + "'");
      } else if (counts_order > 0) {
        const auto f = split_char(line, '\t');
        if (f.size() != 2)
          fail(path + ": line " + std::to_string(n + 1) + ": bad count line");
        grams[counts_order - 1][f[1]] = std::stoul(f[0]);
      }
    } catch (const std::invalid_argument&) {
      fail(path + ": line " + std::to_string(n + 1) + ": bad number");
    } catch (const std::out_of_range&) {
      fail(path + ": line " + std::to_string(n + 1) + ": number out of range");
    }
    // prob sections and \data\ header are display-only; skipped.
  }
  if (!saw_config)
    fail(path + ": missing \\config\\ section (not a model dump written by "
                "this toolkit)");
  if (grams.size() != opt.order)
    fail(path + ": expected \\counts m\\ sections for every order up to " +
         std::to_string(opt.order));
  return NgramLm(opt, std::move(grams));
}

}  // namespace smt
