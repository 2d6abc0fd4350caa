#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "natc/errors.hpp"
#include "natc/vocab.hpp"

namespace natc {

namespace detail {
struct IdSeqHash {
  std::size_t operator()(const std::vector<TokenId>& key) const {
    std::size_t h = 1469598103934665603ULL;
    for (TokenId t : key) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(t));
      h *= 1099511628211ULL;
    }
    return h;
  }
};
}  // namespace detail

// Back-off n-gram model over token ids. Probabilities are estimated with
// interpolated absolute discounting and stored in the ARPA convention:
// log10 probability per n-gram plus a log10 back-off weight on every n-gram
// that serves as a context. Scoring walks the standard back-off chain, so a
// model written to an ARPA file and read back scores identically.
class NgramModel {
 public:
  struct Entry {
    double logp10 = 0;
    double bow10 = 0;
    bool has_bow = false;
  };
  struct State {
    std::vector<TokenId> context;
    const NgramModel* owner = nullptr;
  };

  int order() const { return order_; }
  std::int32_t vocab_size() const { return vocab_size_; }

  static NgramModel train(const std::vector<std::vector<TokenId>>& sentences,
                          std::int32_t vocab_size, int order, double discount) {
    if (sentences.empty()) throw DataError("cannot train a language model on an empty corpus");
    if (order < 1) throw UsageError("n-gram order must be at least 1");
    if (!(discount > 0.0 && discount < 1.0)) throw UsageError("discount must lie in (0, 1)");
    if (vocab_size < Vocab::kNumSpecials) throw UsageError("vocab too small");

    NgramModel model;
    model.order_ = order;
    model.vocab_size_ = vocab_size;
    model.tables_.resize(static_cast<std::size_t>(order));

    // Raw n-gram counts; events are the sentence tokens plus </s>, with a
    // single <s> of left padding.
    std::vector<Table<std::int64_t>> counts(static_cast<std::size_t>(order));
    for (const auto& sentence : sentences) {
      std::vector<TokenId> padded;
      padded.reserve(sentence.size() + 2);
      padded.push_back(Vocab::kBos);
      for (TokenId t : sentence) {
        if (t < 0 || t >= vocab_size) throw DataError("token id out of vocab range");
        padded.push_back(t);
      }
      padded.push_back(Vocab::kEos);
      for (std::size_t p = 1; p < padded.size(); ++p) {
        for (int n = 1; n <= order && static_cast<std::size_t>(n) <= p + 1; ++n) {
          const std::vector<TokenId> gram(padded.begin() + static_cast<std::ptrdiff_t>(p + 1 - n),
                                          padded.begin() + static_cast<std::ptrdiff_t>(p + 1));
          ++counts[static_cast<std::size_t>(n - 1)][gram];
        }
      }
    }

    // Context totals and continuation-type counts per order.
    std::vector<Table<std::pair<std::int64_t, std::int64_t>>> contexts(
        static_cast<std::size_t>(order));
    for (int n = 1; n <= order; ++n) {
      for (const auto& [gram, c] : counts[static_cast<std::size_t>(n - 1)]) {
        const std::vector<TokenId> ctx(gram.begin(), gram.end() - 1);
        auto& [total, types] = contexts[static_cast<std::size_t>(n - 1)][ctx];
        total += c;
        ++types;
      }
    }

    // Interpolated probabilities, lowest order first. Unigrams cover the full
    // vocabulary; unseen ids rest on the uniform floor.
    const auto& [uni_total, uni_types] = contexts[0].at({});
    const double uniform = 1.0 / static_cast<double>(vocab_size);
    for (TokenId w = 0; w < vocab_size; ++w) {
      auto it = counts[0].find({w});
      const double c = it == counts[0].end() ? 0.0 : static_cast<double>(it->second);
      const double p = std::max(c - discount, 0.0) / static_cast<double>(uni_total) +
                       discount * static_cast<double>(uni_types) /
                           static_cast<double>(uni_total) * uniform;
      model.tables_[0][{w}] = Entry{std::log10(p), 0.0, false};
    }
    for (int n = 2; n <= order; ++n) {
      for (const auto& [gram, c] : counts[static_cast<std::size_t>(n - 1)]) {
        const std::vector<TokenId> ctx(gram.begin(), gram.end() - 1);
        const auto& [total, types] = contexts[static_cast<std::size_t>(n - 1)].at(ctx);
        const std::vector<TokenId> lower_gram(gram.begin() + 1, gram.end());
        const double p_lower = std::pow(
            10.0, model.tables_[static_cast<std::size_t>(n - 2)].at(lower_gram).logp10);
        const double p =
            (static_cast<double>(c) - discount) / static_cast<double>(total) +
            discount * static_cast<double>(types) / static_cast<double>(total) * p_lower;
        model.tables_[static_cast<std::size_t>(n - 1)][gram] = Entry{std::log10(p), 0.0, false};
      }
    }

    // Back-off weights: the discount mass reserved by each observed context.
    for (int k = 1; k < order; ++k) {
      for (const auto& [ctx, stats] : contexts[static_cast<std::size_t>(k)]) {
        auto& entry = model.tables_[static_cast<std::size_t>(k - 1)][ctx];
        entry.bow10 = std::log10(discount * static_cast<double>(stats.second) /
                                 static_cast<double>(stats.first));
        entry.has_bow = true;
      }
    }
    return model;
  }

  // log10 probability of `w` given a context, by the back-off walk.
  double cond_logprob10(std::span<const TokenId> context, TokenId w) const {
    if (w < 0 || w >= vocab_size_) w = Vocab::kUnk;
    const std::size_t max_ctx = std::min<std::size_t>(context.size(),
                                                      static_cast<std::size_t>(order_ - 1));
    double backoff = 0.0;
    for (std::size_t k = max_ctx; k > 0; --k) {
      std::vector<TokenId> gram(context.end() - static_cast<std::ptrdiff_t>(k), context.end());
      gram.push_back(w);
      if (auto it = tables_[k].find(gram); it != tables_[k].end())
        return backoff + it->second.logp10;
      gram.pop_back();
      if (auto it = tables_[k - 1].find(gram); it != tables_[k - 1].end() && it->second.has_bow)
        backoff += it->second.bow10;
    }
    auto it = tables_[0].find({w});
    if (it == tables_[0].end()) it = tables_[0].find({Vocab::kUnk});
    if (it == tables_[0].end()) throw DataError("model has no unigram for <unk>");
    return backoff + it->second.logp10;
  }

  double cond_logprob(std::span<const TokenId> context, TokenId w) const {
    return cond_logprob10(context, w) * std::numbers::ln10;
  }

  State init_state() const {
    State s{{Vocab::kBos}, this};
    trim(s.context);
    return s;
  }

  // One token of shallow-fusion scoring; the state is the trailing context.
  std::pair<State, double> score_incremental(const State& state, TokenId token) const {
    if (state.owner != this) throw UsageError("language-model state belongs to another model");
    const double logp = cond_logprob(state.context, token);
    State next{state.context, this};
    next.context.push_back(token);
    trim(next.context);
    return {std::move(next), logp};
  }

  double eos_logprob(const State& state) const {
    if (state.owner != this) throw UsageError("language-model state belongs to another model");
    return cond_logprob(state.context, Vocab::kEos);
  }

  // Natural-log probability of a full sentence, including the </s> event.
  double sentence_logprob(std::span<const TokenId> sentence) const {
    State state = init_state();
    double total = 0;
    for (TokenId t : sentence) {
      auto [next, logp] = score_incremental(state, t);
      total += logp;
      state = std::move(next);
    }
    return total + eos_logprob(state);
  }

  void write_arpa(const std::string& path, const Vocab& vocab) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open ARPA file for writing: " + path);
    os << "\\data\\\n";
    for (int n = 1; n <= order_; ++n)
      os << "ngram " << n << "=" << tables_[static_cast<std::size_t>(n - 1)].size() << "\n";
    char buf[64];
    for (int n = 1; n <= order_; ++n) {
      os << "\n\\" << n << "-grams:\n";
      std::vector<const std::pair<const std::vector<TokenId>, Entry>*> rows;
      rows.reserve(tables_[static_cast<std::size_t>(n - 1)].size());
      for (const auto& kv : tables_[static_cast<std::size_t>(n - 1)]) rows.push_back(&kv);
      std::sort(rows.begin(), rows.end(),
                [](const auto* a, const auto* b) { return a->first < b->first; });
      for (const auto* row : rows) {
        std::snprintf(buf, sizeof buf, "%.12g", row->second.logp10);
        os << buf;
        for (std::size_t i = 0; i < row->first.size(); ++i)
          os << (i == 0 ? '\t' : ' ') << vocab.token(row->first[i]);
        if (row->second.has_bow) {
          std::snprintf(buf, sizeof buf, "%.12g", row->second.bow10);
          os << '\t' << buf;
        }
        os << '\n';
      }
    }
    os << "\n\\end\\\n";
    if (!os) throw DataError("failed while writing ARPA file: " + path);
  }

  static NgramModel read_arpa(const std::string& path, const Vocab& vocab) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open ARPA file: " + path);
    const auto fail = [&](int line_no, const std::string& what) -> void {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + what);
    };

    NgramModel model;
    model.vocab_size_ = vocab.size();
    std::string line;
    int line_no = 0;
    const auto next_line = [&]() -> bool {
      while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return true;
      }
      return false;
    };

    if (!next_line() || line != "\\data\\") fail(line_no, "expected \\data\\ header");
    std::vector<std::size_t> declared;
    while (next_line() && line.rfind("ngram ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, "malformed ngram count line");
      const int n = std::atoi(line.substr(6, eq - 6).c_str());
      if (n != static_cast<int>(declared.size()) + 1)
        fail(line_no, "ngram orders must be declared consecutively from 1");
      try {
        declared.push_back(std::stoul(line.substr(eq + 1)));
      } catch (const std::exception&) {
        fail(line_no, "non-numeric ngram count");
      }
    }
    if (declared.empty()) fail(line_no, "no ngram counts declared");
    model.order_ = static_cast<int>(declared.size());
    model.tables_.resize(declared.size());

    for (int n = 1; n <= model.order_; ++n) {
      const std::string header = "\\" + std::to_string(n) + "-grams:";
      if (line != header) fail(line_no, "expected section header " + header);
      std::size_t parsed = 0;
      while (next_line() && line[0] != '\\') {
        // logprob \t tok1 tok2 ... [\t backoff]
        std::vector<std::string> fields;
        std::string field;
        for (std::size_t i = 0; i <= line.size(); ++i) {
          if (i == line.size() || line[i] == '\t' || line[i] == ' ') {
            if (!field.empty()) {
              fields.push_back(std::move(field));
              field.clear();
            }
          } else {
            field += line[i];
          }
        }
        if (fields.size() < static_cast<std::size_t>(n) + 1)
          fail(line_no, "too few fields for a " + std::to_string(n) + "-gram");
        if (fields.size() > static_cast<std::size_t>(n) + 2)
          fail(line_no, "too many fields for a " + std::to_string(n) + "-gram");
        Entry entry;
        char* end = nullptr;
        entry.logp10 = std::strtod(fields[0].c_str(), &end);
        if (end == fields[0].c_str() || *end != '\0') fail(line_no, "non-numeric log probability");
        std::vector<TokenId> gram;
        for (int i = 0; i < n; ++i) {
          const std::string& tok = fields[static_cast<std::size_t>(i) + 1];
          if (!vocab.contains(tok)) fail(line_no, "token not in vocabulary: " + tok);
          gram.push_back(vocab.id_or_unk(tok));
        }
        if (fields.size() == static_cast<std::size_t>(n) + 2) {
          entry.bow10 = std::strtod(fields.back().c_str(), &end);
          if (end == fields.back().c_str() || *end != '\0')
            fail(line_no, "non-numeric back-off weight");
          entry.has_bow = true;
        }
        model.tables_[static_cast<std::size_t>(n - 1)][std::move(gram)] = entry;
        ++parsed;
      }
      if (parsed != declared[static_cast<std::size_t>(n - 1)])
        fail(line_no, "declared " + std::to_string(declared[static_cast<std::size_t>(n - 1)]) +
                          " " + std::to_string(n) + "-grams but found " + std::to_string(parsed));
      if (is.eof() && n < model.order_) fail(line_no, "missing section for higher order");
    }
    if (line != "\\end\\") fail(line_no, "expected \\end\\ terminator");
    return model;
  }

 private:
  template <class V>
  using Table = std::unordered_map<std::vector<TokenId>, V, detail::IdSeqHash>;

  void trim(std::vector<TokenId>& context) const {
    const auto limit = static_cast<std::size_t>(order_ - 1);
    if (context.size() > limit)
      context.erase(context.begin(),
                    context.begin() + static_cast<std::ptrdiff_t>(context.size() - limit));
  }

  int order_ = 1;
  std::int32_t vocab_size_ = 0;
  std::vector<Table<Entry>> tables_;
};

inline NgramModel train_ngram(const std::vector<std::vector<TokenId>>& target_sentences,
                              std::int32_t vocab_size, int order = 4, double discount = 0.75) {
  return NgramModel::train(target_sentences, vocab_size, order, discount);
}

}  // namespace natc
