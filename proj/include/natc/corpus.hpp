#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "natc/errors.hpp"
#include "natc/rng.hpp"
#include "natc/vocab.hpp"

namespace natc {

struct SentencePair {
  std::vector<TokenId> source;
  std::vector<TokenId> target;
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
  std::string task;
  std::uint64_t seed = 0;
};

enum class SyntheticTask { kCopy, kReverse, kToyGrammar };

inline SyntheticTask parse_task(std::string_view name) {
  if (name == "copy") return SyntheticTask::kCopy;
  if (name == "reverse") return SyntheticTask::kReverse;
  if (name == "toy_grammar") return SyntheticTask::kToyGrammar;
  throw UsageError("unknown task: " + std::string(name));
}

// Builds a content-token permutation for the toy_grammar task. Exposed so
// tests can construct the expected targets independently of gen_synthetic.
inline std::vector<TokenId> toy_grammar_permutation(std::int32_t vocab_size, std::uint64_t seed) {
  std::vector<TokenId> sigma(vocab_size);
  std::iota(sigma.begin(), sigma.end(), 0);
  Rng rng(mix_seed(seed, 0x70657221));
  // Fisher-Yates over content ids only; specials map to themselves.
  for (std::int32_t i = vocab_size - 1; i > Vocab::kNumSpecials; --i) {
    const std::int32_t j =
        Vocab::kNumSpecials + static_cast<std::int32_t>(rng.below(i - Vocab::kNumSpecials + 1));
    std::swap(sigma[i], sigma[j]);
  }
  return sigma;
}

inline std::vector<TokenId> toy_grammar_target(std::span<const TokenId> source,
                                               std::span<const TokenId> sigma) {
  std::vector<TokenId> tgt(source.begin(), source.end());
  for (auto& t : tgt) t = sigma[static_cast<std::size_t>(t)];
  for (std::size_t i = 0; i + 1 < tgt.size(); i += 2) std::swap(tgt[i], tgt[i + 1]);
  return tgt;
}

// Synthetic parallel data over a fresh vocabulary of `vocab_size` ids
// (six specials plus vocab_size-6 content tokens named w0, w1, ...).
inline std::pair<Vocab, ParallelCorpus> gen_synthetic(SyntheticTask task, std::size_t n_pairs,
                                                      int len_min, int len_max,
                                                      std::int32_t vocab_size,
                                                      std::uint64_t seed) {
  if (len_min < 1 || len_max > 64 || len_min > len_max)
    throw UsageError("length range must satisfy 1 <= len-min <= len-max <= 64");
  if (vocab_size < 8) throw UsageError("vocab size must be at least 8");
  Vocab vocab;
  for (std::int32_t i = Vocab::kNumSpecials; i < vocab_size; ++i)
    vocab.push("w" + std::to_string(i - Vocab::kNumSpecials));

  const std::vector<TokenId> sigma = toy_grammar_permutation(vocab_size, seed);
  Rng rng(mix_seed(seed, 0x67656e21));
  const std::int32_t n_content = vocab_size - Vocab::kNumSpecials;

  ParallelCorpus corpus;
  corpus.seed = seed;
  corpus.task = task == SyntheticTask::kCopy      ? "copy"
                : task == SyntheticTask::kReverse ? "reverse"
                                                  : "toy_grammar";
  corpus.pairs.reserve(n_pairs);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const int len = len_min + static_cast<int>(rng.below(len_max - len_min + 1));
    SentencePair pair;
    pair.source.reserve(len);
    for (int i = 0; i < len; ++i)
      pair.source.push_back(Vocab::kNumSpecials + static_cast<TokenId>(rng.below(n_content)));
    switch (task) {
      case SyntheticTask::kCopy:
        pair.target = pair.source;
        break;
      case SyntheticTask::kReverse:
        pair.target.assign(pair.source.rbegin(), pair.source.rend());
        break;
      case SyntheticTask::kToyGrammar:
        pair.target = toy_grammar_target(pair.source, sigma);
        break;
    }
    corpus.pairs.push_back(std::move(pair));
  }
  return {std::move(vocab), std::move(corpus)};
}

namespace detail {
inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}
}  // namespace detail

// Line-aligned parallel text files encoded under `vocab`.
inline ParallelCorpus load_parallel(const std::string& src_path, const std::string& tgt_path,
                                    const Vocab& vocab) {
  const auto src_lines = detail::read_lines(src_path);
  const auto tgt_lines = detail::read_lines(tgt_path);
  if (src_lines.size() != tgt_lines.size())
    throw DataError("line count mismatch: " + src_path + " has " +
                    std::to_string(src_lines.size()) + " lines, " + tgt_path + " has " +
                    std::to_string(tgt_lines.size()));
  ParallelCorpus corpus;
  corpus.task = "file";
  corpus.pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    SentencePair pair{vocab.encode(src_lines[i]), vocab.encode(tgt_lines[i])};
    if (pair.source.empty() || pair.target.empty())
      throw DataError("blank line at " + src_path + ":" + std::to_string(i + 1));
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

struct PruneResult {
  Vocab vocab;
  std::vector<TokenId> remap;  // old id -> new id; absent tokens go to <unk>
};

// Shrinks the vocabulary to specials plus tokens observed in the corpus,
// keeping the surviving tokens in their original relative order.
inline PruneResult prune_vocab(const Vocab& vocab, const ParallelCorpus& corpus) {
  std::vector<bool> seen(static_cast<std::size_t>(vocab.size()), false);
  for (const auto& pair : corpus.pairs) {
    for (TokenId t : pair.source) seen.at(static_cast<std::size_t>(t)) = true;
    for (TokenId t : pair.target) seen.at(static_cast<std::size_t>(t)) = true;
  }
  PruneResult result;
  result.remap.assign(static_cast<std::size_t>(vocab.size()), Vocab::kUnk);
  for (TokenId old = 0; old < vocab.size(); ++old) {
    if (old < Vocab::kNumSpecials) {
      result.remap[static_cast<std::size_t>(old)] = old;
    } else if (seen[static_cast<std::size_t>(old)]) {
      result.remap[static_cast<std::size_t>(old)] = result.vocab.push(vocab.token(old));
    }
  }
  return result;
}

}  // namespace natc
