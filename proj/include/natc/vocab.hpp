#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "natc/errors.hpp"

namespace natc {

using TokenId = std::int32_t;

// Token <-> id map with six reserved specials at fixed ids 0..5.
class Vocab {
 public:
  static constexpr TokenId kBlank = 0;
  static constexpr TokenId kMask = 1;
  static constexpr TokenId kPad = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kBos = 4;
  static constexpr TokenId kEos = 5;
  static constexpr int kNumSpecials = 6;

  static const std::vector<std::string>& special_forms() {
    static const std::vector<std::string> forms = {"<blank>", "<mask>", "<pad>",
                                                   "<unk>",   "<s>",    "</s>"};
    return forms;
  }

  Vocab() {
    for (const auto& f : special_forms()) push(f);
  }

  TokenId blank_id() const { return kBlank; }
  TokenId mask_id() const { return kMask; }
  TokenId pad_id() const { return kPad; }
  TokenId unk_id() const { return kUnk; }
  TokenId bos_id() const { return kBos; }
  TokenId eos_id() const { return kEos; }

  std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }

  // Appends a token; returns its id. Duplicate surface forms are rejected.
  TokenId push(std::string_view token) {
    auto [it, inserted] = ids_.emplace(std::string(token), size());
    if (!inserted) throw DataError("duplicate token in vocabulary: " + std::string(token));
    tokens_.push_back(std::string(token));
    return it->second;
  }

  const std::string& token(TokenId id) const {
    if (id < 0 || id >= size()) throw DataError("token id out of range: " + std::to_string(id));
    return tokens_[static_cast<std::size_t>(id)];
  }

  TokenId id_or_unk(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnk : it->second;
  }

  bool contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

  std::vector<TokenId> encode(std::string_view line) const {
    std::vector<TokenId> out;
    std::istringstream ss{std::string(line)};
    std::string tok;
    while (ss >> tok) out.push_back(id_or_unk(tok));
    return out;
  }

  std::string decode(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) {
      if (!out.empty()) out += ' ';
      out += token(id);
    }
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open vocab file for writing: " + path);
    for (const auto& t : tokens_) os << t << '\n';
  }

  static Vocab load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open vocab file: " + path);
    Vocab v;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no <= kNumSpecials) {
        if (line != special_forms()[line_no - 1])
          throw DataError(path + ": line " + std::to_string(line_no) +
                          ": expected special token " + special_forms()[line_no - 1]);
        continue;
      }
      if (line.empty()) throw DataError(path + ": line " + std::to_string(line_no) + ": empty token");
      v.push(line);
    }
    if (line_no < kNumSpecials) throw DataError(path + ": vocab file missing special tokens");
    return v;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Whitespace-tokenized vocabulary: specials first, then types with count >=
// min_freq sorted by (descending count, lexicographic).
inline Vocab build_vocab(const std::vector<std::string>& lines, int min_freq) {
  if (lines.empty()) throw DataError("empty vocabulary: no input lines");
  if (min_freq < 1) throw UsageError("min_freq must be positive");
  std::map<std::string, std::int64_t> counts;
  for (const auto& line : lines) {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [tok, c] : counts)
    if (c >= min_freq) kept.emplace_back(tok, c);
  if (kept.empty()) throw DataError("empty vocabulary: all tokens below min_freq");
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab v;
  for (const auto& [tok, c] : kept) v.push(tok);
  return v;
}

}  // namespace natc
