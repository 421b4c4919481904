#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lsc/error.hpp"
#include "lsc/io.hpp"

namespace lsc {

inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Splits on runs of ASCII whitespace. Token bytes are kept verbatim.
inline std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// One sentence per line, whitespace-delimited, optionally gzip-compressed.
// Single consumer; open several streams to read a file concurrently.
class CorpusStream {
 public:
  explicit CorpusStream(std::string path) : reader_(std::move(path)) {}

  bool next(std::vector<std::string>& tokens) {
    if (!reader_.next(line_)) return false;
    tokens = tokenize(line_);
    return true;
  }

  void reset() { reader_.rewind(); }
  const std::string& path() const noexcept { return reader_.path(); }

 private:
  LineReader reader_;
  std::string line_;
};

// In-memory counterpart of CorpusStream (synthetic corpora, tests).
class MemoryCorpus {
 public:
  MemoryCorpus() = default;
  explicit MemoryCorpus(std::vector<std::string> lines) : lines_(std::move(lines)) {}

  bool next(std::vector<std::string>& tokens) {
    if (pos_ >= lines_.size()) return false;
    tokens = tokenize(lines_[pos_++]);
    return true;
  }

  void reset() noexcept { pos_ = 0; }
  const std::vector<std::string>& lines() const noexcept { return lines_; }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

template <typename S>
concept SentenceSource = requires(S s, std::vector<std::string>& toks) {
  { s.next(toks) } -> std::convertible_to<bool>;
  s.reset();
};

// Word <-> id map with absolute counts. Ids are ordered by descending count,
// ties by ascending byte order. total_tokens counts every token seen,
// including those dropped by the min-count filter.
class Vocabulary {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Vocabulary() = default;

  // Builds from raw (word, count) pairs. Entries below min_count are dropped.
  Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> entries,
             std::uint64_t total_tokens, std::uint64_t min_count)
      : total_tokens_(total_tokens), min_count_(min_count) {
    std::erase_if(entries, [&](const auto& e) { return e.second < min_count; });
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    words_.reserve(entries.size());
    counts_.reserve(entries.size());
    std::uint64_t kept = 0;
    for (auto& [w, c] : entries) {
      if (index_.count(w)) throw InvalidArgument("duplicate vocabulary word '" + w + "'");
      index_.emplace(w, words_.size());
      words_.push_back(std::move(w));
      counts_.push_back(c);
      kept += c;
    }
    if (kept > total_tokens_)
      throw InvalidArgument("vocabulary counts exceed total_tokens");
  }

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }
  std::uint64_t min_count() const noexcept { return min_count_; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  const std::string& word(std::size_t id) const { return words_.at(id); }
  std::uint64_t count(std::size_t id) const { return counts_.at(id); }

  std::size_t find(std::string_view w) const {
    auto it = index_.find(std::string(w));
    return it == index_.end() ? npos : it->second;
  }
  bool contains(std::string_view w) const { return find(w) != npos; }

  std::size_t id(std::string_view w) const {
    auto i = find(w);
    if (i == npos) throw UnknownWord(std::string(w));
    return i;
  }

  std::uint64_t count(std::string_view w) const { return counts_[id(w)]; }

  // Same statistics, keeping only words accepted by keep(word).
  Vocabulary restricted(const std::function<bool(const std::string&)>& keep) const {
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (keep(words_[i])) entries.emplace_back(words_[i], counts_[i]);
    return Vocabulary(std::move(entries), total_tokens_, min_count_);
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t total_tokens_ = 0;
  std::uint64_t min_count_ = 1;
};

template <SentenceSource Source>
Vocabulary build_vocabulary(Source& stream, std::uint64_t min_count) {
  if (min_count < 1) throw InvalidArgument("min_count must be >= 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  std::vector<std::string> toks;
  stream.reset();
  while (stream.next(toks)) {
    for (auto& t : toks) ++counts[t];
    total += toks.size();
  }
  stream.reset();
  std::vector<std::pair<std::string, std::uint64_t>> entries(counts.begin(), counts.end());
  Vocabulary v(std::move(entries), total, min_count);
  if (v.empty())
    throw Error("empty vocabulary: no word occurs at least " + std::to_string(min_count) +
                " times");
  return v;
}

inline Vocabulary build_vocabulary(const std::string& path, std::uint64_t min_count) {
  CorpusStream s(path);
  return build_vocabulary(s, min_count);
}

inline double relative_frequency(const Vocabulary& vocab, std::string_view word) {
  const auto c = vocab.count(word);
  return static_cast<double>(c) / static_cast<double>(vocab.total_tokens());
}

// Export: "#total_tokens=<N>" header, then "word<TAB>count" per line in id order.
inline void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  TextWriter out(path);
  out << "#total_tokens=" << std::to_string(vocab.total_tokens()) << "\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.word(i) << "\t" << std::to_string(vocab.count(i)) << "\n";
  }
  out.close();
}

inline Vocabulary load_vocabulary(const std::string& path, std::uint64_t min_count = 1) {
  LineReader in(path);
  std::string line;
  if (!in.next(line) || !line.starts_with("#total_tokens="))
    throw ParseError(path, in.line_number(), "expected '#total_tokens=<N>' header");
  std::uint64_t total = 0;
  {
    auto sv = std::string_view(line).substr(14);
    auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), total);
    if (ec != std::errc() || p != sv.data() + sv.size())
      throw ParseError(path, in.line_number(), "bad total_tokens value");
  }
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path, in.line_number(), "expected 'word<TAB>count'");
    std::uint64_t c = 0;
    auto sv = std::string_view(line).substr(tab + 1);
    auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), c);
    if (ec != std::errc() || p != sv.data() + sv.size())
      throw ParseError(path, in.line_number(), "bad count");
    entries.emplace_back(line.substr(0, tab), c);
  }
  try {
    return Vocabulary(std::move(entries), total, min_count);
  } catch (const InvalidArgument& e) {
    throw ParseError(path, in.line_number(), e.what());
  }
}

// Corpus re-encoded as vocabulary ids; out-of-vocabulary tokens are dropped.
struct EncodedCorpus {
  std::vector<std::uint32_t> tokens;
  std::vector<std::size_t> sentence_starts;  // one past the last is tokens.size()

  std::size_t sentences() const noexcept { return sentence_starts.size(); }
  std::size_t sentence_end(std::size_t s) const noexcept {
    return s + 1 < sentence_starts.size() ? sentence_starts[s + 1] : tokens.size();
  }
};

template <SentenceSource Source>
EncodedCorpus encode_corpus(Source& stream, const Vocabulary& vocab) {
  EncodedCorpus enc;
  std::vector<std::string> toks;
  stream.reset();
  while (stream.next(toks)) {
    const std::size_t start = enc.tokens.size();
    for (const auto& t : toks) {
      auto id = vocab.find(t);
      if (id != Vocabulary::npos) enc.tokens.push_back(static_cast<std::uint32_t>(id));
    }
    if (enc.tokens.size() > start) enc.sentence_starts.push_back(start);
  }
  stream.reset();
  return enc;
}

}  // namespace lsc
