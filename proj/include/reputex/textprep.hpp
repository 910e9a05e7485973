#pragma once

// Review text -> bag-of-words corpus: tokenization, stopword removal and an
// integer-indexed vocabulary. One review is one document.

#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "reputex/domain.hpp"
#include "reputex/error.hpp"
#include "reputex/stopwords_pt.hpp"
#include "reputex/unicode.hpp"

namespace reputex::textprep {

using StopwordSet = std::unordered_set<std::string>;

// One term per line, '#' starts a comment line, blank lines ignored.
// Terms are lowercased on load.
inline StopwordSet parse_stopwords(std::string_view text) {
  StopwordSet out;
  size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        unicode::trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (!line.empty() && line.front() != '#') out.insert(unicode::to_lower(line));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

inline StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::invalid_argument, "cannot read stopword file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_stopwords(ss.str());
}

inline const StopwordSet& default_stopwords() {
  static const StopwordSet set = parse_stopwords(kDefaultStopwordsText);
  return set;
}

struct TokenizerConfig {
  bool lowercase = true;
  size_t min_token_length = 2;  // in code points
  StopwordSet stopwords = default_stopwords();
  bool keep_accents = true;
};

// Splits on anything that is neither a letter nor a digit. Digit-only tokens,
// short tokens and stopwords are dropped.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  if (config.min_token_length < 1) throw Error(Errc::invalid_argument, "min_token_length must be >= 1");
  std::vector<std::string> out;
  const std::u32string cps = unicode::decode(text);
  size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && !unicode::is_letter(cps[i]) && !unicode::is_digit(cps[i])) ++i;
    const size_t begin = i;
    bool has_letter = false;
    while (i < cps.size() && (unicode::is_letter(cps[i]) || unicode::is_digit(cps[i]))) {
      has_letter = has_letter || unicode::is_letter(cps[i]);
      ++i;
    }
    if (i == begin || !has_letter || i - begin < config.min_token_length) continue;
    const std::string raw = unicode::encode(std::u32string_view(cps).substr(begin, i - begin));
    std::string lowered = unicode::to_lower(raw);
    if (config.stopwords.contains(lowered)) continue;
    std::string token = config.lowercase ? std::move(lowered) : raw;
    if (!config.keep_accents) token = unicode::strip_accents(token);
    out.push_back(std::move(token));
  }
  return out;
}

struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, int32_t> index;
  std::vector<int64_t> corpus_term_counts;

  size_t size() const { return terms.size(); }

  // -1 when absent.
  int32_t id_of(std::string_view term) const {
    const auto it = index.find(std::string(term));
    return it == index.end() ? -1 : it->second;
  }
};

// Keeps terms seen at least min_count times, in first-appearance order.
inline Vocabulary build_vocabulary(std::span<const std::vector<std::string>> docs, int64_t min_count = 1) {
  if (min_count < 1) throw Error(Errc::invalid_argument, "min_count must be >= 1");
  std::vector<std::string> order;
  std::unordered_map<std::string, int64_t> counts;
  for (const auto& doc : docs) {
    for (const auto& tok : doc) {
      auto [it, inserted] = counts.try_emplace(tok, 0);
      if (inserted) order.push_back(tok);
      ++it->second;
    }
  }
  Vocabulary vocab;
  for (auto& term : order) {
    const int64_t c = counts[term];
    if (c < min_count) continue;
    vocab.index.emplace(term, static_cast<int32_t>(vocab.terms.size()));
    vocab.corpus_term_counts.push_back(c);
    vocab.terms.push_back(std::move(term));
  }
  if (vocab.terms.empty()) throw Error(Errc::empty_vocabulary, "no term survives tokenization and min_count");
  return vocab;
}

struct EncodedDocument {
  size_t review_index = 0;  // position of the source review in the input
  std::vector<int32_t> token_ids;
};

struct EncodedCorpus {
  Vocabulary vocabulary;
  std::vector<EncodedDocument> documents;

  size_t total_tokens() const {
    size_t n = 0;
    for (const auto& d : documents) n += d.token_ids.size();
    return n;
  }

  std::vector<std::string> decode(const EncodedDocument& doc) const {
    std::vector<std::string> out;
    out.reserve(doc.token_ids.size());
    for (int32_t id : doc.token_ids) out.push_back(vocabulary.terms.at(static_cast<size_t>(id)));
    return out;
  }
};

// Encodes already tokenized documents; out-of-vocabulary tokens are dropped
// and empty documents keep their slot.
inline EncodedCorpus encode_tokens(std::span<const std::vector<std::string>> docs, int64_t min_count = 1) {
  EncodedCorpus corpus;
  corpus.vocabulary = build_vocabulary(docs, min_count);
  corpus.documents.reserve(docs.size());
  for (size_t d = 0; d < docs.size(); ++d) {
    EncodedDocument doc;
    doc.review_index = d;
    for (const auto& tok : docs[d]) {
      if (const auto id = corpus.vocabulary.id_of(tok); id >= 0) doc.token_ids.push_back(id);
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

inline EncodedCorpus encode_texts(std::span<const std::string> texts, const TokenizerConfig& config,
                                  int64_t min_count = 1) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(texts.size());
  for (const auto& t : texts) tokens.push_back(tokenize(t, config));
  return encode_tokens(tokens, min_count);
}

inline EncodedCorpus encode_corpus(std::span<const Review> reviews, const TokenizerConfig& config,
                                   int64_t min_count = 1) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(reviews.size());
  for (const auto& r : reviews) tokens.push_back(tokenize(r.description, config));
  return encode_tokens(tokens, min_count);
}

}  // namespace reputex::textprep
