#pragma once

// Test-only helpers: temporary directories, independent oracles for the
// topic model, and a small CSV reader for export round trips.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "reputex/domain.hpp"
#include "reputex/textprep.hpp"
#include "reputex/topics.hpp"

namespace reputex::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("reputex-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

// Corpus straight from token-id lists; term i is named "t<i>".
inline textprep::EncodedCorpus make_corpus(const std::vector<std::vector<int32_t>>& docs, size_t vocab_size) {
  textprep::EncodedCorpus c;
  for (size_t w = 0; w < vocab_size; ++w) {
    c.vocabulary.terms.push_back("t" + std::to_string(w));
    c.vocabulary.index.emplace(c.vocabulary.terms.back(), static_cast<int32_t>(w));
    c.vocabulary.corpus_term_counts.push_back(0);
  }
  for (size_t d = 0; d < docs.size(); ++d) {
    c.documents.push_back(textprep::EncodedDocument{d, docs[d]});
    for (int32_t w : docs[d]) ++c.vocabulary.corpus_term_counts[static_cast<size_t>(w)];
  }
  return c;
}

inline textprep::EncodedCorpus random_corpus(std::mt19937_64& rng, size_t docs, size_t max_len, size_t vocab) {
  std::uniform_int_distribution<size_t> len(0, max_len);
  std::uniform_int_distribution<int32_t> word(0, static_cast<int32_t>(vocab) - 1);
  std::vector<std::vector<int32_t>> d(docs);
  size_t total = 0;
  for (auto& doc : d) {
    doc.resize(len(rng));
    for (auto& w : doc) w = word(rng);
    total += doc.size();
  }
  if (total == 0) d[0].push_back(word(rng));
  return make_corpus(d, vocab);
}

struct Recount {
  std::vector<std::vector<int64_t>> n_dk;
  std::vector<std::vector<int64_t>> n_kw;
  std::vector<int64_t> n_k;
};

// Rebuilds the three count tables from z alone.
inline Recount recount(const topics::TopicModelState& s) {
  const auto& z = s.assignments();
  const auto& docs = s.corpus().documents;
  Recount r;
  r.n_dk.assign(docs.size(), std::vector<int64_t>(s.num_topics(), 0));
  r.n_kw.assign(s.num_topics(), std::vector<int64_t>(s.vocab_size(), 0));
  r.n_k.assign(s.num_topics(), 0);
  for (size_t d = 0; d < docs.size(); ++d) {
    for (size_t i = 0; i < docs[d].token_ids.size(); ++i) {
      const auto k = static_cast<size_t>(z[d][i]);
      ++r.n_dk[d][k];
      ++r.n_kw[k][static_cast<size_t>(docs[d].token_ids[i])];
      ++r.n_k[k];
    }
  }
  return r;
}

// Empty string when the state's tables, z ranges and the three conservation
// equalities all agree with an independent recount; otherwise a description.
inline std::string check_counts(const topics::TopicModelState& s) {
  const auto& z = s.assignments();
  const auto& docs = s.corpus().documents;
  for (size_t d = 0; d < docs.size(); ++d) {
    if (z[d].size() != docs[d].token_ids.size()) return "z shape mismatch in doc " + std::to_string(d);
    for (int32_t k : z[d]) {
      if (k < 0 || k >= static_cast<int32_t>(s.num_topics())) return "z out of range";
    }
  }
  const Recount r = recount(s);
  int64_t total = 0;
  for (size_t d = 0; d < docs.size(); ++d) {
    int64_t row = 0;
    for (size_t k = 0; k < s.num_topics(); ++k) {
      if (s.doc_topic(d, k) != r.n_dk[d][k]) return "n_dk mismatch";
      row += s.doc_topic(d, k);
    }
    if (row != static_cast<int64_t>(docs[d].token_ids.size())) return "sum_k n_dk != N_d";
    total += row;
  }
  int64_t topic_sum = 0;
  for (size_t k = 0; k < s.num_topics(); ++k) {
    int64_t row = 0;
    for (size_t w = 0; w < s.vocab_size(); ++w) {
      if (s.topic_word(k, w) != r.n_kw[k][w]) return "n_kw mismatch";
      row += s.topic_word(k, w);
    }
    if (s.topic_total(k) != r.n_k[k]) return "n_k mismatch";
    if (row != s.topic_total(k)) return "sum_w n_kw != n_k";
    topic_sum += s.topic_total(k);
  }
  if (topic_sum != static_cast<int64_t>(s.corpus().total_tokens())) return "sum_k n_k != total tokens";
  if (total != topic_sum) return "document and topic totals disagree";
  return {};
}

// Collapsed joint P(w, z) computed by the sequential Polya-urn product: tokens
// are revealed one at a time and each contributes
//   (n_dk + alpha) / (n_d + K alpha) * (n_kw + beta) / (n_k + V beta)
// with counts over the tokens revealed so far. This is a different route from
// the log-gamma closed form the library uses.
inline double urn_joint(const std::vector<std::vector<int32_t>>& docs, const std::vector<int32_t>& flat_z, size_t K,
                        size_t V, double alpha, double beta) {
  std::vector<std::vector<int>> n_dk(docs.size(), std::vector<int>(K, 0));
  std::vector<int> n_d(docs.size(), 0);
  std::vector<std::vector<int>> n_kw(K, std::vector<int>(V, 0));
  std::vector<int> n_k(K, 0);
  double p = 1.0;
  size_t pos = 0;
  for (size_t d = 0; d < docs.size(); ++d) {
    for (int32_t w : docs[d]) {
      const auto k = static_cast<size_t>(flat_z[pos++]);
      p *= (n_dk[d][k] + alpha) / (n_d[d] + static_cast<double>(K) * alpha);
      p *= (n_kw[k][static_cast<size_t>(w)] + beta) / (n_k[k] + static_cast<double>(V) * beta);
      ++n_dk[d][k];
      ++n_d[d];
      ++n_kw[k][static_cast<size_t>(w)];
      ++n_k[k];
    }
  }
  return p;
}

// Enumerates all K^N assignments, tabulating the collapsed joint for each.
struct JointTable {
  size_t K = 0;
  size_t N = 0;
  std::vector<double> p;  // index = base-K number, token 0 least significant

  size_t index_of(const std::vector<int32_t>& flat_z) const {
    size_t idx = 0;
    for (size_t i = N; i-- > 0;) idx = idx * K + static_cast<size_t>(flat_z[i]);
    return idx;
  }

  // p(z_t = k | z_-t, w) from the table alone.
  std::vector<double> conditional(const std::vector<int32_t>& flat_z, size_t t) const {
    std::vector<double> out(K);
    std::vector<int32_t> z = flat_z;
    double total = 0.0;
    for (size_t k = 0; k < K; ++k) {
      z[t] = static_cast<int32_t>(k);
      out[k] = p[index_of(z)];
      total += out[k];
    }
    for (double& x : out) x /= total;
    return out;
  }
};

inline JointTable enumerate_joint(const std::vector<std::vector<int32_t>>& docs, size_t K, size_t V, double alpha,
                                  double beta) {
  JointTable t;
  t.K = K;
  for (const auto& d : docs) t.N += d.size();
  size_t configs = 1;
  for (size_t i = 0; i < t.N; ++i) configs *= K;
  t.p.resize(configs);
  std::vector<int32_t> z(t.N, 0);
  for (size_t c = 0; c < configs; ++c) {
    size_t x = c;
    for (size_t i = 0; i < t.N; ++i) {
      z[i] = static_cast<int32_t>(x % K);
      x /= K;
    }
    t.p[c] = urn_joint(docs, z, K, V, alpha, beta);
  }
  return t;
}

inline std::vector<int32_t> flatten(const std::vector<std::vector<int32_t>>& z) {
  std::vector<int32_t> out;
  for (const auto& d : z) out.insert(out.end(), d.begin(), d.end());
  return out;
}

// RFC 4180 reader used to re-import exported tables.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
      row.clear();
      field.clear();
      field_started = false;
    } else if (c != '\r') {
      field += c;
      field_started = true;
    }
  }
  if (field_started || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Review sample_review(std::string slug, std::string text, ReviewClassification kind, Date date) {
  return Review{std::move(slug), std::move(text), kind, date, "http://fixture.test/company/x/reviews?page=1",
                Timestamp{std::chrono::sys_days{Date{std::chrono::year{2020}, std::chrono::month{1}, std::chrono::day{1}}}}};
}

inline Date ymd(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

}  // namespace reputex::testing
