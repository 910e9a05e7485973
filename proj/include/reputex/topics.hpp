#pragma once

// Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//
// Each document is a mixture over K topics and each topic a distribution over
// the vocabulary. The sampler keeps one topic assignment per token together
// with three count tables (document x topic, topic x term, per-topic totals)
// and resamples every token from
//
//   p(z = k | rest) ∝ (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)
//
// with the token's own contribution removed from all three counts. The scan
// order is fixed (document by document, token by token) and the generator is
// a seeded mt19937_64, so (corpus, hyperparameters) determine every result.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "reputex/error.hpp"
#include "reputex/textprep.hpp"

namespace reputex::topics {

using textprep::EncodedCorpus;

struct LdaHyperparams {
  int32_t topics = 5;
  double alpha = 10.0;  // 50 / topics
  double beta = 0.01;
  int32_t iterations = 1000;
  uint64_t seed = 1;

  // alpha follows the 50 / K convention.
  static LdaHyperparams with_topics(int32_t k) {
    LdaHyperparams hp;
    hp.topics = k;
    hp.alpha = k > 0 ? 50.0 / k : hp.alpha;
    return hp;
  }

  void validate() const {
    if (topics < 1) throw Error(Errc::invalid_argument, "topic count must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(Errc::invalid_argument, "alpha must be > 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(Errc::invalid_argument, "beta must be > 0");
    if (iterations < 0) throw Error(Errc::invalid_argument, "iterations must be >= 0");
  }

  friend bool operator==(const LdaHyperparams&, const LdaHyperparams&) = default;
};

// Dense row-major matrix of doubles.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(size_t r, size_t c) { return data[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(size_t r) const { return {data.data() + r * cols, cols}; }
};

class TopicModelState {
 public:
  TopicModelState(std::shared_ptr<const EncodedCorpus> corpus, LdaHyperparams hp)
      : hp_(hp), corpus_(std::move(corpus)), rng_(hp.seed) {
    hp_.validate();
    if (!corpus_ || corpus_->vocabulary.size() == 0 || corpus_->total_tokens() == 0)
      throw Error(Errc::empty_corpus, "corpus has no tokens");
    const size_t D = corpus_->documents.size();
    const size_t K = static_cast<size_t>(hp_.topics);
    const size_t V = corpus_->vocabulary.size();
    z_.resize(D);
    n_dk_.assign(D * K, 0);
    n_kw_.assign(K * V, 0);
    n_k_.assign(K, 0);
  }

  const LdaHyperparams& hyperparams() const { return hp_; }
  const EncodedCorpus& corpus() const { return *corpus_; }

  size_t num_docs() const { return z_.size(); }
  size_t num_topics() const { return static_cast<size_t>(hp_.topics); }
  size_t vocab_size() const { return corpus_->vocabulary.size(); }
  size_t doc_length(size_t d) const { return z_[d].size(); }
  int32_t word(size_t d, size_t i) const { return corpus_->documents[d].token_ids[i]; }

  const std::vector<std::vector<int32_t>>& assignments() const { return z_; }
  int32_t doc_topic(size_t d, size_t k) const { return n_dk_[d * num_topics() + k]; }
  int32_t topic_word(size_t k, size_t w) const { return n_kw_[k * vocab_size() + w]; }
  int32_t topic_total(size_t k) const { return n_k_[k]; }

  std::mt19937_64& rng() { return rng_; }
  const std::mt19937_64& rng() const { return rng_; }

  // Count bookkeeping for one token. Callers keep z consistent.
  void remove(size_t d, size_t i) { adjust(d, i, -1); }
  void add(size_t d, size_t i, int32_t k) {
    z_[d][i] = k;
    adjust(d, i, +1);
  }

  // Overwrites all assignments and rebuilds the count tables from them.
  void assign(std::vector<std::vector<int32_t>> z) {
    if (z.size() != num_docs()) throw Error(Errc::invalid_argument, "assignment shape mismatch");
    for (size_t d = 0; d < z.size(); ++d) {
      if (z[d].size() != corpus_->documents[d].token_ids.size())
        throw Error(Errc::invalid_argument, "assignment shape mismatch");
      for (int32_t k : z[d]) {
        if (k < 0 || k >= hp_.topics) throw Error(Errc::invalid_argument, "topic out of range");
      }
    }
    z_ = std::move(z);
    std::fill(n_dk_.begin(), n_dk_.end(), 0);
    std::fill(n_kw_.begin(), n_kw_.end(), 0);
    std::fill(n_k_.begin(), n_k_.end(), 0);
    for (size_t d = 0; d < z_.size(); ++d) {
      for (size_t i = 0; i < z_[d].size(); ++i) adjust(d, i, +1);
    }
  }

 private:
  void adjust(size_t d, size_t i, int32_t delta) {
    const size_t k = static_cast<size_t>(z_[d][i]);
    const size_t w = static_cast<size_t>(word(d, i));
    n_dk_[d * num_topics() + k] += delta;
    n_kw_[k * vocab_size() + w] += delta;
    n_k_[k] += delta;
  }

  LdaHyperparams hp_;
  std::shared_ptr<const EncodedCorpus> corpus_;
  std::vector<std::vector<int32_t>> z_;
  std::vector<int32_t> n_dk_;
  std::vector<int32_t> n_kw_;
  std::vector<int32_t> n_k_;
  std::mt19937_64 rng_;
};

namespace detail {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Unnormalized conditional weights for token (d, i). When `exclude` is set the
// token's current topic is discounted from the counts first.
inline void conditional_weights(const TopicModelState& s, size_t d, size_t i, bool exclude, std::span<double> out) {
  const auto& hp = s.hyperparams();
  const size_t w = static_cast<size_t>(s.word(d, i));
  const int32_t current = exclude ? s.assignments()[d][i] : -1;
  const double vbeta = static_cast<double>(s.vocab_size()) * hp.beta;
  for (size_t k = 0; k < s.num_topics(); ++k) {
    const int32_t self = static_cast<int32_t>(k) == current ? 1 : 0;
    const double ndk = s.doc_topic(d, k) - self;
    const double nkw = s.topic_word(k, w) - self;
    const double nk = s.topic_total(k) - self;
    out[k] = (ndk + hp.alpha) * (nkw + hp.beta) / (nk + vbeta);
  }
}

inline int32_t sample_index(std::span<const double> weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double x : weights) total += x;
  const double u = uniform01(rng) * total;
  double cum = 0.0;
  for (size_t k = 0; k < weights.size(); ++k) {
    cum += weights[k];
    if (u < cum) return static_cast<int32_t>(k);
  }
  return static_cast<int32_t>(weights.size() - 1);
}

}  // namespace detail

// Uniform random initial assignment drawn from the seeded generator.
inline TopicModelState init_model(const EncodedCorpus& corpus, const LdaHyperparams& hp) {
  TopicModelState state(std::make_shared<const EncodedCorpus>(corpus), hp);
  const auto K = static_cast<double>(hp.topics);
  std::vector<std::vector<int32_t>> z(corpus.documents.size());
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    z[d].resize(corpus.documents[d].token_ids.size());
    for (auto& k : z[d]) {
      k = std::min(static_cast<int32_t>(detail::uniform01(state.rng()) * K), hp.topics - 1);
    }
  }
  state.assign(std::move(z));
  return state;
}

// Exact conditional distribution of token (d, i)'s topic given all other
// assignments. Does not touch the state.
inline std::vector<double> full_conditional(const TopicModelState& state, size_t d, size_t i) {
  if (d >= state.num_docs() || i >= state.doc_length(d))
    throw Error(Errc::index_out_of_range, "token position out of range");
  std::vector<double> p(state.num_topics());
  detail::conditional_weights(state, d, i, true, p);
  double total = 0.0;
  for (double x : p) total += x;
  for (double& x : p) x /= total;
  return p;
}

// One pass over every token in (document, position) order.
inline void gibbs_sweep(TopicModelState& state) {
  std::vector<double> weights(state.num_topics());
  for (size_t d = 0; d < state.num_docs(); ++d) {
    for (size_t i = 0; i < state.doc_length(d); ++i) {
      state.remove(d, i);
      detail::conditional_weights(state, d, i, false, weights);
      state.add(d, i, detail::sample_index(weights, state.rng()));
    }
  }
}

inline TopicModelState train(const EncodedCorpus& corpus, const LdaHyperparams& hp) {
  TopicModelState state = init_model(corpus, hp);
  for (int32_t it = 0; it < hp.iterations; ++it) gibbs_sweep(state);
  return state;
}

// phi_kw = (n_kw + beta) / (n_k + V beta)
inline Matrix phi(const TopicModelState& s) {
  const auto& hp = s.hyperparams();
  const size_t K = s.num_topics();
  const size_t V = s.vocab_size();
  Matrix m(K, V);
  for (size_t k = 0; k < K; ++k) {
    const double denom = s.topic_total(k) + static_cast<double>(V) * hp.beta;
    for (size_t w = 0; w < V; ++w) m(k, w) = (s.topic_word(k, w) + hp.beta) / denom;
  }
  return m;
}

// theta_dk = (n_dk + alpha) / (N_d + K alpha)
inline Matrix theta(const TopicModelState& s) {
  const auto& hp = s.hyperparams();
  const size_t D = s.num_docs();
  const size_t K = s.num_topics();
  Matrix m(D, K);
  for (size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(s.doc_length(d)) + static_cast<double>(K) * hp.alpha;
    for (size_t k = 0; k < K; ++k) m(d, k) = (s.doc_topic(d, k) + hp.alpha) / denom;
  }
  return m;
}

// log P(w, z | alpha, beta) with theta and phi integrated out.
inline double log_joint(const TopicModelState& s) {
  const auto& hp = s.hyperparams();
  const size_t K = s.num_topics();
  const size_t V = s.vocab_size();
  const double Vd = static_cast<double>(V);
  const double Kd = static_cast<double>(K);

  double topic_part = 0.0;
  const double topic_norm = std::lgamma(Vd * hp.beta) - Vd * std::lgamma(hp.beta);
  for (size_t k = 0; k < K; ++k) {
    double acc = topic_norm;
    for (size_t w = 0; w < V; ++w) acc += std::lgamma(s.topic_word(k, w) + hp.beta);
    acc -= std::lgamma(s.topic_total(k) + Vd * hp.beta);
    topic_part += acc;
  }

  double doc_part = 0.0;
  const double doc_norm = std::lgamma(Kd * hp.alpha) - Kd * std::lgamma(hp.alpha);
  for (size_t d = 0; d < s.num_docs(); ++d) {
    double acc = doc_norm;
    for (size_t k = 0; k < K; ++k) acc += std::lgamma(s.doc_topic(d, k) + hp.alpha);
    acc -= std::lgamma(static_cast<double>(s.doc_length(d)) + Kd * hp.alpha);
    doc_part += acc;
  }
  return topic_part + doc_part;
}

struct TermWeight {
  int32_t term_id = 0;
  std::string term;
  double probability = 0.0;

  friend bool operator==(const TermWeight&, const TermWeight&) = default;
};

struct TopicReport {
  std::vector<std::vector<TermWeight>> topics;

  friend bool operator==(const TopicReport&, const TopicReport&) = default;
};

// Ranks one phi row (probability descending, id ascending), keeps the first
// `words` entries, then drops those under `min_prob`.
inline std::vector<std::pair<int32_t, double>> select_top_terms(std::span<const double> row, size_t words,
                                                                double min_prob) {
  if (words < 1) throw Error(Errc::invalid_argument, "words per topic must be >= 1");
  if (!(min_prob >= 0.0 && min_prob < 1.0)) throw Error(Errc::invalid_argument, "min_prob must be in [0, 1)");
  std::vector<int32_t> ids(row.size());
  std::iota(ids.begin(), ids.end(), 0);
  const size_t take = std::min(words, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(),
                    [&](int32_t a, int32_t b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
  std::vector<std::pair<int32_t, double>> out;
  for (size_t j = 0; j < take; ++j) {
    const double p = row[ids[j]];
    if (p >= min_prob) out.emplace_back(ids[j], p);
  }
  return out;
}

inline TopicReport top_terms(const TopicModelState& state, size_t words = 6, double min_prob = 0.02) {
  const Matrix m = phi(state);
  const auto& vocab = state.corpus().vocabulary;
  TopicReport report;
  report.topics.resize(m.rows);
  for (size_t k = 0; k < m.rows; ++k) {
    for (const auto& [id, p] : select_top_terms(m.row(k), words, min_prob)) {
      report.topics[k].push_back(TermWeight{id, vocab.terms[static_cast<size_t>(id)], p});
    }
  }
  return report;
}

}  // namespace reputex::topics
