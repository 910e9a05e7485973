#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "reputex/topics.hpp"
#include "support.hpp"

namespace reputex::topics {
namespace {

using testing::check_counts;
using testing::enumerate_joint;
using testing::flatten;
using testing::make_corpus;
using testing::random_corpus;
using testing::urn_joint;

LdaHyperparams hp_of(int32_t K, double alpha, double beta, uint64_t seed = 1, int32_t iterations = 0) {
  LdaHyperparams hp;
  hp.topics = K;
  hp.alpha = alpha;
  hp.beta = beta;
  hp.seed = seed;
  hp.iterations = iterations;
  return hp;
}

TEST(Hyperparams, DefaultsAndValidation) {
  const LdaHyperparams hp;
  EXPECT_EQ(hp.topics, 5);
  EXPECT_DOUBLE_EQ(hp.alpha, 10.0);
  EXPECT_DOUBLE_EQ(hp.beta, 0.01);
  EXPECT_EQ(hp.iterations, 1000);
  EXPECT_DOUBLE_EQ(LdaHyperparams::with_topics(2).alpha, 25.0);
  EXPECT_THROW(hp_of(0, 1, 1).validate(), Error);
  EXPECT_THROW(hp_of(2, 0, 1).validate(), Error);
  EXPECT_THROW(hp_of(2, 1, -1).validate(), Error);
  EXPECT_THROW(hp_of(2, 1, 1, 1, -1).validate(), Error);
}

TEST(InitModel, SingleTopic) {
  const auto c = make_corpus({{0, 1, 2}, {2, 2}}, 3);
  const auto s = init_model(c, hp_of(1, 1.0, 0.1));
  for (const auto& d : s.assignments())
    for (int32_t k : d) EXPECT_EQ(k, 0);
  EXPECT_EQ(s.topic_total(0), 5);
  EXPECT_EQ(check_counts(s), "");
}

TEST(InitModel, Deterministic) {
  std::mt19937_64 rng(3);
  const auto c = random_corpus(rng, 10, 12, 7);
  const auto a = init_model(c, hp_of(4, 0.5, 0.1, 99));
  const auto b = init_model(c, hp_of(4, 0.5, 0.1, 99));
  EXPECT_EQ(a.assignments(), b.assignments());
  EXPECT_EQ(check_counts(a), "");
}

TEST(InitModel, EmptyCorpusRejected) {
  const auto c = make_corpus({{}, {}}, 2);
  try {
    init_model(c, hp_of(2, 1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_corpus);
  }
}

TEST(Assign, RejectsBadShapes) {
  const auto c = make_corpus({{0, 1}}, 2);
  auto s = init_model(c, hp_of(2, 1, 1));
  EXPECT_THROW(s.assign({{0}}), Error);
  EXPECT_THROW(s.assign({{0, 2}}), Error);
  EXPECT_THROW(s.assign({{0, 1}, {}}), Error);
  s.assign({{1, 1}});
  EXPECT_EQ(s.topic_total(1), 2);
}

TEST(FullConditional, SingleTopicIsOne) {
  const auto c = make_corpus({{0, 1}}, 2);
  const auto s = init_model(c, hp_of(1, 0.3, 0.2));
  EXPECT_EQ(full_conditional(s, 0, 1), std::vector<double>{1.0});
}

TEST(FullConditional, SingleTokenIsUniform) {
  const auto c = make_corpus({{0}}, 1);
  const auto s = init_model(c, hp_of(2, 0.7, 0.7));
  const auto p = full_conditional(s, 0, 0);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
}

TEST(FullConditional, OutOfRange) {
  const auto c = make_corpus({{0, 1}}, 2);
  const auto s = init_model(c, hp_of(2, 1, 1));
  EXPECT_THROW(full_conditional(s, 1, 0), Error);
  EXPECT_THROW(full_conditional(s, 0, 2), Error);
}

TEST(FullConditional, DoesNotMutate) {
  std::mt19937_64 rng(5);
  const auto c = random_corpus(rng, 4, 6, 5);
  const auto s = init_model(c, hp_of(3, 0.5, 0.1));
  const auto before = s.assignments();
  for (size_t d = 0; d < s.num_docs(); ++d)
    for (size_t i = 0; i < s.doc_length(d); ++i) full_conditional(s, d, i);
  EXPECT_EQ(s.assignments(), before);
  EXPECT_EQ(check_counts(s), "");
}

// Every assignment of the D=2, N=5, V=3, K=2 instance, every token.
TEST(FullConditional, MatchesEnumeratedJoint) {
  const std::vector<std::vector<int32_t>> docs{{0, 1, 1}, {2, 0}};
  const double alpha = 0.4, beta = 0.3;
  const auto table = enumerate_joint(docs, 2, 3, alpha, beta);
  auto s = init_model(make_corpus(docs, 3), hp_of(2, alpha, beta));
  for (size_t c = 0; c < table.p.size(); ++c) {
    std::vector<std::vector<int32_t>> z{{0, 0, 0}, {0, 0}};
    size_t x = c;
    for (auto& d : z)
      for (auto& k : d) {
        k = static_cast<int32_t>(x % 2);
        x /= 2;
      }
    s.assign(z);
    const auto flat = flatten(z);
    size_t t = 0;
    for (size_t d = 0; d < docs.size(); ++d)
      for (size_t i = 0; i < docs[d].size(); ++i, ++t) {
        const auto got = full_conditional(s, d, i);
        const auto want = table.conditional(flat, t);
        for (size_t k = 0; k < 2; ++k) EXPECT_NEAR(got[k], want[k], 1e-9);
      }
  }
}

TEST(GibbsSweep, SingleTopicLeavesStateButAdvancesRng) {
  const auto c = make_corpus({{0, 1, 2}}, 3);
  auto s = init_model(c, hp_of(1, 1, 1));
  const auto z = s.assignments();
  const auto rng_before = s.rng();
  gibbs_sweep(s);
  EXPECT_EQ(s.assignments(), z);
  EXPECT_NE(s.rng(), rng_before);
}

TEST(GibbsSweep, DeterministicAndConserving) {
  std::mt19937_64 rng(8);
  const auto c = random_corpus(rng, 8, 10, 6);
  auto a = init_model(c, hp_of(3, 0.5, 0.1, 42));
  auto b = init_model(c, hp_of(3, 0.5, 0.1, 42));
  for (int it = 0; it < 5; ++it) {
    gibbs_sweep(a);
    gibbs_sweep(b);
    EXPECT_EQ(a.assignments(), b.assignments());
    EXPECT_EQ(check_counts(a), "");
  }
}

// Stationary check on a tiny instance: the empirical distribution of z over
// many sweeps approaches the enumerated posterior.
TEST(GibbsSweep, SamplesEnumeratedPosterior) {
  const std::vector<std::vector<int32_t>> docs{{0, 1}, {1}};
  const double alpha = 0.5, beta = 0.5;
  const auto table = enumerate_joint(docs, 2, 2, alpha, beta);
  const double total = std::accumulate(table.p.begin(), table.p.end(), 0.0);
  auto s = init_model(make_corpus(docs, 2), hp_of(2, alpha, beta, 17));
  std::vector<double> hist(table.p.size(), 0.0);
  const int sweeps = 60000;
  for (int n = 0; n < sweeps; ++n) {
    gibbs_sweep(s);
    hist[table.index_of(flatten(s.assignments()))] += 1.0;
  }
  for (size_t c = 0; c < hist.size(); ++c) EXPECT_NEAR(hist[c] / sweeps, table.p[c] / total, 0.01) << c;
}

TEST(Train, ZeroIterationsEqualsInit) {
  std::mt19937_64 rng(2);
  const auto c = random_corpus(rng, 5, 8, 4);
  const auto hp = hp_of(3, 0.5, 0.1, 4, 0);
  EXPECT_EQ(train(c, hp).assignments(), init_model(c, hp).assignments());
}

TEST(Phi, DirectArithmetic) {
  const auto c = make_corpus({{0, 0}}, 3);
  auto s = init_model(c, hp_of(1, 1.0, 0.01));
  const Matrix m = phi(s);
  EXPECT_NEAR(m(0, 0), 2.01 / 2.03, 1e-12);
  EXPECT_NEAR(m(0, 1), 0.01 / 2.03, 1e-12);
  EXPECT_NEAR(m(0, 2), 0.01 / 2.03, 1e-12);
}

TEST(Phi, EmptyTopicIsUniform) {
  const auto c = make_corpus({{0, 1}}, 4);
  auto s = init_model(c, hp_of(3, 1.0, 0.01));
  s.assign({{0, 0}});
  const Matrix m = phi(s);
  for (size_t k = 1; k < 3; ++k)
    for (size_t w = 0; w < 4; ++w) EXPECT_NEAR(m(k, w), 0.25, 1e-15);
}

TEST(PhiTheta, RowsAreDistributions) {
  std::mt19937_64 rng(21);
  const auto c = random_corpus(rng, 12, 15, 9);
  auto s = train(c, hp_of(4, 0.3, 0.05, 3, 10));
  const Matrix p = phi(s);
  const Matrix t = theta(s);
  ASSERT_EQ(p.rows, 4u);
  ASSERT_EQ(p.cols, 9u);
  ASSERT_EQ(t.rows, 12u);
  ASSERT_EQ(t.cols, 4u);
  for (size_t k = 0; k < p.rows; ++k) {
    double sum = 0;
    for (size_t w = 0; w < p.cols; ++w) {
      EXPECT_GT(p(k, w), 0.0);
      sum += p(k, w);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (size_t w = 0; w < p.cols; ++w)
      EXPECT_NEAR(p(k, w), (s.topic_word(k, w) + 0.05) / (s.topic_total(k) + 9 * 0.05), 1e-12);
  }
  for (size_t d = 0; d < t.rows; ++d) {
    double sum = 0;
    for (size_t k = 0; k < t.cols; ++k) sum += t(d, k);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(LogJoint, MatchesUrnProduct) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = random_corpus(rng, 3, 4, 3);
    std::vector<std::vector<int32_t>> docs;
    for (const auto& d : c.documents) docs.push_back(d.token_ids);
    auto s = init_model(c, hp_of(2, 0.6, 0.2, static_cast<uint64_t>(trial)));
    const double want = std::log(urn_joint(docs, flatten(s.assignments()), 2, 3, 0.6, 0.2));
    EXPECT_NEAR(log_joint(s), want, 1e-9);
  }
}

TEST(LogJoint, TinyInstanceEnumerated) {
  const std::vector<std::vector<int32_t>> docs{{0, 1}};
  const auto table = enumerate_joint(docs, 2, 2, 1.0, 0.5);
  auto s = init_model(make_corpus(docs, 2), hp_of(2, 1.0, 0.5));
  for (size_t c = 0; c < table.p.size(); ++c) {
    const std::vector<int32_t> z{static_cast<int32_t>(c % 2), static_cast<int32_t>(c / 2)};
    s.assign({z});
    EXPECT_NEAR(log_joint(s), std::log(table.p[c]), 1e-12);
  }
}

TEST(LogJoint, TopicPermutationInvariant) {
  std::mt19937_64 rng(41);
  const auto c = random_corpus(rng, 6, 8, 5);
  auto a = train(c, hp_of(3, 0.5, 0.1, 1, 3));
  auto b = init_model(c, hp_of(3, 0.5, 0.1));
  auto z = a.assignments();
  for (auto& d : z)
    for (auto& k : d) k = (k + 1) % 3;
  b.assign(z);
  EXPECT_NEAR(log_joint(a), log_joint(b), 1e-9);
}

TEST(SelectTopTerms, CutoffAfterTruncation) {
  const std::vector<double> row{0.50, 0.30, 0.10, 0.05, 0.03, 0.015, 0.005};
  const auto got = select_top_terms(row, 6, 0.02);
  ASSERT_EQ(got.size(), 5u);
  for (size_t j = 0; j < got.size(); ++j) EXPECT_EQ(got[j].first, static_cast<int32_t>(j));
}

TEST(SelectTopTerms, TiesByIdAndLimits) {
  const std::vector<double> row{0.1, 0.3, 0.3, 0.3};
  const auto got = select_top_terms(row, 2, 0.0);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].first, 1);
  EXPECT_EQ(got[1].first, 2);
  EXPECT_THROW(select_top_terms(row, 0, 0.0), Error);
  EXPECT_THROW(select_top_terms(row, 3, 1.0), Error);
  EXPECT_THROW(select_top_terms(row, 3, -0.1), Error);
}

TEST(TopTerms, ShapeAndTerms) {
  std::mt19937_64 rng(51);
  const auto c = random_corpus(rng, 20, 20, 30);
  auto s = train(c, hp_of(5, 10.0, 0.01, 1, 20));
  const auto r = top_terms(s);
  ASSERT_EQ(r.topics.size(), 5u);
  for (const auto& t : r.topics) {
    EXPECT_LE(t.size(), 6u);
    for (size_t j = 0; j < t.size(); ++j) {
      EXPECT_GE(t[j].probability, 0.02);
      EXPECT_EQ(t[j].term, c.vocabulary.terms[static_cast<size_t>(t[j].term_id)]);
      if (j > 0) {
        EXPECT_GE(t[j - 1].probability, t[j].probability);
      }
    }
  }
}

}  // namespace
}  // namespace reputex::topics
