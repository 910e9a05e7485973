#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "reputex/stopwords_pt.hpp"
#include "reputex/textprep.hpp"
#include "reputex/unicode.hpp"
#include "support.hpp"

namespace reputex::textprep {
namespace {

using Tokens = std::vector<std::string>;

TEST(Unicode, FoldAndStrip) {
  EXPECT_EQ(unicode::to_lower("RECLAMAÇÃO"), "reclamação");
  EXPECT_EQ(unicode::strip_accents("reclamação"), "reclamacao");
  EXPECT_EQ(unicode::fold("  ÉLOGIO"), "  elogio");
  EXPECT_EQ(unicode::collapse_whitespace("  a \t b\n"), "a b");
}

TEST(Stopwords, DataFileMatchesBundledList) {
  std::ifstream in(REPUTEX_STOPWORDS_FILE, std::ios::binary);
  ASSERT_TRUE(in) << REPUTEX_STOPWORDS_FILE;
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), std::string(kDefaultStopwordsText));
  EXPECT_EQ(load_stopwords(REPUTEX_STOPWORDS_FILE), default_stopwords());
}

TEST(Stopwords, Contents) {
  const auto& s = default_stopwords();
  for (const char* w : {"a", "foi", "de", "que", "não"}) EXPECT_TRUE(s.contains(w)) << w;
  for (const char* w : {"entrega", "rápida", "produto", "excelente", "boa", "sempre"})
    EXPECT_FALSE(s.contains(w)) << w;
  EXPECT_FALSE(s.contains("# comment"));
}

TEST(Stopwords, ParseSkipsCommentsAndLowercases) {
  const auto s = parse_stopwords("# header\n\n  Foo \nBAR\r\n");
  EXPECT_EQ(s, (StopwordSet{"foo", "bar"}));
  EXPECT_THROW(load_stopwords("/nonexistent/stopwords.txt"), Error);
}

TEST(Tokenize, Examples) {
  const TokenizerConfig cfg;
  EXPECT_EQ(tokenize("Entrega rápida, produto excelente!", cfg), (Tokens{"entrega", "rápida", "produto", "excelente"}));
  EXPECT_EQ(tokenize("A entrega foi boa", cfg), (Tokens{"entrega", "boa"}));
  EXPECT_EQ(tokenize("", cfg), Tokens{});
}

TEST(Tokenize, DigitsAndLength) {
  const TokenizerConfig cfg;
  EXPECT_EQ(tokenize("chegou em 10 dias, nota 10x", cfg), (Tokens{"chegou", "dias", "nota", "10x"}));
  TokenizerConfig longer;
  longer.min_token_length = 5;
  EXPECT_EQ(tokenize("boa entrega ótima", longer), (Tokens{"entrega", "ótima"}));
  TokenizerConfig bad;
  bad.min_token_length = 0;
  EXPECT_THROW(tokenize("x", bad), Error);
}

TEST(Tokenize, Options) {
  TokenizerConfig cfg;
  cfg.keep_accents = false;
  EXPECT_EQ(tokenize("Entrega RÁPIDA", cfg), (Tokens{"entrega", "rapida"}));
  cfg = TokenizerConfig{};
  cfg.lowercase = false;
  EXPECT_EQ(tokenize("A Entrega Foi BOA", cfg), (Tokens{"Entrega", "BOA"}));
  cfg = TokenizerConfig{};
  cfg.stopwords = {};
  EXPECT_EQ(tokenize("a entrega foi boa", cfg), (Tokens{"entrega", "foi", "boa"}));
}

TEST(Tokenize, IdempotentOnOwnOutput) {
  const TokenizerConfig cfg;
  for (const char* text : {"Produto chegou quebrado!! Péssimo atendimento, nunca mais compro.",
                           "Ótima loja; entrega rápida e o produto é excelente (recomendo)", "  ...  "}) {
    const auto once = tokenize(text, cfg);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    EXPECT_EQ(tokenize(joined, cfg), once);
  }
}

TEST(Vocabulary, CountsAndOrder) {
  const std::vector<Tokens> docs{{"a", "b"}, {"b", "c"}};
  const auto v = build_vocabulary(docs, 1);
  EXPECT_EQ(v.terms, (Tokens{"a", "b", "c"}));
  EXPECT_EQ(v.corpus_term_counts, (std::vector<int64_t>{1, 2, 1}));
  EXPECT_EQ(v.id_of("c"), 2);
  const auto v2 = build_vocabulary(docs, 2);
  EXPECT_EQ(v2.terms, Tokens{"b"});
}

TEST(Vocabulary, EmptyRejected) {
  const TokenizerConfig cfg;
  const std::vector<std::string> texts{"a de que", "o"};
  try {
    encode_texts(texts, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_vocabulary);
  }
}

TEST(Encode, SharedIdsAndAlignment) {
  const TokenizerConfig cfg;
  const std::vector<std::string> texts{"entrega rápida", "entrega atrasada", "xyz"};
  const auto c = encode_texts(texts, cfg, 2);
  ASSERT_EQ(c.documents.size(), 3u);
  ASSERT_EQ(c.vocabulary.terms, Tokens{"entrega"});
  EXPECT_EQ(c.documents[0].token_ids, std::vector<int32_t>{0});
  EXPECT_EQ(c.documents[1].token_ids, std::vector<int32_t>{0});
  EXPECT_TRUE(c.documents[2].token_ids.empty());
  EXPECT_EQ(c.documents[2].review_index, 2u);
  EXPECT_EQ(c.total_tokens(), 2u);
}

TEST(Encode, DecodeReproducesTokens) {
  const TokenizerConfig cfg;
  const std::vector<std::string> texts{"Entrega rápida, produto excelente!", "Produto chegou quebrado, péssimo",
                                       "A entrega foi boa e o produto também"};
  const auto c = encode_texts(texts, cfg);
  size_t recount = 0;
  for (size_t d = 0; d < texts.size(); ++d) {
    const auto toks = tokenize(texts[d], cfg);
    EXPECT_EQ(c.decode(c.documents[d]), toks);
    recount += toks.size();
  }
  EXPECT_EQ(c.total_tokens(), recount);
}

TEST(Encode, FromReviews) {
  using testing::sample_review;
  using testing::ymd;
  const std::vector<Review> reviews{
      sample_review("x", "Entrega rápida", ReviewClassification::Praise, ymd(2018, 1, 1)),
      sample_review("x", "Entrega lenta", ReviewClassification::Complaint, ymd(2018, 1, 2))};
  const auto c = encode_corpus(reviews, TokenizerConfig{});
  EXPECT_EQ(c.vocabulary.terms, (Tokens{"entrega", "rápida", "lenta"}));
  EXPECT_EQ(c.documents[1].token_ids, (std::vector<int32_t>{0, 2}));
}

}  // namespace
}  // namespace reputex::textprep
