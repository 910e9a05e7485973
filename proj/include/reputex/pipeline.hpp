#pragma once

// The two user-facing pipeline steps shared by the service and the CLI:
// crawl a company into the store, and model a company's stored reviews.

#include <string>

#include "reputex/crawler.hpp"
#include "reputex/records.hpp"
#include "reputex/store.hpp"
#include "reputex/textprep.hpp"
#include "reputex/topics.hpp"

namespace reputex::pipeline {

struct CrawlOutcome {
  crawler::CrawlSummary summary;
  int64_t inserted = 0;
  int64_t duplicates = 0;
};

// Reviews are appended page by page as the crawl extracts them. On failure a
// CrawlError is thrown and whatever was appended stays in the store.
inline CrawlOutcome crawl_company(store::ReviewStore& store, const Company& company, std::string_view base_url,
                                  int64_t max_reviews, crawler::Fetcher& fetcher,
                                  const std::function<void()>& before_page = {}) {
  const crawler::CrawlPlan plan = crawler::plan_crawl(company, base_url, max_reviews);
  store.ensure_company(company);
  CrawlOutcome outcome;
  outcome.summary = crawler::run_crawl(plan, fetcher, [&](std::span<const Review> batch) {
    if (before_page) before_page();
    const auto r = store.append_reviews(company.slug, batch);
    outcome.inserted += r.inserted;
    outcome.duplicates += r.duplicates;
  });
  return outcome;
}

struct ModelOptions {
  ReportParameters parameters;
  textprep::TokenizerConfig tokenizer;
  int64_t min_count = 1;

  topics::LdaHyperparams hyperparams() const {
    topics::LdaHyperparams hp;
    hp.topics = parameters.topics;
    hp.alpha = parameters.alpha;
    hp.beta = parameters.beta;
    hp.iterations = parameters.iterations;
    hp.seed = parameters.seed;
    return hp;
  }
};

// Parameters for K topics with alpha = 50 / K and the other defaults.
inline ReportParameters default_parameters(int32_t topics = 5) {
  ReportParameters p;
  p.topics = topics;
  p.alpha = 50.0 / topics;
  return p;
}

// Builds the report for a company without saving it. Documents follow the
// store's listing order, so the result depends only on the stored review set.
inline StoredReport build_report(const store::ReviewStore& store, const std::string& slug,
                                 const ModelOptions& options) {
  const auto hp = options.hyperparams();
  hp.validate();
  if (options.parameters.words < 1) throw Error(Errc::invalid_argument, "words per topic must be >= 1");
  if (!(options.parameters.min_prob >= 0.0 && options.parameters.min_prob < 1.0))
    throw Error(Errc::invalid_argument, "min_prob must be in [0, 1)");
  const std::vector<Review> reviews = store.all_reviews(slug);
  if (reviews.empty()) throw Error(Errc::empty_corpus, "empty corpus: '" + slug + "' has no reviews");
  textprep::EncodedCorpus corpus;
  try {
    corpus = textprep::encode_corpus(reviews, options.tokenizer, options.min_count);
  } catch (const Error& e) {
    if (e.code() != Errc::empty_vocabulary) throw;
    throw Error(Errc::empty_corpus, "empty corpus: no term survives preprocessing for '" + slug + "'");
  }
  const topics::TopicModelState state = topics::train(corpus, hp);
  StoredReport report;
  report.company_slug = slug;
  report.parameters = options.parameters;
  report.report = topics::top_terms(state, static_cast<size_t>(options.parameters.words), options.parameters.min_prob);
  return report;
}

inline StoredReport model_company(store::ReviewStore& store, const std::string& slug, const ModelOptions& options) {
  StoredReport report = build_report(store, slug, options);
  report.created_at = now_utc();
  report.report_id = store.save_report(report);
  return report;
}

}  // namespace reputex::pipeline
