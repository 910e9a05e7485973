#pragma once

// `reputex crawl|model|report|export|serve|fixture-serve [flags]`
//
// Exit codes: 0 ok, 1 operational failure, 2 usage error.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <string>
#include <vector>

#include "reputex/crawler.hpp"
#include "reputex/fixture.hpp"
#include "reputex/pipeline.hpp"
#include "reputex/records.hpp"
#include "reputex/service.hpp"
#include "reputex/store.hpp"

namespace reputex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class OutputFormat { human, structured };

inline std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

// Topic index followed by its terms, one topic per row.
inline std::string format_report_table(const StoredReport& r) {
  std::ostringstream out;
  out << "company: " << r.company_slug << "  topics: " << r.parameters.topics << "  words: " << r.parameters.words
      << "  min_prob: " << r.parameters.min_prob << "  seed: " << r.parameters.seed
      << "  iterations: " << r.parameters.iterations << "\n";
  out << "Topic  Terms\n";
  for (size_t k = 0; k < r.report.topics.size(); ++k) {
    out << std::left << std::setw(7) << k;
    bool first = true;
    for (const auto& t : r.report.topics[k]) {
      out << (first ? "" : "  ") << t.term << " (" << std::fixed << std::setprecision(4) << t.probability << ")";
      first = false;
    }
    out << std::defaultfloat << "\n";
  }
  return out.str();
}

inline void print_report(std::ostream& out, const StoredReport& r, OutputFormat format) {
  if (format == OutputFormat::structured) out << report_payload_to_json(r).dump() << "\n";
  else out << format_report_table(r);
}

namespace detail {

// Blocks SIGINT/SIGTERM in the calling thread (and threads it spawns later)
// and returns once one of them arrives.
class SignalWaiter {
 public:
  SignalWaiter() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, &old_);
  }
  ~SignalWaiter() { pthread_sigmask(SIG_SETMASK, &old_, nullptr); }

  int wait() {
    int sig = 0;
    sigwait(&set_, &sig);
    return sig;
  }

 private:
  sigset_t set_{};
  sigset_t old_{};
};

}  // namespace detail

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Review reputation mining: crawl, store and topic-model company reviews", "reputex"};
  app.require_subcommand(1);

  std::string store_root = env_or("REPUTEX_STORE", "reputex-data");
  std::string base_url = env_or("REPUTEX_BASE_URL", "http://127.0.0.1:8081");
  int64_t min_delay_ms = 1000;
  std::string user_agent = "reputex/1.0";
  int max_retries = 2;
  int64_t timeout_ms = 10000;

  auto add_store = [&](CLI::App* sub) {
    sub->add_option("--store", store_root, "Store root directory (env REPUTEX_STORE)")->capture_default_str();
  };
  auto add_fetch = [&](CLI::App* sub) {
    sub->add_option("--base-url", base_url, "Review platform base URL (env REPUTEX_BASE_URL)")->capture_default_str();
    sub->add_option("--min-delay-ms", min_delay_ms, "Minimum delay between requests to one host")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--user-agent", user_agent, "User-Agent header")->capture_default_str();
    sub->add_option("--max-retries", max_retries, "Retries on transport errors and 5xx")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--timeout-ms", timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber)->capture_default_str();
  };

  // crawl
  std::string slug;
  int64_t max_reviews = crawler::kDefaultMaxReviews;
  std::string company_name;
  std::string company_sector;
  auto* crawl = app.add_subcommand("crawl", "Crawl a company's review listing into the store");
  crawl->add_option("slug", slug, "Company slug")->required();
  crawl->add_option("--max-reviews", max_reviews, "Stop after this many reviews")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  crawl->add_option("--name", company_name, "Display name recorded for a new company");
  crawl->add_option("--sector", company_sector, "Sector recorded for a new company");
  add_store(crawl);
  add_fetch(crawl);

  // model
  int32_t topics_k = 5;
  int32_t words = 6;
  double min_prob = 0.02;
  std::optional<double> alpha;
  double beta = 0.01;
  int32_t iterations = 1000;
  uint64_t seed = 1;
  std::string stopwords_path;
  int64_t min_count = 1;
  size_t min_token_length = 2;
  OutputFormat format = OutputFormat::human;
  const std::map<std::string, OutputFormat> format_map{{"human", OutputFormat::human},
                                                       {"human-table", OutputFormat::human},
                                                       {"structured", OutputFormat::structured}};
  auto* model = app.add_subcommand("model", "Run topic modeling over a company's stored reviews");
  model->add_option("slug", slug, "Company slug")->required();
  model->add_option("--topics,-K", topics_k, "Number of topics")->check(CLI::PositiveNumber)->capture_default_str();
  model->add_option("--words", words, "Terms listed per topic")->check(CLI::PositiveNumber)->capture_default_str();
  model->add_option("--min-prob", min_prob, "Drop listed terms with probability below this")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  model->add_option("--alpha", alpha, "Document-topic concentration (default 50/K)")->check(CLI::PositiveNumber);
  model->add_option("--beta", beta, "Topic-term concentration")->check(CLI::PositiveNumber)->capture_default_str();
  model->add_option("--iterations", iterations, "Gibbs sweeps")->check(CLI::NonNegativeNumber)->capture_default_str();
  model->add_option("--seed", seed, "Random seed")->capture_default_str();
  model->add_option("--stopwords", stopwords_path, "Stopword file replacing the bundled list")
      ->check(CLI::ExistingFile);
  model->add_option("--min-count", min_count, "Minimum corpus count for a term")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  model->add_option("--min-token-length", min_token_length, "Minimum token length in characters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  model->add_option("--format", format, "human or structured")->transform(CLI::CheckedTransformer(format_map));
  add_store(model);

  // report
  auto* report = app.add_subcommand("report", "Print the latest stored topic report");
  report->add_option("slug", slug, "Company slug")->required();
  report->add_option("--format", format, "human or structured")->transform(CLI::CheckedTransformer(format_map));
  add_store(report);

  // export
  std::string export_format = "delimited-table";
  std::string export_out;
  auto* exp = app.add_subcommand("export", "Write a company's reviews to a file");
  exp->add_option("slug", slug, "Company slug")->required();
  exp->add_option("--format", export_format, "delimited-table or structured-records")
      ->check(CLI::IsMember({"delimited-table", "structured-records"}))
      ->capture_default_str();
  exp->add_option("--out", export_out, "Destination file")->required();
  add_store(exp);

  // serve
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string static_dir;
  int workers = 2;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535))->capture_default_str();
  serve->add_option("--host", host, "Listen address")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
  serve->add_option("--workers", workers, "Crawl worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  add_store(serve);
  add_fetch(serve);

  // fixture-serve
  std::string companies_file;
  std::optional<uint64_t> fixture_seed;
  auto* fixture_serve = app.add_subcommand("fixture-serve", "Serve a synthetic review platform");
  fixture_serve->add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535))->capture_default_str();
  fixture_serve->add_option("--host", host, "Listen address")->capture_default_str();
  fixture_serve->add_option("--companies", companies_file, "Fixture spec (JSON)")->required()->check(CLI::ExistingFile);
  fixture_serve->add_option("--seed", fixture_seed, "Overrides the seed in the companies file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << e.what() << "\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  auto policy = [&] {
    crawler::FetchPolicy p;
    p.min_delay = std::chrono::milliseconds(min_delay_ms);
    p.max_retries = max_retries;
    p.timeout = std::chrono::milliseconds(timeout_ms);
    p.user_agent = user_agent;
    return p;
  };

  try {
    if (crawl->parsed()) {
      if (!is_valid_slug(slug)) {
        err << "invalid company slug: '" << slug << "'\n" << crawl->help();
        return kExitUsage;
      }
      store::ReviewStore store(store_root);
      crawler::Fetcher fetcher(policy());
      const Company company = make_company(slug, company_name, company_sector);
      try {
        const auto o = pipeline::crawl_company(store, company, base_url, max_reviews, fetcher);
        out << "pages=" << o.summary.pages_fetched << " reviews=" << o.summary.reviews_extracted
            << " duplicates=" << o.duplicates << "\n";
        for (const auto& w : o.summary.warnings) err << "warning: " << w << "\n";
        return kExitOk;
      } catch (const crawler::CrawlError& e) {
        out << "pages=" << e.partial().pages_fetched << " reviews=" << e.partial().reviews_extracted << "\n";
        err << "crawl failed: " << e.what() << "\n";
        return kExitFailure;
      }
    }

    if (model->parsed()) {
      store::ReviewStore store(store_root);
      if (!store.has_company(slug)) {
        err << "empty corpus: unknown company '" << slug << "'\n";
        return kExitFailure;
      }
      pipeline::ModelOptions options;
      options.parameters = pipeline::default_parameters(topics_k);
      if (alpha) options.parameters.alpha = *alpha;
      options.parameters.words = words;
      options.parameters.min_prob = min_prob;
      options.parameters.beta = beta;
      options.parameters.iterations = iterations;
      options.parameters.seed = seed;
      options.min_count = min_count;
      options.tokenizer.min_token_length = min_token_length;
      if (!stopwords_path.empty()) options.tokenizer.stopwords = textprep::load_stopwords(stopwords_path);
      try {
        print_report(out, pipeline::model_company(store, slug, options), format);
      } catch (const Error& e) {
        if (e.code() != Errc::empty_corpus) throw;
        err << "empty corpus\n";
        return kExitFailure;
      }
      return kExitOk;
    }

    if (report->parsed()) {
      store::ReviewStore store(store_root);
      print_report(out, store.load_latest_report(slug), format);
      return kExitOk;
    }

    if (exp->parsed()) {
      store::ReviewStore store(store_root);
      const auto counts = store.classification_counts(slug);
      if (counts.praise + counts.complaint == 0) {
        err << "nothing to export for '" << slug << "'\n";
        return kExitFailure;
      }
      const auto bytes = store.export_reviews(slug, store::parse_export_format(export_format), export_out);
      out << "bytes=" << bytes << " path=" << export_out << "\n";
      return kExitOk;
    }

    if (serve->parsed()) {
      detail::SignalWaiter signals;
      service::ServiceConfig config;
      config.store_root = store_root;
      config.base_url = base_url;
      config.policy = policy();
      config.workers = workers;
      if (!static_dir.empty()) config.static_dir = static_dir;
      service::Service svc(config);
      svc.start(port, host);
      out << "serving on http://" << host << ":" << svc.port() << " (store " << store_root << ")" << std::endl;
      signals.wait();
      svc.stop();
      out << "stopped" << std::endl;
      return kExitOk;
    }

    if (fixture_serve->parsed()) {
      detail::SignalWaiter signals;
      auto spec = fixture::fixture_spec_from_json(json::parse(store::detail::read_file(companies_file)));
      if (fixture_seed) spec.seed = *fixture_seed;
      fixture::FixtureServer server(fixture::generate_site(spec));
      server.start(port, host);
      out << "fixture site on http://" << host << ":" << server.port() << std::endl;
      signals.wait();
      server.stop();
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace reputex::cli
