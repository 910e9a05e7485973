#pragma once

// Polite crawler for paginated review listings.
//
// Roles: run_crawl is the engine loop, its URL frontier is the scheduler,
// Fetcher is the downloader, parse_review_listing is the spider and the
// ReviewSink is the item pipeline. Request middleware is reduced to the
// FetchPolicy (delay, retries, timeout, user agent).

#include <httplib.h>

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include "reputex/domain.hpp"
#include "reputex/error.hpp"
#include "reputex/html.hpp"
#include "reputex/url.hpp"

namespace reputex::crawler {

using Clock = std::chrono::system_clock;
using TimePoint = Clock::time_point;

inline constexpr int64_t kDefaultMaxReviews = 6000;

struct FetchPolicy {
  std::chrono::milliseconds min_delay{1000};
  int max_retries = 2;
  std::chrono::milliseconds timeout{10000};
  std::string user_agent = "reputex/1.0";

  void validate() const {
    if (min_delay.count() < 0) throw Error(Errc::invalid_argument, "min_delay must be >= 0");
    if (max_retries < 0) throw Error(Errc::invalid_argument, "max_retries must be >= 0");
    if (timeout.count() <= 0) throw Error(Errc::invalid_argument, "timeout must be > 0");
  }
};

struct CrawlPlan {
  std::string company_slug;
  std::string seed_url;
  int64_t max_reviews = kDefaultMaxReviews;
};

// Seed is `<base>/company/<slug>/reviews?page=1`.
inline CrawlPlan plan_crawl(const Company& company, std::string_view base_url,
                            int64_t max_reviews = kDefaultMaxReviews) {
  const auto base = parse_url(base_url);
  if (!base || !base->query.empty()) throw Error(Errc::invalid_base_url, "invalid base url: '" + std::string(base_url) + "'");
  if (max_reviews <= 0) throw Error(Errc::invalid_plan, "max_reviews must be > 0");
  if (!is_valid_slug(company.slug)) throw Error(Errc::invalid_plan, "invalid company slug: '" + company.slug + "'");
  std::string prefix = base->path;
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return CrawlPlan{company.slug, base->origin() + prefix + "/company/" + company.slug + "/reviews?page=1", max_reviews};
}

struct PageResult {
  std::string url;
  int http_status = 0;
  std::string body;
  TimePoint fetched_at{};
};

struct FetchLogEntry {
  std::string url;
  TimePoint started_at{};
  int http_status = 0;  // 0 when the transport failed
  int attempt = 1;
};

// Per-host request clock. Holding a host's slot serializes requests to that
// host and spaces their start times by at least the requested delay.
class HostClock {
 public:
  static HostClock& shared() {
    static HostClock clock;
    return clock;
  }

  template <typename F>
  auto run_exclusive(const std::string& host, std::chrono::milliseconds min_delay, F&& f) {
    Slot& slot = slot_for(host);
    std::lock_guard lock(slot.mutex);
    if (slot.last) {
      const TimePoint ready = *slot.last + min_delay;
      while (Clock::now() < ready) std::this_thread::sleep_until(ready);
    }
    const TimePoint started = Clock::now();
    slot.last = started;
    return f(started);
  }

 private:
  struct Slot {
    std::mutex mutex;
    std::optional<TimePoint> last;
  };

  Slot& slot_for(const std::string& host) {
    std::lock_guard lock(mutex_);
    auto& p = slots_[host];
    if (!p) p = std::make_unique<Slot>();
    return *p;
  }

  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Slot>> slots_;
};

// The downloader. Keeps one connection per origin and a log of every attempt.
class Fetcher {
 public:
  explicit Fetcher(FetchPolicy policy, HostClock& clock = HostClock::shared())
      : policy_(std::move(policy)), clock_(clock) {
    policy_.validate();
  }

  const FetchPolicy& policy() const { return policy_; }

  std::vector<FetchLogEntry> log() const {
    std::lock_guard lock(mutex_);
    return log_;
  }

  // Retries transport failures and 5xx up to max_retries times; 4xx fails at
  // once. Throws network_error, timeout or http_error.
  PageResult fetch(std::string_view url_text) {
    const auto url = parse_url(url_text);
    if (!url) throw Error(Errc::invalid_argument, "not an absolute url: '" + std::string(url_text) + "'");
    const std::string url_str = url->str();
    httplib::Client& client = client_for(*url);
    const int attempts = policy_.max_retries + 1;
    for (int attempt = 1;; ++attempt) {
      auto [res, started] = clock_.run_exclusive(url->host_key(), policy_.min_delay, [&](TimePoint t) {
        return std::make_pair(client.Get(url->target()), t);
      });
      const int status = res ? res->status : 0;
      {
        std::lock_guard lock(mutex_);
        log_.push_back(FetchLogEntry{url_str, started, status, attempt});
      }
      const bool last = attempt >= attempts;
      if (res) {
        if (status >= 200 && status < 300) return PageResult{url_str, status, std::move(res->body), Clock::now()};
        const bool retryable = status >= 500;
        if (!retryable || last)
          throw Error(Errc::http_error, "HTTP " + std::to_string(status) + " for " + url_str, status);
        continue;
      }
      if (last) {
        const auto err = res.error();
        const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
        throw Error(timed_out ? Errc::timeout : Errc::network_error,
                    httplib::to_string(err) + " fetching " + url_str);
      }
    }
  }

 private:
  httplib::Client& client_for(const Url& url) {
    std::lock_guard lock(mutex_);
    auto& c = clients_[url.origin()];
    if (!c) {
      c = std::make_unique<httplib::Client>(url.origin());
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(policy_.timeout - secs);
      c->set_connection_timeout(secs.count(), usecs.count());
      c->set_read_timeout(secs.count(), usecs.count());
      c->set_write_timeout(secs.count(), usecs.count());
      c->set_keep_alive(true);
      c->set_follow_location(false);
      c->set_default_headers({{"User-Agent", policy_.user_agent}});
    }
    return *c;
  }

  FetchPolicy policy_;
  HostClock& clock_;
  mutable std::mutex mutex_;
  std::vector<FetchLogEntry> log_;
  std::map<std::string, std::unique_ptr<httplib::Client>> clients_;
};

inline PageResult fetch_page(std::string_view url, const FetchPolicy& policy) {
  Fetcher fetcher(policy);
  return fetcher.fetch(url);
}

struct ListingContext {
  std::string company_slug;
  Timestamp fetched_at = now_utc();
};

struct ListingParse {
  std::vector<Review> reviews;
  std::optional<std::string> next_page;
  std::vector<std::string> warnings;
};

// Extracts review items from a listing page of the canonical shape:
//
//   <... class="review-list">
//     <... class="review-item">
//       <... class="review-text">description</...>
//       <... class="review-kind">Elogio|Reclamação</...>
//       <... class="review-date">dd/mm/yyyy</...>
//     </...>
//   </...>
//   <a rel="next" href="...">
//
// Malformed items are skipped with a warning. A missing list container
// throws unrecognized_page.
inline ListingParse parse_review_listing(std::string_view body, std::string_view page_url,
                                         const ListingContext& ctx) {
  const auto page = parse_url(page_url);
  if (!page) throw Error(Errc::invalid_argument, "page url is not absolute: '" + std::string(page_url) + "'");
  const html::Document doc(body);
  const auto list = doc.first_by_class(html::Document::root, "review-list");
  if (!list) throw Error(Errc::unrecognized_page, "no review-list container on " + page->str());

  ListingParse out;
  size_t position = 0;
  for (size_t item : doc.find_by_class(*list, "review-item")) {
    ++position;
    auto field = [&](std::string_view cls) -> std::optional<std::string> {
      const auto el = doc.first_by_class(item, cls);
      if (!el) return std::nullopt;
      return std::string(unicode::trim(doc.text_content(*el)));
    };
    const std::string where = page->str() + " item " + std::to_string(position);
    const auto text = field("review-text");
    const auto kind = field("review-kind");
    const auto date = field("review-date");
    if (!text || !kind || !date) {
      out.warnings.push_back(where + ": missing field");
      continue;
    }
    try {
      Review r;
      r.company_slug = ctx.company_slug;
      r.description = unicode::collapse_whitespace(*text);
      r.classification = parse_classification(*kind);
      r.posted_date = parse_review_date(*date);
      r.source_url = page->str();
      r.fetched_at = ctx.fetched_at;
      validate(r);
      out.reviews.push_back(std::move(r));
    } catch (const Error& e) {
      out.warnings.push_back(where + ": " + e.what());
    }
  }

  for (size_t a : doc.find_all(html::Document::root, [&](size_t id) { return doc.node(id).tag == "a"; })) {
    if (!doc.has_token(a, "rel", "next")) continue;
    const auto href = doc.attr(a, "href");
    if (!href) continue;
    const auto next = resolve_url(*page, unicode::trim(*href));
    if (!next) {
      out.warnings.push_back(page->str() + ": unusable next link '" + std::string(*href) + "'");
    } else if (next->str() == page->str()) {
      out.warnings.push_back(page->str() + ": next link points to itself");
    } else {
      out.next_page = next->str();
    }
    break;
  }
  return out;
}

struct CrawlSummary {
  int64_t pages_fetched = 0;
  int64_t reviews_extracted = 0;
  std::vector<std::string> warnings;
};

// Terminal crawl failure carrying the progress made before it.
class CrawlError : public Error {
 public:
  CrawlError(const Error& cause, CrawlSummary partial)
      : Error(cause.code(), cause.what(), cause.http_status()), partial_(std::move(partial)) {}
  const CrawlSummary& partial() const { return partial_; }

 private:
  CrawlSummary partial_;
};

// Receives each page's reviews in extraction order.
using ReviewSink = std::function<void(std::span<const Review>)>;

// Follows next links from the seed until the chain ends or max_reviews is
// reached. Never requests a URL twice.
inline CrawlSummary run_crawl(const CrawlPlan& plan, Fetcher& fetcher, const ReviewSink& sink) {
  if (plan.max_reviews <= 0) throw Error(Errc::invalid_plan, "max_reviews must be > 0");
  const auto seed = parse_url(plan.seed_url);
  if (!seed) throw Error(Errc::invalid_plan, "seed url is not absolute: '" + plan.seed_url + "'");

  CrawlSummary summary;
  std::deque<std::string> frontier{seed->str()};
  std::unordered_set<std::string> seen{seed->str()};
  while (!frontier.empty() && summary.reviews_extracted < plan.max_reviews) {
    const std::string url = frontier.front();
    frontier.pop_front();
    try {
      PageResult page = fetcher.fetch(url);
      ++summary.pages_fetched;
      ListingContext ctx{plan.company_slug, std::chrono::floor<std::chrono::seconds>(page.fetched_at)};
      ListingParse parsed = parse_review_listing(page.body, page.url, ctx);
      summary.warnings.insert(summary.warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
      const auto room = static_cast<size_t>(plan.max_reviews - summary.reviews_extracted);
      if (parsed.reviews.size() > room) parsed.reviews.resize(room);
      if (!parsed.reviews.empty()) {
        sink(parsed.reviews);
        summary.reviews_extracted += static_cast<int64_t>(parsed.reviews.size());
      }
      if (parsed.next_page && seen.insert(*parsed.next_page).second) frontier.push_back(*parsed.next_page);
    } catch (const Error& e) {
      throw CrawlError(e, summary);
    }
  }
  return summary;
}

inline CrawlSummary run_crawl(const CrawlPlan& plan, const FetchPolicy& policy, const ReviewSink& sink) {
  Fetcher fetcher(policy);
  return run_crawl(plan, fetcher, sink);
}

}  // namespace reputex::crawler
