#pragma once

// HTTP front end for the whole flow: start a crawl for a company, poll the
// job, page through stored reviews, run topic modeling and fetch the latest
// report. Crawls run on a small worker pool; topic modeling runs inside the
// request.
//
// Error responses are {"status", "code", "message"} with code one of:
// bad_request, bad_slug, bad_paging, unknown_company, unknown_job,
// no_report, empty_corpus, internal_error.

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "reputex/crawler.hpp"
#include "reputex/pipeline.hpp"
#include "reputex/records.hpp"
#include "reputex/store.hpp"

namespace reputex::service {

enum class JobState { Queued, Running, Done, Failed };

inline std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::Queued: return "Queued";
    case JobState::Running: return "Running";
    case JobState::Done: return "Done";
    case JobState::Failed: return "Failed";
  }
  return "Failed";
}

struct CrawlJobRecord {
  std::string job_id;
  std::string company_slug;
  JobState state = JobState::Queued;
  std::optional<pipeline::CrawlOutcome> summary;
  std::optional<std::string> error;
  Timestamp created_at{};
  std::optional<Timestamp> finished_at;

  bool terminal() const { return state == JobState::Done || state == JobState::Failed; }
};

inline json outcome_to_json(const pipeline::CrawlOutcome& o) {
  return json{{"pages_fetched", o.summary.pages_fetched},
              {"reviews_extracted", o.summary.reviews_extracted},
              {"inserted", o.inserted},
              {"duplicates", o.duplicates},
              {"warnings", o.summary.warnings}};
}

inline json job_to_json(const CrawlJobRecord& j) {
  json out{{"job_id", j.job_id},
           {"company", j.company_slug},
           {"state", std::string(to_string(j.state))},
           {"created_at", format_timestamp(j.created_at)}};
  out["summary"] = j.summary ? outcome_to_json(*j.summary) : json(nullptr);
  out["error"] = j.error ? json(*j.error) : json(nullptr);
  out["finished_at"] = j.finished_at ? json(format_timestamp(*j.finished_at)) : json(nullptr);
  return out;
}

struct ApiError {
  int status = 500;
  std::string code;
  std::string message;
};

struct ServiceConfig {
  std::filesystem::path store_root = "reputex-data";
  std::string base_url = "http://127.0.0.1:8081";
  crawler::FetchPolicy policy;
  int64_t default_max_reviews = crawler::kDefaultMaxReviews;
  int workers = 2;
  std::optional<std::filesystem::path> static_dir;
};

class Service {
 public:
  explicit Service(ServiceConfig config) : config_(std::move(config)), store_(config_.store_root) {
    config_.policy.validate();
    routes();
    for (int i = 0; i < std::max(1, config_.workers); ++i) workers_.emplace_back([this] { worker(); });
  }

  ~Service() { stop(); }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  store::ReviewStore& store() { return store_; }

  // Port 0 picks a free port. Throws bind_error.
  void start(int port = 0, const std::string& host = "127.0.0.1") {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error(Errc::bind_error, "cannot bind " + host + ":" + std::to_string(port));
    port_ = bound;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  // Serves on the calling thread until stop() is called from elsewhere.
  void run(int port, const std::string& host = "0.0.0.0") {
    if (!server_.bind_to_port(host, port)) throw Error(Errc::bind_error, "cannot bind " + host + ":" + std::to_string(port));
    port_ = port;
    server_.listen_after_bind();
  }

  // Stops accepting requests, cancels running crawls at their next page and
  // joins the workers. Everything already appended is on disk.
  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
    {
      std::lock_guard lock(mutex_);
      if (stopping_) return;
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) {
      if (w.joinable()) w.join();
    }
  }

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  // Returns the company's non-terminal job if there is one, else queues a new
  // crawl.
  CrawlJobRecord start_crawl(const std::string& slug, std::optional<std::string> base_url,
                             std::optional<int64_t> max_reviews) {
    const Company company = make_company(slug);
    const std::string base = base_url.value_or(config_.base_url);
    const int64_t cap = max_reviews.value_or(config_.default_max_reviews);
    crawler::plan_crawl(company, base, cap);  // validates
    std::lock_guard lock(mutex_);
    if (const auto it = active_.find(slug); it != active_.end()) return jobs_.at(it->second);
    CrawlJobRecord job;
    job.job_id = "job-" + std::to_string(++job_seq_);
    job.company_slug = slug;
    job.created_at = now_utc();
    jobs_.emplace(job.job_id, job);
    active_[slug] = job.job_id;
    queue_.push_back(Task{job.job_id, company, base, cap});
    cv_.notify_one();
    return job;
  }

  std::optional<CrawlJobRecord> job(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
  }

 private:
  struct Task {
    std::string job_id;
    Company company;
    std::string base_url;
    int64_t max_reviews = 0;
  };

  void worker() {
    for (;;) {
      Task task;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (stopping_) return;
        task = std::move(queue_.front());
        queue_.pop_front();
        jobs_.at(task.job_id).state = JobState::Running;
      }
      std::optional<pipeline::CrawlOutcome> outcome;
      std::optional<std::string> error;
      pipeline::CrawlOutcome progress;
      try {
        crawler::Fetcher fetcher(config_.policy);
        outcome = pipeline::crawl_company(store_, task.company, task.base_url, task.max_reviews, fetcher, [this] {
          std::lock_guard lock(mutex_);
          if (stopping_) throw Error(Errc::network_error, "crawl cancelled by shutdown");
        });
      } catch (const crawler::CrawlError& e) {
        error = e.what();
        progress.summary = e.partial();
        outcome = progress;
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(mutex_);
      auto& job = jobs_.at(task.job_id);
      job.summary = outcome;
      job.error = error;
      job.state = error ? JobState::Failed : JobState::Done;
      job.finished_at = now_utc();
      active_.erase(task.company.slug);
    }
  }

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  static void send_error(httplib::Response& res, const ApiError& e) {
    send_json(res, e.status, json{{"status", e.status}, {"code", e.code}, {"message", e.message}});
  }

  static ApiError map_error(const Error& e) {
    switch (e.code()) {
      case Errc::unknown_company: return {404, "unknown_company", e.what()};
      case Errc::no_report: return {404, "no_report", e.what()};
      case Errc::empty_corpus:
      case Errc::empty_vocabulary: return {422, "empty_corpus", e.what()};
      case Errc::invalid_argument:
      case Errc::invalid_base_url:
      case Errc::invalid_plan:
      case Errc::invalid_date:
      case Errc::unknown_label: return {400, "bad_request", e.what()};
      default: return {500, "internal_error", e.what()};
    }
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      send_error(res, map_error(e));
    } catch (const json::exception& e) {
      send_error(res, {400, "bad_request", std::string("malformed JSON: ") + e.what()});
    } catch (const std::exception& e) {
      send_error(res, {500, "internal_error", e.what()});
    }
  }

  static json body_json(const httplib::Request& req) {
    if (unicode::trim(req.body).empty()) return json::object();
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(Errc::invalid_argument, "request body must be a JSON object");
    return j;
  }

  static std::optional<int64_t> int_param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    const std::string v = req.get_param_value(name);
    try {
      size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(name);
      return x;
    } catch (const std::exception&) {
      throw Error(Errc::invalid_argument, std::string("parameter '") + name + "' must be an integer");
    }
  }

  void routes() {
    server_.Get("/companies", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json out = json::array();
        for (const auto& c : store_.companies()) {
          const auto counts = store_.classification_counts(c.slug);
          out.push_back(json{{"slug", c.slug},
                             {"name", c.name},
                             {"sector", c.sector},
                             {"praise", counts.praise},
                             {"complaint", counts.complaint},
                             {"total", counts.praise + counts.complaint}});
        }
        send_json(res, 200, out);
      });
    });

    server_.Post(R"(/companies/([^/]+)/crawl)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string slug = req.matches[1];
        if (!is_valid_slug(slug)) return send_error(res, {400, "bad_slug", "malformed company slug: '" + slug + "'"});
        const json body = body_json(req);
        std::optional<std::string> base;
        std::optional<int64_t> cap;
        if (body.contains("base_url") && !body["base_url"].is_null()) base = body["base_url"].get<std::string>();
        if (body.contains("max_reviews") && !body["max_reviews"].is_null()) cap = body["max_reviews"].get<int64_t>();
        send_json(res, 202, job_to_json(start_crawl(slug, base, cap)));
      });
    });

    server_.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto j = job(req.matches[1]);
        if (!j) return send_error(res, {404, "unknown_job", "unknown job '" + std::string(req.matches[1]) + "'"});
        send_json(res, 200, job_to_json(*j));
      });
    });

    server_.Get(R"(/companies/([^/]+)/reviews)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string slug = req.matches[1];
        store::ReviewFilter filter;
        if (req.has_param("classification") && !req.get_param_value("classification").empty())
          filter.classification = parse_classification(req.get_param_value("classification"));
        if (req.has_param("from") && !req.get_param_value("from").empty())
          filter.from = parse_review_date(req.get_param_value("from"));
        if (req.has_param("to") && !req.get_param_value("to").empty())
          filter.to = parse_review_date(req.get_param_value("to"));
        const int64_t offset = int_param(req, "offset").value_or(0);
        const int64_t limit = int_param(req, "limit").value_or(50);
        if (limit < 1 || limit > store::kMaxPageLimit || offset < 0)
          return send_error(res, {400, "bad_paging", "limit must be in [1, 1000] and offset >= 0"});
        const auto page = store_.list_reviews(slug, filter, offset, limit);
        json items = json::array();
        for (const auto& r : page.items) {
          items.push_back(json{{"description", r.description},
                               {"classification", std::string(to_string(r.classification))},
                               {"posted_date", format_date_iso(r.posted_date)},
                               {"source_url", r.source_url}});
        }
        send_json(res, 200,
                  json{{"items", std::move(items)}, {"total", page.total}, {"offset", page.offset}, {"limit", page.limit}});
      });
    });

    server_.Post(R"(/companies/([^/]+)/topics)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string slug = req.matches[1];
        const json body = body_json(req);
        pipeline::ModelOptions options;
        const int32_t k = body.value("K", body.value("topics", 5));
        options.parameters = pipeline::default_parameters(k);
        options.parameters.words = body.value("words", options.parameters.words);
        options.parameters.min_prob = body.value("min_prob", options.parameters.min_prob);
        options.parameters.alpha = body.value("alpha", options.parameters.alpha);
        options.parameters.beta = body.value("beta", options.parameters.beta);
        options.parameters.seed = body.value("seed", options.parameters.seed);
        options.parameters.iterations = body.value("iterations", options.parameters.iterations);
        if (!store_.has_company(slug)) throw Error(Errc::unknown_company, "unknown company '" + slug + "'");
        send_json(res, 200, stored_report_to_json(pipeline::model_company(store_, slug, options)));
      });
    });

    server_.Get(R"(/companies/([^/]+)/topics/latest)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, stored_report_to_json(store_.load_latest_report(req.matches[1]))); });
    });

    server_.Get(R"(/companies/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string slug = req.matches[1];
        const auto format = store::parse_export_format(
            req.has_param("format") ? req.get_param_value("format") : std::string("delimited-table"));
        std::ostringstream out;
        store_.export_reviews(slug, format, out);
        const bool csv = format == store::ExportFormat::delimited_table;
        res.set_header("Content-Disposition",
                       "attachment; filename=\"" + slug + (csv ? "-reviews.csv\"" : "-reviews.jsonl\""));
        res.status = 200;
        res.set_content(out.str(), csv ? "text/csv; charset=utf-8" : "application/x-ndjson; charset=utf-8");
      });
    });

    if (config_.static_dir) server_.set_mount_point("/", config_.static_dir->string());
  }

  ServiceConfig config_;
  store::ReviewStore store_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
  uint64_t job_seq_ = 0;
  std::map<std::string, CrawlJobRecord> jobs_;
  std::map<std::string, std::string> active_;  // slug -> non-terminal job id
  std::deque<Task> queue_;
  std::vector<std::thread> workers_;
};

}  // namespace reputex::service
