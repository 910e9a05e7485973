#pragma once

// Durable review storage: one append-only log per company with an in-memory
// key index rebuilt on open, plus a directory of historical topic reports.
//
//   <root>/<slug>/company.json
//   <root>/<slug>/reviews.log           one JSON record per line
//   <root>/<slug>/reports/<ts>.report   one JSON document per report
//
// One writer per company at a time; readers may run concurrently.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "reputex/domain.hpp"
#include "reputex/error.hpp"
#include "reputex/records.hpp"

namespace reputex::store {

namespace fs = std::filesystem;

struct AppendResult {
  int64_t inserted = 0;
  int64_t duplicates = 0;
};

struct ReviewFilter {
  std::optional<ReviewClassification> classification;
  std::optional<Date> from;  // inclusive
  std::optional<Date> to;    // inclusive

  bool matches(const Review& r) const {
    if (classification && r.classification != *classification) return false;
    if (from && r.posted_date < *from) return false;
    if (to && r.posted_date > *to) return false;
    return true;
  }
};

struct ReviewPage {
  std::vector<Review> items;
  int64_t total = 0;
  int64_t offset = 0;
  int64_t limit = 0;
};

struct ClassificationCounts {
  int64_t praise = 0;
  int64_t complaint = 0;

  friend bool operator==(const ClassificationCounts&, const ClassificationCounts&) = default;
};

enum class ExportFormat { delimited_table, structured_records };

inline ExportFormat parse_export_format(std::string_view s) {
  if (s == "delimited-table" || s == "csv") return ExportFormat::delimited_table;
  if (s == "structured-records" || s == "jsonl") return ExportFormat::structured_records;
  throw Error(Errc::invalid_argument, "unknown export format: '" + std::string(s) + "'");
}

inline constexpr int64_t kMaxPageLimit = 1000;

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::storage_error, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes via a temporary file and rename so readers never see a torn file.
inline void write_file_atomic(const fs::path& p, std::string_view content) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::storage_error, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(Errc::storage_error, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw Error(Errc::storage_error, "rename failed: " + p.string() + ": " + ec.message());
}

// "YYYYMMDDTHHMMSS.ffffffZ", fixed width so names sort chronologically.
inline std::string report_stamp(std::chrono::system_clock::time_point t) {
  const auto us = std::chrono::floor<std::chrono::microseconds>(t);
  const auto secs = std::chrono::floor<std::chrono::seconds>(us);
  const auto day = std::chrono::floor<std::chrono::days>(secs);
  const Date d{day};
  const std::chrono::hh_mm_ss tod{secs - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d%02u%02uT%02d%02d%02d.%06lldZ", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()), static_cast<long long>((us - secs).count()));
  return buf;
}

}  // namespace detail

class ReviewStore {
 public:
  explicit ReviewStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error(Errc::storage_error, "cannot create store root " + root_.string() + ": " + ec.message());
    for (const auto& entry : fs::directory_iterator(root_)) {
      if (!entry.is_directory()) continue;
      const std::string slug = entry.path().filename().string();
      if (!is_valid_slug(slug)) continue;
      if (!fs::exists(entry.path() / "company.json") && !fs::exists(entry.path() / "reviews.log")) continue;
      companies_.emplace(slug, load_company(slug));
    }
  }

  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  const fs::path& root() const { return root_; }

  // Registers the company if it is new; existing metadata is kept.
  void ensure_company(const Company& company) {
    if (!is_valid_slug(company.slug)) throw Error(Errc::invalid_argument, "invalid slug: '" + company.slug + "'");
    std::unique_lock lock(mutex_);
    if (companies_.contains(company.slug)) return;
    const fs::path dir = root_ / company.slug;
    std::error_code ec;
    fs::create_directories(dir / "reports", ec);
    if (ec) throw Error(Errc::storage_error, "cannot create " + dir.string() + ": " + ec.message());
    const json meta{{"slug", company.slug}, {"name", company.name}, {"sector", company.sector}};
    detail::write_file_atomic(dir / "company.json", meta.dump() + "\n");
    auto data = std::make_unique<CompanyData>();
    data->info = company;
    companies_.emplace(company.slug, std::move(data));
  }

  bool has_company(const std::string& slug) const {
    std::shared_lock lock(mutex_);
    return companies_.contains(slug);
  }

  std::vector<Company> companies() const {
    std::shared_lock lock(mutex_);
    std::vector<Company> out;
    for (const auto& [slug, data] : companies_) out.push_back(data->info);
    return out;
  }

  // Inserts records whose key is new. The whole batch is validated before
  // anything is written; each record is flushed as its own line.
  AppendResult append_reviews(const std::string& slug, std::span<const Review> batch) {
    CompanyData& data = company_data(slug);
    for (const Review& r : batch) {
      validate(r);
      if (r.company_slug != slug) throw Error(Errc::invalid_record, "review belongs to '" + r.company_slug + "'");
    }
    std::unique_lock lock(data.mutex);
    if (!data.log.is_open()) {
      data.log.open(root_ / slug / "reviews.log", std::ios::binary | std::ios::app);
      if (!data.log) throw Error(Errc::storage_error, "cannot open log for " + slug);
    }
    AppendResult result;
    for (const Review& r : batch) {
      ReviewKey key = review_key(r);
      if (data.keys.contains(key.content_digest)) {
        ++result.duplicates;
        continue;
      }
      const std::string line = review_to_json(r).dump() + "\n";
      data.log.write(line.data(), static_cast<std::streamsize>(line.size()));
      data.log.flush();
      if (!data.log) throw Error(Errc::storage_error, "write failed for " + slug);
      data.insert(r, std::move(key.content_digest));
      ++result.inserted;
    }
    return result;
  }

  // Ordered by posted_date descending, digest ascending.
  ReviewPage list_reviews(const std::string& slug, const ReviewFilter& filter, int64_t offset, int64_t limit) const {
    if (limit < 1 || limit > kMaxPageLimit)
      throw Error(Errc::invalid_argument, "limit must be in [1, " + std::to_string(kMaxPageLimit) + "]");
    if (offset < 0) throw Error(Errc::invalid_argument, "offset must be >= 0");
    const CompanyData& data = company_data(slug);
    std::shared_lock lock(data.mutex);
    ReviewPage page;
    page.offset = offset;
    page.limit = limit;
    for (size_t idx : data.order) {
      const Review& r = data.reviews[idx];
      if (!filter.matches(r)) continue;
      if (page.total >= offset && static_cast<int64_t>(page.items.size()) < limit) page.items.push_back(r);
      ++page.total;
    }
    return page;
  }

  // Every review of the company in listing order.
  std::vector<Review> all_reviews(const std::string& slug) const {
    const CompanyData& data = company_data(slug);
    std::shared_lock lock(data.mutex);
    std::vector<Review> out;
    out.reserve(data.order.size());
    for (size_t idx : data.order) out.push_back(data.reviews[idx]);
    return out;
  }

  ClassificationCounts classification_counts(const std::string& slug) const {
    const CompanyData& data = company_data(slug);
    std::shared_lock lock(data.mutex);
    return data.counts;
  }

  // Never overwrites: every report gets a new, later-sorting file.
  std::string save_report(StoredReport report) {
    CompanyData& data = company_data(report.company_slug);
    if (report.parameters.topics < 1 || report.parameters.words < 1 || report.parameters.iterations < 0)
      throw Error(Errc::invalid_argument, "incomplete report parameters");
    std::unique_lock lock(data.mutex);
    const fs::path dir = root_ / report.company_slug / "reports";
    std::error_code ec;
    fs::create_directories(dir, ec);
    auto now = std::chrono::system_clock::now();
    std::string id = detail::report_stamp(now);
    while (!data.latest_report.empty() && id <= data.latest_report) {
      now += std::chrono::microseconds(1);
      id = detail::report_stamp(now);
    }
    report.report_id = id;
    if (report.created_at == Timestamp{}) report.created_at = std::chrono::floor<std::chrono::seconds>(now);
    detail::write_file_atomic(dir / (id + ".report"), stored_report_to_json(report).dump() + "\n");
    data.latest_report = id;
    return id;
  }

  StoredReport load_latest_report(const std::string& slug) const {
    const CompanyData& data = company_data(slug);
    std::shared_lock lock(data.mutex);
    if (data.latest_report.empty()) throw Error(Errc::no_report, "no report for '" + slug + "'");
    const auto text = detail::read_file(root_ / slug / "reports" / (data.latest_report + ".report"));
    try {
      return stored_report_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw Error(Errc::storage_error, std::string("corrupt report file: ") + e.what());
    }
  }

  // Returns the number of bytes written.
  size_t export_reviews(const std::string& slug, ExportFormat format, std::ostream& out) const {
    std::string buf;
    if (format == ExportFormat::delimited_table) {
      buf += "description,classification,posted_date\n";
      for (const Review& r : all_reviews(slug)) {
        buf += detail::csv_field(r.description);
        buf += ',';
        buf += to_string(r.classification);
        buf += ',';
        buf += format_date_iso(r.posted_date);
        buf += '\n';
      }
    } else {
      for (const Review& r : all_reviews(slug)) buf += review_to_json(r).dump() + "\n";
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error(Errc::storage_error, "export write failed");
    return buf.size();
  }

  size_t export_reviews(const std::string& slug, ExportFormat format, const fs::path& destination) const {
    if (!has_company(slug)) throw Error(Errc::unknown_company, "unknown company '" + slug + "'");
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::storage_error, "cannot write " + destination.string());
    return export_reviews(slug, format, out);
  }

 private:
  struct CompanyData {
    Company info;
    std::vector<Review> reviews;             // log order
    std::vector<std::string> digests;        // parallel to reviews
    std::unordered_set<std::string> keys;
    std::vector<size_t> order;               // indices into reviews, listing order
    ClassificationCounts counts;
    std::string latest_report;
    std::ofstream log;
    mutable std::shared_mutex mutex;

    void insert(const Review& r, std::string digest) {
      const size_t idx = reviews.size();
      auto before = [&](size_t a, size_t b) {
        if (reviews[a].posted_date != reviews[b].posted_date) return reviews[a].posted_date > reviews[b].posted_date;
        return digests[a] < digests[b];
      };
      reviews.push_back(r);
      keys.insert(digest);
      digests.push_back(std::move(digest));
      order.insert(std::upper_bound(order.begin(), order.end(), idx, before), idx);
      ++(r.classification == ReviewClassification::Praise ? counts.praise : counts.complaint);
    }
  };

  std::unique_ptr<CompanyData> load_company(const std::string& slug) {
    auto data = std::make_unique<CompanyData>();
    const fs::path dir = root_ / slug;
    data->info = Company{slug, slug, {}};
    if (fs::exists(dir / "company.json")) {
      try {
        const json meta = json::parse(detail::read_file(dir / "company.json"));
        data->info.name = meta.value("name", slug);
        data->info.sector = meta.value("sector", std::string{});
      } catch (const json::exception& e) {
        throw Error(Errc::storage_error, "corrupt company.json for '" + slug + "': " + e.what());
      }
    }
    const fs::path log = dir / "reviews.log";
    if (fs::exists(log)) {
      std::string text = detail::read_file(log);
      // A crash mid-write leaves at most one unterminated line; drop it so the
      // next append starts on a clean line.
      const auto last_nl = text.rfind('\n');
      const size_t complete = last_nl == std::string::npos ? 0 : last_nl + 1;
      if (complete != text.size()) {
        text.resize(complete);
        fs::resize_file(log, complete);
      }
      size_t pos = 0;
      size_t line_no = 0;
      while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        Review r;
        try {
          r = review_from_json(json::parse(line), slug);
        } catch (const std::exception& e) {
          throw Error(Errc::storage_error,
                      log.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        ReviewKey key = review_key(r);
        if (data->keys.contains(key.content_digest)) continue;
        data->insert(r, std::move(key.content_digest));
      }
    }
    const fs::path reports = dir / "reports";
    if (fs::exists(reports)) {
      for (const auto& e : fs::directory_iterator(reports)) {
        if (e.path().extension() != ".report") continue;
        const std::string id = e.path().stem().string();
        if (id > data->latest_report) data->latest_report = id;
      }
    }
    return data;
  }

  CompanyData& company_data(const std::string& slug) const {
    std::shared_lock lock(mutex_);
    const auto it = companies_.find(slug);
    if (it == companies_.end()) throw Error(Errc::unknown_company, "unknown company '" + slug + "'");
    return *it->second;
  }

  fs::path root_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unique_ptr<CompanyData>> companies_;
};

}  // namespace reputex::store
