#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reputex {

// Error kinds raised across the pipeline. Callers branch on code(), the
// message is for humans.
enum class Errc {
  unknown_label,
  invalid_date,
  invalid_record,
  invalid_base_url,
  invalid_plan,
  invalid_argument,
  network_error,
  http_error,
  timeout,
  unrecognized_page,
  storage_error,
  unknown_company,
  no_report,
  empty_vocabulary,
  empty_corpus,
  index_out_of_range,
  bind_error,
};

inline std::string_view to_string(Errc c) {
  switch (c) {
    case Errc::unknown_label: return "unknown_label";
    case Errc::invalid_date: return "invalid_date";
    case Errc::invalid_record: return "invalid_record";
    case Errc::invalid_base_url: return "invalid_base_url";
    case Errc::invalid_plan: return "invalid_plan";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::network_error: return "network_error";
    case Errc::http_error: return "http_error";
    case Errc::timeout: return "timeout";
    case Errc::unrecognized_page: return "unrecognized_page";
    case Errc::storage_error: return "storage_error";
    case Errc::unknown_company: return "unknown_company";
    case Errc::no_report: return "no_report";
    case Errc::empty_vocabulary: return "empty_vocabulary";
    case Errc::empty_corpus: return "empty_corpus";
    case Errc::index_out_of_range: return "index_out_of_range";
    case Errc::bind_error: return "bind_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, int http_status = 0)
      : std::runtime_error(what), code_(code), http_status_(http_status) {}

  Errc code() const noexcept { return code_; }
  // Only meaningful for Errc::http_error.
  int http_status() const noexcept { return http_status_; }

 private:
  Errc code_;
  int http_status_;
};

}  // namespace reputex
