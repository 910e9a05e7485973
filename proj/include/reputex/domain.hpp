#pragma once

// Companies, reviews and their parsing rules. Every other module builds on
// these types; all of them are plain values.

#include <openssl/sha.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "reputex/error.hpp"
#include "reputex/unicode.hpp"
#include "reputex/url.hpp"

namespace reputex {

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_seconds;

enum class ReviewClassification { Praise, Complaint };

// Canonical rendering used in files and APIs.
inline std::string_view to_string(ReviewClassification c) {
  return c == ReviewClassification::Praise ? "Praise" : "Complaint";
}

// The label as the review platform prints it.
inline std::string_view platform_label(ReviewClassification c) {
  return c == ReviewClassification::Praise ? "Elogio" : "Reclamação";
}

// Accepts the platform labels ("Elogio", "Reclamação") and the canonical
// names, ignoring surrounding whitespace, case and accents.
inline ReviewClassification parse_classification(std::string_view label) {
  const std::string folded = unicode::fold(unicode::trim(label));
  if (folded == "elogio" || folded == "praise") return ReviewClassification::Praise;
  if (folded == "reclamacao" || folded == "complaint") return ReviewClassification::Complaint;
  throw Error(Errc::unknown_label, "unknown review label: '" + std::string(label) + "'");
}

inline bool is_valid_date(const Date& d) { return d.ok(); }

namespace detail {

inline std::optional<unsigned> parse_digits(std::string_view s, size_t width) {
  if (s.size() != width) return std::nullopt;
  unsigned v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

inline std::optional<Date> make_date(std::optional<unsigned> y, std::optional<unsigned> m,
                                     std::optional<unsigned> d) {
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{static_cast<int>(*y)}, std::chrono::month{*m}, std::chrono::day{*d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

}  // namespace detail

// dd/mm/yyyy first, yyyy-mm-dd as fallback. Throws Errc::invalid_date.
inline Date parse_review_date(std::string_view text) {
  const std::string_view t = unicode::trim(text);
  std::optional<Date> out;
  if (t.size() == 10 && t[2] == '/' && t[5] == '/') {
    out = detail::make_date(detail::parse_digits(t.substr(6, 4), 4), detail::parse_digits(t.substr(3, 2), 2),
                            detail::parse_digits(t.substr(0, 2), 2));
  } else if (t.size() == 10 && t[4] == '-' && t[7] == '-') {
    out = detail::make_date(detail::parse_digits(t.substr(0, 4), 4), detail::parse_digits(t.substr(5, 2), 2),
                            detail::parse_digits(t.substr(8, 2), 2));
  }
  if (!out) throw Error(Errc::invalid_date, "invalid review date: '" + std::string(text) + "'");
  return *out;
}

inline std::string format_date_iso(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

inline std::string format_date_br(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", static_cast<unsigned>(d.day()), static_cast<unsigned>(d.month()),
                static_cast<int>(d.year()));
  return buf;
}

// "YYYY-MM-DDTHH:MM:SSZ"
inline std::string format_timestamp(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date_iso(Date{day}).c_str(),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

inline Timestamp parse_timestamp(std::string_view text) {
  auto bad = [&] { return Error(Errc::invalid_record, "invalid timestamp: '" + std::string(text) + "'"); };
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' || text[19] != 'Z') throw bad();
  std::optional<Date> d;
  try {
    d = parse_review_date(text.substr(0, 10));
  } catch (const Error&) {
    throw bad();
  }
  const auto h = detail::parse_digits(text.substr(11, 2), 2);
  const auto m = detail::parse_digits(text.substr(14, 2), 2);
  const auto s = detail::parse_digits(text.substr(17, 2), 2);
  if (!h || !m || !s || *h > 23 || *m > 59 || *s > 60) throw bad();
  return std::chrono::sys_days{*d} + std::chrono::hours{*h} + std::chrono::minutes{*m} + std::chrono::seconds{*s};
}

inline Timestamp now_utc() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

// Lowercase ASCII letters, digits and '-'.
inline bool is_valid_slug(std::string_view slug) {
  if (slug.empty()) return false;
  for (char c : slug) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
  }
  return true;
}

struct Company {
  std::string slug;
  std::string name;
  std::string sector;

  friend bool operator==(const Company&, const Company&) = default;
};

inline Company make_company(std::string slug, std::string name = {}, std::string sector = {}) {
  if (!is_valid_slug(slug)) throw Error(Errc::invalid_argument, "invalid company slug: '" + slug + "'");
  if (name.empty()) name = slug;
  return Company{std::move(slug), std::move(name), std::move(sector)};
}

struct Review {
  std::string company_slug;
  std::string description;
  ReviewClassification classification = ReviewClassification::Praise;
  Date posted_date{};
  std::string source_url;
  Timestamp fetched_at{};

  friend bool operator==(const Review&, const Review&) = default;
};

// Throws Errc::invalid_record naming the first violated invariant.
inline void validate(const Review& r) {
  auto fail = [](const std::string& why) { throw Error(Errc::invalid_record, why); };
  if (!is_valid_slug(r.company_slug)) fail("invalid company slug");
  if (unicode::trim(r.description).empty()) fail("empty description");
  if (!r.posted_date.ok()) fail("invalid posted date");
  if (std::chrono::sys_days{r.posted_date} > std::chrono::floor<std::chrono::days>(r.fetched_at))
    fail("posted date " + format_date_iso(r.posted_date) + " is after fetch date");
  if (!is_absolute_url(r.source_url)) fail("source url is not absolute: '" + r.source_url + "'");
}

struct ReviewKey {
  std::string company_slug;
  std::string content_digest;  // 32 lowercase hex chars

  friend bool operator==(const ReviewKey&, const ReviewKey&) = default;
  friend auto operator<=>(const ReviewKey&, const ReviewKey&) = default;
};

// Description normalization used by the dedup identity.
inline std::string normalize_description(std::string_view text) {
  return unicode::to_lower(unicode::collapse_whitespace(text));
}

inline ReviewKey review_key(const Review& r) {
  std::string material = normalize_description(r.description);
  material += '\x1f';
  material += format_date_iso(r.posted_date);
  material += '\x1f';
  material += to_string(r.classification);

  std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
  SHA256(reinterpret_cast<const unsigned char*>(material.data()), material.size(), md.data());
  static constexpr char hex[] = "0123456789abcdef";
  std::string digest;
  digest.reserve(32);
  for (size_t i = 0; i < 16; ++i) {
    digest.push_back(hex[md[i] >> 4]);
    digest.push_back(hex[md[i] & 0x0f]);
  }
  return ReviewKey{r.company_slug, std::move(digest)};
}

}  // namespace reputex
