#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace reputex {

// Minimal absolute http(s) URL: enough to schedule fetches per host and to
// resolve the relative "next" links found on listing pages.
struct Url {
  std::string scheme;  // lowercase
  std::string host;    // lowercase
  int port = 0;        // 0 means scheme default
  std::string path;    // starts with '/'
  std::string query;   // without '?', may be empty

  int effective_port() const { return port != 0 ? port : (scheme == "https" ? 443 : 80); }

  // "scheme://host[:port]"
  std::string origin() const {
    std::string s = scheme + "://" + host;
    if (port != 0) s += ":" + std::to_string(port);
    return s;
  }

  // Key used by the politeness clock.
  std::string host_key() const { return host + ":" + std::to_string(effective_port()); }

  std::string target() const { return query.empty() ? path : path + "?" + query; }
  std::string str() const { return origin() + target(); }

  friend bool operator==(const Url&, const Url&) = default;
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// RFC 3986 remove_dot_segments.
inline std::string remove_dot_segments(std::string_view in) {
  std::string input(in);
  std::string out;
  while (!input.empty()) {
    if (input.starts_with("../")) {
      input.erase(0, 3);
    } else if (input.starts_with("./")) {
      input.erase(0, 2);
    } else if (input.starts_with("/./")) {
      input.replace(0, 3, "/");
    } else if (input == "/.") {
      input = "/";
    } else if (input.starts_with("/../") || input == "/..") {
      input = input.size() == 3 ? std::string("/") : input.substr(3);
      const auto cut = out.rfind('/');
      out.erase(cut == std::string::npos ? 0 : cut);
    } else if (input == "." || input == "..") {
      input.clear();
    } else {
      const auto next = input.find('/', input[0] == '/' ? 1 : 0);
      out += input.substr(0, next);
      input.erase(0, next == std::string::npos ? input.size() : next);
    }
  }
  return out;
}

}  // namespace detail

// Parses an absolute http/https URL. Fragments are dropped.
inline std::optional<Url> parse_url(std::string_view text) {
  const auto sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  Url u;
  u.scheme = detail::ascii_lower(text.substr(0, sep));
  if (u.scheme != "http" && u.scheme != "https") return std::nullopt;
  std::string_view rest = text.substr(sep + 3);
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  const auto path_start = rest.find_first_of("/?");
  std::string_view authority = rest.substr(0, path_start);
  rest = path_start == std::string_view::npos ? std::string_view{} : rest.substr(path_start);
  if (authority.find('@') != std::string_view::npos) return std::nullopt;
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const auto digits = authority.substr(colon + 1);
    if (digits.empty() || digits.size() > 5) return std::nullopt;
    int port = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      port = port * 10 + (c - '0');
    }
    if (port == 0 || port > 65535) return std::nullopt;
    u.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  for (char c : authority) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '.';
    if (!ok) return std::nullopt;
  }
  u.host = detail::ascii_lower(authority);
  const auto q = rest.find('?');
  u.path = std::string(rest.substr(0, q));
  if (q != std::string_view::npos) u.query = std::string(rest.substr(q + 1));
  if (u.path.empty()) u.path = "/";
  return u;
}

inline bool is_absolute_url(std::string_view text) { return parse_url(text).has_value(); }

// Resolves `ref` against `base` (RFC 3986 section 5.2, without fragments).
inline std::optional<Url> resolve_url(const Url& base, std::string_view ref) {
  if (const auto hash = ref.find('#'); hash != std::string_view::npos) ref = ref.substr(0, hash);
  if (ref.find("://") != std::string_view::npos) return parse_url(ref);
  if (ref.starts_with("//")) return parse_url(base.scheme + ":" + std::string(ref));
  Url out = base;
  if (ref.empty()) return out;
  const auto q = ref.find('?');
  const std::string_view ref_path = ref.substr(0, q);
  const std::string ref_query = q == std::string_view::npos ? std::string{} : std::string(ref.substr(q + 1));
  if (ref_path.empty()) {
    out.query = q == std::string_view::npos ? base.query : ref_query;
    return out;
  }
  if (ref_path.front() == '/') {
    out.path = detail::remove_dot_segments(ref_path);
  } else {
    const auto slash = base.path.rfind('/');
    const std::string merged = base.path.substr(0, slash + 1) + std::string(ref_path);
    out.path = detail::remove_dot_segments(merged);
  }
  if (out.path.empty()) out.path = "/";
  out.query = ref_query;
  return out;
}

}  // namespace reputex
