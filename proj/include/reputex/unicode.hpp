#pragma once

// Thin UTF-8 helpers over ICU's C API: code point iteration, simple case
// mapping and accent stripping. Everything here works on UTF-8 std::string.

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/utf8.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace reputex::unicode {

inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    out.push_back(c < 0 ? 0xFFFD : static_cast<char32_t>(c));
  }
  return out;
}

inline void append(std::string& out, char32_t c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool err = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), err);
  if (err) return;
  out.append(reinterpret_cast<const char*>(buf), static_cast<size_t>(n));
}

inline std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) append(out, c);
  return out;
}

inline bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)); }
inline bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }
inline bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : decode(s)) append(out, static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))));
  return out;
}

namespace detail {

inline std::u16string to_utf16(std::string_view s) {
  UErrorCode st = U_ZERO_ERROR;
  int32_t need = 0;
  u_strFromUTF8WithSub(nullptr, 0, &need, s.data(), static_cast<int32_t>(s.size()), 0xFFFD, nullptr, &st);
  std::u16string out(static_cast<size_t>(need), u'\0');
  st = U_ZERO_ERROR;
  u_strFromUTF8WithSub(out.data(), need, nullptr, s.data(), static_cast<int32_t>(s.size()), 0xFFFD, nullptr, &st);
  return out;
}

inline std::string from_utf16(std::u16string_view s) {
  UErrorCode st = U_ZERO_ERROR;
  int32_t need = 0;
  u_strToUTF8(nullptr, 0, &need, s.data(), static_cast<int32_t>(s.size()), &st);
  std::string out(static_cast<size_t>(need), '\0');
  st = U_ZERO_ERROR;
  u_strToUTF8(out.data(), need, nullptr, s.data(), static_cast<int32_t>(s.size()), &st);
  return out;
}

inline std::u16string normalize(const UNormalizer2* norm, std::u16string_view s) {
  UErrorCode st = U_ZERO_ERROR;
  int32_t need = unorm2_normalize(norm, s.data(), static_cast<int32_t>(s.size()), nullptr, 0, &st);
  std::u16string out(static_cast<size_t>(need), u'\0');
  st = U_ZERO_ERROR;
  unorm2_normalize(norm, s.data(), static_cast<int32_t>(s.size()), out.data(), need, &st);
  return out;
}

}  // namespace detail

// Canonical decomposition with combining marks removed: "reclamação" -> "reclamacao".
inline std::string strip_accents(std::string_view s) {
  UErrorCode st = U_ZERO_ERROR;
  const UNormalizer2* nfd = unorm2_getNFDInstance(&st);
  const UNormalizer2* nfc = unorm2_getNFCInstance(&st);
  if (U_FAILURE(st)) return std::string(s);
  std::u16string decomposed = detail::normalize(nfd, detail::to_utf16(s));
  std::u16string kept;
  kept.reserve(decomposed.size());
  // Combining marks live in the BMP for every script we care about.
  for (char16_t c : decomposed) {
    if (u_charType(c) != U_NON_SPACING_MARK) kept.push_back(c);
  }
  return detail::from_utf16(detail::normalize(nfc, kept));
}

// Case and accent folding used for label matching.
inline std::string fold(std::string_view s) { return strip_accents(to_lower(s)); }

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Trims and collapses every run of Unicode whitespace to a single space.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char32_t c : decode(s)) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append(out, c);
  }
  return out;
}

}  // namespace reputex::unicode
