#pragma once

// A forgiving HTML tokenizer and tree builder. It is not a conforming HTML5
// parser: it handles well-formed and mildly broken static markup (unclosed
// elements, stray end tags, void elements, comments, entities), which is what
// listing pages need.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reputex/unicode.hpp"

namespace reputex::html {

struct Node {
  std::string tag;   // lowercase element name, empty for text nodes
  std::string text;  // decoded text for text nodes
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<size_t> children;
  size_t parent = 0;

  bool is_element() const { return !tag.empty(); }
};

namespace detail {

inline bool is_void(std::string_view tag) {
  static constexpr std::string_view voids[] = {"area", "base", "br", "col", "embed", "hr", "img",
                                               "input", "link", "meta", "source", "track", "wbr"};
  for (auto v : voids) {
    if (v == tag) return true;
  }
  return false;
}

inline char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
         c == ':';
}

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

inline std::optional<char32_t> named_entity(std::string_view name) {
  struct Entry {
    std::string_view name;
    char32_t cp;
  };
  static constexpr Entry table[] = {
      {"amp", U'&'},      {"lt", U'<'},       {"gt", U'>'},       {"quot", U'"'},     {"apos", U'\''},
      {"nbsp", 0xA0},     {"aacute", U'á'},   {"Aacute", U'Á'},   {"agrave", U'à'},   {"Agrave", U'À'},
      {"acirc", U'â'},    {"Acirc", U'Â'},    {"atilde", U'ã'},   {"Atilde", U'Ã'},   {"ccedil", U'ç'},
      {"Ccedil", U'Ç'},   {"eacute", U'é'},   {"Eacute", U'É'},   {"ecirc", U'ê'},    {"Ecirc", U'Ê'},
      {"iacute", U'í'},   {"Iacute", U'Í'},   {"oacute", U'ó'},   {"Oacute", U'Ó'},   {"ocirc", U'ô'},
      {"Ocirc", U'Ô'},    {"otilde", U'õ'},   {"Otilde", U'Õ'},   {"uacute", U'ú'},   {"Uacute", U'Ú'},
      {"uuml", U'ü'},     {"Uuml", U'Ü'},     {"hellip", 0x2026}, {"ndash", 0x2013},  {"mdash", 0x2014},
  };
  for (const auto& e : table) {
    if (e.name == name) return e.cp;
  }
  return std::nullopt;
}

}  // namespace detail

// Replaces character references; unknown ones are kept verbatim.
inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    std::optional<char32_t> cp;
    if (body.size() > 1 && body[0] == '#') {
      uint32_t v = 0;
      bool ok = true;
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      ok = !digits.empty();
      for (char c : digits) {
        int dv = -1;
        if (c >= '0' && c <= '9') dv = c - '0';
        else if (hex && c >= 'a' && c <= 'f') dv = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') dv = c - 'A' + 10;
        if (dv < 0 || v > 0x10FFFF) {
          ok = false;
          break;
        }
        v = v * (hex ? 16u : 10u) + static_cast<uint32_t>(dv);
      }
      if (ok && v > 0 && v <= 0x10FFFF && !(v >= 0xD800 && v <= 0xDFFF)) cp = static_cast<char32_t>(v);
    } else {
      cp = detail::named_entity(body);
    }
    if (!cp) {
      out.push_back(s[i++]);
      continue;
    }
    unicode::append(out, *cp);
    i = semi + 1;
  }
  return out;
}

// Escapes text for element content and double-quoted attribute values.
inline std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

class Document {
 public:
  static constexpr size_t root = 0;

  explicit Document(std::string_view source) {
    nodes_.push_back(Node{"#document", {}, {}, {}, 0});
    parse(source);
  }

  const Node& node(size_t id) const { return nodes_[id]; }
  size_t size() const { return nodes_.size(); }

  std::optional<std::string_view> attr(size_t id, std::string_view name) const {
    for (const auto& [k, v] : nodes_[id].attrs) {
      if (k == name) return std::string_view(v);
    }
    return std::nullopt;
  }

  // Whitespace-separated token match, as in a class or rel attribute.
  bool has_token(size_t id, std::string_view attr_name, std::string_view token) const {
    const auto value = attr(id, attr_name);
    if (!value) return false;
    size_t pos = 0;
    while (pos < value->size()) {
      while (pos < value->size() && detail::is_ws((*value)[pos])) ++pos;
      size_t end = pos;
      while (end < value->size() && !detail::is_ws((*value)[end])) ++end;
      if (value->substr(pos, end - pos) == token) return true;
      pos = end;
    }
    return false;
  }

  bool has_class(size_t id, std::string_view cls) const { return has_token(id, "class", cls); }

  // Descendants of `from` (excluding it) in document order.
  template <typename Pred>
  std::vector<size_t> find_all(size_t from, Pred pred) const {
    std::vector<size_t> out;
    std::vector<size_t> stack(nodes_[from].children.rbegin(), nodes_[from].children.rend());
    while (!stack.empty()) {
      const size_t id = stack.back();
      stack.pop_back();
      if (nodes_[id].is_element() && pred(id)) out.push_back(id);
      const auto& ch = nodes_[id].children;
      stack.insert(stack.end(), ch.rbegin(), ch.rend());
    }
    return out;
  }

  std::vector<size_t> find_by_class(size_t from, std::string_view cls) const {
    return find_all(from, [&](size_t id) { return has_class(id, cls); });
  }

  std::optional<size_t> first_by_class(size_t from, std::string_view cls) const {
    auto all = find_by_class(from, cls);
    if (all.empty()) return std::nullopt;
    return all.front();
  }

  std::string text_content(size_t id) const {
    std::string out;
    collect_text(id, out);
    return out;
  }

 private:
  void collect_text(size_t id, std::string& out) const {
    const Node& n = nodes_[id];
    if (!n.is_element()) {
      out += n.text;
      return;
    }
    for (size_t c : n.children) collect_text(c, out);
  }

  size_t add_child(size_t parent, Node n) {
    n.parent = parent;
    nodes_.push_back(std::move(n));
    const size_t id = nodes_.size() - 1;
    nodes_[parent].children.push_back(id);
    return id;
  }

  void parse(std::string_view s) {
    std::vector<size_t> open{root};
    size_t i = 0;
    auto add_text = [&](std::string_view raw) {
      if (raw.empty()) return;
      add_child(open.back(), Node{{}, decode_entities(raw), {}, {}, 0});
    };
    while (i < s.size()) {
      const auto lt = s.find('<', i);
      if (lt == std::string_view::npos) {
        add_text(s.substr(i));
        break;
      }
      add_text(s.substr(i, lt - i));
      i = lt;
      if (s.compare(i, 4, "<!--") == 0) {
        const auto end = s.find("-->", i + 4);
        i = end == std::string_view::npos ? s.size() : end + 3;
        continue;
      }
      if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
        const auto end = s.find('>', i);
        i = end == std::string_view::npos ? s.size() : end + 1;
        continue;
      }
      if (i + 1 < s.size() && s[i + 1] == '/') {
        size_t j = i + 2;
        std::string name;
        while (j < s.size() && detail::is_name_char(s[j])) name.push_back(detail::lower(s[j++]));
        const auto end = s.find('>', j);
        i = end == std::string_view::npos ? s.size() : end + 1;
        for (size_t depth = open.size(); depth > 1; --depth) {
          if (nodes_[open[depth - 1]].tag == name) {
            open.resize(depth - 1);
            break;
          }
        }
        continue;
      }
      if (i + 1 >= s.size() || !detail::is_name_char(s[i + 1])) {
        add_text(s.substr(i, 1));
        ++i;
        continue;
      }
      size_t j = i + 1;
      Node el;
      while (j < s.size() && detail::is_name_char(s[j])) el.tag.push_back(detail::lower(s[j++]));
      bool self_closing = false;
      while (j < s.size()) {
        while (j < s.size() && detail::is_ws(s[j])) ++j;
        if (j >= s.size()) break;
        if (s[j] == '>') {
          ++j;
          break;
        }
        if (s[j] == '/') {
          self_closing = true;
          ++j;
          continue;
        }
        std::string name;
        while (j < s.size() && !detail::is_ws(s[j]) && s[j] != '=' && s[j] != '>' && s[j] != '/')
          name.push_back(detail::lower(s[j++]));
        while (j < s.size() && detail::is_ws(s[j])) ++j;
        std::string value;
        if (j < s.size() && s[j] == '=') {
          ++j;
          while (j < s.size() && detail::is_ws(s[j])) ++j;
          if (j < s.size() && (s[j] == '"' || s[j] == '\'')) {
            const char q = s[j++];
            const auto end = s.find(q, j);
            const size_t stop = end == std::string_view::npos ? s.size() : end;
            value = decode_entities(s.substr(j, stop - j));
            j = stop == s.size() ? stop : stop + 1;
          } else {
            const size_t start = j;
            while (j < s.size() && !detail::is_ws(s[j]) && s[j] != '>') ++j;
            value = decode_entities(s.substr(start, j - start));
          }
        }
        if (!name.empty()) el.attrs.emplace_back(std::move(name), std::move(value));
        else if (j < s.size() && s[j] != '>') ++j;
      }
      i = j;
      const std::string tag = el.tag;
      const size_t id = add_child(open.back(), std::move(el));
      if (tag == "script" || tag == "style") {
        const std::string closer = "</" + tag;
        size_t end = i;
        while (end < s.size()) {
          end = s.find("</", end);
          if (end == std::string_view::npos) break;
          bool match = true;
          for (size_t c = 0; c < closer.size() && match; ++c) {
            match = end + c < s.size() && detail::lower(s[end + c]) == closer[c];
          }
          if (match) break;
          end += 2;
        }
        if (end == std::string_view::npos) end = s.size();
        const auto gt = s.find('>', end);
        i = gt == std::string_view::npos ? s.size() : gt + 1;
        continue;
      }
      if (!self_closing && !detail::is_void(tag)) open.push_back(id);
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace reputex::html
