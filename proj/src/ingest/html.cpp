#include "copilot/ingest/html.hpp"

#include <array>
#include <cctype>
#include <string>
#include <vector>

#include "copilot/common/text.hpp"

namespace copilot::ingest {

namespace {

constexpr char kBreak = '\x1e';  // internal paragraph-break marker

constexpr std::array<std::string_view, 4> kDiscardBody = {"script", "style", "noscript",
                                                          "template"};

constexpr std::array<std::string_view, 38> kBlockTags = {
    "address", "article", "aside",   "blockquote", "body",   "br",     "caption", "dd",
    "div",     "dl",      "dt",      "fieldset",   "figcaption", "figure", "footer", "form",
    "h1",      "h2",      "h3",      "h4",         "h5",     "h6",     "head",    "header",
    "hr",      "html",    "li",      "main",       "nav",    "ol",     "p",       "pre",
    "section", "table",   "title",   "tr",         "ul",     "tbody"};

bool is_tag_opener(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '/' || c == '!' || c == '?';
}

template <std::size_t N>
bool in_list(const std::array<std::string_view, N>& list, std::string_view name) {
  for (auto item : list) {
    if (item == name) return true;
  }
  return false;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0x10FFFF) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity starting at raw[i] == '&'. Returns consumed length, or 0.
std::size_t decode_entity(std::string_view raw, std::size_t i, std::string& out) {
  const auto semi = raw.find(';', i);
  if (semi == std::string_view::npos || semi - i > 10) return 0;
  const std::string_view name = raw.substr(i + 1, semi - i - 1);
  if (name.empty()) return 0;
  if (name[0] == '#') {
    unsigned long cp = 0;
    try {
      if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
        cp = std::stoul(std::string(name.substr(2)), nullptr, 16);
      } else {
        cp = std::stoul(std::string(name.substr(1)), nullptr, 10);
      }
    } catch (const std::exception&) {
      return 0;
    }
    append_utf8(out, cp == 0xA0 ? ' ' : cp);
    return semi - i + 1;
  }
  static const std::array<std::pair<std::string_view, std::string_view>, 6> kNamed = {{
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "},
  }};
  for (const auto& [key, value] : kNamed) {
    if (name == key) {
      out.append(value);
      return semi - i + 1;
    }
  }
  return 0;
}

std::string tag_name(std::string_view tag_body) {
  std::size_t i = 0;
  if (i < tag_body.size() && tag_body[i] == '/') ++i;
  std::string name;
  while (i < tag_body.size() &&
         (std::isalnum(static_cast<unsigned char>(tag_body[i])) || tag_body[i] == '-')) {
    name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(tag_body[i]))));
    ++i;
  }
  return name;
}

// Position just past the closing tag `</name ...>` at or after `from`, or npos.
std::size_t find_closing(const std::string& lowered, std::size_t from, std::string_view name) {
  const std::string needle = "</" + std::string(name);
  auto pos = lowered.find(needle, from);
  while (pos != std::string::npos) {
    const std::size_t after = pos + needle.size();
    if (after >= lowered.size() || lowered[after] == '>' ||
        std::isspace(static_cast<unsigned char>(lowered[after]))) {
      const auto gt = lowered.find('>', after);
      return gt == std::string::npos ? lowered.size() : gt + 1;
    }
    pos = lowered.find(needle, after);
  }
  return std::string::npos;
}

}  // namespace

std::string extract_text(std::string_view raw) {
  const std::string lowered = text::to_lower(raw);
  std::string flat;
  flat.reserve(raw.size());
  std::size_t i = 0;
  const std::size_t n = raw.size();
  while (i < n) {
    const char c = raw[i];
    if (c == '<' && i + 1 < n && is_tag_opener(raw[i + 1])) {
      if (raw.substr(i, 4) == "<!--") {
        const auto end = raw.find("-->", i + 4);
        i = end == std::string_view::npos ? n : end + 3;
        continue;
      }
      const auto gt = raw.find('>', i + 1);
      if (gt == std::string_view::npos) {
        flat.push_back(c);
        ++i;
        continue;
      }
      const std::string_view body = raw.substr(i + 1, gt - i - 1);
      const std::string name = tag_name(body);
      const bool closing = !body.empty() && body[0] == '/';
      i = gt + 1;
      if (!closing && in_list(kDiscardBody, name)) {
        const auto end = find_closing(lowered, i, name);
        i = end == std::string_view::npos ? n : end;
        flat.push_back(kBreak);
        continue;
      }
      if (in_list(kBlockTags, name)) {
        flat.push_back(kBreak);
      } else {
        // table cells separate words; other inline tags join their neighbours
        if (name == "td" || name == "th") flat.push_back(' ');
      }
      continue;
    }
    if (c == '&') {
      const auto used = decode_entity(raw, i, flat);
      if (used > 0) {
        i += used;
        continue;
      }
    }
    flat.push_back(c);
    ++i;
  }

  // Blank lines in the source are paragraph breaks as well.
  std::vector<std::string> paragraphs;
  std::string current;
  auto finish = [&] {
    std::string collapsed = text::collapse_whitespace(current);
    if (!collapsed.empty()) paragraphs.push_back(std::move(collapsed));
    current.clear();
  };
  for (std::size_t p = 0; p < flat.size(); ++p) {
    const char ch = flat[p];
    if (ch == kBreak) {
      finish();
      continue;
    }
    if (ch == '\n') {
      std::size_t q = p + 1;
      while (q < flat.size() && (flat[q] == ' ' || flat[q] == '\t' || flat[q] == '\r')) ++q;
      if (q < flat.size() && flat[q] == '\n') {
        finish();
        p = q;
        continue;
      }
    }
    current.push_back(ch);
  }
  finish();
  return text::join(paragraphs, "\n\n");
}

}  // namespace copilot::ingest
