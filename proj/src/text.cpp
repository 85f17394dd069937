#include "bases/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "bases/errors.hpp"

namespace bases {
namespace {

// Decodes one code point starting at s[i]; advances i. Invalid sequences
// decode to U+FFFD and consume one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(k);
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

bool is_cjk(char32_t cp) {
  return in(cp, 0x3040, 0x30FF) || in(cp, 0x3400, 0x4DBF) ||
         in(cp, 0x4E00, 0x9FFF) || in(cp, 0xF900, 0xFAFF) ||
         in(cp, 0xAC00, 0xD7AF) || in(cp, 0x20000, 0x2FA1F);
}

char32_t fold_fullwidth(char32_t cp) {
  if (in(cp, 0xFF10, 0xFF19) || in(cp, 0xFF21, 0xFF3A) ||
      in(cp, 0xFF41, 0xFF5A)) {
    return cp - 0xFEE0;
  }
  return cp;
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) != 0;
  if (cp == 0xFFFD) return false;
  if (in(cp, 0x80, 0xBF) || cp == 0xD7 || cp == 0xF7) return false;
  if (in(cp, 0x2000, 0x2BFF) || in(cp, 0x3000, 0x303F)) return false;
  if (in(cp, 0xFE00, 0xFE4F) || in(cp, 0xFF00, 0xFF0F)) return false;
  if (in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40)) return false;
  if (in(cp, 0xFF5B, 0xFF65) || in(cp, 0xFFE0, 0xFFEF)) return false;
  if (in(cp, 0x1F000, 0x1FAFF)) return false;
  return true;
}

char32_t to_lower(char32_t cp) {
  if (in(cp, 'A', 'Z')) return cp + 32;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x391, 0x3A9)) return cp + 0x20;
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  return cp;
}

std::string encode(const std::u32string& cps, std::size_t from,
                   std::size_t len) {
  std::string out;
  for (std::size_t k = from; k < from + len; ++k) encode_utf8(cps[k], out);
  return out;
}

void emit_bigrams(const std::u32string& seg, std::vector<std::string>& out) {
  if (seg.empty()) return;
  if (seg.size() == 1) {
    out.push_back(encode(seg, 0, 1));
    return;
  }
  for (std::size_t k = 0; k + 1 < seg.size(); ++k) {
    out.push_back(encode(seg, k, 2));
  }
}

constexpr std::size_t kMaxCjkStopwordLength = 4;

void emit_cjk_run(const std::u32string& run, const StopwordSet* stopwords,
                  std::vector<std::string>& out) {
  if (!stopwords) {
    emit_bigrams(run, out);
    return;
  }
  std::u32string segment;
  std::size_t i = 0;
  while (i < run.size()) {
    std::size_t cut = 0;
    for (std::size_t len = std::min(kMaxCjkStopwordLength, run.size() - i);
         len >= 1; --len) {
      if (stopwords->count(encode(run, i, len))) {
        cut = len;
        break;
      }
    }
    if (cut) {
      emit_bigrams(segment, out);
      segment.clear();
      i += cut;
    } else {
      segment.push_back(run[i++]);
    }
  }
  emit_bigrams(segment, out);
}

std::vector<std::string> split_terms(std::string_view text,
                                     const StopwordSet* stopwords) {
  std::vector<std::string> out;
  std::string word;
  std::u32string cjk;
  auto flush_word = [&] {
    if (!word.empty()) {
      if (!stopwords || !stopwords->count(word)) out.push_back(word);
      word.clear();
    }
  };
  auto flush_cjk = [&] {
    if (!cjk.empty()) {
      emit_cjk_run(cjk, stopwords, out);
      cjk.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = fold_fullwidth(decode_utf8(text, i));
    if (is_cjk(cp)) {
      flush_word();
      cjk.push_back(cp);
    } else if (is_word_char(cp)) {
      flush_cjk();
      encode_utf8(to_lower(cp), word);
    } else {
      flush_word();
      flush_cjk();
    }
  }
  flush_word();
  flush_cjk();
  return out;
}

}  // namespace

std::string_view language_code(Language lang) {
  return lang == Language::kChinese ? "zh" : "en";
}

Language parse_language(std::string_view text) {
  const std::string lower = to_lower_ascii(trim(text));
  if (lower == "en" || lower == "english") return Language::kEnglish;
  if (lower == "zh" || lower == "chinese") return Language::kChinese;
  throw ConfigError("unknown language setting '" + std::string(text) +
                    "' (expected en or zh)");
}

std::string trim(std::string_view s) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return out;
}

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, 0, "cannot open stopword file");
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string w = trim(line);
    if (w.empty()) continue;
    // Stored in the same normalized form the tokenizer produces.
    auto toks = tokenize(w);
    if (toks.size() == 1 && toks[0].size() == w.size()) {
      words.insert(toks[0]);
    } else {
      words.insert(to_lower_ascii(w));
    }
  }
  return words;
}

std::vector<std::string> tokenize(std::string_view text) {
  return split_terms(text, nullptr);
}

std::vector<std::string> content_terms(std::string_view text,
                                       const StopwordSet& stopwords) {
  return split_terms(text, &stopwords);
}

}  // namespace bases
