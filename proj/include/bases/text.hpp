#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace bases {

enum class Language { kEnglish, kChinese };

// "en" / "zh". These codes are used on the command line and in every
// JSON document the tools write.
std::string_view language_code(Language lang);
// Accepts "en", "english", "zh", "chinese" (case-insensitive).
Language parse_language(std::string_view text);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

using StopwordSet = std::unordered_set<std::string>;

// Built-in stopword lists (about 170 English, 120 Chinese entries).
const StopwordSet& default_stopwords(Language lang);
// One stopword per line, '#' starts a comment. Throws LoadError.
StopwordSet load_stopwords(const std::string& path);

// Tokenizer shared by BM25 and the overlap metric.
//
// Non-CJK text is split on anything that is not a letter or digit and
// lowercased. Contiguous runs of CJK characters become overlapping
// character bigrams (a run of one character yields that character).
// Fullwidth ASCII letters and digits are folded to ASCII first.
std::vector<std::string> tokenize(std::string_view text);

// Like tokenize(), but drops stopwords. For CJK runs, stopword
// substrings are cut out of the run before bigrams are formed, so a
// single-character function word such as "的" does not leak into the
// bigrams of its neighbours.
std::vector<std::string> content_terms(std::string_view text,
                                       const StopwordSet& stopwords);

}  // namespace bases
