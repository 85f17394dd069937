#include "bases/text.hpp"

namespace bases {
namespace {

constexpr const char* kEnglish[] = {
    "a",       "about",   "above",   "after",    "again",   "against",
    "all",     "am",      "an",      "and",      "any",     "are",
    "as",      "at",      "be",      "because",  "been",    "before",
    "being",   "below",   "between", "both",     "but",     "by",
    "can",     "could",   "did",     "do",       "does",    "doing",
    "down",    "during",  "each",    "few",      "for",     "from",
    "further", "had",     "has",     "have",     "having",  "he",
    "her",     "here",    "hers",    "herself",  "him",     "himself",
    "his",     "how",     "i",       "if",       "in",      "into",
    "is",      "it",      "its",     "itself",   "just",    "me",
    "more",    "most",    "my",      "myself",   "no",      "nor",
    "not",     "now",     "of",      "off",      "on",      "once",
    "only",    "or",      "other",   "our",      "ours",    "ourselves",
    "out",     "over",    "own",     "same",     "she",     "should",
    "so",      "some",    "such",    "than",     "that",    "the",
    "their",   "theirs",  "them",    "themselves", "then",  "there",
    "these",   "they",    "this",    "those",    "through", "to",
    "too",     "under",   "until",   "up",       "very",    "was",
    "we",      "were",    "what",    "when",     "where",   "which",
    "while",   "who",     "whom",    "why",      "will",    "with",
    "would",   "you",     "your",    "yours",    "yourself", "yourselves",
    "s",       "t",       "don",     "doesn",    "didn",    "isn",
    "aren",    "wasn",    "weren",   "won",      "wouldn",  "shouldn",
    "couldn",  "ll",      "re",      "ve",       "d",       "m",
    "also",    "among",   "anyone",  "anything", "around",  "get",
    "got",     "may",     "might",   "must",     "shall",   "upon",
    "within",  "without", "yet",     "via",      "whether", "whose",
    "per",     "onto",
};

constexpr const char* kChinese[] = {
    "的",   "了",   "和",   "是",   "在",   "我",   "有",   "就",   "不",
    "人",   "都",   "一",   "一个", "上",   "也",   "很",   "到",   "说",
    "要",   "去",   "你",   "会",   "着",   "没有", "看",   "好",   "自己",
    "这",   "那",   "他",   "她",   "它",   "们",   "我们", "你们", "他们",
    "她们", "它们", "之",   "与",   "及",   "其",   "或",   "而",   "但",
    "被",   "把",   "让",   "给",   "从",   "向",   "对",   "为",   "以",
    "于",   "由",   "因为", "所以", "如果", "虽然", "但是", "而且", "并且",
    "或者", "还是", "因此", "然后", "什么", "怎么", "怎样", "如何", "哪",
    "哪里", "哪些", "这个", "那个", "这些", "那些", "这样", "那样", "吗",
    "呢",   "吧",   "啊",   "呀",   "哦",   "嗯",   "么",   "地",   "得",
    "过",   "来",   "还",   "又",   "再",   "已",   "已经", "将",   "能",
    "可以", "可能", "应该", "需要", "关于", "对于", "以及", "等",   "等等",
    "之一", "每",   "各",   "些",   "本",   "该",   "此",   "即",   "并",
    "则",   "所",   "者",   "中",   "里",
};

template <std::size_t N>
StopwordSet make_set(const char* const (&words)[N]) {
  StopwordSet set;
  for (const char* w : words) set.insert(w);
  return set;
}

}  // namespace

const StopwordSet& default_stopwords(Language lang) {
  static const StopwordSet english = make_set(kEnglish);
  static const StopwordSet chinese = make_set(kChinese);
  return lang == Language::kChinese ? chinese : english;
}

}  // namespace bases
