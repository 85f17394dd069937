#!/usr/bin/env python3
"""Regenerates data/mock/: the offline search corpus and the LLM scripts.

Every interest value in the en/zh catalogs gets a short query chain and a
handful of documents that mention it. The scripts answer query prompts by
matching the profile's interest line and the scratchpad, and click prompts
by matching the query. Output is fully deterministic.
"""

import hashlib
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
CATALOGS = ROOT / "data" / "catalogs"
OUT = ROOT / "data" / "mock"

# Session length (rounds) cycles through this pattern per interest value.
LENGTHS = [3, 1, 4, 3, 2, 3, 4, 2, 3, 4]

LANG = {
    "en": {
        "suffixes": [
            ["tips", "news", "guide", "history", "near me", "reviews", "price"],
            ["for beginners", "best brands", "events", "online course",
             "community", "equipment"],
            ["forum", "latest trends", "books", "videos"],
        ],
        "join": " ",
        "interest_line": "Interest: {v}\n",
        "empty_history": "history **\nNone",
        "action": "** Your action **",
        "click": "** Your click **",
        "click_reply": "{r}",
        "titles": [
            "{q} - Wikipedia",
            "The complete {q} handbook",
            "{q}: what you need to know",
            "Everything about {v}",
            "{v} community forum",
            "Latest stories on {q}",
        ],
        "snippets": [
            "An overview of {q}, with background, key facts and links.",
            "Practical advice on {q} collected from enthusiasts.",
            "Answers to common questions people ask about {q}.",
            "Articles, videos and discussions related to {v}.",
            "Join thousands of people who share an interest in {v}.",
            "Updated daily with news and opinion about {q}.",
        ],
        "fallback_query": "weather forecast",
    },
    "zh": {
        "suffixes": [
            ["技巧", "新闻", "入门", "历史", "推荐", "评测", "价格"],
            ["新手教程", "品牌排行", "活动", "在线课程", "社区", "装备"],
            ["论坛", "最新趋势", "书籍", "视频"],
        ],
        "join": "",
        "interest_line": "兴趣：{v}\n",
        "empty_history": "历史 **\n\n无\n",
        "action": "** 您的操作 **",
        "click": "** 您的点击 **",
        "click_reply": "我会选择Title {r}，因为它和我的查询最相关。",
        "titles": [
            "{q}_百科",
            "{q}完全指南",
            "关于{q}你需要知道的事",
            "{v}知识大全",
            "{v}爱好者论坛",
            "{q}最新资讯",
        ],
        "snippets": [
            "介绍{q}的背景、要点和相关链接。",
            "爱好者整理的{q}实用经验。",
            "大家关心的{q}常见问题解答。",
            "与{v}相关的文章、视频和讨论。",
            "和众多{v}爱好者一起交流。",
            "每日更新{q}相关的新闻和观点。",
        ],
        "fallback_query": "天气预报",
    },
}


def stable_hash(text):
    return int(hashlib.sha256(text.encode("utf-8")).hexdigest()[:8], 16)


def interest_values(lang):
    doc = json.loads((CATALOGS / lang / "interest.json").read_text("utf-8"))
    return [v for entry in doc["entries"] for v in entry["values"]]


def query_chain(lang, index, value):
    cfg = LANG[lang]
    chain = [value]
    for level, options in enumerate(cfg["suffixes"]):
        suffix = options[(index + level) % len(options)]
        chain.append(value + cfg["join"] + suffix)
    return chain[: LENGTHS[index % len(LENGTHS)]]


def build(lang, corpus):
    cfg = LANG[lang]
    click_rules = []
    step_rules = {}  # completed rounds -> rules
    first_rules = []
    for i, value in enumerate(interest_values(lang)):
        chain = query_chain(lang, i, value)
        for k, query in enumerate(chain):
            for t, (title, snippet) in enumerate(
                    zip(cfg["titles"], cfg["snippets"])):
                if (stable_hash(query) + t) % 3 == 0 and t > 0:
                    continue  # vary the number of documents per query
                corpus.append({
                    "url": "https://www.example.com/%s/%d/%d/%d" % (lang, i, k, t),
                    "title": title.format(q=query, v=value),
                    "snippet": snippet.format(q=query, v=value),
                })
            rank = 1 + stable_hash("click:" + query) % 3
            click_rules.append({
                "match": [cfg["click"], "**%s**" % query, "Title %d:" % rank],
                "response": cfg["click_reply"].format(r=rank),
            })
            reply = ("Search[%s]" % chain[k + 1]) if k + 1 < len(chain) \
                else "Finish[finish]"
            step_rules.setdefault(k + 1, []).append({
                "match": [cfg["action"], "%d. (%s →" % (k + 1, query)],
                "response": reply,
            })
        first_rules.append({
            "match": [cfg["action"], cfg["interest_line"].format(v=value),
                      cfg["empty_history"]],
            "response": "Search[%s]" % chain[0],
        })

    fallback = cfg["fallback_query"]
    for t, (title, snippet) in enumerate(zip(cfg["titles"], cfg["snippets"])):
        corpus.append({
            "url": "https://www.example.com/%s/fallback/%d" % (lang, t),
            "title": title.format(q=fallback, v=fallback),
            "snippet": snippet.format(q=fallback, v=fallback),
        })

    rules = click_rules + [{"match": [cfg["click"]],
                            "response": cfg["click_reply"].format(r=1)}]
    # Later rounds first: a round-3 prompt also contains the round-1 line.
    for done in sorted(step_rules, reverse=True):
        rules += step_rules[done]
    rules += first_rules
    rules.append({"match": [cfg["action"], cfg["empty_history"]],
                  "response": "Search[%s]" % fallback})
    rules.append({"match": [cfg["action"]], "response": "Finish[finish]"})
    return rules


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    corpus = []
    for lang in ("en", "zh"):
        write_jsonl(OUT / ("llm_script_%s.jsonl" % lang), build(lang, corpus))
    write_jsonl(OUT / "corpus.jsonl", corpus)


if __name__ == "__main__":
    main()
