#!/usr/bin/env python3
"""Regenerates the synthetic desk-scale fixtures under data/.

Four-class news-like headlines for the black-box classifier, a multi-topic
headline corpus for the one-vs-all attribute scorers, and a small
newsgroup-like corpus for the multiclass attribute family. Deterministic.
"""
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data"

NEWS = {
    "world": ["minister", "election", "embassy", "border", "treaty", "rebels", "parliament",
              "president", "refugees", "ceasefire", "diplomats", "protest"],
    "sports": ["team", "coach", "season", "playoffs", "striker", "league", "champion",
               "goal", "tournament", "pitcher", "hockey", "baseball"],
    "business": ["shares", "profit", "investors", "market", "merger", "stocks", "earnings",
                 "bank", "salary", "retailer", "quarter", "prices"],
    "sci_tech": ["software", "chip", "internet", "researchers", "file", "server", "space",
                 "microsoft", "computer", "virus", "satellite", "browser"],
}
FILLER = ["the", "a", "new", "after", "over", "says", "report", "week", "plans", "big",
          "first", "amid", "deal", "talks", "with", "for", "in", "on", "strong", "early"]

ATTR_BINARY = {
    "food & drink": ["recipe", "dinner", "wine", "chef", "restaurant", "coffee"],
    "taste": ["flavor", "sweet", "spicy", "dessert", "menu", "chef"],
    "travel": ["flight", "hotel", "beach", "tourists", "airport", "vacation"],
    "sports": ["team", "coach", "season", "playoffs", "league", "goal", "hockey", "baseball"],
    "politics": ["election", "minister", "parliament", "president", "senate", "vote"],
    "money": ["shares", "profit", "investors", "market", "bank", "salary", "prices", "stocks"],
    "science": ["researchers", "space", "satellite", "study", "virus", "lab"],
    "weird news": ["bizarre", "alligator", "prank", "costume", "odd", "giant"],
}
ATTR_MULTI = {
    "autos": ["car", "engine", "dealer", "fuel", "truck", "gas"],
    "space": ["space", "satellite", "orbit", "nasa", "launch", "moon"],
    "medicine": ["doctor", "virus", "patients", "disease", "influenza", "clinic"],
    "hardware": ["chip", "computer", "server", "software", "file", "browser"],
    "religion": ["church", "faith", "bible", "god", "belief", "prayer"],
}


def headline(rng, own, others, n_own, noise):
    words = rng.sample(own, n_own)
    if rng.random() < noise:
        words.append(rng.choice(others))
    words += rng.sample(FILLER, rng.randint(2, 4))
    rng.shuffle(words)
    return " ".join(words)


def news(rng, n, prefix):
    labels = sorted(NEWS)
    rows = []
    for i in range(n):
        label = labels[i % len(labels)]
        others = [w for l in labels if l != label for w in NEWS[l]]
        text = headline(rng, NEWS[label], others, rng.randint(2, 3), 0.3)
        rows.append({"id": f"{prefix}{i:04d}", "text": text, "label": label})
    return rows


def topical(rng, pools, n, prefix):
    labels = sorted(pools)
    rows = []
    for i in range(n):
        label = labels[i % len(labels)]
        others = [w for l in labels if l != label for w in pools[l]]
        text = headline(rng, pools[label], others, rng.randint(2, 3), 0.15)
        rows.append({"id": f"{prefix}{i:04d}", "text": text, "label": label})
    return rows


def write_jsonl(path, rows):
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")


def main():
    rng = random.Random(20211)
    ROOT.mkdir(exist_ok=True)
    write_jsonl(ROOT / "news_train.jsonl", news(rng, 800, "tr"))
    write_jsonl(ROOT / "news_test.jsonl", news(rng, 200, "te"))
    write_jsonl(ROOT / "news_explain.jsonl", news(rng, 50, "ex"))
    write_jsonl(ROOT / "attributes_binary.jsonl", topical(rng, ATTR_BINARY, 960, "hb"))
    write_jsonl(ROOT / "attributes_binary_test.jsonl", topical(rng, ATTR_BINARY, 160, "ht"))
    write_jsonl(ROOT / "attributes_multiclass.jsonl", topical(rng, ATTR_MULTI, 500, "ng"))
    spec = {
        "binary_attributes": [
            {"name": "food", "merge": {"food & drink": "food", "taste": "food"}, "tau": 0.3},
            {"name": "travel", "tau": 0.3},
            {"name": "sports", "tau": 0.3},
            {"name": "politics", "tau": 0.3},
            {"name": "money", "tau": 0.3},
            {"name": "science", "merge": {"weird news": "DROP"}, "tau": 0.3},
        ],
        "multiclass_family": {"classes": sorted(ATTR_MULTI), "tau": 0.05},
        "negative_cap_fraction": 0.8,
    }
    (ROOT / "attribute_bank_spec.json").write_text(json.dumps(spec, indent=2) + "\n")


if __name__ == "__main__":
    main()
