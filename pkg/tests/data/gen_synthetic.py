"""Regenerates the bundled synthetic corpus + annotation fixtures.

60 instances with known taxonomy labels:
  DROP-like:        10 passage_dependent / 17 question_dependent / 3 bad_annotation
  MultiSpanQA-like: 18 passage_dependent /  9 question_dependent / 3 bad_annotation

Run: python tests/data/gen_synthetic.py
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).parent

TOPICS = [
    "rivers", "mountains", "lakes", "harbors", "valleys", "forests",
    "bridges", "castles", "temples", "museums", "markets", "towers",
]
NAMES = [
    "arlen", "brona", "calder", "dorum", "elvan", "farro", "gildo",
    "harmon", "ilyra", "joren", "kestal", "lumen", "marek", "norin",
    "ostrel", "pavel", "quorin", "rasmus", "senna", "tovar",
]


def make_instance(iid, dataset, question, answers, rng):
    filler = rng.sample(NAMES, k=4)
    words = []
    for a in answers:
        words.extend(a.split())
        words.append(filler[rng.randrange(4)])
    passage = " ".join(words + ["in", "the", "region", "of", rng.choice(NAMES)])
    return {
        "id": iid,
        "dataset": dataset,
        "question": question,
        "passage": passage,
        "answers": [{"text": a} for a in answers],
    }


def build_group(prefix, dataset, n_passage, n_clue, n_noclue, n_bad, rng):
    corpus, annotations = [], []
    serial = 0

    def next_id():
        nonlocal serial
        serial += 1
        return f"{prefix}{serial:03d}"

    for _ in range(n_passage):
        iid = next_id()
        topic = rng.choice(TOPICS)
        answers = rng.sample(NAMES, k=rng.randint(1, 3))
        corpus.append(
            make_instance(iid, dataset, f"which {topic} lie near the coast", answers, rng)
        )
        annotations.append({"id": iid, "label": "passage_dependent"})

    for _ in range(n_clue):
        iid = next_id()
        topic = rng.choice(TOPICS)
        count_word = rng.choice(["two", "three"])
        k = 2 if count_word == "two" else 3
        answers = rng.sample(NAMES, k=k)
        corpus.append(
            make_instance(iid, dataset, f"name the {count_word} grand {topic} there", answers, rng)
        )
        annotations.append(
            {
                "id": iid,
                "label": "question_dependent",
                "clue": {"spans": [count_word], "types": ["cardinal"]},
            }
        )

    for _ in range(n_noclue):
        iid = next_id()
        answers = [rng.choice(NAMES)]
        corpus.append(
            make_instance(iid, dataset, "who governs that county seat", answers, rng)
        )
        annotations.append({"id": iid, "label": "question_dependent"})

    for _ in range(n_bad):
        iid = next_id()
        answers = rng.sample(NAMES, k=2)
        corpus.append(
            make_instance(iid, dataset, f"what did {rng.choice(NAMES)} build", answers, rng)
        )
        annotations.append({"id": iid, "label": "bad_annotation"})

    return corpus, annotations


def main():
    rng = random.Random(20240)
    corpus, annotations = [], []
    for prefix, dataset, counts in (
        ("sd", "DROP", (10, 12, 5, 3)),
        ("sm", "MultiSpanQA", (18, 6, 3, 3)),
    ):
        c, a = build_group(prefix, dataset, *counts, rng)
        corpus.extend(c)
        annotations.extend(a)
    assert len(corpus) == 60

    with open(HERE / "synthetic_corpus.jsonl", "w", encoding="utf-8") as f:
        for rec in corpus:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    with open(HERE / "synthetic_annotations.jsonl", "w", encoding="utf-8") as f:
        for rec in annotations:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"wrote {len(corpus)} instances and {len(annotations)} annotations")


if __name__ == "__main__":
    main()
