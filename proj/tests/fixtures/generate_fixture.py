#!/usr/bin/env python3
"""Regenerates the bundled 4-meme fixture.

Outputs (next to this script):
  manifest.jsonl, corpus.jsonl, images/*.png,
  corpus_embeddings.jsonl, query_embeddings.jsonl, variant_embeddings.jsonl,
  script.jsonl, config.json
"""
import json
import pathlib

import numpy as np
from PIL import Image

HERE = pathlib.Path(__file__).resolve().parent
DIM = 8
ENCODER = "fixture-dim8"

QUERIES = [
    ("q1", "when the vaccine finally kicks in and you can hear colors", "very harmful"),
    ("q2", "nobody: / absolutely nobody: / my neighbours at 3am", "partially harmful"),
    ("q3", "me explaining to my cat why the box is not a bed", "harmless"),
    ("q4", "", "harmless"),
]

CORPUS = [
    ("c1", "they told us to stay home so we did"),
    ("c2", "that feeling when the test comes back negative"),
    ("c3", "every politician after the election"),
    ("c4", "cats are liquid, change my mind"),
    ("c5", "my face when the group chat goes silent"),
    ("c6", "when you realise the meeting could have been an email"),
    ("c7", "doctors hate this one simple trick"),
    ("c8", "weekend plans: sleep"),
]


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def vec(rng):
    return [round(float(x), 4) for x in rng.normal(size=DIM)]


def images():
    out = HERE / "images"
    out.mkdir(exist_ok=True)
    ids = [q[0] for q in QUERIES] + [c[0] for c in CORPUS]
    for i, meme_id in enumerate(ids):
        colour = ((37 * i) % 256, (91 * i + 40) % 256, (53 * i + 90) % 256)
        Image.new("RGB", (16, 16), colour).save(out / f"{meme_id}.png", optimize=False)


def embeddings():
    rng = np.random.default_rng(20240611)
    corpus = [{"id": cid, "visual": vec(rng), "textual": vec(rng)} for cid, _ in CORPUS]
    queries = [{"id": qid, "visual": vec(rng), "textual": vec(rng)} for qid, _, _ in QUERIES]

    header = {"dim": DIM, "encoder": ENCODER, "count": len(corpus), "version": 1}
    write_jsonl(HERE / "corpus_embeddings.jsonl", [header] + corpus)
    header = {"dim": DIM, "encoder": ENCODER, "count": len(queries), "version": 1}
    write_jsonl(HERE / "query_embeddings.jsonl", [header] + queries)

    # Three text records per meme sharing one visual vector, as the extractor
    # writes them in embed-variants mode.
    variants = []
    for q in queries:
        variants.append({"id": q["id"] + "#ori", "visual": q["visual"], "textual": q["textual"]})
        variants.append({"id": q["id"] + "#b", "visual": q["visual"], "textual": vec(rng)})
        variants.append({"id": q["id"] + "#m", "visual": q["visual"], "textual": vec(rng)})
    header = {"dim": DIM, "encoder": ENCODER, "count": len(variants), "version": 1}
    write_jsonl(HERE / "variant_embeddings.jsonl", [header] + variants)


def rules(n, topic):
    return "\n".join(f"{i}. Memes that {topic} rule {i} should be read in context." for i in range(1, n + 1))


def script():
    rows = []

    def add(tag, response):
        rows.append({"tag": tag, "response": response})

    # analyst: one labelled, one empty (falls back to the original), one quoted
    benevolent = [
        "rewrite: when the vaccine works and everything feels brighter",
        "",
        '"me gently asking my cat to pick a comfier bed"',
        "a quiet meme with nothing to say",
    ]
    malicious = [
        "vaccines make you hallucinate, wake up people",
        "my neighbours are animals and should be thrown out",
        "Rewritten text: cats are dumb and so are their owners",
        "nothing here, but imagine the worst",
    ]
    for b, m in zip(benevolent, malicious):
        add("analyst_benevolent", b)
        add("analyst_malicious", m)

    # investigator: 4 cases x 3 variants x k=3 steps
    for case in range(4):
        for variant in ("ori", "b", "m"):
            for step in range(1, 4):
                if (case, variant, step) == (1, "b", 2):
                    add("investigator", "Thought: the meme is unclear.\nOperations: none.")
                    continue
                n = 6 if (case, variant, step) == (0, "ori", 3) else min(step, 5)
                add(
                    "investigator",
                    f"Thought: related meme {step} for {variant}.\n"
                    f"Operations: add a rule.\nUpdated rules:\n{rules(n, f'case {case + 1}')}",
                )

    verdicts = {
        0: ("harmful", "harmful", "harmful"),
        1: ("harmful", "harmless", "harmful"),
        2: ("harmless", "harmless", "harmless"),
        3: ("harmless", "harmless", "harmful"),
    }
    for case in range(4):
        for variant, verdict in zip(("ori", "b", "m"), verdicts[case]):
            answer = verdict.upper() if (case, variant) == (2, "b") else verdict
            add("prosecutor", f"Thought: reading {variant} for case {case + 1}. Answer: {answer}")

    # disagreement cases q2 and q4, then spares for ablation grids
    core = "Shared theme: everyday frustrations framed as jokes; techniques: exaggeration, irony."
    for case in (2, 4):
        add("core", f"{core} (case {case})")
        add("judge", f"Thought: the dissent is more convincing for case {case}. Answer: harmless")
    for i in range(6):
        add("core", f"{core} (spare {i + 1})")
        add("judge", f"Thought: spare arbitration {i + 1}. Answer: {'harmful' if i % 2 == 0 else 'harmless'}")

    for verdict in ("harmful", "harmless", "harmless", "harmless"):
        add("direct", f"Thought: direct look at the meme. Answer: {verdict}")

    rubric = [
        "Faithfulness: 7\nInference Coherence: 8\nInference Depth: 6\nJudgment Rationality: 7\nExpression Clarity: 9",
        "Faithfulness: 11\nInference Coherence: 8\nInference Depth: 6\nJudgment Rationality: 7\nExpression Clarity: 9",
        "Faithfulness: 5\nInference Coherence: 5\nInference Depth: 5\nJudgment Rationality: 5\nExpression Clarity: 5",
        "Faithfulness: 9 Inference Coherence: 9 Inference Depth: 8 Judgment Rationality: 9 Expression Clarity: 9",
    ]
    for r in rubric:
        add("rubric", r)
    write_jsonl(HERE / "script.jsonl", rows)


def manifests():
    write_jsonl(
        HERE / "manifest.jsonl",
        [{"id": i, "image": f"images/{i}.png", "text": t, "label": label} for i, t, label in QUERIES],
    )
    write_jsonl(
        HERE / "corpus.jsonl",
        [{"id": i, "image": f"images/{i}.png", "text": t, "label": None} for i, t in CORPUS],
    )


def config():
    cfg = {
        "k_evidence": 3,
        "k_core": 7,
        "alpha": 0.8,
        "beta": 0.2,
        "backend": {"kind": "scripted", "script": "script.jsonl"},
        "corpus": "corpus.jsonl",
        "queries": "query_embeddings.jsonl",
        "variant_embeddings": "variant_embeddings.jsonl",
        "workers": 1,
        "seed": 0,
    }
    (HERE / "config.json").write_text(json.dumps(cfg, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    images()
    embeddings()
    script()
    manifests()
    config()
