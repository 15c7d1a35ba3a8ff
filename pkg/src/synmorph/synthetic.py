"""Small deterministic toy treebanks for smoke runs and tests."""

from __future__ import annotations

import json
import random
from pathlib import Path

_OPEN = ("NOUN", "VERB", "ADJ", "ADV", "PROPN")
_CLOSED = ("ADP", "DET", "PRON", "CCONJ", "SCONJ", "AUX", "NUM", "PART")
_SUFFIXES = {"NOUN": ("", "s"), "VERB": ("", "o", "aba", "ado"), "ADJ": ("", "a", "os")}

TOY_LANGUAGES = (("toy_a", 11), ("toy_b", 23), ("toy_c", 37))


def _word(rng: random.Random) -> str:
    cons, vows = "bcdfglmnprstv", "aeiou"
    return "".join(rng.choice(cons) + rng.choice(vows) for _ in range(rng.randint(1, 3)))


def toy_treebank(seed: int, n_sentences: int = 600, n_lemmas: int = 160) -> str:
    """CoNLL-U text of random dependency trees over a Zipf-weighted lexicon.

    Includes comments, punctuation, a few multiword-token ranges and inflected
    forms sharing a lemma, so every parsing and keying path is exercised.
    """
    rng = random.Random(seed)
    lexicon = []
    seen = set()
    while len(lexicon) < n_lemmas:
        upos = rng.choice(_OPEN) if rng.random() < 0.8 else rng.choice(_CLOSED)
        lemma = _word(rng)
        if (lemma, upos) in seen:
            continue
        seen.add((lemma, upos))
        lexicon.append((lemma, upos))
    weights = [1.0 / (r + 1) for r in range(len(lexicon))]

    lines = []
    for s in range(n_sentences):
        length = rng.randint(3, 10)
        words = rng.choices(lexicon, weights=weights, k=length)
        heads = [0] + [rng.randrange(i) + 1 for i in range(1, length)]
        order = list(range(length))
        rng.shuffle(order)
        pos_of = {old: new + 1 for new, old in enumerate(order)}
        rows = []
        for old in order:
            lemma, upos = words[old]
            form = lemma + rng.choice(_SUFFIXES.get(upos, ("",)))
            head = 0 if heads[old] == 0 else pos_of[heads[old] - 1]
            rows.append([form, lemma, upos, head])
        lines.append(f"# sent_id = {s + 1}")
        lines.append("# text = " + " ".join(r[0] for r in rows) + " .")
        for i, (form, lemma, upos, head) in enumerate(rows, start=1):
            if i == 1 and s % 17 == 0 and len(rows) > 1:
                lines.append(f"1-2\t{form}{rows[1][0]}\t_\t_\t_\t_\t_\t_\t_\t_")
            lines.append(f"{i}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\tdep\t_\t_")
        root = next(i for i, r in enumerate(rows, start=1) if r[3] == 0)
        lines.append(f"{len(rows) + 1}\t.\t.\tPUNCT\t_\t_\t{root}\tpunct\t_\t_")
        lines.append("")
    return "\n".join(lines) + "\n"


def write_toy_corpus(directory: str | Path, n_sentences: int = 600) -> Path:
    """Write the toy treebanks and a matching pipeline config; returns the config path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    corpora = []
    for lang, seed in TOY_LANGUAGES:
        path = directory / f"{lang}.conllu"
        path.write_text(toy_treebank(seed, n_sentences), encoding="utf-8")
        corpora.append({"language": lang, "paths": [path.name]})
    config = {
        "corpora": corpora,
        "max_lines": 50000,
        "top_k": 120,
        "modes": ["inflected", "lemmatized"],
        "n_pcs": 3,
        "n_c": [2, 3, 4, 5],
        "compare_clusters": 2,
        "out": "out",
        "workers": 1,
    }
    cfg = directory / "config.json"
    cfg.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return cfg
