"""Diagnostics over parser ensembles, plus a synthetic ensemble generator."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .combiner import majority
from .errors import InvalidConfig, MissingGold
from .treebank_io import (
    Constituent,
    ConstituentSet,
    NormalizationConfig,
    SentenceBundle,
    Tree,
    build_tree,
    extract_constituents,
)

PARTITION_KEYS = ("label", "sentence_length", "span_length")


@dataclass(frozen=True)
class PartitionReport:
    """Rows of (bucket, count, precision percent or None) for one parser."""

    parser: int
    partition_key: str
    rows: tuple

    def to_tsv(self) -> str:
        lines = ["bucket\tcount\tprecision"]
        for bucket, count, prec in self.rows:
            lines.append(f"{bucket}\t{count}\t{'NA' if prec is None else f'{prec:.2f}'}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "parser": self.parser,
            "partition_key": self.partition_key,
            "rows": [{"bucket": b, "count": n, "precision": p} for b, n, p in self.rows],
        }

    def figure_series(self) -> dict:
        """Two-panel plot data: precision series on top, counts below."""
        return {
            "parser": self.parser,
            "x": [b for b, _, _ in self.rows],
            "precision": [p for _, _, p in self.rows],
            "count": [n for _, n, _ in self.rows],
        }


def _bucket(key: str, c: Constituent, n_tokens: int, cap: Optional[int]):
    if key == "label":
        return c.label
    value = n_tokens if key == "sentence_length" else c.end - c.start
    if cap is not None and value >= cap:
        return f">={cap}"
    return value


def _bucket_order(b):
    if isinstance(b, int):
        return (0, b, "")
    if b.startswith(">="):
        return (1, int(b[2:]), "")
    return (2, 0, b)


def _vote_report(bundles, key, cap, accept):
    if key not in PARTITION_KEYS:
        raise ValueError(f"unknown partition key {key!r}")
    if not bundles:
        return []
    k = bundles[0].k
    counts = [Counter() for _ in range(k)]
    correct = [Counter() for _ in range(k)]
    buckets = set()
    for idx, b in enumerate(bundles):
        if b.gold is None:
            raise MissingGold(idx + 1)
        for c in b.gold:
            buckets.add(_bucket(key, c, b.n_tokens, cap))
        for c, bits in b.memberships().items():
            bucket = _bucket(key, c, b.n_tokens, cap)
            buckets.add(bucket)
            if not accept(sum(bits)):
                continue
            for i, bit in enumerate(bits):
                if bit:
                    counts[i][bucket] += 1
                    correct[i][bucket] += c in b.gold
    if key != "label" and buckets:
        # unit-width buckets with no gaps
        ints = [x for x in buckets if isinstance(x, int)]
        if ints:
            buckets |= set(range(min(ints), max(ints) + 1))
    order = sorted(buckets, key=_bucket_order)
    reports = []
    for i in range(k):
        rows = tuple(
            (bk, counts[i][bk], 100.0 * correct[i][bk] / counts[i][bk] if counts[i][bk] else None)
            for bk in order
        )
        reports.append(PartitionReport(i + 1, key, rows))
    return reports


def isolated_precision_report(
    bundles: Sequence[SentenceBundle], key: str = "label", cap: Optional[int] = None
) -> list:
    """Per parser, how often constituents that only it proposed are correct."""
    return _vote_report(bundles, key, cap, lambda votes: votes == 1)


def minority_precision_report(
    bundles: Sequence[SentenceBundle], key: str = "label", cap: Optional[int] = None
) -> list:
    """Like the isolated report for 1 < votes < majority. Empty when k < 4."""
    if not bundles or bundles[0].k < 4:
        return []
    need = majority(bundles[0].k)
    return _vote_report(bundles, key, cap, lambda votes: 1 < votes < need)


def parser_usage(indices: Sequence[int], k: int) -> list:
    """(parser, count, percent) for each 1-based parser index."""
    counts = Counter(indices)
    bad = [i for i in counts if not 1 <= i <= k]
    if bad:
        raise ValueError(f"parser indices outside [1, {k}]: {sorted(bad)}")
    total = len(indices)
    return [(i, counts[i], 100.0 * counts[i] / total if total else 0.0) for i in range(1, k + 1)]


def usage_table(usage: list) -> str:
    lines = ["Parser\tSentences\t%"]
    for i, n, pct in usage:
        lines.append(f"Parser {i}\t{n}\t{round(pct)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# synthetic ensembles

_POS = ("NN", "NNS", "VB", "VBD", "DT", "JJ", "IN", "RB", "PRP", "CD")
_WORDS = ("the", "a", "cat", "dog", "saw", "ran", "big", "on", "it", "very", "two", "mat", "fed", "old")


@dataclass(frozen=True)
class SyntheticConfig:
    n_sentences: int = 100
    length_range: tuple = (5, 25)
    k: int = 3
    # a scalar applies to every parser; a sequence gives one rate per parser
    miss_rate: Union[float, tuple] = 0.1
    spurious_rate: Union[float, tuple] = 0.1
    label_alphabet: tuple = ("S", "NP", "VP", "PP", "SBAR", "ADJP", "ADVP", "QP")
    seed: int = 0

    def rates(self):
        def expand(r, name):
            rs = (float(r),) * self.k if np.isscalar(r) else tuple(float(x) for x in r)
            if len(rs) != self.k:
                raise InvalidConfig(f"{name} has {len(rs)} entries for k={self.k}")
            if any(not 0.0 <= x < 1.0 for x in rs):
                raise InvalidConfig(f"{name} values must lie in [0, 1)")
            return rs

        return expand(self.miss_rate, "miss_rate"), expand(self.spurious_rate, "spurious_rate")

    def validate(self):
        lo, hi = self.length_range
        if lo < 2 or hi < lo:
            raise InvalidConfig(f"bad length range {self.length_range}")
        if self.k < 2:
            raise InvalidConfig("k must be at least 2")
        if self.n_sentences < 0:
            raise InvalidConfig("n_sentences must be nonnegative")
        if not self.label_alphabet:
            raise InvalidConfig("empty label alphabet")
        for lab in self.label_alphabet:
            if lab in NormalizationConfig().drop_root_label or not lab or any(ch in lab for ch in " ()-="):
                raise InvalidConfig(f"unusable label {lab!r}")
        self.rates()


def _random_gold_tree(rng, n: int, labels) -> Tree:
    words = [_WORDS[i] for i in rng.integers(0, len(_WORDS), n)]
    tags = [_POS[i] for i in rng.integers(0, len(_POS), n)]

    def build(start, end):
        if end - start == 1:
            return Tree(tags[start], (Tree.leaf(words[start]),))
        split = int(rng.integers(start + 1, end))
        return Tree(labels[int(rng.integers(len(labels)))], (build(start, split), build(split, end)))

    return build(0, n)


def _noisy_copy(rng, gold: ConstituentSet, root: Constituent, miss: float, spurious: float, labels):
    n = gold.n_tokens
    others = [c for c in gold.sorted() if c != root]
    kept = {root}
    for c in others:
        if rng.random() >= miss:
            kept.add(c)
    for _ in others:
        if rng.random() >= spurious:
            continue
        for _attempt in range(10):
            start = int(rng.integers(0, n))
            end = int(rng.integers(start + 1, n + 1))
            c = Constituent(labels[int(rng.integers(len(labels)))], start, end)
            if c in kept:
                continue
            if any(
                x.start < c.start < x.end < c.end or c.start < x.start < c.end < x.end for x in kept
            ):
                continue
            kept.add(c)
            break
    return gold.replace(kept)


def _synthetic_sentence(cfg: SyntheticConfig, index: int, misses, spurs) -> SentenceBundle:
    labels = list(cfg.label_alphabet)
    rng = np.random.default_rng([cfg.seed, index])
    n = int(rng.integers(cfg.length_range[0], cfg.length_range[1] + 1))
    gold_tree = _random_gold_tree(rng, n, labels)
    gold = extract_constituents(gold_tree)
    root = max(gold, key=lambda c: (c.end - c.start, c.label))
    sets, trees = [], []
    for i in range(cfg.k):
        # one stream per (sentence, parser): adding a parser leaves the others unchanged
        prng = np.random.default_rng([cfg.seed, index, i + 1])
        s = _noisy_copy(prng, gold, root, misses[i], spurs[i], labels)
        sets.append(s)
        trees.append(build_tree(s, gold_tree))
    return SentenceBundle(
        tokens=tuple(gold_tree.leaves()),
        candidates=tuple(sets),
        candidate_trees=tuple(trees),
        gold=gold,
        gold_tree=gold_tree,
    )


def generate_synthetic(cfg: SyntheticConfig) -> list:
    """Random binary gold trees with k independently corrupted copies."""
    cfg.validate()
    misses, spurs = cfg.rates()
    return [_synthetic_sentence(cfg, i, misses, spurs) for i in range(cfg.n_sentences)]


def reports_to_json(reports: list) -> str:
    return json.dumps(
        {"reports": [r.to_dict() for r in reports], "figure": [r.figure_series() for r in reports]},
        indent=2,
    )
