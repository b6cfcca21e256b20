"""PARSEVAL scoring, oracle upper bounds and a paired binomial test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from scipy.stats import binomtest

from .errors import AlignmentMismatch, EmptyCorpus, MissingGold, TokenCountMismatch
from .treebank_io import ConstituentSet, SentenceBundle


def f_measure(p: float, r: float) -> float:
    if p + r == 0:
        return 0.0
    return 2.0 * p * r / (p + r)


def _percent(num: int, den: int) -> float:
    # an empty denominator has nothing to get wrong
    return 100.0 if den == 0 else 100.0 * num / den


@dataclass(frozen=True)
class Metrics:
    matched: int
    hypothesized: int
    gold_count: int

    @property
    def precision(self) -> float:
        return _percent(self.matched, self.hypothesized)

    @property
    def recall(self) -> float:
        return _percent(self.matched, self.gold_count)

    @property
    def mean_pr(self) -> float:
        return (self.precision + self.recall) / 2.0

    @property
    def f_measure(self) -> float:
        return f_measure(self.precision, self.recall)

    def __add__(self, other: "Metrics") -> "Metrics":
        return Metrics(
            self.matched + other.matched,
            self.hypothesized + other.hypothesized,
            self.gold_count + other.gold_count,
        )

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "hypothesized": self.hypothesized,
            "gold_count": self.gold_count,
            "precision": self.precision,
            "recall": self.recall,
            "mean_pr": self.mean_pr,
            "f_measure": self.f_measure,
        }

    def row(self) -> str:
        return f"{self.precision:6.2f} {self.recall:6.2f} {self.mean_pr:8.2f} {self.f_measure:6.2f}"


def score_sentence(hyp: ConstituentSet, gold: ConstituentSet) -> Metrics:
    if hyp.n_tokens != gold.n_tokens:
        raise TokenCountMismatch(f"hypothesis has {hyp.n_tokens} tokens, gold has {gold.n_tokens}")
    return Metrics(len(hyp.items & gold.items), len(hyp), len(gold))


def score_corpus(pairs) -> Metrics:
    """Micro-averaged metrics: counts are summed before taking ratios."""
    total = None
    for idx, (hyp, gold) in enumerate(pairs):
        try:
            m = score_sentence(hyp, gold)
        except TokenCountMismatch as e:
            raise TokenCountMismatch(str(e), sentence=idx + 1) from e
        total = m if total is None else total + m
    if total is None:
        raise EmptyCorpus("no sentences to score")
    return total


def _golds(bundles: Sequence[SentenceBundle]):
    for idx, b in enumerate(bundles):
        if b.gold is None:
            raise MissingGold(idx + 1)
    return [b.gold for b in bundles]


def switching_oracle(bundles: Sequence[SentenceBundle]):
    """Pick, per sentence, the candidate with the best sentence F against gold.

    Ties go to higher recall, then the lowest index. Returns the
    micro-averaged metrics of those picks and the 1-based indices. Greedy
    per-sentence choice does not guarantee the best possible corpus F.
    """
    golds = _golds(bundles)
    if not bundles:
        raise EmptyCorpus("no sentences")
    picks, pairs = [], []
    for b, gold in zip(bundles, golds):
        best, best_key = 0, None
        for i, s in enumerate(b.candidates):
            m = score_sentence(s, gold)
            key = (m.f_measure, m.recall)
            if best_key is None or key > best_key:
                best, best_key = i, key
        picks.append(best + 1)
        pairs.append((b.candidates[best], gold))
    return score_corpus(pairs), picks


def max_precision_oracle(bundles: Sequence[SentenceBundle]) -> Metrics:
    """Score the correct part of the candidates' union; precision is 100 by construction."""
    golds = _golds(bundles)
    pairs = []
    for b, gold in zip(bundles, golds):
        union = frozenset().union(*(s.items for s in b.candidates))
        pairs.append((gold.replace(union & gold.items), gold))
    return score_corpus(pairs)


@dataclass(frozen=True)
class SignificanceResult:
    n_disagreements: int
    n_favoring_a: int
    p_value: float
    alpha: float

    @property
    def significant(self) -> bool:
        return self.p_value < self.alpha

    @property
    def n_favoring_b(self) -> int:
        return self.n_disagreements - self.n_favoring_a

    def to_dict(self) -> dict:
        return {
            "n_disagreements": self.n_disagreements,
            "n_favoring_a": self.n_favoring_a,
            "n_favoring_b": self.n_favoring_b,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "significant": self.significant,
        }


def exact_binomial_p(successes: int, n: int) -> float:
    """Two-sided exact binomial p-value under p = 0.5 (1.0 when n = 0)."""
    if n == 0:
        return 1.0
    return float(min(1.0, binomtest(successes, n, 0.5, alternative="two-sided").pvalue))


def discordant_counts(hyp_a, hyp_b, gold, mode: str = "recall"):
    """Count discordant constituents between two systems.

    recall: gold constituents found by exactly one system.
    precision: constituents hypothesized by exactly one system; that
    system is favored if the constituent is correct, the other one if not.
    """
    if not (len(hyp_a) == len(hyp_b) == len(gold)):
        raise AlignmentMismatch(f"corpus sizes differ: {len(hyp_a)}, {len(hyp_b)}, {len(gold)}")
    if mode not in ("recall", "precision"):
        raise ValueError(f"unknown mode {mode!r}")
    n = fav_a = 0
    for idx, (a, b, g) in enumerate(zip(hyp_a, hyp_b, gold)):
        if not (a.n_tokens == b.n_tokens == g.n_tokens):
            raise AlignmentMismatch(f"sentence {idx + 1}: token counts differ")
        A, B, G = a.items, b.items, g.items
        if mode == "recall":
            only_a = len((A - B) & G)
            only_b = len((B - A) & G)
            n += only_a + only_b
            fav_a += only_a
        else:
            a_only, b_only = A - B, B - A
            n += len(a_only) + len(b_only)
            fav_a += len(a_only & G) + len(b_only - G)
    return n, fav_a


def significance_test(hyp_a, hyp_b, gold, mode: str = "recall", alpha: float = 0.01) -> SignificanceResult:
    n, fav_a = discordant_counts(hyp_a, hyp_b, gold, mode)
    return SignificanceResult(n, fav_a, exact_binomial_p(fav_a, n), alpha)
