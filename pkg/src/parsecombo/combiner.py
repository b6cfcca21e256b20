"""Parser combination: constituent voting, naive Bayes hybridization,
similarity switching and Bayes switching.

Parser indices returned by the switching functions are 1-based, matching
the sidecar index files written by the command-line tool.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import EmptyTrainingSet, LengthMismatch, MissingGold
from .treebank_io import ConstituentSet, SentenceBundle, find_crossing


def spans_cross(a, b) -> bool:
    return a.start < b.start < a.end < b.end or b.start < a.start < b.end < a.end


def has_crossing(items) -> bool:
    return find_crossing(items) is not None


def majority(k: int) -> int:
    return k // 2 + 1


@dataclass(frozen=True)
class VoteConfig:
    threshold: Optional[int] = None

    def resolve(self, k: int) -> int:
        t = majority(k) if self.threshold is None else self.threshold
        if not 1 <= t <= k:
            raise ValueError(f"vote threshold {t} outside [1, {k}]")
        return t


def constituent_voting(bundle: SentenceBundle, cfg: VoteConfig = VoteConfig()) -> ConstituentSet:
    """Keep every candidate proposed by at least ``threshold`` parsers."""
    t = cfg.resolve(bundle.k)
    keep = [c for c, bits in bundle.memberships().items() if sum(bits) >= t]
    return ConstituentSet(frozenset(keep), bundle.n_tokens)


# ---------------------------------------------------------------------------
# naive Bayes model

@dataclass(frozen=True)
class NBCounts:
    n_candidates: int
    n_true: int
    joint_true: tuple
    joint_false: tuple

    def __post_init__(self):
        object.__setattr__(self, "joint_true", tuple(self.joint_true))
        object.__setattr__(self, "joint_false", tuple(self.joint_false))
        if len(self.joint_true) != len(self.joint_false):
            raise LengthMismatch("joint count lists differ in length")
        n_false = self.n_candidates - self.n_true
        if not 0 <= self.n_true <= self.n_candidates:
            raise ValueError("n_true outside [0, n_candidates]")
        if any(not 0 <= x <= self.n_true for x in self.joint_true):
            raise ValueError("joint_true count exceeds n_true")
        if any(not 0 <= x <= n_false for x in self.joint_false):
            raise ValueError("joint_false count exceeds n_candidates - n_true")

    @property
    def k(self):
        return len(self.joint_true)

    def __add__(self, other: "NBCounts") -> "NBCounts":
        return NBCounts(
            self.n_candidates + other.n_candidates,
            self.n_true + other.n_true,
            tuple(a + b for a, b in zip(self.joint_true, other.joint_true)),
            tuple(a + b for a, b in zip(self.joint_false, other.joint_false)),
        )

    def to_dict(self):
        return {
            "n_candidates": self.n_candidates,
            "n_true": self.n_true,
            "joint_true": list(self.joint_true),
            "joint_false": list(self.joint_false),
        }


@dataclass(frozen=True)
class NaiveBayesModel:
    """P(include) prior and per-parser P(parser proposes c | c correct / incorrect)."""

    k: int
    prior_true: float
    cond_true: tuple
    cond_false: tuple
    smoothing_alpha: float = 1.0
    counts: Optional[NBCounts] = None
    normalization: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "cond_true", tuple(float(x) for x in self.cond_true))
        object.__setattr__(self, "cond_false", tuple(float(x) for x in self.cond_false))
        if len(self.cond_true) != self.k or len(self.cond_false) != self.k:
            raise LengthMismatch(f"model for k={self.k} has {len(self.cond_true)}/{len(self.cond_false)} parameters")
        for p in (self.prior_true, *self.cond_true, *self.cond_false):
            if not 0.0 < p < 1.0:
                raise ValueError(f"probability {p} not strictly inside (0, 1)")

    @classmethod
    def from_counts(cls, counts: NBCounts, alpha: float = 1.0, normalization=None) -> "NaiveBayesModel":
        if alpha <= 0:
            raise ValueError("smoothing alpha must be positive")
        n_false = counts.n_candidates - counts.n_true
        return cls(
            k=counts.k,
            prior_true=(counts.n_true + alpha) / (counts.n_candidates + 2 * alpha),
            cond_true=tuple((x + alpha) / (counts.n_true + 2 * alpha) for x in counts.joint_true),
            cond_false=tuple((x + alpha) / (n_false + 2 * alpha) for x in counts.joint_false),
            smoothing_alpha=alpha,
            counts=counts,
            normalization=normalization,
        )

    def resmooth(self, alpha: float) -> "NaiveBayesModel":
        if self.counts is None:
            raise ValueError("model was not trained from counts")
        return NaiveBayesModel.from_counts(self.counts, alpha, self.normalization)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": self.smoothing_alpha,
            "prior_true": self.prior_true,
            "cond_true": list(self.cond_true),
            "cond_false": list(self.cond_false),
            "counts": self.counts.to_dict() if self.counts else None,
            "normalization_config": self.normalization,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveBayesModel":
        counts = NBCounts(**d["counts"]) if d.get("counts") else None
        return cls(
            k=d["k"],
            prior_true=d["prior_true"],
            cond_true=d["cond_true"],
            cond_false=d["cond_false"],
            smoothing_alpha=d.get("alpha", 1.0),
            counts=counts,
            normalization=d.get("normalization_config"),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "NaiveBayesModel":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def count_naive_bayes(dev: Sequence[SentenceBundle]) -> NBCounts:
    if not dev:
        raise EmptyTrainingSet("no training sentences")
    k = dev[0].k
    n_cand = n_true = 0
    joint_t, joint_f = [0] * k, [0] * k
    for idx, b in enumerate(dev):
        if b.gold is None:
            raise MissingGold(idx + 1)
        if b.k != k:
            raise LengthMismatch(f"sentence {idx + 1} has {b.k} parses, expected {k}")
        for c, bits in b.memberships().items():
            n_cand += 1
            correct = c in b.gold
            n_true += correct
            joint = joint_t if correct else joint_f
            for i, bit in enumerate(bits):
                joint[i] += bit
    if n_cand == 0:
        raise EmptyTrainingSet("training sentences contain no candidate constituents")
    return NBCounts(n_cand, n_true, tuple(joint_t), tuple(joint_f))


def train_naive_bayes(dev: Sequence[SentenceBundle], alpha: float = 1.0, normalization=None) -> NaiveBayesModel:
    return NaiveBayesModel.from_counts(count_naive_bayes(dev), alpha, normalization)


def _log_scores(model: NaiveBayesModel, m: Sequence[bool]):
    if len(m) != model.k:
        raise LengthMismatch(f"membership vector of length {len(m)} for a k={model.k} model")
    lt = math.log(model.prior_true)
    lf = math.log1p(-model.prior_true)
    for bit, pt, pf in zip(m, model.cond_true, model.cond_false):
        if bit:
            lt += math.log(pt)
            lf += math.log(pf)
        else:
            lt += math.log1p(-pt)
            lf += math.log1p(-pf)
    return lt, lf


def nb_log_posterior(model: NaiveBayesModel, m: Sequence[bool]):
    """(log P(correct | m), log P(incorrect | m))."""
    lt, lf = _log_scores(model, m)
    hi = max(lt, lf)
    z = hi + math.log(math.exp(lt - hi) + math.exp(lf - hi))
    return lt - z, lf - z


def nb_posterior(model: NaiveBayesModel, m: Sequence[bool]) -> float:
    lt, lf = _log_scores(model, m)
    d = lf - lt
    # differences at the level of summation rounding are exact ties
    # (e.g. cond_false = 1 - cond_true); report them as 0.5 so that the
    # strict > 0.5 rule excludes them
    if abs(d) <= 8 * (model.k + 1) * sys.float_info.epsilon * max(1.0, abs(lt), abs(lf)):
        return 0.5
    if d > 0:
        e = math.exp(-d)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(d))


def nb_hybridize(model: NaiveBayesModel, bundle: SentenceBundle) -> ConstituentSet:
    """Keep candidates whose posterior is strictly above 0.5.

    The output may contain crossing brackets; callers check with
    :func:`has_crossing` rather than relying on it being a tree.
    """
    if bundle.k != model.k:
        raise LengthMismatch(f"bundle has {bundle.k} parses, model expects {model.k}")
    keep = [c for c, bits in bundle.memberships().items() if nb_posterior(model, bits) > 0.5]
    return ConstituentSet(frozenset(keep), bundle.n_tokens)


# ---------------------------------------------------------------------------
# switching

def _argmax_first(scores) -> int:
    best = 0
    for i, s in enumerate(scores):
        if s > scores[best]:
            best = i
    return best + 1


def similarity_scores(bundle: SentenceBundle) -> list:
    sets = [s.items for s in bundle.candidates]
    return [
        sum(len(sets[j] & si) for j in range(len(sets)) if j != i)
        for i, si in enumerate(sets)
    ]


def similarity_switch(bundle: SentenceBundle) -> int:
    """1-based index of the parse sharing most constituents with the others."""
    return _argmax_first(similarity_scores(bundle))


def bayes_switch_scores(model: NaiveBayesModel, bundle: SentenceBundle) -> list:
    if bundle.k != model.k:
        raise LengthMismatch(f"bundle has {bundle.k} parses, model expects {model.k}")
    logs = [(c, nb_log_posterior(model, bits)) for c, bits in bundle.memberships().items()]
    scores = []
    for s in bundle.candidates:
        total = 0.0
        for c, (lp_true, lp_false) in logs:
            total += lp_true if c in s else lp_false
        scores.append(total)
    return scores


def bayes_switch(model: NaiveBayesModel, bundle: SentenceBundle) -> int:
    """1-based index of the parse whose include/exclude decisions are most probable."""
    return _argmax_first(bayes_switch_scores(model, bundle))
