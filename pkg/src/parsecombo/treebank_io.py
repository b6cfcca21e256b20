"""Penn-Treebank-style bracketed trees: reading, writing, constituent sets.

Trees are one per line, e.g. ``(S (NP (DT the) (NN cat)) (VP (VB sat)))``.
Constituents use *set* semantics: two identical ``(label, start, end)``
nodes in one tree (a unary chain of equal labels) count once. This
differs from evalb, which counts brackets as a multiset.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    CrossingInput,
    EmptyNode,
    EmptySentence,
    LineCountMismatch,
    MalformedTree,
    TokenCountMismatch,
    TokenStringMismatch,
    TrailingInput,
    UnbalancedBrackets,
)

DEFAULT_ROOT_LABELS = frozenset({"TOP", "S1", "ROOT"})
NONE_LABEL = "-NONE-"


@dataclass(frozen=True)
class Tree:
    """Ordered labeled tree. Leaves hold a token and no children."""

    label: str
    children: tuple = ()
    token: Optional[str] = None

    def __post_init__(self):
        if self.token is None and not self.children:
            raise EmptyNode(f"internal node {self.label!r} has no children")
        if self.token is not None and self.children:
            raise ValueError("a leaf cannot have children")

    @classmethod
    def leaf(cls, token: str) -> "Tree":
        return cls("", (), token)

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    @property
    def is_preterminal(self) -> bool:
        return len(self.children) == 1 and self.children[0].is_leaf

    def leaves(self) -> list:
        out = []
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node.token)
            else:
                stack.extend(reversed(node.children))
        return out

    def __str__(self):
        return render_bracketed(self)


@dataclass(frozen=True, order=True)
class Constituent:
    label: str
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad span [{self.start}, {self.end})")
        if not self.label or re.search(r"[\s()]", self.label):
            raise ValueError(f"bad constituent label {self.label!r}")

    def __str__(self):
        return f"({self.label},{self.start},{self.end})"

    @property
    def length(self):
        return self.end - self.start


def span_order(c: Constituent):
    """Sort key: left to right, outer spans before inner ones."""
    return (c.start, -c.end, c.label)


@dataclass(frozen=True)
class ConstituentSet:
    items: frozenset
    n_tokens: int

    def __post_init__(self):
        object.__setattr__(self, "items", frozenset(self.items))
        for c in self.items:
            if c.end > self.n_tokens:
                raise ValueError(f"{c} extends past sentence of {self.n_tokens} tokens")

    def __len__(self):
        return len(self.items)

    def __iter__(self) -> Iterator[Constituent]:
        return iter(self.items)

    def __contains__(self, c):
        return c in self.items

    def sorted(self) -> list:
        return sorted(self.items, key=span_order)

    def replace(self, items: Iterable[Constituent]) -> "ConstituentSet":
        return ConstituentSet(frozenset(items), self.n_tokens)


@dataclass(frozen=True)
class SentenceBundle:
    """One sentence: k candidate parses (fixed parser order) plus optional gold."""

    tokens: tuple
    candidates: tuple
    candidate_trees: tuple = ()
    gold: Optional[ConstituentSet] = None
    gold_tree: Optional[Tree] = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "candidate_trees", tuple(self.candidate_trees))
        if len(self.candidates) < 2:
            raise ValueError("a bundle needs at least two candidate parses")
        n = len(self.tokens)
        for s in self.candidates:
            if s.n_tokens != n:
                raise TokenCountMismatch(f"candidate has {s.n_tokens} tokens, expected {n}")
        if self.gold is not None and self.gold.n_tokens != n:
            raise TokenCountMismatch(f"gold has {self.gold.n_tokens} tokens, expected {n}")

    @property
    def k(self) -> int:
        return len(self.candidates)

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)

    def memberships(self) -> dict:
        """Map each constituent of the candidates' union to its k-bit vote vector."""
        votes = {}
        for i, s in enumerate(self.candidates):
            for c in s:
                bits = votes.get(c)
                if bits is None:
                    bits = votes[c] = [False] * self.k
                bits[i] = True
        return {c: tuple(votes[c]) for c in sorted(votes, key=span_order)}


@dataclass(frozen=True)
class NormalizationConfig:
    strip_function_tags: bool = True
    remove_none_nodes: bool = True
    drop_root_label: frozenset = field(default=DEFAULT_ROOT_LABELS)
    exclude_preterminals: bool = True
    # POS labels whose tokens are deleted like traces (e.g. punctuation); off by default
    ignore_labels: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "drop_root_label", frozenset(self.drop_root_label or ()))
        object.__setattr__(self, "ignore_labels", frozenset(self.ignore_labels or ()))

    def to_dict(self) -> dict:
        return {
            "strip_function_tags": self.strip_function_tags,
            "remove_none_nodes": self.remove_none_nodes,
            "drop_root_label": sorted(self.drop_root_label),
            "exclude_preterminals": self.exclude_preterminals,
            "ignore_labels": sorted(self.ignore_labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationConfig":
        return cls(
            strip_function_tags=d.get("strip_function_tags", True),
            remove_none_nodes=d.get("remove_none_nodes", True),
            drop_root_label=frozenset(d.get("drop_root_label", DEFAULT_ROOT_LABELS)),
            exclude_preterminals=d.get("exclude_preterminals", True),
            ignore_labels=frozenset(d.get("ignore_labels", ())),
        )


# ---------------------------------------------------------------------------
# reading and writing

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


def parse_bracketed(text: str) -> Tree:
    """Parse one bracketed tree. Whitespace between items is insignificant."""
    stack = []  # open nodes: [label, children, position]
    root = None
    for m in _TOKEN_RE.finditer(text):
        tok, pos = m.group(), m.start()
        if root is not None:
            if tok == ")":
                raise UnbalancedBrackets("unmatched ')'", pos)
            raise TrailingInput(pos)
        if tok == "(":
            stack.append([None, [], pos])
        elif tok == ")":
            if not stack:
                raise UnbalancedBrackets("unmatched ')'", pos)
            label, children, start = stack.pop()
            if label is None:
                raise EmptyNode(f"empty or label-less node at position {start}")
            if not children:
                raise EmptyNode(f"node {label!r} at position {start} has no children")
            node = Tree(label, tuple(children))
            if stack:
                stack[-1][1].append(node)
            else:
                root = node
        else:
            if not stack:
                raise MalformedTree(f"bare token {tok!r} outside brackets at position {pos}")
            top = stack[-1]
            if top[0] is None:
                if top[1]:
                    raise EmptyNode(f"label-less node at position {top[2]}")
                top[0] = tok
            else:
                top[1].append(Tree.leaf(tok))
        # a '(' directly after '(' leaves the outer node label-less
        if tok == "(" and len(stack) >= 2 and stack[-2][0] is None:
            raise EmptyNode(f"label-less node at position {stack[-2][2]}")
    if stack:
        raise UnbalancedBrackets("unclosed '('", stack[-1][2])
    if root is None:
        raise EmptyNode("no tree in input")
    return root


def render_bracketed(tree: Tree) -> str:
    parts = []

    def walk(node):
        if node.is_leaf:
            parts.append(node.token)
            return
        parts.append("(" + node.label)
        for child in node.children:
            parts.append(" ")
            walk(child)
        parts.append(")")

    walk(tree)
    return "".join(parts)


def read_tree_lines(path) -> list:
    """Non-blank lines of a one-tree-per-line file, trailing newline removed."""
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\r\n") for line in f if line.strip()]


def write_trees(trees: Iterable[Tree], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in trees:
            f.write(render_bracketed(t) + "\n")


# ---------------------------------------------------------------------------
# normalization and constituent extraction

def strip_function_tag(label: str) -> str:
    if label.startswith("-") or ("-" not in label and "=" not in label):
        return label
    head = re.split(r"[-=]", label, maxsplit=1)[0]
    return head or label


def normalize_tree(tree: Tree, cfg: NormalizationConfig = NormalizationConfig()) -> Optional[Tree]:
    """Delete traces (and ignored POS), strip function tags.

    Returns None when nothing is left. The root is kept even when its label
    is in ``drop_root_label``; dropping happens at extraction time.
    """

    def walk(node):
        if node.is_leaf:
            return node
        if node.is_preterminal:
            if cfg.remove_none_nodes and node.label == NONE_LABEL:
                return None
            if node.label in cfg.ignore_labels:
                return None
        kids = tuple(k for k in (walk(c) for c in node.children) if k is not None)
        if not kids:
            return None
        label = strip_function_tag(node.label) if cfg.strip_function_tags else node.label
        if label == node.label and len(kids) == len(node.children) and all(
            a is b for a, b in zip(kids, node.children)
        ):
            return node
        return Tree(label, kids)

    return walk(tree)


def _spans(tree: Tree, cfg: NormalizationConfig, drop_root: bool):
    """Yield (node, start, end, depth) for every internal node."""
    out = []

    def walk(node, start, depth):
        if node.is_leaf:
            return start + 1
        pos = start
        for child in node.children:
            pos = walk(child, pos, depth + 1)
        out.append((node, start, pos, depth))
        return pos

    walk(tree, 0, 0)
    if drop_root and out and out[-1][0].label in cfg.drop_root_label:
        out.pop()
    return out


def extract_constituents(tree: Tree, cfg: NormalizationConfig = NormalizationConfig()) -> ConstituentSet:
    norm = normalize_tree(tree, cfg)
    if norm is None:
        raise EmptySentence("every token of the sentence was removed by normalization")
    items = set()
    for node, start, end, _ in _spans(norm, cfg, drop_root=True):
        if cfg.exclude_preterminals and node.is_preterminal:
            continue
        items.add(Constituent(node.label, start, end))
    return ConstituentSet(frozenset(items), len(norm.leaves()))


def sentence_tokens(tree: Tree, cfg: NormalizationConfig = NormalizationConfig()) -> tuple:
    norm = normalize_tree(tree, cfg)
    if norm is None:
        raise EmptySentence("every token of the sentence was removed by normalization")
    return tuple(norm.leaves())


# ---------------------------------------------------------------------------
# corpora

def read_corpus(
    parser_files: Sequence,
    gold_file=None,
    cfg: NormalizationConfig = NormalizationConfig(),
    strict_tokens: bool = True,
) -> list:
    """Read k aligned parser files (and optional gold) into SentenceBundles."""
    paths = list(parser_files) + ([gold_file] if gold_file is not None else [])
    lines = {str(p): read_tree_lines(p) for p in paths}
    counts = {str(p): len(lines[str(p)]) for p in paths}
    if len(set(counts.values())) > 1:
        raise LineCountMismatch(counts)

    bundles = []
    n = next(iter(counts.values())) if counts else 0
    for idx in range(n):
        trees, sets, toks = [], [], []
        for p in paths:
            line = lines[str(p)][idx]
            try:
                t = parse_bracketed(line)
                s = extract_constituents(t, cfg)
            except (MalformedTree, EmptySentence) as e:
                e.args = (f"{p}, sentence {idx + 1}: {e}",)
                raise
            trees.append(t)
            sets.append(s)
            toks.append(sentence_tokens(t, cfg))
        lengths = [len(x) for x in toks]
        if len(set(lengths)) > 1:
            raise TokenCountMismatch(
                "token counts differ (" + ", ".join(f"{p}: {m}" for p, m in zip(paths, lengths)) + ")",
                sentence=idx + 1,
                counts=dict(zip(map(str, paths), lengths)),
            )
        for p, other in zip(paths[1:], toks[1:]):
            if other != toks[0]:
                pos = next(j for j, (a, b) in enumerate(zip(toks[0], other)) if a != b)
                err = TokenStringMismatch(idx + 1, pos, p, toks[0][pos], other[pos])
                if strict_tokens:
                    raise err
                warnings.warn(str(err), stacklevel=2)
                break
        k = len(parser_files)
        bundles.append(
            SentenceBundle(
                tokens=toks[0],
                candidates=tuple(sets[:k]),
                candidate_trees=tuple(trees[:k]),
                gold=sets[k] if gold_file is not None else None,
                gold_tree=trees[k] if gold_file is not None else None,
            )
        )
    return bundles


# ---------------------------------------------------------------------------
# rebuilding trees from constituent sets

def find_crossing(items: Iterable[Constituent]):
    """Return one crossing pair, or None. Sweep over spans sorted outer-first."""
    stack = []
    for c in sorted(set(items), key=span_order):
        while stack and stack[-1].end <= c.start:
            stack.pop()
        if stack and c.end > stack[-1].end:
            return stack[-1], c
        stack.append(c)
    return None


def _token_units(tree: Tree) -> list:
    """The subtree standing for each token: its preterminal, or a bare leaf."""
    units = []

    def walk(node):
        if node.is_leaf:
            units.append(node)
        elif node.is_preterminal:
            units.append(node)
        else:
            for child in node.children:
                walk(child)

    walk(tree)
    return units


def build_tree(
    constituents: ConstituentSet,
    reference: Tree,
    cfg: NormalizationConfig = NormalizationConfig(),
) -> Tree:
    """Assemble the tree whose nodes are exactly ``constituents``.

    Tokens and preterminals are copied from ``reference``. Constituents with
    equal spans form a unary chain; the label sitting higher in the reference
    goes on top, ties alphabetical. A synthetic TOP root is added when no
    constituent covers the whole sentence.
    """
    ref = normalize_tree(reference, cfg)
    if ref is None:
        raise EmptySentence("reference tree has no tokens after normalization")
    units = _token_units(ref)
    n = len(units)
    if constituents.n_tokens != n:
        raise TokenCountMismatch(f"constituent set covers {constituents.n_tokens} tokens, reference has {n}")
    pair = find_crossing(constituents)
    if pair is not None:
        raise CrossingInput(*pair)

    exact_depth, label_depth = {}, {}
    for node, start, end, depth in _spans(ref, cfg, drop_root=False):
        key = (node.label, start, end)
        exact_depth[key] = min(depth, exact_depth.get(key, depth))
        label_depth[node.label] = min(depth, label_depth.get(node.label, depth))

    def rank(c):
        inf = float("inf")
        return (exact_depth.get((c.label, c.start, c.end), inf), label_depth.get(c.label, inf), c.label)

    pre_units = {
        (u.label, i, i + 1) for i, u in enumerate(units) if not u.is_leaf
    }
    items = [c for c in constituents if (c.label, c.start, c.end) not in pre_units]
    items.sort(key=lambda c: (c.start, -c.end, rank(c)))

    # node = [label, start, end, children]
    roots, stack = [], []
    for c in items:
        while stack and not (stack[-1][1] <= c.start and c.end <= stack[-1][2]):
            stack.pop()
        node = [c.label, c.start, c.end, []]
        (stack[-1][3] if stack else roots).append(node)
        stack.append(node)

    def assemble(label, start, end, kids):
        out, pos = [], start
        for kid in kids:
            out.extend(units[pos:kid[1]])
            out.append(assemble(*kid))
            pos = kid[2]
        out.extend(units[pos:end])
        return Tree(label, tuple(out))

    if len(roots) == 1 and roots[0][1] == 0 and roots[0][2] == n:
        return assemble(*roots[0])
    return assemble("TOP", 0, n, roots)
