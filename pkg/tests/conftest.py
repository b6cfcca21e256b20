import random

import pytest

from parsecombo.treebank_io import Constituent, ConstituentSet, SentenceBundle, Tree

PHRASES = ["S", "NP", "VP", "PP", "SBAR", "ADJP"]
TAGS = ["DT", "NN", "VB", "JJ", "IN", "PRP$", ",", "-LRB-"]
WORDS = ["the", "cat", "sat", "on", "mat", "a", "$", "3.5", "don't", "C++", "é"]


def random_tree(rng, n_tokens, depth=0, traces=False, function_tags=False, unary=0.2):
    """Random PTB-shaped tree: every token under a preterminal."""
    if n_tokens == 1 and (depth > 0 and rng.random() < 0.7):
        if traces and rng.random() < 0.15:
            return Tree("-NONE-", (Tree.leaf("*T*-1"),))
        return Tree(rng.choice(TAGS), (Tree.leaf(rng.choice(WORDS)),))
    label = rng.choice(PHRASES)
    if function_tags and rng.random() < 0.3:
        label += rng.choice(["-SBJ", "-TMP", "=2", "-SBJ-1"])
    if n_tokens == 1:
        kids = [random_tree(rng, 1, depth + 1, traces, function_tags, unary)]
    elif rng.random() < unary:
        kids = [random_tree(rng, n_tokens, depth + 1, traces, function_tags, unary / 2)]
    else:
        n_kids = rng.randint(2, min(n_tokens, 4))
        cuts = sorted(rng.sample(range(1, n_tokens), n_kids - 1))
        bounds = [0] + cuts + [n_tokens]
        kids = [
            random_tree(rng, b - a, depth + 1, traces, function_tags, unary)
            for a, b in zip(bounds, bounds[1:])
        ]
    return Tree(label, tuple(kids))


def random_nested_spans(rng, start, end, p_keep=0.7):
    """Random laminar (non-crossing) family of spans inside [start, end)."""
    out = []
    if end - start >= 2:
        n_kids = rng.randint(2, min(end - start, 3))
        cuts = sorted(rng.sample(range(start + 1, end), n_kids - 1))
        bounds = [start] + cuts + [end]
        for a, b in zip(bounds, bounds[1:]):
            if rng.random() < p_keep:
                out.append((a, b))
            out.extend(random_nested_spans(rng, a, b, p_keep))
    return out


def random_parse_set(rng, n, labels=("A", "B", "C"), p_keep=0.7):
    spans = random_nested_spans(rng, 0, n, p_keep)
    if rng.random() < 0.8:
        spans.append((0, n))
    return ConstituentSet(frozenset(Constituent(rng.choice(labels), a, b) for a, b in spans), n)


def random_bundle(rng, k, n=None, labels=("A", "B", "C")):
    n = n or rng.randint(2, 12)
    sets = [random_parse_set(rng, n, labels) for _ in range(k)]
    gold = random_parse_set(rng, n, labels)
    return SentenceBundle(tokens=tuple(f"w{i}" for i in range(n)), candidates=sets, gold=gold)


@pytest.fixture
def rng():
    return random.Random(1234)


# ---------------------------------------------------------------------------
# one summary line per acceptance criterion

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _CRITERIA.get(marker, "PASS")
        _CRITERIA[marker] = "PASS" if report.passed and prev == "PASS" else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, text), status in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {text}")
