"""Command-line front end: ``parsecombo {train,combine,eval,oracle,analyze,synth}``.

Errors are written to stderr as ``ERROR:<code>: message``; exit status is
0 on success, 2 for usage errors and 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

from . import analysis, combiner, evaluation
from .errors import AlignmentMismatch, CrossingInput, ModelKMismatch, ParseComboError, UsageError
from .treebank_io import (
    Constituent,
    ConstituentSet,
    NormalizationConfig,
    build_tree,
    extract_constituents,
    parse_bracketed,
    read_corpus,
    read_tree_lines,
    render_bracketed,
)

METHODS = ("vote", "nb", "sim-switch", "bayes-switch")


def _norm_config(args) -> NormalizationConfig:
    return NormalizationConfig(
        strip_function_tags=not args.keep_function_tags,
        remove_none_nodes=not args.keep_none_nodes,
        exclude_preterminals=not args.keep_preterminals,
        ignore_labels=frozenset(x for x in (args.ignore_labels or "").split(",") if x),
    )


def _read(args, files, gold=None):
    cfg = _norm_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        bundles = read_corpus(files, gold, cfg, strict_tokens=not args.allow_token_mismatch)
    return bundles, cfg


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _format_tuples(s: ConstituentSet) -> str:
    return "".join(f"({c.label},{c.start},{c.end})\n" for c in s.sorted()) + "\n"


def read_tuple_file(path) -> list:
    """Read the tuple output format: one ``(label,start,end)`` per line, blank line after each sentence."""
    sentences, cur = [], []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                sentences.append(cur)
                cur = []
                continue
            label, start, end = line.strip("()").rsplit(",", 2)
            cur.append(Constituent(label, int(start), int(end)))
    if cur:
        sentences.append(cur)
    return sentences


def _columns(p, r, mean, f):
    return "".join(f"{x:8.2f}" for x in (p, r, mean, f))


def _report_line(name, m: evaluation.Metrics, width=28):
    return (
        f"{name:<{width}}{_columns(m.precision, m.recall, m.mean_pr, m.f_measure)}"
        f"  {m.matched}/{m.hypothesized} hyp, {m.gold_count} gold"
    )


def _header(width=28):
    return f"{'System':<{width}}" + "".join(f"{h:>8}" for h in ("P", "R", "(P+R)/2", "F"))


# ---------------------------------------------------------------------------
# subcommands

def cmd_train(args):
    if not args.gold:
        raise UsageError("train needs --gold")
    bundles, cfg = _read(args, args.parsers, args.gold)
    model = combiner.train_naive_bayes(bundles, args.alpha, normalization=cfg.to_dict())
    text = json.dumps(model.to_dict(), indent=2) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
        log = sys.stderr
    else:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
        log = sys.stdout
    c = model.counts
    print(f"sentences\t{len(bundles)}", file=log)
    print(f"candidates\t{c.n_candidates}", file=log)
    print(f"correct\t{c.n_true}", file=log)
    for i, (jt, jf) in enumerate(zip(c.joint_true, c.joint_false), 1):
        print(f"parser {i}\tproposed correct {jt}\tproposed incorrect {jf}", file=log)


def _load_model(args, k):
    if not args.model:
        raise UsageError(f"method {args.method} needs --model")
    model = combiner.NaiveBayesModel.load(args.model)
    if model.k != k:
        raise ModelKMismatch(f"model was trained for k={model.k}, got {k} parser files")
    return model


def cmd_combine(args):
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method}")
    if len(args.parsers) < 2:
        raise UsageError("combine needs at least two parser files")
    bundles, cfg = _read(args, args.parsers)
    k = len(args.parsers)
    model = _load_model(args, k) if args.method in ("nb", "bayes-switch") else None
    ref = args.reference or 1
    if not 1 <= ref <= k:
        raise UsageError(f"--reference must be in [1, {k}]")

    out = _open_out(args.output)
    try:
        if args.method in ("vote", "nb"):
            vote_cfg = combiner.VoteConfig(args.threshold)
            records = []
            for idx, b in enumerate(bundles, 1):
                s = combiner.constituent_voting(b, vote_cfg) if model is None else combiner.nb_hybridize(model, b)
                tree = None
                if args.format in ("trees", "json"):
                    try:
                        tree = build_tree(s, b.candidate_trees[ref - 1], cfg)
                    except CrossingInput as e:
                        if args.format == "trees":
                            e.args = (f"sentence {idx}: {e}; use --format tuples to keep the raw set",)
                            raise
                if args.format == "trees":
                    out.write(render_bracketed(tree) + "\n")
                elif args.format == "tuples":
                    out.write(_format_tuples(s))
                else:
                    records.append({
                        "sentence": idx,
                        "constituents": [[c.label, c.start, c.end] for c in s.sorted()],
                        "crossing": combiner.has_crossing(s),
                        "tree": render_bracketed(tree) if tree is not None else None,
                    })
            if args.format == "json":
                json.dump({"method": args.method, "sentences": records}, out, indent=2)
                out.write("\n")
        else:
            raw = [read_tree_lines(p) for p in args.parsers]
            picks = [
                combiner.similarity_switch(b) if model is None else combiner.bayes_switch(model, b)
                for b in bundles
            ]
            if args.format == "trees":
                for idx, i in enumerate(picks):
                    out.write(raw[i - 1][idx] + "\n")
            elif args.format == "tuples":
                for b, i in zip(bundles, picks):
                    out.write(_format_tuples(b.candidates[i - 1]))
            else:
                json.dump(
                    {
                        "method": args.method,
                        "indices": picks,
                        "usage": [list(r) for r in analysis.parser_usage(picks, k)],
                        "trees": [raw[i - 1][idx] for idx, i in enumerate(picks)],
                    },
                    out,
                    indent=2,
                )
                out.write("\n")
            idx_path = args.indices
            if idx_path is None and args.output not in (None, "-"):
                idx_path = args.output + ".indices"
            if idx_path:
                with open(idx_path, "w", encoding="utf-8") as f:
                    f.writelines(f"{i}\n" for i in picks)
    finally:
        if out is not sys.stdout:
            out.close()


def _hypothesis_sets(path, fmt, cfg, golds):
    if fmt == "tuples":
        sents = read_tuple_file(path)
        if len(sents) != len(golds):
            raise AlignmentMismatch(f"{path} has {len(sents)} sentences, gold has {len(golds)}")
        return [ConstituentSet(frozenset(s), g.n_tokens) for s, g in zip(sents, golds)]
    lines = read_tree_lines(path)
    if len(lines) != len(golds):
        raise AlignmentMismatch(f"{path} has {len(lines)} trees, gold has {len(golds)}")
    return [extract_constituents(parse_bracketed(line), cfg) for line in lines]


def cmd_eval(args):
    if not args.gold:
        raise UsageError("eval needs --gold")
    if args.significance and len(args.hypotheses) != 2:
        raise UsageError("--significance compares exactly two hypothesis files")
    cfg = _norm_config(args)
    golds = [extract_constituents(parse_bracketed(line), cfg) for line in read_tree_lines(args.gold)]
    results = {}
    hyps = {}
    for path in args.hypotheses:
        hyps[path] = _hypothesis_sets(path, args.hyp_format, cfg, golds)
        results[path] = evaluation.score_corpus(list(zip(hyps[path], golds)))
    sig = {}
    if args.significance:
        a, b = args.hypotheses
        for mode in ("precision", "recall"):
            sig[mode] = evaluation.significance_test(hyps[a], hyps[b], golds, mode, args.level)

    doc = {
        "systems": {p: m.to_dict() for p, m in results.items()},
        "significance": {mode: r.to_dict() for mode, r in sig.items()},
    }
    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    if args.format == "json":
        print(json.dumps(doc, indent=2))
        return
    if args.format == "tsv":
        print("system\tP\tR\tmean\tF\tmatched\thypothesized\tgold")
        for p, m in results.items():
            print(f"{p}\t{m.precision:.2f}\t{m.recall:.2f}\t{m.mean_pr:.2f}\t{m.f_measure:.2f}"
                  f"\t{m.matched}\t{m.hypothesized}\t{m.gold_count}")
    else:
        print(_header())
        for p, m in results.items():
            print(_report_line(os.path.basename(p), m))
    for mode, r in sig.items():
        verdict = "significant" if r.significant else "not significant"
        print(f"{mode}: {r.n_disagreements} discordant, {r.n_favoring_a} favor A, "
              f"{r.n_favoring_b} favor B, p = {r.p_value:.4g} ({verdict} at alpha {r.alpha})")


def _average(ms):
    n = len(ms)
    p = sum(m.precision for m in ms) / n
    r = sum(m.recall for m in ms) / n
    return p, r, (p + r) / 2, sum(m.f_measure for m in ms) / n


def cmd_oracle(args):
    if not args.gold:
        raise UsageError("oracle needs --gold")
    bundles, _ = _read(args, args.parsers, args.gold)
    k = len(args.parsers)
    singles = [evaluation.score_corpus([(b.candidates[i], b.gold) for b in bundles]) for i in range(k)]
    switch, picks = evaluation.switching_oracle(bundles)
    maxp = evaluation.max_precision_oracle(bundles)
    best = max(range(k), key=lambda i: (singles[i].f_measure, -i))
    avg = _average(singles)

    if args.format == "json":
        print(json.dumps({
            "parsers": [m.to_dict() for m in singles],
            "average_individual": dict(zip(("precision", "recall", "mean_pr", "f_measure"), avg)),
            "best_individual": best + 1,
            "switching_oracle": switch.to_dict(),
            "switching_oracle_indices": picks,
            "max_precision_oracle": maxp.to_dict(),
        }, indent=2))
        return
    print(_header())
    for i, m in enumerate(singles, 1):
        print(_report_line(f"Parser {i}", m))
    print(f"{'Average Individual Parser':<28}{_columns(*avg)}")
    print(_report_line("Best Individual Parser", singles[best]))
    print(_report_line("Parser Switching Oracle", switch))
    print(_report_line("Maximum Precision Oracle", maxp))


def cmd_analyze(args):
    if args.usage:
        if not args.k:
            raise UsageError("--usage needs --k")
        with open(args.usage, encoding="utf-8") as f:
            picks = [int(line) for line in f if line.strip()]
        usage = analysis.parser_usage(picks, args.k)
        if args.format == "json":
            print(json.dumps([{"parser": i, "count": n, "percent": p} for i, n, p in usage], indent=2))
        else:
            sys.stdout.write(analysis.usage_table(usage))
        return
    if not args.gold:
        raise UsageError("analyze needs --gold (or --usage)")
    bundles, _ = _read(args, args.parsers, args.gold)
    fn = analysis.minority_precision_report if args.minority else analysis.isolated_precision_report
    reports = fn(bundles, args.key, args.cap)
    if args.format == "json":
        print(analysis.reports_to_json(reports))
        return
    for r in reports:
        print(f"# parser {r.parser}")
        sys.stdout.write(r.to_tsv())


def _rates(text):
    vals = tuple(float(x) for x in text.split(","))
    return vals[0] if len(vals) == 1 else vals


def cmd_synth(args):
    cfg = analysis.SyntheticConfig(
        n_sentences=args.sentences,
        length_range=(args.min_length, args.max_length),
        k=args.k,
        miss_rate=_rates(args.miss_rate),
        spurious_rate=_rates(args.spurious_rate),
        label_alphabet=tuple(args.labels.split(",")),
        seed=args.seed,
    )
    bundles = analysis.generate_synthetic(cfg)
    os.makedirs(args.output_dir, exist_ok=True)
    for i in range(cfg.k):
        with open(os.path.join(args.output_dir, f"parser{i + 1}.txt"), "w", encoding="utf-8") as f:
            f.writelines(render_bracketed(b.candidate_trees[i]) + "\n" for b in bundles)
    with open(os.path.join(args.output_dir, "gold.txt"), "w", encoding="utf-8") as f:
        f.writelines(render_bracketed(b.gold_tree) + "\n" for b in bundles)
    print(f"wrote {len(bundles)} sentences for {cfg.k} parsers to {args.output_dir}")


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    norm = argparse.ArgumentParser(add_help=False)
    norm.add_argument("--keep-function-tags", action="store_true")
    norm.add_argument("--keep-preterminals", action="store_true")
    norm.add_argument("--keep-none-nodes", action="store_true")
    norm.add_argument("--ignore-labels", help="comma-separated POS labels whose tokens are deleted")
    norm.add_argument("--allow-token-mismatch", action="store_true",
                      help="warn instead of failing when token strings differ")

    ap = argparse.ArgumentParser(prog="parsecombo", description="Combine constituency parser outputs.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("train", parents=[norm], help="estimate the naive Bayes model")
    p.add_argument("parsers", nargs="+")
    p.add_argument("--gold")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("combine", parents=[norm], help="combine parser outputs")
    p.add_argument("parsers", nargs="+")
    p.add_argument("--method", choices=METHODS, default="vote")
    p.add_argument("--threshold", type=int)
    p.add_argument("--model")
    p.add_argument("--reference", type=int, help="1-based parser supplying POS tags for rebuilt trees")
    p.add_argument("--format", choices=("trees", "tuples", "json"), default="trees")
    p.add_argument("--indices", help="sidecar file of 1-based switching decisions")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("eval", parents=[norm], help="PARSEVAL scores against gold")
    p.add_argument("hypotheses", nargs="+")
    p.add_argument("--gold")
    p.add_argument("--hyp-format", choices=("trees", "tuples"), default="trees")
    p.add_argument("--significance", action="store_true")
    p.add_argument("--level", type=float, default=0.01)
    p.add_argument("--format", choices=("text", "tsv", "json"), default="text")
    p.add_argument("--json", help="also write full-precision JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", parents=[norm], help="switching and maximum precision oracles")
    p.add_argument("parsers", nargs="+")
    p.add_argument("--gold")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("analyze", parents=[norm], help="isolated constituent precision, parser usage")
    p.add_argument("parsers", nargs="*")
    p.add_argument("--gold")
    p.add_argument("--key", choices=analysis.PARTITION_KEYS, default="label")
    p.add_argument("--cap", type=int, help="lump lengths at or above this into one bucket")
    p.add_argument("--minority", action="store_true", help="report minority instead of isolated constituents")
    p.add_argument("--usage", help="sidecar index file to tabulate")
    p.add_argument("--k", type=int)
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="write a synthetic parser ensemble")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--sentences", type=int, default=100)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--min-length", type=int, default=5)
    p.add_argument("--max-length", type=int, default=25)
    p.add_argument("--miss-rate", default="0.1", help="one rate, or one per parser comma-separated")
    p.add_argument("--spurious-rate", default="0.1")
    p.add_argument("--labels", default="S,NP,VP,PP,SBAR,ADJP,ADVP,QP")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UsageError as e:
        print(f"ERROR:{e.code}: {e}", file=sys.stderr)
        return 2
    except ParseComboError as e:
        print(f"ERROR:{e.code}: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"ERROR:{type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
