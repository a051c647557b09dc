"""Command-line interface.

Subcommands: train, parse, eval, bench, demo-tree, verify.  Exit codes:
0 success, 1 usage error, 2 data error.  ORDLIN_SEED provides a seed when
--seed is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _build_parser() -> _Parser:
    p = _Parser(prog="ordlin", description=__doc__)
    p.add_argument("--seed", type=int, default=None, help="global RNG seed")
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.add_argument("--threads", type=int, default=1, help="worker threads for parse/eval")
    sub = p.add_subparsers(dest="command")

    t = sub.add_parser("train", help="train a scorer on a CoNLL-U treebank")
    t.add_argument("--train", required=True, dest="train_path")
    t.add_argument("--dev", required=True, dest="dev_path")
    t.add_argument("--out", required=True, dest="out_path")

    q = sub.add_parser("parse", help="parse CoNLL-U with a trained checkpoint")
    q.add_argument("--model", required=True)
    q.add_argument("--input", required=True)
    q.add_argument("--output", required=True)

    e = sub.add_parser("eval", help="UAS/LAS of predictions against gold")
    e.add_argument("--pred", required=True)
    e.add_argument("--gold", required=True)
    e.add_argument("--ignore-punct", action="store_true")

    b = sub.add_parser("bench", help="time fast vs naive aggregation")
    b.add_argument("--sizes", default="4096,8192,16384,32768,65536")
    b.add_argument("--trials", type=int, default=3)
    b.add_argument("--semiring", default="min", choices=["min", "min-argmin", "logsumexp"])
    b.add_argument("--out", default=None)
    b.add_argument("--format", default="json", choices=["json", "tsv"])
    b.add_argument("--no-assert", action="store_true",
                   help="record ratios without enforcing the scaling gates")

    d = sub.add_parser("demo-tree", help="reconstruct a binary tree from traversals")
    d.add_argument("--inorder", required=True)
    d.add_argument("--postorder", required=True)

    v = sub.add_parser("verify", help="run the randomized property suites")
    v.add_argument("--n", type=int, default=256)
    v.add_argument("--trials", type=int, default=100)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if _wants_bench(argv):
        # Pin numeric threading before numpy loads: benchmarks time one thread.
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, "1")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("a subcommand is required")
        return _dispatch(args)
    except UsageError as exc:
        print(f"ordlin: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"ordlin: {exc}", file=sys.stderr)
        return 2


def _wants_bench(argv) -> bool:
    return any(a == "bench" for a in argv)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("ORDLIN_SEED", "0"))


def _load_config(args, vocab_size=2, label_count=1):
    from .model import ScorerConfig

    overrides = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config {args.config}: {exc}") from exc
    known = {f.name for f in fields(ScorerConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise DataError(f"unknown config keys: {sorted(unknown)}")
    base = dict(vocab_size=vocab_size, label_count=label_count, seed=_seed(args))
    base.update(overrides)
    return ScorerConfig(**base)


def _read_treebank(path):
    from .conllu import ConlluError, read_conllu

    try:
        return read_conllu(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except ConlluError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _dispatch(args) -> int:
    if args.command == "train":
        return _cmd_train(args)
    if args.command == "parse":
        return _cmd_parse(args)
    if args.command == "eval":
        return _cmd_eval(args)
    if args.command == "bench":
        return _cmd_bench(args)
    if args.command == "demo-tree":
        return _cmd_demo_tree(args)
    if args.command == "verify":
        return _cmd_verify(args)
    raise UsageError(f"unknown subcommand {args.command!r}")


def _cmd_train(args) -> int:
    from .model import save_checkpoint
    from .parser import train

    train_sents = _read_treebank(args.train_path)
    dev_sents = _read_treebank(args.dev_path)
    if not train_sents:
        raise DataError(f"{args.train_path}: no sentences")
    config = _load_config(args)
    ckpt = train(config, train_sents, dev_sents, log=lambda msg: print(msg, flush=True))
    save_checkpoint(args.out_path, ckpt.params, ckpt.vocab, ckpt.labels)
    print(f"saved checkpoint to {args.out_path}")
    return 0


def _cmd_parse(args) -> int:
    from .conllu import write_conllu
    from .model import load_checkpoint
    from .parser import Checkpoint, parse, tree_violations

    try:
        params, vocab, labels = load_checkpoint(args.model)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot load checkpoint {args.model}: {exc}") from exc
    sentences = _read_treebank(args.input)
    results = parse(Checkpoint(params, vocab, labels), sentences, threads=args.threads)
    write_conllu(args.output, sentences, predictions=results)
    cycles = sum(tree_violations(r.pred_heads)["cycles"] for r in results)
    extra = sum(tree_violations(r.pred_heads)["extra_roots"] for r in results)
    print(f"parsed {len(results)} sentences -> {args.output} "
          f"(diagnostics: {cycles} cycles, {extra} extra roots)")
    return 0


def _cmd_eval(args) -> int:
    from .conllu import ParseResult
    from .parser import evaluate

    pred_sents = _read_treebank(args.pred)
    gold_sents = _read_treebank(args.gold)
    if len(pred_sents) != len(gold_sents):
        raise DataError("prediction and gold files differ in sentence count")
    preds = [ParseResult(s.gold_heads, s.gold_labels, [0.0] * len(s)) for s in pred_sents]
    try:
        res = evaluate(preds, gold_sents, ignore_punct=args.ignore_punct)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    print(res)
    return 0


def _cmd_bench(args) -> int:
    from .bench import ScalingAssertion, bench_aggregation

    try:
        sizes = sorted({int(s) for s in args.sizes.split(",") if s.strip()})
    except ValueError as exc:
        raise UsageError(f"bad --sizes: {exc}") from exc
    try:
        report = bench_aggregation(sizes, trials=args.trials, semiring=args.semiring,
                                   seed=_seed(args), enforce=not args.no_assert)
    except ScalingAssertion as exc:
        print(f"scaling assertion failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    text = report.to_json() if args.format == "json" else report.to_tsv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + ("\n" if not text.endswith("\n") else ""))
        print(f"wrote {args.format} report to {args.out}")
    else:
        print(text)
    return 0


def _cmd_demo_tree(args) -> int:
    from .bintree import TraversalError, reconstruct_binary_tree

    inorder = args.inorder.split()
    postorder = args.postorder.split()
    try:
        tree = reconstruct_binary_tree(inorder, postorder)
    except TraversalError as exc:
        raise DataError(str(exc)) from exc
    print(f"root: {tree.root}")
    for node in tree.inorder():
        left = tree.left.get(node, "-")
        right = tree.right.get(node, "-")
        if left != "-" or right != "-":
            print(f"{node}: left={left} right={right}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import run_suites

    ok = run_suites(n=args.n, trials=args.trials, seed=_seed(args))
    print("all property suites passed" if ok else "property suites FAILED")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
