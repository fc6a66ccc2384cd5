"""Command-line entry point: ``isounit <command> ...``.

Exit status is 0 on success, 2 on I/O errors and 3 on validation or data
errors. Outputs are written to a temp file and renamed into place, so a
failed command leaves no partial files behind.
"""
import argparse
import json
import sys
from dataclasses import dataclass, fields
from typing import Optional, Tuple

import numpy as np

from . import harness, lengthreg, metrics, quantize, schedule, units
from ._io import atomic_open, read_lines
from .errors import EmptyInput, FormatError, InvalidSpec, IsoUnitError, LengthMismatch

EXIT_OK = 0
EXIT_IO = 2
EXIT_DATA = 3


@dataclass(frozen=True)
class RunConfig:
    k: Optional[int] = None
    max_iters: int = 100
    seed: int = 0
    threads: int = 1
    lc_thresholds: Tuple[float, ...] = metrics.DEFAULT_LC_THRESHOLDS
    policy: str = "one_to_one"
    mode: str = "bounded"
    vocab_size: Optional[int] = None
    n_ref: Optional[int] = None

    @classmethod
    def from_mapping(cls, obj):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise InvalidSpec(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**{k: v for k, v in obj.items() if v is not None})
        cfg.validate()
        return cfg

    def validate(self):
        if self.k is not None and self.k < 1:
            raise InvalidSpec("k must be >= 1")
        if self.max_iters < 1:
            raise InvalidSpec("max_iters must be >= 1")
        if self.seed < 0:
            raise InvalidSpec("seed must be >= 0")
        if self.threads < 1:
            raise InvalidSpec("threads must be >= 1")
        if not self.lc_thresholds or any(t <= 0 for t in self.lc_thresholds):
            raise InvalidSpec("lc thresholds must be positive")
        if self.policy not in schedule.POLICIES:
            raise InvalidSpec(f"policy must be one of {', '.join(schedule.POLICIES)}")
        if self.mode not in lengthreg.MODES:
            raise InvalidSpec(f"mode must be one of {', '.join(lengthreg.MODES)}")
        if self.vocab_size is not None and self.vocab_size < 1:
            raise InvalidSpec("vocab_size must be >= 1")
        if self.n_ref is not None and self.n_ref < 1:
            raise InvalidSpec("n_ref must be >= 1")


def _config(args, **overrides):
    base = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
        if not isinstance(base, dict):
            raise InvalidSpec("config file must hold a JSON object")
    base.update({k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "seed", None) is not None:
        base["seed"] = args.seed
    return RunConfig.from_mapping(base)


def _say(args, text):
    if not args.quiet:
        print(text)


def _thresholds(text):
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {text!r}") from None
    return tuple(int(v) if v.is_integer() else v for v in vals)


def _read_int_column(path):
    out = []
    for lineno, line in enumerate(read_lines(path), 1):
        try:
            out.append(int(line))
        except ValueError:
            raise FormatError(f"{path} line {lineno}: expected one integer") from None
    return np.array(out, dtype=np.int64)


# -- commands --


def cmd_quantize(args):
    cfg = _config(args, k=args.k, max_iters=args.iters, threads=args.threads)
    if cfg.k is None:
        raise InvalidSpec("--k is required")
    x = quantize.read_features(args.features)
    cb = quantize.kmeans_fit(x, cfg.k, cfg.max_iters, cfg.seed, cfg.threads)
    z = quantize.quantize_assign(cb, x, cfg.threads)
    quantize.write_codebook(args.codebook, cb)
    units.write_unit_file(args.units, [z.units])
    _say(args, f"wcss {cb.wcss!r}")
    return EXIT_OK


def cmd_dedup(args):
    cfg = _config(args, vocab_size=args.vocab_size)
    seqs = units.read_unit_file(args.units, cfg.vocab_size)
    pairs = [units.collapse(z) for z in seqs]
    units.write_unit_file(args.out_units, [u for u, _ in pairs])
    lengthreg.write_duration_file(args.out_durations, [d for _, d in pairs])
    return EXIT_OK


def _aligned(a, b, what):
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} unit lines but {len(b)} {what} lines")


def cmd_expand(args):
    cfg = _config(args, vocab_size=args.vocab_size)
    seqs = units.read_unit_file(args.units, cfg.vocab_size)
    durs = lengthreg.read_duration_file(args.durations)
    _aligned(seqs, durs, "duration")
    out = []
    for lineno, (u, d) in enumerate(zip(seqs, durs), 1):
        try:
            out.append(units.expand(u, d).units)
        except IsoUnitError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    units.write_unit_file(args.out, out)
    return EXIT_OK


def cmd_fit_durations(args):
    cfg = _config(args, vocab_size=args.vocab_size)
    seqs = units.read_unit_file(args.units, cfg.vocab_size)
    durs = lengthreg.read_duration_file(args.durations)
    _aligned(seqs, durs, "duration")
    table = lengthreg.fit_duration_table(list(zip(seqs, durs)))
    with atomic_open(args.out) as fh:
        json.dump(table.to_json(), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def cmd_regulate(args):
    cfg = _config(args, mode=args.mode, vocab_size=args.vocab_size)
    seqs = units.read_unit_file(args.units, cfg.vocab_size)
    for lineno, u in enumerate(seqs, 1):
        if u.size == 0:
            raise EmptyInput(f"line {lineno}: empty unit sequence")
    if args.table:
        with open(args.table, encoding="utf-8") as fh:
            table = lengthreg.DurationTable.from_json(json.load(fh))
        predicted = [lengthreg.predict_durations(table, u) for u in seqs]
    else:
        predicted = lengthreg.read_duration_file(args.durations)
        _aligned(seqs, predicted, "duration")
        for lineno, (u, d) in enumerate(zip(seqs, predicted), 1):
            if u.shape[0] != d.shape[0]:
                raise LengthMismatch(f"line {lineno}: {u.shape[0]} units but {d.shape[0]} durations")
    if cfg.mode == "unbounded":
        targets = np.ones(len(seqs), np.int64)
    else:
        if not args.targets:
            raise InvalidSpec(f"--targets is required in {cfg.mode} mode")
        targets = _read_int_column(args.targets)
        _aligned(seqs, targets, "target")
    values, offsets = lengthreg.pack(predicted)
    try:
        out = lengthreg.regulate_batch(values, offsets, targets, cfg.mode)
    except IsoUnitError as exc:
        seq = getattr(exc, "sequence", None)
        if seq is None:
            raise
        raise type(exc)(f"line {seq + 1}: {exc}") from None
    lengthreg.write_duration_file(args.out, lengthreg.unpack(out, offsets))
    return EXIT_OK


def cmd_timeline(args):
    cfg = _config(args, policy=args.policy, n_ref=args.n_ref, vocab_size=args.vocab_size)
    seqs = units.read_unit_file(args.units, cfg.vocab_size)
    lines = []
    for lineno, z in enumerate(seqs, 1):
        try:
            tl, _ = schedule.schedule(units.ContinuousUnitSeq(z), cfg.n_ref, cfg.policy)
        except IsoUnitError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        lines.append(tl.to_json())
    with atomic_open(args.out) as fh:
        for line in lines:
            fh.write(line + "\n")
    return EXIT_OK


def cmd_report(args):
    cfg = _config(args, lc_thresholds=args.lc)
    pred = [line.split(" ") if line else [] for line in read_lines(args.pred)]
    if args.ref:
        ref = [line.split(" ") if line else [] for line in read_lines(args.ref)]
        ref_len = np.array([len(r) for r in ref], dtype=np.int64)
    else:
        ref = None
        ref_len = _read_int_column(args.ref_lengths)
    if len(pred) != len(ref_len):
        raise LengthMismatch(f"{len(pred)} predicted lines but {len(ref_len)} reference lines")
    pred_len = np.array([len(p) for p in pred], dtype=np.int64)
    n_video = -(-pred_len // 2)
    n_ref = -(-ref_len // 2)
    rep = metrics.evaluate_lengths(
        np.stack([pred_len, ref_len], axis=1), cfg.lc_thresholds,
        bleu=metrics.corpus_bleu(pred, ref) if ref is not None else None,
        repeats=int(np.maximum(n_video - n_ref, 0).sum()),
    )
    with atomic_open(args.out) as fh:
        fh.write(rep.to_json() + "\n")
    _say(args, rep.to_json())
    return EXIT_OK


def cmd_simulate(args):
    with open(args.spec, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise InvalidSpec("spec must be a JSON object")
    if args.seed is not None:
        raw = {**raw, "seed": args.seed}
    spec = harness.SyntheticSpec.from_mapping(raw)
    modes = [m for m in args.modes.split(",") if m]
    bad = [m for m in modes if m not in lengthreg.MODES]
    if bad or not modes:
        raise InvalidSpec(f"unknown modes: {', '.join(bad) or '(none)'}")
    corpus = harness.generate_corpus(spec)
    reports = harness.compare_modes(corpus, modes, args.lc, with_bleu=args.bleu)
    text = metrics.reports_to_json(reports)
    with atomic_open(args.out) as fh:
        fh.write(text + "\n")
    _say(args, text)
    return EXIT_OK


# -- parser --


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="random seed (default 0)")
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="print nothing on success")
    parser.add_argument("--config", default=default, help="JSON file with RunConfig values")


class _Parser(argparse.ArgumentParser):
    # exit status 2 is reserved for I/O failures; bad arguments are validation errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DATA, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="isounit", description="Discrete-unit length regulation toolkit")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("quantize", cmd_quantize, "fit a k-means codebook and quantize features")
    p.add_argument("--features", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--codebook", required=True, help="output codebook file")
    p.add_argument("--units", required=True, help="output unit file")

    p = add("dedup", cmd_dedup, "collapse frame-level units into units + durations")
    p.add_argument("--units", required=True)
    p.add_argument("--out-units", required=True)
    p.add_argument("--out-durations", required=True)
    p.add_argument("--vocab-size", type=int)

    p = add("expand", cmd_expand, "expand units + integer durations to frame level")
    p.add_argument("--units", required=True)
    p.add_argument("--durations", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-size", type=int)

    p = add("fit-durations", cmd_fit_durations, "fit a mean-duration table")
    p.add_argument("--units", required=True)
    p.add_argument("--durations", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-size", type=int)

    p = add("regulate", cmd_regulate, "turn predicted durations into integer frame counts")
    p.add_argument("--units", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--durations")
    src.add_argument("--table")
    p.add_argument("--targets")
    p.add_argument("--mode", choices=lengthreg.MODES)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-size", type=int)

    p = add("timeline", cmd_timeline, "build audio/video timelines (JSON lines)")
    p.add_argument("--units", required=True)
    p.add_argument("--policy", choices=schedule.POLICIES)
    p.add_argument("--n-ref", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-size", type=int)

    p = add("report", cmd_report, "length ratio, length compliance and BLEU")
    p.add_argument("--pred", required=True)
    ref = p.add_mutually_exclusive_group(required=True)
    ref.add_argument("--ref")
    ref.add_argument("--ref-lengths")
    p.add_argument("--lc", type=_thresholds)
    p.add_argument("--out", required=True)

    p = add("simulate", cmd_simulate, "run the regulation modes on a synthetic corpus")
    p.add_argument("--spec", required=True)
    p.add_argument("--modes", default=",".join(lengthreg.MODES))
    p.add_argument("--lc", type=_thresholds, default=metrics.DEFAULT_LC_THRESHOLDS)
    p.add_argument("--bleu", action="store_true")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except (IsoUnitError, json.JSONDecodeError, TypeError) as exc:
        print(f"isounit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"isounit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
