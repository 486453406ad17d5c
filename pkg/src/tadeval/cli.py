"""Command-line front end.

Every subcommand accepts ``--config FILE``: a JSON object whose keys are the
long option names (dashes or underscores); flags given on the command line
override it.  Exit status is 0 on success, 1 for usage errors and 2 for data
errors.  ``TADEVAL_THREADS`` sets the default worker count for simulations.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analytic, baselines, io, protocols, reporting, synth
from .core import check_lengths, dataset_stats
from .io import DataError, format_number


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_threads() -> int:
    raw = os.environ.get("TADEVAL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"TADEVAL_THREADS must be an integer, got {raw!r}") from None


def _parse_k_grid(text) -> list[float]:
    """``"0:100:10"`` (inclusive range) or ``"0,25,50"``."""
    if isinstance(text, (list, tuple)):
        return [float(k) for k in text]
    text = str(text)
    try:
        if ":" in text:
            lo, hi, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + i * step for i in range(n)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"bad K grid {text!r}; use start:stop:step or a comma list") from None


def _parse_candidates(text):
    if text in (None, "unique"):
        return "unique"
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--candidates must be 'unique' or an integer, got {text!r}") from None


def _protocol(args) -> protocols.ProtocolConfig:
    try:
        proto = protocols.parse_protocol(args.protocol)
        if proto is protocols.Protocol.PA_PERCENT_K and args.k is None:
            raise UsageError("--protocol pak needs --k")
        k = float(args.k) if args.k is not None else 0.0
        return protocols.ProtocolConfig(proto, k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _print_kv(pairs, out):
    for key, value in pairs:
        if isinstance(value, float):
            value = format_number(value)
        print(f"{key}: {value}", file=out)


def _mean_std(values) -> str:
    v = np.asarray(values, dtype=np.float64)
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return f"{format_number(float(v.mean()))} ± {format_number(std)}"


def _load_scores_labels(args):
    _need(args, "scores", "labels")
    s = io.load_scores(args.scores)
    y = io.load_labels(args.labels)
    if s.size != y.size:
        raise DataError(f"{args.scores} has {s.size} rows but {args.labels} has {y.size}")
    return s, y


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_eval(args, out):
    _need(args, "delta")
    s, y = _load_scores_labels(args)
    m = protocols.evaluate(s, y, float(args.delta), _protocol(args))
    _print_kv([("precision", m.precision), ("recall", m.recall), ("f1", m.f1)], out)


def cmd_sweep(args, out):
    s, y = _load_scores_labels(args)
    res = protocols.sweep_best_f1(s, y, _protocol(args), _parse_candidates(args.candidates))
    if args.out:
        io.write_table(args.out, {
            "threshold": res.thresholds, "precision": res.precision,
            "recall": res.recall, "f1": res.f1,
        })
    best = res.best
    _print_kv([
        ("candidates", len(res)), ("best_threshold", res.best_threshold),
        ("precision", best.precision), ("recall", best.recall), ("f1", best.f1),
    ], out)


def cmd_ksweep(args, out):
    s, y = _load_scores_labels(args)
    grid = _parse_k_grid(args.k)
    delta = None if args.delta in (None, "best") else float(args.delta)
    curve = protocols.k_sweep(s, y, delta, grid, _parse_candidates(args.candidates))
    if args.out:
        io.write_table(args.out, {"k": curve.k_values, "f1": curve.f1_values, "threshold": curve.thresholds})
    for k, f in zip(curve.k_values, curve.f1_values):
        print(f"K={format_number(k)}: f1={format_number(f)}", file=out)
    _print_kv([("auc", curve.auc)], out)


def cmd_roc(args, out):
    s, y = _load_scores_labels(args)
    curves = protocols.roc_pr(s, y)
    if args.out_roc:
        io.write_table(args.out_roc, {"fpr": curves.fpr, "tpr": curves.tpr})
    if args.out_pr:
        io.write_table(args.out_pr, {"recall": curves.recall, "precision": curves.precision})
    _print_kv([("auroc", curves.auroc), ("aupr", curves.aupr)], out)


def _baseline_kwargs(args):
    try:
        return dict(
            wspec=baselines.WindowSpec(int(args.tau), args.alignment),
            nspec=baselines.NormalizationSpec(args.norm),
            mconfig=baselines.RandomModelConfig(int(args.hidden), float(args.sigma)),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _seeds(args) -> list[int]:
    if int(args.repeats) < 1:
        raise UsageError("--repeats must be >= 1")
    return [int(args.seed) + i for i in range(int(args.repeats))]


def cmd_baseline(args, out):
    _need(args, "case", "test")
    test = io.load_series(args.test)
    train = io.load_series(args.train) if args.train else None
    case = baselines.Case(args.case)
    seeds = _seeds(args) if case is not baselines.Case.CASE2 else [int(args.seed)]
    kw = _baseline_kwargs(args)
    runs = {s: baselines.baseline_scores(case, test, seed=s, reference=train, **kw) for s in seeds}
    y = io.load_labels(args.labels) if args.labels else None
    if y is not None:
        check_lengths(runs[seeds[0]], y)
    if args.out:
        if "{seed}" in args.out:
            for s, scores in runs.items():
                io.save_scores(args.out.format(seed=s), scores)
        else:
            io.save_scores(args.out, runs[seeds[0]])
    _print_kv([("case", case.value), ("length", test.T), ("seeds", ",".join(map(str, seeds)))], out)
    if y is not None:
        f1 = [protocols.sweep_best_f1(r, y, protocols.ProtocolConfig.point()).best_f1 for r in runs.values()]
        f1_pa = [protocols.sweep_best_f1(r, y, protocols.ProtocolConfig.pa()).best_f1 for r in runs.values()]
        print(f"f1: {_mean_std(f1)}", file=out)
        print(f"f1_pa: {_mean_std(f1_pa)}", file=out)


def cmd_analytic(args, out):
    _need(args, "gamma", "L")
    gamma, L = float(args.gamma), int(args.L)
    try:
        if args.delta is not None:
            p = analytic.AnalyticParams(gamma, L, float(args.delta))
            _print_kv([
                ("recall", analytic.expected_recall_pa(p)),
                ("precision", analytic.expected_precision_pa(p, args.form)),
                ("f1", analytic.expected_f1_pa(p)),
            ], out)
            return
        grid = np.linspace(0.0, 1.0, int(args.grid))
        curve = analytic.expected_f1_pa_curve(gamma, L, grid, args.form)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        io.write_table(args.out, {
            "delta": curve.deltas, "precision": curve.precision,
            "recall": curve.recall, "f1_pa": curve.f1,
        })
    _print_kv([("max_f1_pa", curve.max_f1), ("best_delta", curve.best_delta)], out)


def cmd_simulate(args, out):
    _need(args, "delta")
    if args.layout_labels:
        y = io.load_labels(args.layout_labels)
        layout = analytic.SegmentLayout(protocols.extract_segments(y))
    else:
        _need(args, "gamma", "L")
        try:
            layout = analytic.SegmentLayout.single(float(args.gamma), int(args.L))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    config = _protocol(args)
    reports = [
        analytic.monte_carlo_pa(layout, float(args.delta), int(args.trials), s, config, n_jobs=_default_threads())
        for s in _seeds(args)
    ]
    _print_kv([("T", layout.total_length_T), ("gamma", layout.gamma), ("segments", layout.segments.M)], out)
    for field in ("pooled_precision", "pooled_recall", "pooled_f1", "mean_precision", "mean_recall", "mean_f1_pa"):
        print(f"{field}: {_mean_std([getattr(r, field) for r in reports])}", file=out)
    lengths = layout.lengths
    if lengths.size and config.protocol is protocols.Protocol.PA:
        _print_kv([
            ("closed_form_recall", analytic.expected_recall_layout(lengths, float(args.delta))),
            ("closed_form_precision", analytic.expected_precision_layout(layout, float(args.delta))),
        ], out)


def _parse_injection(text: str) -> synth.InjectionSpec:
    """``kind:start:end[:channels[:magnitude[:density]]]``, channels separated by ``+``."""
    parts = text.split(":")
    if len(parts) < 3:
        raise UsageError(f"bad injection {text!r}; expected kind:start:end[:ch+ch[:mag[:density]]]")
    try:
        channels = tuple(int(c) for c in parts[3].split("+")) if len(parts) > 3 else (0,)
        return synth.InjectionSpec(
            parts[0], int(parts[1]), int(parts[2]), channels,
            float(parts[4]) if len(parts) > 4 else 5.0,
            float(parts[5]) if len(parts) > 5 else 1.0,
        )
    except ValueError as exc:
        raise UsageError(f"bad injection {text!r}: {exc}") from None


def cmd_synth(args, out):
    _need(args, "out_dir")
    outputs = []
    for seed in _seeds(args):
        try:
            if args.preset == "point":
                spec = synth.point_anomaly_spec(test_length=int(args.T) // 2, N=int(args.N), seed=seed)
            else:
                spec = synth.SynthSpec(
                    T=int(args.T), N=int(args.N), base_signal=args.base, noise_std=float(args.noise),
                    seed=seed, injections=tuple(_parse_injection(s) for s in args.inject or ()),
                )
            outputs.append((seed, synth.generate(spec)))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    for seed, (train, test, labels) in outputs:
        d = Path(args.out_dir) if len(outputs) == 1 else Path(args.out_dir) / f"seed_{seed}"
        io.save_series(d / "train.csv", train)
        io.save_series(d / "test.csv", test)
        io.save_labels(d / "labels.csv", labels)
        st = dataset_stats(labels)
        _print_kv([("dir", str(d)), ("gamma", st.anomaly_ratio_gamma), ("segments", st.segment_count)], out)


def cmd_stats(args, out):
    _need(args, "labels")
    y = io.load_labels(args.labels)
    st = dataset_stats(y)
    lengths = st.segment_lengths
    _print_kv([
        ("length", y.size),
        ("gamma", st.anomaly_ratio_gamma),
        ("segments", st.segment_count),
        ("mean_segment_length", st.mean_segment_length),
        ("min_segment_length", min(lengths) if lengths else 0),
        ("max_segment_length", max(lengths) if lengths else 0),
    ], out)


def cmd_correlate(args, out):
    if args.table:
        data = io.load_table(args.table)
        if data.shape[1] != 2:
            raise DataError(f"{args.table}: expected two columns, found {data.shape[1]}")
        x, y = data[:, 0], data[:, 1]
    else:
        _need(args, "x", "y")
        x, y = io.load_scores(args.x), io.load_scores(args.y)
    if x.size != y.size:
        raise DataError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise DataError("need at least 2 points")
    rep = reporting.correlate(x, y)
    _print_kv([
        ("n", rep.n_points),
        ("pearson_pcc", rep.pearson_pcc if rep.pearson_pcc is not None else "undefined (" + rep.errors["pearson"] + ")"),
        ("kendall_krc", rep.kendall_krc if rep.kendall_krc is not None else "undefined (" + rep.errors["kendall"] + ")"),
    ], out)


def _named_paths(items) -> dict[str, str]:
    named = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"expected NAME=PATH, got {item!r}")
        name, path = item.split("=", 1)
        named[name] = path
    return named


def cmd_report(args, out):
    _need(args, "labels")
    y = io.load_labels(args.labels)
    methods = {name: [io.load_scores(p)] for name, p in _named_paths(args.method).items()}
    base = {}
    for case in ("case1", "case2", "case3"):
        path = getattr(args, case)
        if path:
            base[case] = [io.load_scores(path)]
    if args.test:
        test = io.load_series(args.test)
        train = io.load_series(args.train) if args.train else None
        kw = _baseline_kwargs(args)
        for case in ("case1", "case2", "case3"):
            if case in base:
                continue
            seeds = [int(args.seed)] if case == "case2" else _seeds(args)
            base[case] = [baselines.baseline_scores(case, test, seed=s, reference=train, **kw) for s in seeds]
    if "case1" not in base:
        base["case1"] = [baselines.case1_random_scores(y.size, int(args.seed) + i) for i in range(int(args.repeats))]
    for runs in list(methods.values()) + list(base.values()):
        for r in runs:
            if r.size != y.size:
                raise DataError(f"score series of length {r.size} does not match {y.size} labels")
    report = reporting.build_report(methods, base, y, _parse_k_grid(args.k))
    md, csv_text = report.to_markdown(), report.to_csv()
    if args.out_md:
        io.write_text(args.out_md, md)
    if args.out_csv:
        io.write_text(args.out_csv, csv_text)
    print(md, file=out, end="")


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _scores_labels_opts(p):
    p.add_argument("--scores", help="single-column score CSV")
    p.add_argument("--labels", help="single-column 0/1 label CSV")


def _protocol_opts(p):
    p.add_argument("--protocol", default="point", help="point | pa | pak")
    p.add_argument("--k", default=None, help="PA%%K threshold K in [0, 100]")


def _baseline_opts(p):
    p.add_argument("--tau", type=int, default=baselines.DEFAULT_TAU)
    p.add_argument("--alignment", default="last", choices=["last", "first"])
    p.add_argument("--norm", default="minmax", choices=["minmax", "zscore", "none"])
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--sigma", type=float, default=baselines.DEFAULT_SIGMA)


def _random_opts(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tadeval", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="JSON file with option values")
        p.set_defaults(func=func)
        return p

    p = add("eval", cmd_eval, "metrics for one protocol and threshold")
    _scores_labels_opts(p)
    _protocol_opts(p)
    p.add_argument("--delta", type=float)

    p = add("sweep", cmd_sweep, "best-F1 threshold sweep")
    _scores_labels_opts(p)
    _protocol_opts(p)
    p.add_argument("--candidates", default="unique", help="'unique' or number of quantiles")
    p.add_argument("--out", help="per-threshold curve CSV")

    p = add("ksweep", cmd_ksweep, "F1 under PA%%K as K varies, with its AUC")
    _scores_labels_opts(p)
    p.add_argument("--k", default="0:100:10", help="start:stop:step or comma list")
    p.add_argument("--delta", default="best", help="fixed threshold, or 'best' per K")
    p.add_argument("--candidates", default="unique")
    p.add_argument("--out", help="curve CSV")

    p = add("roc", cmd_roc, "AUROC and AUPR")
    _scores_labels_opts(p)
    p.add_argument("--out-roc")
    p.add_argument("--out-pr")

    p = add("baseline", cmd_baseline, "emit Case 1/2/3 baseline scores")
    p.add_argument("--case", choices=["case1", "case2", "case3"])
    p.add_argument("--test", help="test series CSV")
    p.add_argument("--train", help="training series CSV (normalisation reference)")
    p.add_argument("--labels", help="optional labels to score the baseline")
    p.add_argument("--out", help="score CSV; '{seed}' in the name writes one file per seed")
    _baseline_opts(p)
    _random_opts(p)

    p = add("analytic", cmd_analytic, "closed-form PA metrics for random scores")
    p.add_argument("--gamma", type=float)
    p.add_argument("--L", type=int, help="segment length")
    p.add_argument("--delta", type=float, help="single threshold instead of a curve")
    p.add_argument("--grid", type=int, default=10001, help="points on the threshold grid")
    p.add_argument("--form", default="bayes", choices=["bayes", "printed"])
    p.add_argument("--out", help="curve CSV")

    p = add("simulate", cmd_simulate, "Monte Carlo PA metrics for random scores")
    p.add_argument("--gamma", type=float)
    p.add_argument("--L", type=int)
    p.add_argument("--layout-labels", help="label CSV defining the segment layout")
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--protocol", default=None)
    p.add_argument("--k", default=None)
    _random_opts(p)

    p = add("synth", cmd_synth, "generate a labelled synthetic dataset")
    p.add_argument("--T", type=int, default=20000, help="total length (train + test)")
    p.add_argument("--N", type=int, default=5)
    p.add_argument("--base", default="sine_mix", choices=["sine_mix", "random_walk"])
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--preset", choices=["point"], help="ready-made point-anomaly layout")
    p.add_argument("--inject", action="append", help="kind:start:end[:ch+ch[:magnitude[:density]]]")
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)

    p = add("stats", cmd_stats, "anomaly ratio and segment statistics")
    p.add_argument("--labels")

    p = add("correlate", cmd_correlate, "Pearson and Kendall tau-b correlation")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--table", help="two-column CSV instead of --x/--y")

    p = add("report", cmd_report, "Markdown/CSV table of methods against baselines")
    p.add_argument("--labels")
    p.add_argument("--method", action="append", help="NAME=PATH of a score CSV (repeatable)")
    p.add_argument("--case1")
    p.add_argument("--case2")
    p.add_argument("--case3")
    p.add_argument("--test", help="test series; baselines not given as files are computed from it")
    p.add_argument("--train")
    p.add_argument("--k", default="0:100:10")
    p.add_argument("--out-md")
    p.add_argument("--out-csv")
    _baseline_opts(p)
    _random_opts(p)
    return parser


def _apply_config(parser, argv):
    """Parse once to find the subcommand and config, then reparse with config defaults."""
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("tadeval: a subcommand is required (see --help)")
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise DataError(f"{args.config}: no such file") from None
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(config, dict):
            raise DataError(f"{args.config}: expected a JSON object")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        defaults = {}
        for key, value in config.items():
            dest = key.lstrip("-").replace("-", "_")
            if dest not in known or dest in ("config", "func", "help"):
                raise UsageError(f"{args.config}: unknown option {key!r} for '{args.command}'")
            defaults[dest] = value
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    # simulate defaults to PA unless a protocol was chosen explicitly
    if args.command == "simulate" and args.protocol is None:
        args.protocol = "pa"
    return args


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
