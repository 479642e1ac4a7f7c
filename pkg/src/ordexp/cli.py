"""Command line interface: ``ordexp {constants,estimate,simulate,gpc,gof}``.

Every run echoes its resolved configuration to stderr (lines starting with
``#``) before printing results to stdout. Errors are reported as
``error[<category>]: <message>`` with a category-specific exit status.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import _accel, mcrisk, sigma1, sigma2, svgchart
from .errors import IOFailure, OrdexpError, ValidationError
from .kernel import constants
from .losses import STANDARD_LOSSES, parse_losses
from .model import (
    EstimationConfig,
    SufficientStats,
    ks_test,
    mle_rate,
    proschan_dataset,
    read_dataset_csv,
    summarize,
)
from .sigma1 import EstimateReport

EXIT_CODES = {
    "error": 1,
    "validation": 3,
    "degenerate": 4,
    "domain": 5,
    "numeric": 6,
    "bracket": 6,
    "convergence": 6,
    "io": 7,
}
JSON_SCHEMA = "ordexp.estimate/1"
SIGMA1_TABLE = ("delta01", "delta11", "delta12", "delta13", "delta14", "bz1", "pitman1")
SIGMA2_TABLE = ("delta02", "delta21", "delta22", "deltaD", "bz2", "pitman2")
BOOL_FLAGS = {"json"}


def _fmt(v, precision: int) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.{precision}g}"
    return str(v)


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _eta_grid(text: str) -> tuple:
    """``a,b,c`` or ``start:stop:count``."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be start:stop:count")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
        if count < 1:
            raise argparse.ArgumentTypeError("grid count must be positive")
        if count == 1:
            return (start,)
        step = (stop - start) / (count - 1)
        return tuple(round(start + i * step, 12) for i in range(count))
    return _float_list(text)


def _loss_list(text: str) -> tuple:
    try:
        return tuple(parse_losses(text))
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _name_list(text: str) -> tuple:
    return tuple(x.strip() for x in text.split(",") if x.strip())


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ordexp", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value file mirroring long flags; flags on the command line win")
    p.add_argument("--precision", type=int, default=6, help="significant digits in text/CSV output")
    p.add_argument("--backend", choices=("numba", "numpy"), help="kernel backend (default from environment)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="print all multiplier constants")
    c.add_argument("--p1", type=int, default=6)
    c.add_argument("--p2", type=int, default=6)
    c.add_argument("--k", type=float, default=2.0)
    c.add_argument("--loss", type=_loss_list, default=STANDARD_LOSSES)
    c.add_argument("--json", action="store_true")

    e = sub.add_parser("estimate", help="sigma1^k and sigma2^k estimates for a dataset")
    e.add_argument("--input", help="CSV with header population,value (default: bundled air-conditioning data)")
    e.add_argument("--k", type=float, default=2.0)
    e.add_argument("--loss", type=_loss_list, default=STANDARD_LOSSES)
    e.add_argument("--format", choices=("text", "csv", "json"), default="text")

    s = sub.add_parser("simulate", help="Monte Carlo risk and RRI over an eta grid")
    _sim_args(s, reps=90_000)
    s.add_argument("--estimators", type=_name_list, default=mcrisk.DEFAULT_ESTIMATORS)
    s.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    s.add_argument("--svg", help="also write an RRI line chart here")

    g = sub.add_parser("gpc", help="Monte Carlo Pitman-closeness probabilities")
    _sim_args(g, reps=50_000)
    g.add_argument("--pair", action="append", type=_pair, dest="pairs",
                   help="ESTIMATOR:BASELINE, repeatable (default: every Pitman pair)")
    g.add_argument("--format", choices=("text", "csv"), default="text")

    k = sub.add_parser("gof", help="KS goodness of fit to a shifted exponential")
    k.add_argument("--input", help="CSV with header population,value (default: bundled data)")
    k.add_argument("--population", type=int, choices=(1, 2), help="default: both")
    k.add_argument("--location", type=float, help="default: sample minimum")
    k.add_argument("--rate", type=float, help="default: p / sum(x - min)")
    k.add_argument("--alpha", type=float, default=0.05)
    return p


def _sim_args(sp, reps):
    sp.add_argument("--p1", type=int, default=4)
    sp.add_argument("--p2", type=int, default=5)
    sp.add_argument("--mu1", type=float, default=0.0)
    sp.add_argument("--mu2", type=float, default=0.1)
    sp.add_argument("--sigma2", type=float, default=1.0)
    sp.add_argument("--k", type=float, default=2.0)
    sp.add_argument("--loss", type=_loss_list, default=STANDARD_LOSSES)
    sp.add_argument("--eta", type=_eta_grid, default=mcrisk.default_eta_grid(),
                    help="comma list or start:stop:count (default 0.05:1:20)")
    sp.add_argument("--reps", type=int, default=reps)
    sp.add_argument("--seed", type=int, default=20240611)
    sp.add_argument("--threads", type=int, help="worker threads (default ORDEXP_THREADS or CPU count)")


def _pair(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"pair must be ESTIMATOR:BASELINE, got {text!r}")
    return tuple(parts)


def read_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser, argv, config: dict) -> argparse.Namespace:
    """Re-parse with config values installed as subcommand defaults."""
    first = parser.parse_args(argv)
    subparser = parser._subparsers._group_actions[0].choices[first.command]
    known = {a.dest: a for a in subparser._actions}
    top = {a.dest: a for a in parser._actions}
    sub_defaults, top_defaults = {}, {}
    for key, value in config.items():
        if key in BOOL_FLAGS and key in known:
            if value.lower() not in ("1", "0", "true", "false", "yes", "no"):
                raise ValidationError(f"config: {key} must be a boolean")
            sub_defaults[key] = value.lower() in ("1", "true", "yes")
        elif key in ("pair", "pairs") and "pairs" in known:
            try:
                sub_defaults["pairs"] = [_pair(x.strip()) for x in value.split(",") if x.strip()]
            except argparse.ArgumentTypeError as exc:
                raise ValidationError(f"config: {exc}") from None
        elif key in known and key != "help":
            sub_defaults[key] = value
        elif key in top and key not in ("help", "config", "command"):
            top_defaults[key] = value
        else:
            raise ValidationError(f"config: unknown key {key!r} for '{first.command}'")
    subparser.set_defaults(**sub_defaults)
    parser.set_defaults(**top_defaults)
    args = parser.parse_args(argv)
    # argparse converts string defaults through type=, but not for the top level bools
    if isinstance(args.verbose, str):
        args.verbose = args.verbose.lower() in ("1", "true", "yes")
    return args


# ---------------------------------------------------------------- echo block

def _echo(args, extra: dict | None = None) -> None:
    items = {k: v for k, v in vars(args).items() if k not in ("func",)}
    if extra:
        items.update(extra)
    lines = [f"# ordexp {args.command}"]
    for key in sorted(items):
        v = items[key]
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"#   {key} = {v}")
    print("\n".join(lines), file=sys.stderr)


# ---------------------------------------------------------------- subcommands

def cmd_constants(args, out) -> None:
    rows = []
    for loss in args.loss:
        c = constants(args.p1, args.p2, args.k, loss)
        rows.append((loss.label, c.as_dict()))
    if args.json:
        doc = {"p1": args.p1, "p2": args.p2, "k": args.k,
               "constants": {label: d for label, d in rows}}
        out.write(json.dumps(doc, indent=2) + "\n")
        return
    for label, d in rows:
        out.write(f"loss = {label}, p1 = {args.p1}, p2 = {args.p2}, k = {args.k:g}\n")
        width = max(len(n) for n in d)
        for name, v in d.items():
            out.write(f"  {name:<{width}}  {_fmt(v, args.precision)}\n")


def _load_data(path):
    return read_dataset_csv(path) if path else proschan_dataset()


def compute_estimates(stats: SufficientStats, k: float, losses) -> list[dict]:
    results = []
    for loss in losses:
        cfg = EstimationConfig(k, loss)
        results.append({
            "loss": loss.label,
            "sigma1": sigma1.table(stats, cfg, SIGMA1_TABLE),
            "sigma2": sigma2.table(stats, cfg, SIGMA2_TABLE),
        })
    return results


def estimates_to_json(stats: SufficientStats, k: float, rates: tuple, results) -> dict:
    """Document layout (``schema = ordexp.estimate/1``)::

        {"schema", "k",
         "stats": {"x1", "x2", "s1", "s2", "p1", "p2"},
         "mle_rate": {"pop1", "pop2"},
         "results": [{"loss", "sigma1": [report...], "sigma2": [report...]}]}

    with report = {"estimator", "target", "loss", "k", "multiplier", "value",
    "truncation_active"}. Floats are written at full precision.
    """
    return {
        "schema": JSON_SCHEMA,
        "k": k,
        "stats": {"x1": stats.x1, "x2": stats.x2, "s1": stats.s1, "s2": stats.s2,
                  "p1": stats.p1, "p2": stats.p2},
        "mle_rate": {"pop1": rates[0], "pop2": rates[1]},
        "results": [
            {"loss": r["loss"],
             "sigma1": [e.as_dict() for e in r["sigma1"]],
             "sigma2": [e.as_dict() for e in r["sigma2"]]}
            for r in results
        ],
    }


def estimates_from_json(doc) -> tuple:
    """Inverse of :func:`estimates_to_json`: (stats, k, rates, results)."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if doc.get("schema") != JSON_SCHEMA:
        raise ValidationError(f"unsupported schema {doc.get('schema')!r}")
    s = doc["stats"]
    stats = SufficientStats(s["x1"], s["x2"], s["s1"], s["s2"], s["p1"], s["p2"])
    losses = {loss.label: loss for loss in parse_losses(",".join(r["loss"] for r in doc["results"]))}
    results = []
    for r in doc["results"]:
        loss = losses[r["loss"]]
        entry = {"loss": r["loss"]}
        for target in ("sigma1", "sigma2"):
            entry[target] = [
                EstimateReport(e["estimator"], e["multiplier"], e["value"], e["truncation_active"],
                               loss, e["k"], e["target"])
                for e in r[target]
            ]
        results.append(entry)
    rates = (doc["mle_rate"]["pop1"], doc["mle_rate"]["pop2"])
    return stats, doc["k"], rates, results


def cmd_estimate(args, out) -> None:
    data = _load_data(args.input)
    stats = summarize(data)
    rates = (mle_rate(data.pop1), mle_rate(data.pop2))
    results = compute_estimates(stats, args.k, args.loss)
    prec = args.precision
    if args.format == "json":
        out.write(json.dumps(estimates_to_json(stats, args.k, rates, results), indent=2) + "\n")
        return
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("target", "loss", "k", "estimator", "multiplier", "value", "truncation_active"))
        for r in results:
            for target in ("sigma1", "sigma2"):
                for e in r[target]:
                    w.writerow((target, r["loss"], _fmt(args.k, prec), e.estimator_id,
                                _fmt(e.multiplier, prec), _fmt(e.value, prec),
                                str(e.truncation_active).lower()))
        return
    out.write(f"p1 = {stats.p1}, p2 = {stats.p2}; X1 = {_fmt(stats.x1, prec)}, "
              f"X2 = {_fmt(stats.x2, prec)}, S1 = {_fmt(stats.s1, prec)}, S2 = {_fmt(stats.s2, prec)}\n")
    out.write(f"fitted rates p/S: population 1 = {_fmt(rates[0], prec)}, "
              f"population 2 = {_fmt(rates[1], prec)}\n")
    for r in results:
        for target, label in (("sigma1", "sigma1"), ("sigma2", "sigma2")):
            out.write(f"\n{label}^{args.k:g} under {r['loss']} loss\n")
            out.write(f"  {'estimator':<10} {'multiplier':>14} {'estimate':>14}  truncated\n")
            for e in r[target]:
                out.write(f"  {e.estimator_id:<10} {_fmt(e.multiplier, prec):>14} "
                          f"{_fmt(e.value, prec):>14}  {_fmt(e.truncation_active, prec)}\n")


def _sim_config(args, estimators) -> mcrisk.SimConfig:
    return mcrisk.SimConfig(
        p1=args.p1, p2=args.p2, mu1=args.mu1, mu2=args.mu2, sigma2=args.sigma2,
        eta_grid=args.eta, k=args.k, losses=args.loss, estimators=estimators,
        reps=args.reps, seed=args.seed,
    )


def _threads(args):
    if args.threads is not None and args.threads < 1:
        raise ValidationError("--threads must be at least 1")
    return args.threads if args.threads is not None else mcrisk.default_threads()


def _write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror}") from None


def cmd_simulate(args, out) -> None:
    cfg = _sim_config(args, args.estimators)
    rows = mcrisk.simulate_risk(cfg, threads=_threads(args))
    text = mcrisk.rows_to_csv(rows)
    if args.out == "-":
        out.write(text)
    else:
        _write_text(args.out, text)
        print(f"# wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    if args.svg:
        title = f"p1={cfg.p1}, p2={cfg.p2}, mu1={cfg.mu1:g}, mu2={cfg.mu2:g}, reps={cfg.reps}"
        _write_text(args.svg, svgchart.render(svgchart.rri_panels(rows), title=title))
        print(f"# wrote chart to {args.svg}", file=sys.stderr)


def cmd_gpc(args, out) -> None:
    pairs = args.pairs or mcrisk.GPC_PAIRS
    ids = tuple(dict.fromkeys(e for pair in pairs for e in pair))
    cfg = _sim_config(args, ids)
    threads = _threads(args)
    prec = args.precision
    rows = [r for a, b in pairs for r in mcrisk.gpc_estimate(cfg, a, b, threads=threads)]
    header = ("eta", "loss", "estimator", "baseline", "probability", "se", "reps", "closer")
    body = [(_fmt(r.eta, prec), r.loss, r.estimator, r.baseline, _fmt(r.probability, prec),
             _fmt(r.se, prec), str(r.reps),
             "yes" if r.probability >= 0.5 - 2 * r.se else "no") for r in rows]
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)
        return
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(header)]
    out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    for b in body:
        out.write("  ".join(c.ljust(w) for c, w in zip(b, widths)).rstrip() + "\n")


def cmd_gof(args, out) -> None:
    data = _load_data(args.input)
    pops = [args.population] if args.population else [1, 2]
    if len(pops) > 1 and (args.location is not None or args.rate is not None):
        raise ValidationError("--location/--rate need --population")
    prec = args.precision
    for i in pops:
        sample = data.pop1 if i == 1 else data.pop2
        loc = args.location if args.location is not None else min(sample)
        rate = args.rate if args.rate is not None else mle_rate(sample)
        d, p = ks_test(sample, loc, rate)
        verdict = "reject" if p < args.alpha else "fail to reject"
        out.write(f"population {i}: n = {len(sample)}, location = {_fmt(loc, prec)}, "
                  f"rate = {_fmt(rate, prec)}, D = {_fmt(d, prec)}, p = {_fmt(p, prec)}, "
                  f"{verdict} at alpha = {args.alpha:g}\n")


COMMANDS = {"constants": cmd_constants, "estimate": cmd_estimate, "simulate": cmd_simulate,
            "gpc": cmd_gpc, "gof": cmd_gof}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, read_config(args.config))
        if args.precision < 1:
            raise ValidationError("--precision must be at least 1")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        if args.backend:
            if args.backend == "numba" and not _accel.HAVE_NUMBA:
                raise ValidationError("numba backend requested but numba is disabled or missing")
            _accel.set_backend(args.backend)
        _echo(args, {"backend": _accel.get_backend()})
        COMMANDS[args.command](args, out)
    except OrdexpError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]
    return 0


def run(argv) -> tuple:
    """(exit status, stdout text) for in-process use and tests."""
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()
