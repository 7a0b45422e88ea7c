"""Command-line front end.

    sedvlf stats --p0 0.03 --p1 0.22
    sedvlf bounds --p0 0.11 --p1 0.11 --k 1..12 --epsilon 1e-3
    sedvlf simulate --p0 0.11 --p1 0.11 --k 10 --trials 10000 --seed 7
    sedvlf sweep --p0 0.11 --p1 0.11 --k 1..12 --epsilon 1e-3 --trials 100000 --seed 7
    sedvlf firstpassage --n 3 --p 0.1 --delta0 5

Exit status: 0 success, 2 usage error, 3 domain error, 4 anomaly (a session
hit its step cap).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass

from sedvlf import bounds as bnd
from sedvlf import first_passage as fp
from sedvlf.channel import ChannelDomainError, channel_stats, regularize
from sedvlf.session_sim import CapExceeded, SessionConfig, monte_carlo, sweep

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_ANOMALY = 4

SWEEP_COLUMNS = ["k", "M", "epsilon", "trials", "avg_tau", "tau_stderr", "rate", "pe_hat",
                 "pe_ci_hi", "bound_thm1", "bound_cor1", "bound_thm3", "bound_thm6",
                 "converse", "runtime_s"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    command: str
    p0: float | None = None
    p1: float | None = None
    ks: tuple[int, ...] = ()
    epsilon: float = 1e-3
    trials: int = 10_000
    seed: int = 0
    algorithm: str = "greedy"
    output: str | None = None
    format: str = "csv"
    reproducible: bool = False
    workers: int | None = None
    n: int | None = None
    p: float | None = None
    delta0: float | None = None


def parse_k(text: str) -> tuple[int, ...]:
    """``"5"``, ``"1..12"`` or ``"4,8,12"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            ks = tuple(range(int(lo), int(hi) + 1))
        else:
            ks = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k specification {text!r}") from None
    if not ks:
        raise argparse.ArgumentTypeError(f"empty k range {text!r}")
    if min(ks) < 1 or max(ks) > 30:
        raise argparse.ArgumentTypeError("k must lie in [1, 30]")
    return ks


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, int)):
        return str(int(x))
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.6g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sedvlf", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    chan = argparse.ArgumentParser(add_help=False)
    chan.add_argument("--p0", type=float, required=True, help="P(Y=1 | X=0)")
    chan.add_argument("--p1", type=float, required=True, help="P(Y=0 | X=1)")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--output", "-o", help="output file (default: stdout)")
    out.add_argument("--format", choices=["csv", "json"], default="csv")

    code = argparse.ArgumentParser(add_help=False)
    code.add_argument("--k", type=parse_k, required=True, help="message bits: 5, 1..12 or 4,8,12")
    code.add_argument("--epsilon", type=float, default=1e-3)

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--trials", type=int, default=10_000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--algorithm", choices=["greedy", "original"], default="greedy")
    mc.add_argument("--workers", type=int, default=None,
                    help="worker processes (default: $SED_THREADS or CPU count)")

    sub.add_parser("stats", parents=[chan, out], help="channel constants")
    sub.add_parser("bounds", parents=[chan, code, out], help="blocklength bounds per k")
    sub.add_parser("simulate", parents=[chan, code, mc, out], help="Monte Carlo summary per k")
    sw = sub.add_parser("sweep", parents=[chan, code, mc, out],
                        help="simulation joined with bounds, one row per k")
    sw.add_argument("--reproducible", action="store_true",
                    help="leave runtime_s empty so reruns are byte-identical")
    fpp = sub.add_parser("firstpassage", parents=[out], help="closed form, solver and Monte Carlo")
    fpp.add_argument("--n", type=int, required=True)
    fpp.add_argument("--p", type=float, required=True)
    fpp.add_argument("--delta0", type=float, required=True)
    fpp.add_argument("--trials", type=int, default=100_000)
    fpp.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(ns: argparse.Namespace) -> CliConfig:
    cfg = CliConfig(**{k: v for k, v in vars(ns).items()
                       if k in CliConfig.__dataclass_fields__ and k != "ks"},
                    ks=getattr(ns, "k", ()) or ())
    if cfg.command in ("simulate", "sweep", "firstpassage") and cfg.trials < 1:
        raise UsageError("--trials must be >= 1")
    if cfg.workers is not None and cfg.workers < 1:
        raise UsageError("--workers must be >= 1")
    return cfg


def validate(cfg: CliConfig) -> None:
    """Check numeric flags against library preconditions; raises domain errors."""
    if cfg.p0 is not None:
        channel_stats(regularize(cfg.p0, cfg.p1))
    if cfg.command in ("bounds", "simulate", "sweep") and not (0.0 < cfg.epsilon < 0.5):
        raise bnd.BoundDomainError(f"epsilon must lie in (0, 1/2), got {cfg.epsilon}")
    if cfg.command == "firstpassage":
        fp.FirstPassageProblem(cfg.n, cfg.p, cfg.delta0)


def _render(rows: list[dict], columns: list[str], form: str) -> str:
    if form == "json":
        return json.dumps([{c: r.get(c) for c in columns} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def cmd_stats(cfg: CliConfig):
    spec = regularize(cfg.p0, cfg.p1)
    st = channel_stats(spec)
    if cfg.format == "json":
        d = asdict(st)
        d.update(p0=spec.p0, p1=spec.p1, relabel=spec.relabel.value)
        return json.dumps(d, indent=2) + "\n", 0
    lines = [f"channel: BAC({spec.p0:g}, {spec.p1:g}) relabel={spec.relabel.value}"]
    lines += [f"{name}={getattr(st, attr):.4f}" for name, attr in
              (("C", "C"), ("C1", "C1"), ("C2", "C2"), ("pi0*", "pi0_star"),
               ("pi1*", "pi1_star"), ("lambda", "lam"), ("lambda1", "lambda1"))]
    return "\n".join(lines) + "\n", 0


def cmd_bounds(cfg: CliConfig):
    spec = regularize(cfg.p0, cfg.p1)
    cols = ["k", "M", "epsilon", "bound_thm1", "bound_cor1", "bound_thm3", "bound_thm6",
            "converse", "converse_sup", "converse_weak"]
    rows = []
    for k in cfg.ks:
        b = bnd.compute_bounds(2 ** k, cfg.epsilon, spec)
        rows.append(dict(k=k, M=2 ** k, epsilon=cfg.epsilon, bound_thm1=b.thm1,
                         bound_cor1=b.cor1, bound_thm3=b.thm3_bac, bound_thm6=b.thm6_bsc,
                         converse=b.converse_vlf, converse_sup=b.converse_sup,
                         converse_weak=b.converse_weak))
    return _render(rows, cols, cfg.format), 0


def cmd_simulate(cfg: CliConfig):
    cols = ["k", "M", "trials", "avg_tau", "tau_stderr", "errors", "pe_hat", "pe_ci_lo",
            "pe_ci_hi", "rate", "avg_nu", "nu_stderr", "avg_confirm", "confirm_stderr",
            "avg_fallbacks", "nu_unset"]
    rows = []
    for k in cfg.ks:
        sc = SessionConfig.create(cfg.p0, cfg.p1, k, cfg.epsilon, cfg.algorithm)
        s = monte_carlo(sc, cfg.trials, cfg.seed, cfg.workers)
        d = asdict(s)
        d.pop("anomalies")
        rows.append(dict(k=k, **d))
    return _render(rows, cols, cfg.format), 0


def cmd_sweep(cfg: CliConfig):
    cfgs = [SessionConfig.create(cfg.p0, cfg.p1, k, cfg.epsilon, cfg.algorithm) for k in cfg.ks]
    result = sweep(cfgs, cfg.trials, cfg.seed, cfg.workers)
    rows, status = [], 0
    for r in result:
        d = dict(k=r.cfg.k, M=r.cfg.M, epsilon=r.cfg.epsilon, trials=cfg.trials,
                 runtime_s=None if cfg.reproducible else r.runtime_s)
        if r.error is not None:
            print(f"sedvlf: k={r.cfg.k}: {r.error}", file=sys.stderr)
            status = max(status, EXIT_ANOMALY if r.error.startswith("CapExceeded") else EXIT_DOMAIN)
        else:
            s, b = r.summary, r.bounds
            d.update(avg_tau=s.avg_tau, tau_stderr=s.tau_stderr, rate=s.rate, pe_hat=s.pe_hat,
                     pe_ci_hi=s.pe_ci_hi, bound_thm1=b.thm1, bound_cor1=b.cor1,
                     bound_thm3=b.thm3_bac, bound_thm6=b.thm6_bsc, converse=b.converse_vlf)
        rows.append(d)
    return _render(rows, SWEEP_COLUMNS, cfg.format), status


def cmd_firstpassage(cfg: CliConfig):
    prob = fp.FirstPassageProblem(cfg.n, cfg.p, cfg.delta0)
    closed = fp.v0_closed_form(prob)
    solved = float(fp.node_solve(prob)[0])
    mean, se = fp.mc_first_passage(prob, cfg.trials, cfg.seed)
    row = dict(n=cfg.n, p=cfg.p, delta0=cfg.delta0, closed_form=closed, node_solve=solved,
               monte_carlo=mean, mc_stderr=se, trials=cfg.trials)
    return _render([row], list(row), cfg.format), 0


COMMANDS = {"stats": cmd_stats, "bounds": cmd_bounds, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "firstpassage": cmd_firstpassage}


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        cfg = config_from_args(ns)
    except UsageError as exc:
        print(f"sedvlf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        validate(cfg)
        text, status = COMMANDS[cfg.command](cfg)
    except CapExceeded as exc:
        print(f"sedvlf: anomaly: {exc}", file=sys.stderr)
        return EXIT_ANOMALY
    except (ChannelDomainError, bnd.BoundDomainError, ValueError, ArithmeticError) as exc:
        print(f"sedvlf: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    _emit(text, cfg.output)
    return status


def main() -> None:
    sys.exit(run())
