"""Full transmission sessions and Monte Carlo ensembles.

A session sends a message theta drawn uniformly from M = 2^k messages over a
regularized BAC with noiseless feedback. At each step the SED encoder
partitions the messages, theta's group symbol is sent, both ends apply the
same Bayes update, and transmission stops once some posterior reaches
1 - epsilon. The decoder outputs the argmax posterior.

Randomness: trial ``i`` of a run with seed ``s`` owns the Philox stream with
key ``s`` and counter offset ``i``. Results are therefore independent of the
number of worker processes and of scheduling order.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from sedvlf import _kernels
from sedvlf.belief import NormalizerUnderflow, bayes_update, init_belief
from sedvlf.channel import ChannelSpec, ChannelStats, channel_stats, regularize, sample_output
from sedvlf.sed_encoder import (Algorithm, EncoderConfig, SEDViolation, encode_step,
                                original_move_cap)


class CapExceeded(RuntimeError):
    """A session hit ``max_steps`` before stopping (should never happen)."""

    def __init__(self, msg, count=1):
        super().__init__(msg)
        self.count = count


@dataclass(frozen=True)
class SessionConfig:
    spec: ChannelSpec
    k: int
    epsilon: float
    encoder: EncoderConfig
    max_steps: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if not (0.0 < self.epsilon < 0.5):
            raise ValueError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    @classmethod
    def create(cls, p0: float, p1: float, k: int, epsilon: float,
               algorithm: str = "greedy", max_steps: int | None = None) -> "SessionConfig":
        """Regularize the channel and fill in the encoder and the step cap."""
        spec = regularize(p0, p1)
        stats = channel_stats(spec)
        if max_steps is None:
            max_steps = default_max_steps(2 ** k, epsilon, stats)
        return cls(spec, k, epsilon, EncoderConfig.from_stats(stats, algorithm), max_steps)

    @property
    def M(self) -> int:
        return 2 ** self.k

    @property
    def stats(self) -> ChannelStats:
        return channel_stats(self.spec)


def default_max_steps(M: int, epsilon: float, stats: ChannelStats) -> int:
    lead = math.log2(M) / stats.C + math.log2((1 - epsilon) / epsilon) / stats.C1
    return int(math.ceil(100 * lead))


@dataclass(frozen=True)
class TrialRecord:
    tau: int
    theta: int
    theta_hat: int
    nu: int | None
    fallbacks: int

    @property
    def correct(self) -> bool:
        return self.theta == self.theta_hat


@dataclass(frozen=True)
class SimSummary:
    trials: int
    M: int
    avg_tau: float
    tau_stderr: float
    errors: int
    pe_hat: float
    pe_ci_lo: float
    pe_ci_hi: float
    rate: float
    avg_nu: float
    nu_stderr: float
    avg_confirm: float
    confirm_stderr: float
    avg_fallbacks: float
    nu_unset: int = 0
    anomalies: int = 0


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Per-trial substream: Philox keyed by the run seed, offset by trial index."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index, 0]))


def _initial_block(cfg: SessionConfig) -> int:
    st = cfg.stats
    lead = math.log2(cfg.M) / st.C + math.log2((1 - cfg.epsilon) / cfg.epsilon) / st.C1
    return min(cfg.max_steps, int(4 * lead) + 64)


def _kernel_args(cfg: SessionConfig):
    enc = cfg.encoder
    algo = _kernels.GREEDY if enc.algorithm is Algorithm.GREEDY else _kernels.ORIGINAL
    return (cfg.spec.p0, cfg.spec.p1, 1.0 - cfg.epsilon, enc.pi1_star, enc.lam, algo)


def run_trial(cfg: SessionConfig, theta: int, rng: np.random.Generator) -> TrialRecord:
    """Simulate one session for message ``theta`` (0-based).

    Channel noise is one uniform draw from ``rng`` per channel use.

    Raises:
        CapExceeded: if ``cfg.max_steps`` uses pass without stopping.
    """
    M = cfg.M
    if not (0 <= theta < M):
        raise ValueError(f"theta={theta} outside [0, {M})")
    args = _kernel_args(cfg)
    uniforms = rng.random(_initial_block(cfg))
    while True:
        status, tau, theta_hat, nu, fallbacks = _kernels.trial_kernel(
            M, theta, *args, uniforms, cfg.max_steps, original_move_cap(M))
        if status != _kernels.NEED_UNIFORMS:
            break
        # the stream continues where the buffer ended, so rerunning on the
        # longer prefix reproduces the same path
        uniforms = np.concatenate([uniforms, rng.random(uniforms.shape[0])])
    if status == _kernels.CAP_EXCEEDED:
        raise CapExceeded(f"session exceeded max_steps={cfg.max_steps}")
    if status == _kernels.UNDERFLOW:
        raise NormalizerUnderflow(f"posterior normalizer underflow at t={tau}")
    if status == _kernels.PARTITION_FAILED:
        raise SEDViolation("original SED algorithm exceeded its move cap")
    return TrialRecord(int(tau), theta, int(theta_hat), None if nu < 0 else int(nu), int(fallbacks))


def run_trial_reference(cfg: SessionConfig, theta: int, rng: np.random.Generator) -> TrialRecord:
    """Slow session built from the public belief/encoder/channel operations.

    Re-sorts and re-partitions from scratch each step; used to cross-check the
    compiled kernel.
    """
    b = init_belief(cfg.M)
    threshold = 1.0 - cfg.epsilon
    nu = 0 if b.rho[theta] >= 0.5 else None
    confirming = nu is not None
    fallbacks = 0
    while b.rho.max() < threshold:
        if b.t >= cfg.max_steps:
            raise CapExceeded(f"session exceeded max_steps={cfg.max_steps}")
        part = encode_step(b, cfg.encoder)
        y = sample_output(cfg.spec, part.symbol(theta), rng)
        b = bayes_update(b, part, y, cfg.spec)
        if b.rho[theta] >= 0.5:
            if nu is None:
                nu = b.t
            confirming = True
        elif confirming:
            fallbacks += 1
            confirming = False
    return TrialRecord(b.t, theta, b.argmax(), nu, fallbacks)


def _run_chunk(cfg: SessionConfig, seed: int, start: int, stop: int):
    n = stop - start
    tau = np.zeros(n, dtype=np.int64)
    ok = np.zeros(n, dtype=bool)
    nu = np.full(n, -1, dtype=np.int64)
    fb = np.zeros(n, dtype=np.int64)
    capped = np.zeros(n, dtype=bool)
    for j, i in enumerate(range(start, stop)):
        rng = trial_rng(seed, i)
        theta = int(rng.integers(cfg.M))
        try:
            rec = run_trial(cfg, theta, rng)
        except CapExceeded:
            capped[j] = True
            continue
        tau[j] = rec.tau
        ok[j] = rec.correct
        nu[j] = -1 if rec.nu is None else rec.nu
        fb[j] = rec.fallbacks
    return start, tau, ok, nu, fb, capped


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get("SED_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def _mean_stderr(x: np.ndarray) -> tuple[float, float]:
    n = x.shape[0]
    mean = math.fsum(x.tolist()) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum(((x - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)


def monte_carlo(cfg: SessionConfig, trials: int, seed: int, workers: int | None = None,
                chunk: int = 2048) -> SimSummary:
    """Run ``trials`` independent sessions and aggregate them.

    Identical (cfg, trials, seed) give an identical summary for any ``workers``.

    Raises:
        CapExceeded: if any session hit the step cap; ``count`` holds how many.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = resolve_workers(workers)
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    tau = np.zeros(trials, dtype=np.int64)
    ok = np.zeros(trials, dtype=bool)
    nu = np.zeros(trials, dtype=np.int64)
    fb = np.zeros(trials, dtype=np.int64)
    capped = np.zeros(trials, dtype=bool)

    def place(res):
        start, t_, o_, n_, f_, c_ = res
        sl = slice(start, start + t_.shape[0])
        tau[sl], ok[sl], nu[sl], fb[sl], capped[sl] = t_, o_, n_, f_, c_

    if workers == 1 or len(bounds) == 1:
        for s, e in bounds:
            place(_run_chunk(cfg, seed, s, e))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, cfg, seed, s, e) for s, e in bounds]
            for f in futures:
                place(f.result())

    anomalies = int(capped.sum())
    if anomalies:
        raise CapExceeded(f"{anomalies} of {trials} sessions exceeded max_steps", anomalies)
    return summarize(cfg.M, tau, ok, nu, fb)


def summarize(M: int, tau, ok, nu, fb) -> SimSummary:
    """Aggregate per-trial arrays; ``nu = -1`` marks sessions where the true
    posterior never reached 1/2 (those count their whole length as communication)."""
    n = tau.shape[0]
    tau = np.asarray(tau, dtype=np.int64)
    nu = np.asarray(nu, dtype=np.int64)
    unset = nu < 0
    nu_eff = np.where(unset, tau, nu)
    avg_tau, se_tau = _mean_stderr(tau.astype(np.float64))
    avg_nu, se_nu = _mean_stderr(nu_eff.astype(np.float64))
    # confirmation length from integer totals so that avg_nu + avg_confirm == avg_tau
    avg_confirm = (int(tau.sum()) - int(nu_eff.sum())) / n
    _, se_conf = _mean_stderr((tau - nu_eff).astype(np.float64))
    errors = int(n - np.count_nonzero(ok))
    ci = binomtest(errors, n).proportion_ci(confidence_level=0.95, method="wilson")
    rate = math.log2(M) / avg_tau if avg_tau > 0 else 0.0
    return SimSummary(
        trials=n, M=M, avg_tau=avg_tau, tau_stderr=se_tau, errors=errors,
        pe_hat=errors / n, pe_ci_lo=float(ci.low), pe_ci_hi=float(ci.high), rate=rate,
        avg_nu=avg_nu, nu_stderr=se_nu, avg_confirm=avg_confirm, confirm_stderr=se_conf,
        avg_fallbacks=math.fsum(np.asarray(fb, dtype=np.float64).tolist()) / n,
        nu_unset=int(unset.sum()),
    )


@dataclass
class SweepRow:
    cfg: SessionConfig
    summary: SimSummary | None = None
    bounds: object | None = None
    error: str | None = None
    runtime_s: float = 0.0
    extra: dict = field(default_factory=dict)


def sweep(cfgs, trials: int, seed: int, workers: int | None = None) -> list[SweepRow]:
    """Simulate each config and join the bound values; one row per config, in order.

    A failing row records its error message and the sweep moves on.
    """
    from sedvlf.bounds import compute_bounds

    cfgs = list(cfgs)
    if not cfgs:
        raise ValueError("sweep needs at least one config")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for cfg in cfgs:
        row = SweepRow(cfg)
        t0 = time.perf_counter()
        try:
            row.summary = monte_carlo(cfg, trials, seed, workers)
            row.bounds = compute_bounds(cfg.M, cfg.epsilon, cfg.spec)
        except (CapExceeded, ValueError, ArithmeticError, RuntimeError) as exc:
            row.error = f"{type(exc).__name__}: {exc}"
        row.runtime_s = time.perf_counter() - t0
        rows.append(row)
    return rows
