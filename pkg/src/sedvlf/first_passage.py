"""Expected first-passage time of the confirmation-phase Markov chain.

States S_0, ..., S_{n-1} lead to the absorbing S_n. From S_j the chain moves
forward with probability q and backward with probability p = 1 - q. At S_0 a
backward step is a fallback loop that returns to S_0 after an expected Delta0
steps. Every other transition costs one step.

Three independent routes compute v_0, the expected time from S_0 to S_n: a
closed form, a direct tridiagonal solve of the node equations, and Monte
Carlo simulation of the chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sedvlf import bounds
from sedvlf.channel import binary_entropy


class SingularSystem(ArithmeticError):
    pass


@dataclass(frozen=True)
class FirstPassageProblem:
    n: int
    p: float
    delta0: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not (0.0 < self.p < 0.5):
            raise ValueError(f"p must lie in (0, 1/2), got {self.p}")
        if self.delta0 < 1:
            raise ValueError(f"delta0 must be >= 1, got {self.delta0}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def fixed_point(self) -> float:
        """Loop weight of the plain random walk, 2q / (1 - 2p)."""
        return 2 * self.q / (1 - 2 * self.p)

    @classmethod
    def for_bsc(cls, p: float, epsilon: float, delta0: float | None = None):
        """Chain for BSC(p) at target error epsilon.

        ``n`` counts the C2-wide LLR intervals up to the stopping threshold.
        Without ``delta0`` the u-free upper bound on the fallback loop is used.
        """
        q = 1 - p
        C = 1 - binary_entropy(p)
        C2 = math.log2(q / p)
        n = math.ceil(math.log2((1 - epsilon) / epsilon) / C2)
        if delta0 is None:
            delta0 = 1 + (math.log2(2 * q) / q + C2) / C
        return cls(n, p, delta0)


def v0_closed_form(prob: FirstPassageProblem) -> float:
    n, p, q = prob.n, prob.p, prob.q
    return n / (1 - 2 * p) + p / (1 - 2 * p) * (1 - (p / q) ** n) * (prob.delta0 - prob.fixed_point)


def delta_recursion(prob: FirstPassageProblem, iterate: bool = False) -> float:
    """Loop weight Delta_{n-1} seen from S_{n-1}.

    With ``iterate`` the recursion Delta_i = 2 + (p/q) Delta_{i-1} is applied
    n - 1 times instead of using its closed form.
    """
    r = prob.p / prob.q
    if iterate:
        d = prob.delta0
        for _ in range(prob.n - 1):
            d = 2 + r * d
        return d
    return r ** (prob.n - 1) * prob.delta0 + prob.fixed_point * (1 - r ** (prob.n - 1))


def node_solve(prob: FirstPassageProblem) -> np.ndarray:
    """Solve the node equations for v_0..v_{n-1} by tridiagonal elimination.

    Row j reads  -p v_{j-1} + v_j - q v_{j+1} = 1  for 1 <= j <= n-2,
    with v_n = 0 at the absorbing end and, at S_0,
    (1 - p) v_0 - q v_1 = q + p Delta0.
    """
    n, p, q = prob.n, prob.p, prob.q
    if n > 10_000:
        raise ValueError("n too large for the dense-free solver budget")
    lower = np.full(n, -p)
    diag = np.ones(n)
    upper = np.full(n, -q)
    rhs = np.ones(n)
    diag[0] = 1 - p
    rhs[0] = q + p * prob.delta0
    lower[0] = 0.0
    upper[n - 1] = 0.0
    # Thomas algorithm
    c = np.empty(n)
    d = np.empty(n)
    piv = diag[0]
    if abs(piv) < 1e-14:
        raise SingularSystem("zero pivot at row 0")
    c[0] = upper[0] / piv
    d[0] = rhs[0] / piv
    for j in range(1, n):
        piv = diag[j] - lower[j] * c[j - 1]
        if abs(piv) < 1e-14:
            raise SingularSystem(f"zero pivot at row {j}")
        c[j] = upper[j] / piv
        d[j] = (rhs[j] - lower[j] * d[j - 1]) / piv
    v = np.empty(n)
    v[n - 1] = d[n - 1]
    for j in range(n - 2, -1, -1):
        v[j] = d[j] - c[j] * v[j + 1]
    return v


def confirmation_bound(p: float, epsilon: float, M: int | None = None) -> float:
    """Upper bound on the expected confirmation time on BSC(p), fallbacks included.

    ``M`` does not enter the bound; it is accepted for call-site symmetry.
    """
    return bounds.confirmation_phase_bound(p, epsilon)


def mc_first_passage(prob: FirstPassageProblem, trials: int, seed: int,
                     chunk: int = 1 << 16) -> tuple[float, float]:
    """Monte Carlo estimate of v_0 and its standard error.

    Each fallback loop at S_0 is charged its expected cost Delta0, which keeps
    the mean exact. Chunk ``c`` draws from its own Philox substream.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n, p = prob.n, prob.p
    totals = np.empty(trials)
    for c, start in enumerate(range(0, trials, chunk)):
        m = min(chunk, trials - start)
        rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, c, 0]))
        state = np.zeros(m, dtype=np.int64)
        cost = np.zeros(m)
        active = np.arange(m)
        while active.size:
            back = rng.random(active.size) < p
            s = state[active]
            at_start = s == 0
            cost[active] += np.where(back & at_start, prob.delta0, 1.0)
            s = np.where(back, np.where(at_start, 0, s - 1), s + 1)
            state[active] = s
            active = active[s < n]
        totals[start:start + m] = cost
    mean = math.fsum(totals.tolist()) / trials
    se = float(totals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, se
