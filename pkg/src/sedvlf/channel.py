"""Binary asymmetric channel: closed-form statistics, capacity oracle, sampling.

Conventions: ``p0 = P(Y=1 | X=0)`` and ``p1 = P(Y=0 | X=1)``. All logarithms
are base 2, so entropies, divergences and capacities are in bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from sedvlf._optim import golden_max


class ChannelDomainError(ValueError):
    """Raised for channel parameters outside the supported domain."""


class Relabel(str, enum.Enum):
    NONE = "none"
    SWAP_INPUT = "swap_input"
    SWAP_OUTPUT = "swap_output"
    SWAP_BOTH = "swap_both"


def _apply_relabel(p0: float, p1: float, relabel: Relabel) -> tuple[float, float]:
    # Channel matrix rows are inputs, columns outputs:
    #   [[1 - p0, p0], [p1, 1 - p1]]
    # Each map is an involution.
    if relabel is Relabel.NONE:
        return p0, p1
    if relabel is Relabel.SWAP_INPUT:
        return 1.0 - p1, 1.0 - p0
    if relabel is Relabel.SWAP_OUTPUT:
        return 1.0 - p0, 1.0 - p1
    return p1, p0


def is_regularized(p0: float, p1: float) -> bool:
    return 0.0 < p0 < 0.5 and p0 <= p1 <= 1.0 - p0


@dataclass(frozen=True)
class ChannelSpec:
    """A BAC in regularized labeling plus the relabel that produced it."""

    p0: float
    p1: float
    relabel: Relabel = Relabel.NONE

    def __post_init__(self):
        for name in ("p0", "p1"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ChannelDomainError(f"{name}={v!r} is not a probability")
        object.__setattr__(self, "relabel", Relabel(self.relabel))

    @property
    def original(self) -> tuple[float, float]:
        """Crossover pair in the caller's original labeling."""
        return _apply_relabel(self.p0, self.p1, self.relabel)

    @property
    def is_bsc(self) -> bool:
        return self.p0 == self.p1

    def likelihood(self, y: int, x: int) -> float:
        """P(Y=y | X=x)."""
        if x == 0:
            return self.p0 if y == 1 else 1.0 - self.p0
        return self.p1 if y == 0 else 1.0 - self.p1

    def output_dist(self, x: int) -> np.ndarray:
        """Row ``[P(Y=0|x), P(Y=1|x)]`` of the channel matrix."""
        if x == 0:
            return np.array([1.0 - self.p0, self.p0])
        return np.array([self.p1, 1.0 - self.p1])


@dataclass(frozen=True)
class ChannelStats:
    C: float
    C1: float
    C2: float
    pi0_star: float
    pi1_star: float
    lam: float
    lambda1: float
    z: float


def binary_entropy(p: float) -> float:
    """Binary entropy in bits, with ``0 log 0 = 0``."""
    if not (0.0 <= p <= 1.0):
        raise ChannelDomainError(f"binary_entropy: p={p!r} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def kl_divergence(P, Q) -> float:
    """KL divergence D(P||Q) in bits between two distributions on {0, 1}.

    Uses ``0 log(0/a) = 0`` and ``b log(b/0) = inf`` for ``b != 0``; an
    infinite divergence is returned as ``math.inf``.
    """
    total = 0.0
    for a, b in zip(P, Q):
        a, b = float(a), float(b)
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        total += a * math.log2(a / b)
    return total


def regularize(p0: float, p1: float) -> ChannelSpec:
    """Relabel inputs and/or outputs so that the pair lands in the regularized region.

    Raises:
        ChannelDomainError: if a probability is outside (0, 1) or ``p0 + p1 == 1``
            (zero capacity; the capacity-achieving input is undefined).
    """
    for name, v in (("p0", p0), ("p1", p1)):
        if not (0.0 < v < 1.0):
            raise ChannelDomainError(f"{name}={v!r} must lie in (0, 1)")
    if p0 + p1 == 1.0:
        raise ChannelDomainError(f"BAC({p0}, {p1}) has zero capacity (p0 + p1 = 1)")
    for relabel in Relabel:
        q0, q1 = _apply_relabel(p0, p1, relabel)
        if is_regularized(q0, q1):
            return ChannelSpec(q0, q1, relabel)
    # Unreachable for p0 + p1 != 1; kept as a guard against rounding at the boundary.
    raise ChannelDomainError(f"cannot regularize BAC({p0}, {p1})")


def _check_regularized(spec: ChannelSpec) -> None:
    if not is_regularized(spec.p0, spec.p1):
        raise ChannelDomainError(f"BAC({spec.p0}, {spec.p1}) is not regularized")
    if 1.0 - spec.p0 - spec.p1 == 0.0:
        raise ChannelDomainError("1 - p0 - p1 = 0: zero-capacity channel")


def channel_stats(spec: ChannelSpec) -> ChannelStats:
    """Capacity, capacity-achieving input, C1, C2 and derived ratios in closed form."""
    _check_regularized(spec)
    p0, p1 = spec.p0, spec.p1
    d = 1.0 - p0 - p1
    h0, h1 = binary_entropy(p0), binary_entropy(p1)
    z = 2.0 ** ((h0 - h1) / d)
    C = p0 * h1 / d - (1.0 - p1) * h0 / d + math.log2(1.0 + z)
    if p0 == p1:
        # symmetric: the closed form is off by an ulp, pushing lambda above 1
        pi0 = pi1 = 0.5
    else:
        pi0 = (1.0 - p1 * (1.0 + z)) / (d * (1.0 + z))
        pi1 = ((1.0 - p0) * (1.0 + z) - 1.0) / (d * (1.0 + z))
    C1 = kl_divergence(spec.output_dist(1), spec.output_dist(0))
    C2 = math.log2((1.0 - p1) / p0)
    # min over (y, x1, x2) of P(y|x1) / P(y|x2)
    W = np.array([spec.output_dist(0), spec.output_dist(1)])
    lambda1 = float(min(W[:, y].min() / W[:, y].max() for y in (0, 1)))
    return ChannelStats(
        C=C, C1=C1, C2=C2, pi0_star=pi0, pi1_star=pi1,
        lam=min(pi1 / pi0, 1.0), lambda1=lambda1, z=z,
    )


def mutual_information(pi0: float, spec: ChannelSpec) -> float:
    """I(X;Y) in bits for input distribution (pi0, 1 - pi0)."""
    p0, p1 = spec.p0, spec.p1
    py0 = pi0 * (1.0 - p0) + (1.0 - pi0) * p1
    return binary_entropy(py0) - pi0 * binary_entropy(p0) - (1.0 - pi0) * binary_entropy(p1)


def capacity_oracle(spec: ChannelSpec, grid: int = 64) -> float:
    """Capacity by direct numerical maximization of the mutual information.

    Independent of the closed form: a coarse grid locates the peak of the
    strictly concave I(pi0), then golden-section search shrinks the bracket
    below 1e-12.
    """
    _check_regularized(spec)
    lo, hi = 1e-12, 1.0 - 1e-12
    xs = np.linspace(lo, hi, grid + 1)
    vals = [mutual_information(float(x), spec) for x in xs]
    j = int(np.argmax(vals))
    a, b = float(xs[max(j - 1, 0)]), float(xs[min(j + 1, grid)])
    _, best = golden_max(lambda x: mutual_information(x, spec), a, b, tol=1e-12)
    return max(best, vals[j])


def sample_output(spec: ChannelSpec, x: int, rng: np.random.Generator) -> int:
    """Draw one channel output for input ``x``."""
    u = rng.random()
    if x == 0:
        return 1 if u < spec.p0 else 0
    return 0 if u < spec.p1 else 1
