"""Posterior belief over the message set and exact one-step drift quantities.

Message indices are 0-based throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sedvlf._kernels import neumaier_sum
from sedvlf.channel import ChannelSpec, channel_stats, kl_divergence


class BeliefError(ValueError):
    pass


class NormalizerUnderflow(ArithmeticError):
    """The Bayes normalizer left the representable range."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class BeliefState:
    rho: np.ndarray
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rho", _frozen(self.rho))

    @property
    def M(self) -> int:
        return self.rho.shape[0]

    def argmax(self) -> int:
        """Most likely message, lowest index on ties."""
        return int(np.argmax(self.rho))


@dataclass(frozen=True, eq=False)
class Partition:
    """Two-way split of the message set with cached subset masses.

    ``member[i]`` is the channel input assigned to message ``i``.
    """

    member: np.ndarray
    pi0: float
    pi1: float

    @classmethod
    def from_member(cls, member, rho) -> "Partition":
        member = np.asarray(member, dtype=np.int8).copy()
        member.flags.writeable = False
        rho = np.asarray(rho, dtype=np.float64)
        return cls(member, math.fsum(rho[member == 0]), math.fsum(rho[member == 1]))

    @classmethod
    def from_sets(cls, s1, rho) -> "Partition":
        member = np.zeros(len(rho), dtype=np.int8)
        member[list(s1)] = 1
        return cls.from_member(member, rho)

    @property
    def s0(self) -> np.ndarray:
        return np.flatnonzero(self.member == 0)

    @property
    def s1(self) -> np.ndarray:
        return np.flatnonzero(self.member == 1)

    def symbol(self, i: int) -> int:
        return int(self.member[i])

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.member, other.member)

    def __repr__(self):
        return f"Partition(s0={self.s0.tolist()}, s1={self.s1.tolist()})"


def init_belief(M: int) -> BeliefState:
    """Uniform prior over ``M`` messages."""
    if M < 1:
        raise BeliefError(f"message set must be nonempty, got M={M}")
    return BeliefState(np.full(M, 1.0 / M), 0)


def bayes_update(b: BeliefState, part: Partition, y: int, spec: ChannelSpec) -> BeliefState:
    """Posterior after observing output ``y`` when message i sent ``part.member[i]``."""
    if y not in (0, 1):
        raise BeliefError(f"output must be 0 or 1, got {y!r}")
    lik = np.where(part.member == 0, spec.likelihood(y, 0), spec.likelihood(y, 1))
    w = b.rho * lik
    Z = neumaier_sum(w)
    if not (Z > 0.0) or not math.isfinite(Z):
        raise NormalizerUnderflow(f"normalizer {Z!r} at t={b.t}")
    return BeliefState(w / Z, b.t + 1)


def llr(rho_i: float) -> float:
    """Log-likelihood ratio log2(rho / (1 - rho)); +-inf at the endpoints."""
    if not (0.0 <= rho_i <= 1.0):
        raise BeliefError(f"llr: {rho_i!r} is not a probability")
    if rho_i == 0.0:
        return -math.inf
    if rho_i == 1.0:
        return math.inf
    return math.log2(rho_i) - math.log2(1.0 - rho_i)


def llr_clamped(rho_i: float) -> tuple[float, bool]:
    """Finite LLR with the input clamped to [1e-300, 1 - 1e-16].

    The flag reports whether clamping was needed.
    """
    r = min(max(rho_i, 1e-300), 1.0 - 1e-16)
    return llr(r), r != rho_i


def extrinsic_probs(b: BeliefState, part: Partition, i: int) -> tuple[float, float]:
    """Masses of the two input groups with message ``i`` removed and renormalized.

    Returns ``(own, other)``: the group of ``i``'s own symbol first.
    """
    r = float(b.rho[i])
    if r >= 1.0:
        raise BeliefError("extrinsic probabilities undefined when rho_i = 1")
    x = part.symbol(i)
    own_mass = part.pi0 if x == 0 else part.pi1
    other_mass = part.pi1 if x == 0 else part.pi0
    own = max(own_mass - r, 0.0) / (1.0 - r)
    return own, other_mass / (1.0 - r)


def expected_drift(b: BeliefState, part: Partition, i: int, spec: ChannelSpec) -> float:
    """Exact E[U_i(t+1) - U_i(t) | theta = i] as a KL divergence.

    The reference distribution is the output law induced by the extrinsic
    input distribution of message ``i``.
    """
    own, other = extrinsic_probs(b, part, i)
    x = part.symbol(i)
    P_own = spec.output_dist(x)
    P_other = spec.output_dist(1 - x)
    mixture = own * P_own + other * P_other
    return kl_divergence(P_own, mixture)


def max_step(spec: ChannelSpec) -> float:
    """Uniform bound C2 on the one-step change of any message's LLR."""
    return channel_stats(spec).C2


def expected_drift_all(b: BeliefState, part: Partition, spec: ChannelSpec) -> np.ndarray:
    """``expected_drift`` for every message at once (vectorized)."""
    rho = b.rho
    if np.any(rho >= 1.0):
        raise BeliefError("extrinsic probabilities undefined when rho_i = 1")
    x = part.member.astype(np.int64)
    own_mass = np.where(x == 0, part.pi0, part.pi1)
    own = np.maximum(own_mass - rho, 0.0) / (1.0 - rho)
    other = 1.0 - own
    W = np.array([spec.output_dist(0), spec.output_dist(1)])  # W[x, y]
    P = W[x]
    mix = own[:, None] * P + other[:, None] * W[1 - x]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log2(P / mix), 0.0)
    return terms.sum(axis=1)
