"""Small-enough-difference (SED) partitioning of the message set.

For a regularized BAC with capacity-achieving input (pi0*, pi1*) and
``lam = pi1* / pi0*``, a partition (S0, S1) is SED-valid when

    -min_{i in S1} rho_i <= lam * pi0 - pi1 <= lam * min_{i in S0} rho_i

(the minimum over an empty set is +inf). Once the top posterior reaches pi1*
the encoder switches to the exclusive assignment S1 = {argmax}.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass

import numpy as np

from sedvlf.belief import BeliefState, Partition
from sedvlf.channel import ChannelStats

SLACK = 1e-12


class Algorithm(str, enum.Enum):
    ORIGINAL = "original"
    GREEDY = "greedy"


class PreconditionError(ValueError):
    """Partitioning requested on a state whose top posterior is >= pi1*."""


class SEDViolation(RuntimeError):
    """A partitioning routine produced an invalid partition (a bug signal)."""


@dataclass(frozen=True)
class EncoderConfig:
    algorithm: Algorithm
    lam: float
    pi1_star: float

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if not (0.0 < self.lam <= 1.0):
            raise ValueError(f"lambda must lie in (0, 1], got {self.lam}")

    @classmethod
    def from_stats(cls, stats: ChannelStats, algorithm="greedy") -> "EncoderConfig":
        return cls(Algorithm(algorithm), stats.lam, stats.pi1_star)


def original_move_cap(M: int) -> int:
    """Safety cap on moves of the iterative partitioner; typical states need a few M."""
    return 4 * M * max(1, math.ceil(math.log2(M))) if M > 1 else 4


def descending_order(rho: np.ndarray) -> np.ndarray:
    """Indices by decreasing posterior, lowest index first among ties."""
    return np.argsort(-np.asarray(rho), kind="stable")


def check_sed_condition(b: BeliefState, part: Partition, lam: float) -> bool:
    rho = b.rho
    s0, s1 = part.member == 0, part.member == 1
    min0 = float(rho[s0].min()) if s0.any() else math.inf
    min1 = float(rho[s1].min()) if s1.any() else math.inf
    delta = lam * part.pi0 - part.pi1
    return -min1 - SLACK <= delta <= lam * min0 + SLACK


def objective_f(s0, b: BeliefState, lam: float) -> float:
    """Weighted imbalance of the split (s0, complement); minimized by SED-valid splits."""
    mask = np.zeros(b.M, dtype=bool)
    mask[list(s0)] = True
    pi0 = math.fsum(b.rho[mask])
    pi1 = math.fsum(b.rho[~mask])
    if pi1 >= lam * pi0:
        return lam * (pi1 - lam * pi0)
    return lam * pi0 - pi1


def _require_communication(b: BeliefState, pi1_star: float | None) -> None:
    if pi1_star is not None and b.rho.max() >= pi1_star:
        raise PreconditionError(
            f"max posterior {b.rho.max():.6g} >= pi1* = {pi1_star:.6g}")


def sed_partition_greedy(b: BeliefState, lam: float, pi1_star: float | None = None) -> Partition:
    """Visit messages by decreasing posterior; each goes to S0 iff pi1 >= lam * pi0.

    ``pi1_star``, when given, enforces the communication-phase precondition.
    """
    _require_communication(b, pi1_star)
    rho = b.rho
    order = descending_order(rho)
    member = np.empty(b.M, dtype=np.int8)
    member[order[0]] = 0
    pi0, pi1 = float(rho[order[0]]), 0.0
    for j in order[1:]:
        if pi1 >= lam * pi0:
            member[j] = 0
            pi0 += rho[j]
        else:
            member[j] = 1
            pi1 += rho[j]
    return Partition.from_member(member, rho)


def sed_partition_original(b: BeliefState, lam: float, pi1_star: float | None = None,
                           return_moves: bool = False):
    """Start from S0 = everything and move minimum-posterior messages across.

    Terminates once the SED condition holds. ``original_move_cap(M)`` moves
    guard against floating-point cycling.
    """
    _require_communication(b, pi1_star)
    rho = b.rho
    M = b.M
    heap0 = [(float(rho[i]), i) for i in range(M)]
    heapq.heapify(heap0)
    heap1: list[tuple[float, int]] = []
    pi0, pi1 = 1.0, 0.0
    delta = lam
    min0, min1 = heap0[0][0], math.inf
    moves = 0
    cap = original_move_cap(M)
    while delta < -min1 or delta > lam * min0:
        if delta < -min1:
            r, j = heapq.heappop(heap1)
            heapq.heappush(heap0, (r, j))
            pi0 += r
            pi1 -= r
        else:
            r, j = heapq.heappop(heap0)
            heapq.heappush(heap1, (r, j))
            pi0 -= r
            pi1 += r
        delta = lam * pi0 - pi1
        min0 = heap0[0][0] if heap0 else math.inf
        min1 = heap1[0][0] if heap1 else math.inf
        moves += 1
        if moves > cap:
            raise SEDViolation(f"original algorithm exceeded {cap} moves")
    member = np.zeros(M, dtype=np.int8)
    member[[j for _, j in heap1]] = 1
    part = Partition.from_member(member, rho)
    return (part, moves) if return_moves else part


def exclusive_partition(b: BeliefState) -> Partition:
    """S1 = {argmax rho}, S0 = the rest."""
    return Partition.from_sets([b.argmax()], b.rho)


def encode_step(b: BeliefState, cfg: EncoderConfig) -> Partition:
    top = b.argmax()
    if b.rho[top] >= cfg.pi1_star:
        return exclusive_partition(b)
    if cfg.algorithm is Algorithm.GREEDY:
        part = sed_partition_greedy(b, cfg.lam)
    else:
        part = sed_partition_original(b, cfg.lam)
    if not check_sed_condition(b, part, cfg.lam):
        raise SEDViolation(f"{cfg.algorithm.value} partition fails the SED condition")
    return part
