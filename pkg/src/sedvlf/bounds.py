"""Non-asymptotic bounds on the average blocklength E[tau] and the reliability function.

Upper bounds (achievability for the SED encoder):
    bound_thm1     Naghshvar et al.'s bound with the 96 * 2^(2 C2) constant
    bound_cor1     two-stage submartingale bound with the 3 C2^2 constant
    bound_thm3_bac optimized submartingale synthesis, any regularized BAC
    bound_thm6_bsc communication phase + first-passage confirmation, BSC only

Lower bounds (converse for any VLF code): ``converse_sup`` and
``converse_weak``; ``converse_vlf`` reports the larger.
All quantities are in channel uses and are real-valued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sedvlf._optim import golden_max
from sedvlf.channel import ChannelSpec, ChannelStats, binary_entropy, channel_stats


class BoundDomainError(ValueError):
    pass


def _check_eps(epsilon: float) -> None:
    if not (0.0 < epsilon < 0.5):
        raise BoundDomainError(f"epsilon must lie in (0, 1/2), got {epsilon}")


def _check_M(M: int) -> None:
    if M < 2:
        raise BoundDomainError(f"M must be >= 2, got {M}")


def bound_thm1(M: int, epsilon: float, stats: ChannelStats) -> float:
    _check_eps(epsilon)
    _check_M(M)
    inner = math.log2(M / epsilon)
    if inner <= 1.0:
        raise BoundDomainError("log2(M / epsilon) <= 1: iterated log undefined")
    C, C1, C2 = stats.C, stats.C1, stats.C2
    return ((math.log2(M) + math.log2(inner)) / C
            + (math.log2(1 / epsilon) + 1) / C1
            + 96 * 2 ** (2 * C2) / (C * C1))


def bound_cor1(M: int, epsilon: float, stats: ChannelStats) -> float:
    _check_eps(epsilon)
    _check_M(M)
    C, C1, C2 = stats.C, stats.C1, stats.C2
    return math.log2(M) / C + math.log2((1 - epsilon) / epsilon) / C1 + 3 * C2 ** 2 / (C * C1)


def _geometric_factor(epsilon: float, C2: float) -> float:
    return (1 - epsilon / (1 - epsilon) * 2 ** -C2) / (1 - 2 ** -C2)


def bound_thm3_bac(M: int, epsilon: float, stats: ChannelStats) -> float:
    _check_eps(epsilon)
    _check_M(M)
    C, C1, C2 = stats.C, stats.C1, stats.C2
    return (math.log2(M) / C
            + (math.log2((1 - epsilon) / epsilon) + C2) / C1
            + C2 * (1 / C - 1 / C1) * _geometric_factor(epsilon, C2))


def _bsc_constants(p: float) -> tuple[float, float, float, float]:
    if not (0.0 < p < 0.5):
        raise BoundDomainError(f"BSC crossover must lie in (0, 1/2), got {p}")
    q = 1 - p
    C = 1 - binary_entropy(p)
    C2 = math.log2(q / p)
    C1 = (q - p) * C2
    return q, C, C1, C2


def communication_phase_bound(M: int, p: float) -> float:
    """Upper bound on E[nu], the time for the true posterior to reach 1/2 on BSC(p)."""
    _check_M(M)
    q, C, _, _ = _bsc_constants(p)
    return math.log2(M) / C + math.log2(2 * q) / (q * C)


def confirmation_phase_bound(p: float, epsilon: float) -> float:
    """Upper bound on E[tau - nu] on BSC(p), fallbacks to communication included."""
    _check_eps(epsilon)
    q, C, C1, C2 = _bsc_constants(p)
    return ((math.log2((1 - epsilon) / epsilon) + C2) / C1
            + 2 ** -C2 * C2 * ((1 + math.log2(2 * q) / (q * C2)) / C - 1 / C1)
            * _geometric_factor(epsilon, C2))


def bound_thm6_bsc(M: int, epsilon: float, p: float) -> float:
    _check_eps(epsilon)
    _check_M(M)
    q, C, C1, C2 = _bsc_constants(p)
    return (math.log2(M) / C + math.log2(2 * q) / (q * C)
            + (math.log2((1 - epsilon) / epsilon) + C2) / C1
            + 2 ** -C2 * C2 * ((1 + math.log2(2 * q) / (q * C2)) / C - 1 / C1)
            * _geometric_factor(epsilon, C2))


def _fano(x: float, M: int) -> float:
    # F_M(x) = x log(M - 1) + h(x)
    return x * math.log2(M - 1) + binary_entropy(x) if M > 1 else binary_entropy(x)


def _check_converse(M: int, epsilon: float) -> None:
    if M < 2:
        raise BoundDomainError(f"M must be >= 2, got {M}")
    if not (0.0 < epsilon <= 1 - 1 / M):
        raise BoundDomainError(f"epsilon must lie in (0, 1 - 1/M], got {epsilon}")


def converse_sup_objective(xi: float, M: int, epsilon: float, stats: ChannelStats) -> float:
    C, C1 = stats.C, stats.C1
    logM = math.log2(M)
    first = (logM - _fano(xi, M) - min(_fano(epsilon, M), epsilon / xi * logM)) / C
    second = ((1 - epsilon) / C1 * math.log2(stats.lambda1 * xi / (epsilon * (1 - xi)))
              - binary_entropy(epsilon) / C1)
    return first + max(second, 0.0)


def converse_sup(M: int, epsilon: float, stats: ChannelStats, grid: int = 1024,
                 return_detail: bool = False):
    """Supremum over xi in (0, (M-1)/M] of the VLF converse objective.

    A uniform grid finds the best cell; golden-section refines within the
    neighbouring cells. The refined value never replaces a better grid value.
    """
    _check_converse(M, epsilon)
    top = (M - 1) / M
    xs = top * np.arange(1, grid + 1) / grid
    vals = np.array([converse_sup_objective(float(x), M, epsilon, stats) for x in xs])
    j = int(np.argmax(vals))
    lo = float(xs[j - 1]) if j > 0 else float(xs[0]) * 1e-6
    hi = float(xs[min(j + 1, grid - 1)])
    x_ref, v_ref = golden_max(lambda x: converse_sup_objective(x, M, epsilon, stats),
                              lo, hi, tol=1e-9)
    best = max(float(vals[j]), v_ref)
    if return_detail:
        return best, float(vals[j]), v_ref
    return best


def converse_weak(M: int, epsilon: float, stats: ChannelStats) -> float:
    _check_converse(M, epsilon)
    return ((1 - epsilon) * math.log2(M) - binary_entropy(epsilon)) / stats.C


def converse_vlf(M: int, epsilon: float, stats: ChannelStats) -> float:
    """Larger of the two converses, clamped at 0 (E[tau] is nonnegative)."""
    return max(converse_sup(M, epsilon, stats), converse_weak(M, epsilon, stats), 0.0)


def error_exponent(R: float, stats: ChannelStats) -> float:
    """Burnashev reliability function C1 (1 - R / C) for 0 <= R <= C."""
    if not (0.0 <= R <= stats.C):
        raise BoundDomainError(f"rate {R} outside [0, C={stats.C}]")
    return stats.C1 * (1 - R / stats.C)


@dataclass(frozen=True)
class BoundSet:
    M: int
    epsilon: float
    thm1: float
    cor1: float
    thm3_bac: float
    thm6_bsc: float | None
    converse_vlf: float
    converse_sup: float
    converse_weak: float

    def rate_of(self, value: float | None) -> float | None:
        """Rate log2(M) / value implied by a blocklength bound."""
        if value is None or value <= 0:
            return None
        return math.log2(self.M) / value


def compute_bounds(M: int, epsilon: float, spec: ChannelSpec) -> BoundSet:
    stats = channel_stats(spec)
    sup = converse_sup(M, epsilon, stats)
    weak = converse_weak(M, epsilon, stats)
    return BoundSet(
        M=M, epsilon=epsilon,
        thm1=bound_thm1(M, epsilon, stats),
        cor1=bound_cor1(M, epsilon, stats),
        thm3_bac=bound_thm3_bac(M, epsilon, stats),
        thm6_bsc=bound_thm6_bsc(M, epsilon, spec.p0) if spec.is_bsc else None,
        converse_vlf=max(sup, weak, 0.0),
        converse_sup=sup,
        converse_weak=weak,
    )
