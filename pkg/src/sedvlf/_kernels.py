"""Compiled inner loops for the session simulator.

The trial kernel keeps the message indices sorted by (posterior descending,
index ascending) across steps. After a Bayes update every message in S0 is
scaled by one factor and every message in S1 by another, so the new order is
a merge of the two old subsequences followed by an insertion pass that fixes
ties created by rounding. This makes each step O(M) instead of O(M log M).
"""

import numpy as np
from numba import njit

OK = 0
NEED_UNIFORMS = 1
CAP_EXCEEDED = 2
UNDERFLOW = 3
PARTITION_FAILED = 4

GREEDY = 0
ORIGINAL = 1


@njit(cache=True)
def neumaier_sum(a):
    s = 0.0
    c = 0.0
    for i in range(a.shape[0]):
        x = a[i]
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


@njit(cache=True)
def _before(rho, a, b):
    # a precedes b in (posterior desc, index asc) order
    return rho[a] > rho[b] or (rho[a] == rho[b] and a < b)


@njit(cache=True)
def greedy_assign(rho, order, lam, member):
    """Greedy partition over messages visited in ``order``; fills ``member``."""
    M = order.shape[0]
    j = order[0]
    member[j] = 0
    pi0 = rho[j]
    pi1 = 0.0
    for s in range(1, M):
        j = order[s]
        if pi1 >= lam * pi0:
            member[j] = 0
            pi0 += rho[j]
        else:
            member[j] = 1
            pi1 += rho[j]
    return pi0, pi1


@njit(cache=True)
def _less(rho, a, b):
    # min-heap key (posterior asc, index asc)
    return rho[a] < rho[b] or (rho[a] == rho[b] and a < b)


@njit(cache=True)
def _sift_down(heap, n, pos, rho):
    while True:
        left = 2 * pos + 1
        if left >= n:
            return
        child = left
        right = left + 1
        if right < n and _less(rho, heap[right], heap[left]):
            child = right
        if _less(rho, heap[child], heap[pos]):
            tmp = heap[pos]
            heap[pos] = heap[child]
            heap[child] = tmp
            pos = child
        else:
            return


@njit(cache=True)
def _heap_push(heap, n, item, rho):
    heap[n] = item
    pos = n
    while pos > 0:
        parent = (pos - 1) // 2
        if _less(rho, heap[pos], heap[parent]):
            tmp = heap[pos]
            heap[pos] = heap[parent]
            heap[parent] = tmp
            pos = parent
        else:
            break
    return n + 1


@njit(cache=True)
def _heap_pop(heap, n, rho):
    top = heap[0]
    n -= 1
    heap[0] = heap[n]
    _sift_down(heap, n, 0, rho)
    return top, n


@njit(cache=True)
def original_assign(rho, lam, member, max_moves):
    """Iterative min-element moves until the SED condition holds.

    Returns the number of moves, or -1 if ``max_moves`` is exceeded.
    """
    M = rho.shape[0]
    heap0 = np.arange(M)
    heap1 = np.empty(M, dtype=np.int64)
    n0 = M
    n1 = 0
    for pos in range(M // 2 - 1, -1, -1):
        _sift_down(heap0, n0, pos, rho)
    pi0 = 1.0
    pi1 = 0.0
    delta = lam
    min0 = rho[heap0[0]]
    min1 = np.inf
    moves = 0
    while delta < -min1 or delta > lam * min0:
        if delta < -min1:
            j, n1 = _heap_pop(heap1, n1, rho)
            n0 = _heap_push(heap0, n0, j, rho)
            pi0 += rho[j]
            pi1 -= rho[j]
        else:
            j, n0 = _heap_pop(heap0, n0, rho)
            n1 = _heap_push(heap1, n1, j, rho)
            pi0 -= rho[j]
            pi1 += rho[j]
        delta = lam * pi0 - pi1
        min0 = rho[heap0[0]] if n0 > 0 else np.inf
        min1 = rho[heap1[0]] if n1 > 0 else np.inf
        moves += 1
        if moves > max_moves:
            return -1
    for s in range(n0):
        member[heap0[s]] = 0
    for s in range(n1):
        member[heap1[s]] = 1
    return moves


@njit(cache=True)
def merge_order(order, member, rho, out):
    """Re-sort ``order`` after a two-factor rescaling of ``rho``."""
    M = order.shape[0]
    a = 0
    b = 0
    while a < M and member[order[a]] != 0:
        a += 1
    while b < M and member[order[b]] != 1:
        b += 1
    for s in range(M):
        if b >= M or (a < M and _before(rho, order[a], order[b])):
            out[s] = order[a]
            a += 1
            while a < M and member[order[a]] != 0:
                a += 1
        else:
            out[s] = order[b]
            b += 1
            while b < M and member[order[b]] != 1:
                b += 1
    # rounding can turn strict inequalities into ties; restore index order
    for s in range(1, M):
        x = out[s]
        r = s - 1
        while r >= 0 and _before(rho, x, out[r]):
            out[r + 1] = out[r]
            r -= 1
        out[r + 1] = x


@njit(cache=True)
def trial_kernel(M, theta, p0, p1, threshold, pi1_star, lam, algorithm,
                 uniforms, max_steps, move_cap):
    """One transmission session. Returns (status, tau, theta_hat, nu, fallbacks)."""
    rho = np.full(M, 1.0 / M)
    w = np.empty(M)
    order = np.arange(M)
    spare = np.empty(M, dtype=np.int64)
    member = np.zeros(M, dtype=np.int8)
    t = 0
    nu = 0 if rho[theta] >= 0.5 else -1
    confirming = rho[theta] >= 0.5
    fallbacks = 0
    status = OK
    while rho[order[0]] < threshold:
        if t >= max_steps:
            status = CAP_EXCEEDED
            break
        if t >= uniforms.shape[0]:
            return NEED_UNIFORMS, t, -1, nu, fallbacks
        top = order[0]
        if rho[top] >= pi1_star:
            member[:] = 0
            member[top] = 1
        elif algorithm == GREEDY:
            greedy_assign(rho, order, lam, member)
        else:
            if original_assign(rho, lam, member, move_cap) < 0:
                return PARTITION_FAILED, t, -1, nu, fallbacks
        x = member[theta]
        u = uniforms[t]
        if x == 0:
            y = 1 if u < p0 else 0
        else:
            y = 0 if u < p1 else 1
        if y == 0:
            l0 = 1.0 - p0
            l1 = p1
        else:
            l0 = p0
            l1 = 1.0 - p1
        for i in range(M):
            w[i] = rho[i] * (l0 if member[i] == 0 else l1)
        Z = neumaier_sum(w)
        if not (Z > 0.0) or not np.isfinite(Z):
            return UNDERFLOW, t, -1, nu, fallbacks
        for i in range(M):
            rho[i] = w[i] / Z
        t += 1
        merge_order(order, member, rho, spare)
        order, spare = spare, order
        r = rho[theta]
        if r >= 0.5:
            if nu < 0:
                nu = t
            confirming = True
        elif confirming:
            fallbacks += 1
            confirming = False
    return status, t, order[0], nu, fallbacks
