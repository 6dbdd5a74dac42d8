"""Pure numpy SMO core.

This is the fallback for environments without a C compiler and the
reference the compiled module is checked against: both implementations
execute the same floating point operations in the same order, so their
results are expected to agree bit for bit.

The working-pair strategy follows the classic sequential minimal
optimization recipe: outer passes alternate between all samples and the
non-bound subset, the partner is chosen by the largest error gap with
seeded random restarts as fallbacks, and the run converges when a full
pass moves no multiplier by more than step_tol.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_MASK64 = (1 << 64) - 1
_SEED_FILL = 0x9E3779B97F4A7C15


class _XorShift64:
    """Tiny deterministic generator mirrored in the compiled core."""

    def __init__(self, seed: int):
        self.state = (seed & _MASK64) or _SEED_FILL

    def next(self) -> int:
        s = self.state
        s ^= (s << 13) & _MASK64
        s ^= s >> 7
        s ^= (s << 17) & _MASK64
        self.state = s
        return s

    def index(self, n: int) -> int:
        return self.next() % n


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    c: float,
    kkt_tol: float,
    step_tol: float,
    alpha_eps: float,
    max_passes: int,
    seed: int,
):
    """Maximize the dual on a precomputed Gram matrix.

    Returns (alpha, running_bias, passes, converged, last_max_step).
    The running bias is the on-line estimate used for KKT checks; callers
    recompute the reported bias from the support set afterwards.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    alpha = np.zeros(n, dtype=np.float64)
    errors = -y.copy()
    rng = _XorShift64(seed)
    state = {"b": 0.0}

    def take_step(i1: int, i2: int) -> float:
        nonlocal errors
        if i1 == i2:
            return 0.0
        a1 = alpha[i1]
        a2 = alpha[i2]
        y1 = y[i1]
        y2 = y[i2]
        e1 = errors[i1]
        e2 = errors[i2]
        s = y1 * y2
        if s > 0.0:
            lo = max(0.0, a1 + a2 - c)
            hi = min(c, a1 + a2)
        else:
            lo = max(0.0, a2 - a1)
            hi = min(c, c + a2 - a1)
        if hi - lo < 1e-12:
            return 0.0
        k11 = K[i1, i1]
        k12 = K[i1, i2]
        k22 = K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 1e-12:
            a2new = a2 + y2 * (e1 - e2) / eta
            if a2new < lo:
                a2new = lo
            elif a2new > hi:
                a2new = hi
        else:
            b = state["b"]
            f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22
            lo1 = a1 + s * (a2 - lo)
            hi1 = a1 + s * (a2 - hi)
            obj_lo = lo1 * f1 + lo * f2 + 0.5 * lo1 * lo1 * k11 + 0.5 * lo * lo * k22 + s * lo * lo1 * k12
            obj_hi = hi1 * f1 + hi * f2 + 0.5 * hi1 * hi1 * k11 + 0.5 * hi * hi * k22 + s * hi * hi1 * k12
            if obj_lo < obj_hi - 1e-12:
                a2new = lo
            elif obj_lo > obj_hi + 1e-12:
                a2new = hi
            else:
                return 0.0
        step = abs(a2new - a2)
        if step < step_tol * (a2new + a2 + step_tol):
            return 0.0
        a1new = a1 + s * (a2 - a2new)
        if a1new < alpha_eps:
            a1new = 0.0
        elif a1new > c - alpha_eps:
            a1new = c
        if a2new < alpha_eps:
            a2new = 0.0
        elif a2new > c - alpha_eps:
            a2new = c
        d1 = y1 * (a1new - a1)
        d2 = y2 * (a2new - a2)
        b = state["b"]
        b1 = e1 + d1 * k11 + d2 * k12 + b
        b2 = e2 + d1 * k12 + d2 * k22 + b
        if alpha_eps < a1new < c - alpha_eps:
            bnew = b1
        elif alpha_eps < a2new < c - alpha_eps:
            bnew = b2
        else:
            bnew = 0.5 * (b1 + b2)
        db = bnew - b
        state["b"] = bnew
        alpha[i1] = a1new
        alpha[i2] = a2new
        # three separate elementwise passes; the compiled core replays the
        # same per-element operation order
        errors += d1 * K[i1]
        errors += d2 * K[i2]
        errors -= db
        return abs(a2new - a2)

    def examine(i2: int) -> float:
        y2 = y[i2]
        a2 = alpha[i2]
        e2 = errors[i2]
        r2 = e2 * y2
        if not ((r2 < -kkt_tol and a2 < c - alpha_eps) or (r2 > kkt_tol and a2 > alpha_eps)):
            return 0.0
        nonbound = (alpha > alpha_eps) & (alpha < c - alpha_eps)
        if nonbound.any():
            gaps = np.where(nonbound, np.abs(errors - e2), -1.0)
            best = int(np.argmax(gaps))
            if gaps[best] >= 0.0:
                step = take_step(best, i2)
                if step > 0.0:
                    return step
            start = rng.index(n)
            for off in range(n):
                k = start + off
                if k >= n:
                    k -= n
                if alpha_eps < alpha[k] < c - alpha_eps:
                    step = take_step(k, i2)
                    if step > 0.0:
                        return step
        start = rng.index(n)
        for off in range(n):
            k = start + off
            if k >= n:
                k -= n
            step = take_step(k, i2)
            if step > 0.0:
                return step
        return 0.0

    passes = 0
    examine_all = True
    converged = False
    max_step = 0.0
    while passes < max_passes:
        passes += 1
        max_step = 0.0
        if examine_all:
            for i in range(n):
                step = examine(i)
                if step > max_step:
                    max_step = step
            if max_step <= step_tol:
                converged = True
                break
            examine_all = False
        else:
            for i in range(n):
                if alpha_eps < alpha[i] < c - alpha_eps:
                    step = examine(i)
                    if step > max_step:
                        max_step = step
            if max_step <= step_tol:
                examine_all = True
    return alpha, state["b"], passes, converged, max_step
