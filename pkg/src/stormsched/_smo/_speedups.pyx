# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled SMO core.

Transliteration of _pure.smo_solve with the same operation order so both
backends return bit-identical multipliers.  Keep the two files in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BACKEND = "compiled"

cdef unsigned long long _SEED_FILL = 0x9E3779B97F4A7C15ULL


cdef inline unsigned long long _xs_next(unsigned long long *state) nogil:
    cdef unsigned long long s = state[0]
    s ^= s << 13
    s ^= s >> 7
    s ^= s << 17
    state[0] = s
    return s


cdef double _take_step(
    double[:, ::1] K,
    double[::1] y,
    double[::1] alpha,
    double[::1] errors,
    double *bias,
    double c,
    double step_tol,
    double alpha_eps,
    Py_ssize_t i1,
    Py_ssize_t i2,
) nogil:
    cdef double a1, a2, y1, y2, e1, e2, s, lo, hi, k11, k12, k22, eta
    cdef double a2new, b, f1, f2, lo1, hi1, obj_lo, obj_hi, step
    cdef double a1new, d1, d2, b1, b2, bnew, db
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t k

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
        lo = a1 + a2 - c
        if lo < 0.0:
            lo = 0.0
        hi = a1 + a2
        if hi > c:
            hi = c
    else:
        lo = a2 - a1
        if lo < 0.0:
            lo = 0.0
        hi = c + a2 - a1
        if hi > c:
            hi = c
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
        b = bias[0]
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
    step = fabs(a2new - a2)
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
    b = bias[0]
    b1 = e1 + d1 * k11 + d2 * k12 + b
    b2 = e2 + d1 * k12 + d2 * k22 + b
    if alpha_eps < a1new and a1new < c - alpha_eps:
        bnew = b1
    elif alpha_eps < a2new and a2new < c - alpha_eps:
        bnew = b2
    else:
        bnew = 0.5 * (b1 + b2)
    db = bnew - b
    bias[0] = bnew
    alpha[i1] = a1new
    alpha[i2] = a2new
    for k in range(n):
        errors[k] = errors[k] + d1 * K[i1, k]
    for k in range(n):
        errors[k] = errors[k] + d2 * K[i2, k]
    for k in range(n):
        errors[k] = errors[k] - db
    return fabs(a2new - a2)


cdef double _examine(
    double[:, ::1] K,
    double[::1] y,
    double[::1] alpha,
    double[::1] errors,
    double *bias,
    unsigned long long *rng,
    double c,
    double kkt_tol,
    double step_tol,
    double alpha_eps,
    Py_ssize_t i2,
) nogil:
    cdef Py_ssize_t n = y.shape[0]
    cdef double y2 = y[i2]
    cdef double a2 = alpha[i2]
    cdef double e2 = errors[i2]
    cdef double r2 = e2 * y2
    cdef Py_ssize_t best, k, off, start
    cdef double bestgap, gap, step
    cdef bint any_nonbound

    if not ((r2 < -kkt_tol and a2 < c - alpha_eps) or (r2 > kkt_tol and a2 > alpha_eps)):
        return 0.0
    any_nonbound = False
    best = -1
    bestgap = -1.0
    for k in range(n):
        if alpha_eps < alpha[k] and alpha[k] < c - alpha_eps:
            any_nonbound = True
            gap = fabs(errors[k] - e2)
            if gap > bestgap:
                bestgap = gap
                best = k
    if any_nonbound:
        if best >= 0:
            step = _take_step(K, y, alpha, errors, bias, c, step_tol, alpha_eps, best, i2)
            if step > 0.0:
                return step
        start = <Py_ssize_t>(_xs_next(rng) % <unsigned long long>n)
        for off in range(n):
            k = start + off
            if k >= n:
                k -= n
            if alpha_eps < alpha[k] and alpha[k] < c - alpha_eps:
                step = _take_step(K, y, alpha, errors, bias, c, step_tol, alpha_eps, k, i2)
                if step > 0.0:
                    return step
    start = <Py_ssize_t>(_xs_next(rng) % <unsigned long long>n)
    for off in range(n):
        k = start + off
        if k >= n:
            k -= n
        step = _take_step(K, y, alpha, errors, bias, c, step_tol, alpha_eps, k, i2)
        if step > 0.0:
            return step
    return 0.0


def smo_solve(K, y, double c, double kkt_tol, double step_tol, double alpha_eps, long max_passes, long seed):
    """Signature and return contract match _pure.smo_solve."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] K_arr = np.ascontiguousarray(K, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] y_arr = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = y_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] alpha_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] err_arr = -y_arr

    cdef double[:, ::1] Kv = K_arr
    cdef double[::1] yv = y_arr
    cdef double[::1] av = alpha_arr
    cdef double[::1] ev = err_arr
    cdef double bias = 0.0
    cdef unsigned long long rng = (<unsigned long long>seed) if seed != 0 else _SEED_FILL
    cdef long passes = 0
    cdef bint examine_all = True
    cdef bint converged = False
    cdef double max_step = 0.0
    cdef double step
    cdef Py_ssize_t i

    with nogil:
        while passes < max_passes:
            passes += 1
            max_step = 0.0
            if examine_all:
                for i in range(n):
                    step = _examine(Kv, yv, av, ev, &bias, &rng, c, kkt_tol, step_tol, alpha_eps, i)
                    if step > max_step:
                        max_step = step
                if max_step <= step_tol:
                    converged = True
                    break
                examine_all = False
            else:
                for i in range(n):
                    if alpha_eps < av[i] and av[i] < c - alpha_eps:
                        step = _examine(Kv, yv, av, ev, &bias, &rng, c, kkt_tol, step_tol, alpha_eps, i)
                        if step > max_step:
                            max_step = step
                if max_step <= step_tol:
                    examine_all = True

    return alpha_arr, bias, passes, converged, max_step
