# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the iteration-heavy numeric kernels.

Semantics match ``_pykern`` exactly; only the execution speed differs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double da = (<const double*> a)[0]
    cdef double db = (<const double*> b)[0]
    if da < db:
        return 1
    if da > db:
        return -1
    return 0


cdef void _proj_simplex(const double* y, double* out, double* work, int n, double total) noexcept nogil:
    # inputs beyond ~1e12 lose the precision the pivot search needs
    cdef int i, rho
    cdef double css, tau, v
    for i in range(n):
        v = y[i]
        if v > 1e12:
            v = 1e12
        elif v < -1e12:
            v = -1e12
        work[i] = v
    qsort(work, n, sizeof(double), _cmp_desc)
    css = 0.0
    tau = 0.0
    rho = -1
    for i in range(n):
        css += work[i]
        if work[i] - (css - total) / (i + 1.0) > 0.0:
            rho = i
            tau = (css - total) / (i + 1.0)
    for i in range(n):
        v = y[i]
        if v > 1e12:
            v = 1e12
        elif v < -1e12:
            v = -1e12
        out[i] = v - tau
        if out[i] < 0.0:
            out[i] = 0.0


def project_simplex(y, double total=1.0):
    """L2 projection of y onto the simplex {x >= 0, sum x = total}."""
    cdef cnp.ndarray[double, ndim=1] ya = np.ascontiguousarray(y, dtype=np.float64)
    cdef int n = ya.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double* work = <double*> malloc(n * sizeof(double))
    _proj_simplex(&ya[0], &out[0], work, n, total)
    free(work)
    return out


def project_simplex_floor(y, double floor, double total=1.0):
    """L2 projection onto {x >= floor elementwise, sum x = total}."""
    cdef cnp.ndarray[double, ndim=1] ya = np.ascontiguousarray(y, dtype=np.float64)
    cdef int n = ya.shape[0]
    cdef cnp.ndarray[double, ndim=1] shifted = np.empty(n, dtype=np.float64)
    cdef int i
    for i in range(n):
        shifted[i] = ya[i] - floor
    cdef cnp.ndarray[double, ndim=1] out = project_simplex(shifted, total - floor * n)
    for i in range(n):
        out[i] += floor
    return out


def log_nash_product(payoffs, disagreements, x):
    cdef cnp.ndarray[double, ndim=2] u = np.ascontiguousarray(payoffs, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] d = np.ascontiguousarray(disagreements, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef int n = u.shape[0], m = u.shape[1]
    cdef int i, j
    cdef double margin, total = 0.0
    for i in range(n):
        margin = -d[i]
        for j in range(m):
            margin += u[i, j] * xa[j]
        if margin <= 0.0:
            return -np.inf
        total += log(margin)
    return total


def log_nash_gradient(payoffs, disagreements, x):
    u = np.asarray(payoffs, dtype=np.float64)
    d = np.asarray(disagreements, dtype=np.float64)
    xa = np.asarray(x, dtype=np.float64)
    margins = u @ xa - d
    return u.T @ (1.0 / margins)


def nbs_ascent(payoffs, disagreements, x0, int num_steps, double step0,
               bint exponentiated, bint record_trace):
    """Gradient ascent on the log Nash product over the simplex.

    Same contract as the pure backend:
    returns (best_x, best_g, trace, bad_step, bad_player).
    """
    cdef cnp.ndarray[double, ndim=2] u = np.ascontiguousarray(payoffs, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] d = np.ascontiguousarray(disagreements, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] x = np.array(x0, dtype=np.float64)
    cdef int n = u.shape[0], m = u.shape[1]
    cdef cnp.ndarray[double, ndim=1] best_x = x.copy()
    cdef cnp.ndarray[double, ndim=1] trace = np.empty(num_steps + 1 if record_trace else 0,
                                                      dtype=np.float64)
    cdef double* margins = <double*> malloc(n * sizeof(double))
    cdef double* grad = <double*> malloc(m * sizeof(double))
    cdef double* y = <double*> malloc(m * sizeof(double))
    cdef double* work = <double*> malloc(m * sizeof(double))
    cdef int i, j, t
    cdef int bad = -1
    cdef double g, best_g, alpha, w, zmax, zsum

    bad = _check_margins(&u[0, 0], &d[0], &x[0], n, m, margins)
    if bad >= 0:
        free(margins); free(grad); free(y); free(work)
        return x, -np.inf, np.empty(0), 0, bad
    g = _logsum(margins, n)
    best_g = g
    if record_trace:
        trace[0] = g
    for t in range(num_steps):
        # margins filled by the last check
        for j in range(m):
            grad[j] = 0.0
        for i in range(n):
            w = 1.0 / margins[i]
            for j in range(m):
                grad[j] += u[i, j] * w
        alpha = step0 / sqrt(t + 1.0)
        if exponentiated:
            zmax = -1e300
            for j in range(m):
                w = x[j]
                if w < 1e-300:
                    w = 1e-300
                y[j] = log(w) + alpha * grad[j]
                if y[j] > zmax:
                    zmax = y[j]
            zsum = 0.0
            for j in range(m):
                y[j] = exp(y[j] - zmax)
                zsum += y[j]
            for j in range(m):
                x[j] = y[j] / zsum
        else:
            for j in range(m):
                y[j] = x[j] + alpha * grad[j]
            _proj_simplex(y, &x[0], work, m, 1.0)
        bad = _check_margins(&u[0, 0], &d[0], &x[0], n, m, margins)
        if bad >= 0:
            out = (best_x, best_g, trace[: t + 1], t + 1, bad)
            free(margins); free(grad); free(y); free(work)
            return out
        g = _logsum(margins, n)
        if record_trace:
            trace[t + 1] = g
        if g > best_g:
            best_g = g
            for j in range(m):
                best_x[j] = x[j]
    free(margins)
    free(grad)
    free(y)
    free(work)
    return best_x, best_g, trace, -1, -1


cdef int _check_margins(const double* u, const double* d, const double* x,
                        int n, int m, double* margins) noexcept nogil:
    """Fill margins; return the index of the worst violating player, or -1."""
    cdef int i, j, bad = -1
    cdef double margin, worst = 0.0
    for i in range(n):
        margin = -d[i]
        for j in range(m):
            margin += u[i * m + j] * x[j]
        margins[i] = margin
        if margin <= 0.0 and (bad < 0 or margin < worst):
            bad = i
            worst = margin
    return bad


cdef double _logsum(const double* margins, int n) noexcept nogil:
    cdef int i
    cdef double total = 0.0
    for i in range(n):
        total += log(margins[i])
    return total


def prd_2p(u1, u2, x1, x2, double step, int iters, double floor1, double floor2):
    """Projected replicator dynamics for a 2-player bimatrix game."""
    cdef cnp.ndarray[double, ndim=2] a = np.ascontiguousarray(u1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] b = np.ascontiguousarray(u2, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] p = np.array(x1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] q = np.array(x2, dtype=np.float64)
    cdef int m1 = a.shape[0], m2 = a.shape[1]
    cdef double* f1 = <double*> malloc(m1 * sizeof(double))
    cdef double* f2 = <double*> malloc(m2 * sizeof(double))
    cdef double* y1 = <double*> malloc(m1 * sizeof(double))
    cdef double* y2 = <double*> malloc(m2 * sizeof(double))
    cdef double* w1 = <double*> malloc(m1 * sizeof(double))
    cdef double* w2 = <double*> malloc(m2 * sizeof(double))
    cdef int i, j, t
    cdef double a1, a2
    for t in range(iters):
        for i in range(m1):
            f1[i] = 0.0
            for j in range(m2):
                f1[i] += a[i, j] * q[j]
        for j in range(m2):
            f2[j] = 0.0
            for i in range(m1):
                f2[j] += b[i, j] * p[i]
        a1 = 0.0
        for i in range(m1):
            a1 += p[i] * f1[i]
        a2 = 0.0
        for j in range(m2):
            a2 += q[j] * f2[j]
        for i in range(m1):
            y1[i] = p[i] + step * p[i] * (f1[i] - a1) - floor1
        for j in range(m2):
            y2[j] = q[j] + step * q[j] * (f2[j] - a2) - floor2
        _proj_simplex(y1, &p[0], w1, m1, 1.0 - floor1 * m1)
        _proj_simplex(y2, &q[0], w2, m2, 1.0 - floor2 * m2)
        for i in range(m1):
            p[i] += floor1
        for j in range(m2):
            q[j] += floor2
    free(f1); free(f2); free(y1); free(y2); free(w1); free(w2)
    return p, q


def rm_2p(u1, u2, int iters, double gamma):
    """Exploratory regret matching on a bimatrix game; returns average strategies."""
    cdef cnp.ndarray[double, ndim=2] a = np.ascontiguousarray(u1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] b = np.ascontiguousarray(u2, dtype=np.float64)
    cdef int m1 = a.shape[0], m2 = a.shape[1]
    cdef cnp.ndarray[double, ndim=1] avg1 = np.zeros(m1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] avg2 = np.zeros(m2, dtype=np.float64)
    cdef double* cum1 = <double*> malloc(m1 * sizeof(double))
    cdef double* cum2 = <double*> malloc(m2 * sizeof(double))
    cdef double* s1 = <double*> malloc(m1 * sizeof(double))
    cdef double* s2 = <double*> malloc(m2 * sizeof(double))
    cdef double* f1 = <double*> malloc(m1 * sizeof(double))
    cdef double* f2 = <double*> malloc(m2 * sizeof(double))
    cdef int i, j, t
    cdef double tot, v1, v2
    for i in range(m1):
        cum1[i] = 0.0
    for j in range(m2):
        cum2[j] = 0.0
    for t in range(iters):
        tot = 0.0
        for i in range(m1):
            s1[i] = cum1[i] if cum1[i] > 0.0 else 0.0
            tot += s1[i]
        if tot > 0.0:
            for i in range(m1):
                s1[i] /= tot
        else:
            for i in range(m1):
                s1[i] = 1.0 / m1
        tot = 0.0
        for j in range(m2):
            s2[j] = cum2[j] if cum2[j] > 0.0 else 0.0
            tot += s2[j]
        if tot > 0.0:
            for j in range(m2):
                s2[j] /= tot
        else:
            for j in range(m2):
                s2[j] = 1.0 / m2
        if gamma > 0.0:
            for i in range(m1):
                s1[i] = gamma / m1 + (1.0 - gamma) * s1[i]
            for j in range(m2):
                s2[j] = gamma / m2 + (1.0 - gamma) * s2[j]
        for i in range(m1):
            f1[i] = 0.0
            for j in range(m2):
                f1[i] += a[i, j] * s2[j]
        for j in range(m2):
            f2[j] = 0.0
            for i in range(m1):
                f2[j] += b[i, j] * s1[i]
        v1 = 0.0
        for i in range(m1):
            v1 += s1[i] * f1[i]
        v2 = 0.0
        for j in range(m2):
            v2 += s2[j] * f2[j]
        for i in range(m1):
            cum1[i] += f1[i] - v1
            avg1[i] += s1[i]
        for j in range(m2):
            cum2[j] += f2[j] - v2
            avg2[j] += s2[j]
    free(cum1); free(cum2); free(s1); free(s2); free(f1); free(f2)
    return avg1 / iters, avg2 / iters
