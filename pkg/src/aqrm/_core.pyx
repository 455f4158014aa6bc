# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Householder tridiagonalisation, implicit QL, and the
scaled constraint-polynomial recurrence. Mirrors ``_fallback`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot

cnp.import_array()

cdef double EPS = 2.220446049250313e-16


class EigenConvergenceError(ArithmeticError):
    pass


def tridiagonalize(a, bint want_vectors=True):
    cdef double[:, ::1] A = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    cdef double[:, ::1] V = np.zeros((max(n - 2, 1), n), dtype=np.float64)
    cdef char[::1] used = np.zeros(max(n - 2, 1), dtype=np.int8)
    cdef double[::1] p = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t k, i, j
    cdef double alpha, vnorm, kk, wi, wj, acc

    for k in range(n - 2):
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += A[i, k] * A[i, k]
        alpha = sqrt(alpha)
        if alpha == 0.0:
            continue
        if A[k + 1, k] > 0:
            alpha = -alpha
        vnorm = 0.0
        for i in range(k + 1, n):
            V[k, i] = A[i, k]
        V[k, k + 1] -= alpha
        for i in range(k + 1, n):
            vnorm += V[k, i] * V[k, i]
        if vnorm == 0.0:
            continue
        vnorm = sqrt(vnorm)
        for i in range(k + 1, n):
            V[k, i] /= vnorm
        used[k] = 1
        # p = A_sub v, kk = v.p
        kk = 0.0
        for i in range(k + 1, n):
            acc = 0.0
            for j in range(k + 1, n):
                acc += A[i, j] * V[k, j]
            p[i] = acc
            kk += V[k, i] * acc
        # w = 2 (p - kk v); A_sub -= v w^T + w v^T
        for i in range(k + 1, n):
            p[i] = 2.0 * (p[i] - kk * V[k, i])
        for i in range(k + 1, n):
            wi = p[i]
            for j in range(k + 1, n):
                A[i, j] -= V[k, i] * p[j] + wi * V[k, j]
        for i in range(k + 1, n):
            A[i, k] = 0.0
            A[k, i] = 0.0
        A[k + 1, k] = alpha
        A[k, k + 1] = alpha

    d = np.empty(n, dtype=np.float64)
    e = np.zeros(n, dtype=np.float64)
    cdef double[::1] dv = d
    cdef double[::1] ev = e
    for i in range(n):
        dv[i] = A[i, i]
    for i in range(1, n):
        ev[i] = A[i, i - 1]
    if not want_vectors:
        return d, e, None

    q = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] Q = q
    cdef double[::1] t = np.empty(n, dtype=np.float64)
    for k in range(n - 3, -1, -1):
        if not used[k]:
            continue
        # Q_sub -= 2 v (v^T Q_sub)
        for j in range(k + 1, n):
            t[j] = 0.0
        for i in range(k + 1, n):
            wi = V[k, i]
            for j in range(k + 1, n):
                t[j] += wi * Q[i, j]
        for i in range(k + 1, n):
            wi = 2.0 * V[k, i]
            for j in range(k + 1, n):
                Q[i, j] -= wi * t[j]
    return d, e, q


def tql2(d_in, e_in, z=None, int max_iter=60):
    d = np.array(d_in, dtype=np.float64, copy=True)
    e = np.array(e_in, dtype=np.float64, copy=True)
    cdef double[::1] D = d
    cdef double[::1] E = e
    cdef Py_ssize_t n = D.shape[0]
    cdef bint vec = z is not None
    zt = np.array(z, dtype=np.float64).T.copy() if vec else np.zeros((1, 1))
    cdef double[:, ::1] Z = zt
    cdef Py_ssize_t l, m, i, k
    cdef int it
    cdef double f = 0.0, tst1 = 0.0
    cdef double g, p, r, dl1, h, c, c2, c3, el1, s, s2, zi, zi1

    for i in range(n - 1):
        E[i] = E[i + 1]
    E[n - 1] = 0.0
    for l in range(n):
        tst1 = max(tst1, fabs(D[l]) + fabs(E[l]))
        m = l
        while m < n - 1 and fabs(E[m]) > EPS * tst1:
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_iter:
                    raise EigenConvergenceError(
                        f"QL iteration did not converge for eigenvalue {l}")
                g = D[l]
                p = (D[l + 1] - g) / (2.0 * E[l])
                r = hypot(p, 1.0)
                if p < 0:
                    r = -r
                D[l] = E[l] / (p + r)
                D[l + 1] = E[l] * (p + r)
                dl1 = D[l + 1]
                h = g - D[l]
                for i in range(l + 2, n):
                    D[i] -= h
                f += h
                p = D[m]
                c = 1.0
                c2 = 1.0
                c3 = 1.0
                el1 = E[l + 1]
                s = 0.0
                s2 = 0.0
                i = m - 1
                while i >= l:
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * E[i]
                    h = c * p
                    r = hypot(p, E[i])
                    E[i + 1] = s * r
                    s = E[i] / r
                    c = p / r
                    p = c * D[i] - s * g
                    D[i + 1] = h + s * (c * g + s * D[i])
                    if vec:
                        for k in range(n):
                            zi = Z[i, k]
                            zi1 = Z[i + 1, k]
                            Z[i, k] = c * zi - s * zi1
                            Z[i + 1, k] = s * zi + c * zi1
                    i -= 1
                p = -s * s2 * c3 * el1 * E[l] / dl1
                E[l] = s * p
                D[l] = c * p
                if fabs(E[l]) <= EPS * tst1:
                    break
        D[l] += f
        E[l] = 0.0
    order = np.argsort(d, kind="stable")
    if not vec:
        return d[order], None
    return d[order], zt[order].T.copy()


def eigh(a, bint want_vectors=True):
    d, e, q = tridiagonalize(a, want_vectors)
    return tql2(d, e, q)


def normalized_constraint_grid(int n, g, double delta, double epsilon, double omega):
    cdef double[::1] G = np.ascontiguousarray(np.atleast_1d(g), dtype=np.float64)
    cdef Py_ssize_t npts = G.shape[0], j
    out = np.empty(npts, dtype=np.float64)
    cdef double[::1] O = out
    cdef double g2, q, q_prev, q_new, coef
    cdef double dq = 0.25 * delta * delta, w2 = omega * omega
    cdef int k
    for j in range(npts):
        g2 = G[j] * G[j]
        q_prev = 0.0
        q = 1.0
        for k in range(1, n + 1):
            coef = 4.0 * k * g2 + dq - k * k * w2 - k * epsilon * omega
            q_new = coef * q / (-k * k * w2)
            if k > 1:
                q_new -= 4.0 * (n - k + 1) * g2 * q_prev / (k * (k - 1.0) * w2 * w2)
            q_prev = q
            q = q_new
        O[j] = q
    if np.ndim(g) == 0:
        return out[0]
    return out.reshape(np.shape(g))
