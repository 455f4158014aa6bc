"""Pure numpy implementations of the hot kernels.

Same signatures and algorithms as the compiled ``_core`` module; used when
the extension is not built or when ``AQRM_PURE_PYTHON=1``.
"""
import math

import numpy as np

EPS = 2.0 ** -52


class EigenConvergenceError(ArithmeticError):
    pass


def tridiagonalize(a, want_vectors=True):
    """Householder reduction of a real symmetric matrix.

    Returns ``(d, e, q)`` with ``q.T @ a @ q`` tridiagonal, diagonal ``d`` and
    sub-diagonal ``e[1:]`` (``e[0] = 0``). ``q`` is None if not requested.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    vs = []
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = math.sqrt(float(x @ x))
        if alpha == 0.0:
            vs.append(None)
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm2 = float(v @ v)
        if vnorm2 == 0.0:
            vs.append(None)
            continue
        v /= math.sqrt(vnorm2)
        # A <- P A P with P = I - 2 v v^T on the trailing block
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        kk = float(v @ p)
        w = 2.0 * (p - kk * v)
        sub -= np.outer(v, w) + np.outer(w, v)
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = alpha
        vs.append(v)
    d = np.diagonal(a).copy()
    e = np.zeros(n)
    if n > 1:
        e[1:] = np.diagonal(a, -1)
    q = None
    if want_vectors:
        q = np.eye(n)
        for k in range(n - 3, -1, -1):
            v = vs[k]
            if v is None:
                continue
            blk = q[k + 1:, k + 1:]
            blk -= 2.0 * np.outer(v, v @ blk)
    return d, e, q


def tql2(d, e, z=None, max_iter=60):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    ``d`` diagonal, ``e[1:]`` sub-diagonal. If ``z`` is given the rotations are
    accumulated into its columns. Returns sorted eigenvalues and vectors.
    """
    d = np.array(d, dtype=float, copy=True)
    n = d.shape[0]
    e = np.array(e, dtype=float, copy=True)
    e[:-1] = e[1:]
    e[-1] = 0.0
    # rows of zt are the columns of z, kept contiguous for the rotations
    zt = None if z is None else np.array(z, dtype=float).T.copy()
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1 and abs(e[m]) > EPS * tst1:
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_iter:
                    raise EigenConvergenceError(
                        f"QL iteration did not converge for eigenvalue {l}")
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                d[l + 2:] -= h
                f += h
                p = d[m]
                c = c2 = c3 = 1.0
                el1 = e[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    if zt is not None:
                        zi = zt[i].copy()
                        zi1 = zt[i + 1]
                        zt[i] = c * zi - s * zi1
                        zt[i + 1] = s * zi + c * zi1
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= EPS * tst1:
                    break
        d[l] += f
        e[l] = 0.0
    order = np.argsort(d, kind="stable")
    if zt is None:
        return d[order], None
    return d[order], zt[order].T.copy()


def eigh(a, want_vectors=True):
    d, e, q = tridiagonalize(a, want_vectors)
    return tql2(d, e, q)


def normalized_constraint_grid(n, g, delta, epsilon, omega):
    """K_n^epsilon(g, delta) on an array of g via the scaled recurrence.

    The iterates are P_k / ((-1)^k (k!)^2 omega^(2k)), so the returned value is
    already normalised and never overflows for moderate g.
    """
    g2 = np.asarray(g, dtype=float) ** 2
    dq = 0.25 * delta * delta
    w2 = omega * omega
    q_prev = np.zeros_like(g2)
    q = np.ones_like(g2)
    for k in range(1, n + 1):
        coef = 4.0 * k * g2 + dq - k * k * w2 - k * epsilon * omega
        q_new = coef * q / (-k * k * w2)
        if k > 1:
            q_new -= 4.0 * (n - k + 1) * g2 * q_prev / (k * (k - 1) * w2 * w2)
        q_prev, q = q, q_new
    return q
