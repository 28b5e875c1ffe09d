"""Hot loops: empirical-likelihood Newton terms and moment-condition rows.

Each kernel has a pure-numpy implementation and a numba ``@njit`` one. The
numba path is used when numba imports and ``BANG_DISABLE_NUMBA`` is unset or
``0``; set ``BANG_DISABLE_NUMBA=1`` to force numpy.
"""

import os

import numpy as np

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("BANG_DISABLE_NUMBA", "0") in ("", "0")


def el_terms_numpy(w, lam, eps):
    """Pseudo-log EL objective, gradient and Hessian at ``lam``.

    ``log*(z) = log z`` for ``z >= eps`` and its second-order Taylor expansion
    around ``eps`` below, so the objective is finite and concave everywhere.
    Also returns ``min(1 + w @ lam)``.
    """
    z = 1.0 + w @ lam
    low = z < eps
    zc = np.where(low, eps, z)
    logz = np.log(zc)
    obj = np.where(low, np.log(eps) - 1.5 + 2.0 * z / eps - 0.5 * (z / eps) ** 2, logz)
    d1 = np.where(low, 2.0 / eps - z / eps**2, 1.0 / zc)
    d2 = np.where(low, -1.0 / eps**2, -1.0 / zc**2)
    grad = w.T @ d1
    hess = (w * d2[:, None]).T @ w
    return obj.sum(), grad, hess, z.min()


def el_objective_numpy(w, lam, eps):
    """Objective and ``min(1 + w @ lam)`` only, for line searches."""
    z = 1.0 + w @ lam
    low = z < eps
    obj = np.where(low, np.log(eps) - 1.5 + 2.0 * z / eps - 0.5 * (z / eps) ** 2,
                   np.log(np.where(low, eps, z)))
    return obj.sum(), z.min()


def moment_rows_numpy(gc, gv, k):
    """``g[i, j] = gc[j, i] ** (k - 1) * gv[i]`` for ``gc`` of shape ``(q, n)``."""
    return (gc ** (k - 1) * gv[None, :]).T.copy()


def centered_numpy(x):
    return x - x.mean(axis=-1, keepdims=True)


if NUMBA_AVAILABLE:

    @numba.njit(cache=True)
    def el_terms_numba(w, lam, eps):
        n, q = w.shape
        obj = 0.0
        grad = np.zeros(q)
        hess = np.zeros((q, q))
        zmin = np.inf
        log_eps = np.log(eps)
        for i in range(n):
            z = 1.0
            for a in range(q):
                z += w[i, a] * lam[a]
            if z < zmin:
                zmin = z
            if z < eps:
                t = z / eps
                obj += log_eps - 1.5 + 2.0 * t - 0.5 * t * t
                d1 = 2.0 / eps - z / (eps * eps)
                d2 = -1.0 / (eps * eps)
            else:
                obj += np.log(z)
                d1 = 1.0 / z
                d2 = -d1 * d1
            for a in range(q):
                wa = w[i, a]
                grad[a] += d1 * wa
                for b in range(a + 1):
                    hess[a, b] += d2 * wa * w[i, b]
        for a in range(q):
            for b in range(a):
                hess[b, a] = hess[a, b]
        return obj, grad, hess, zmin

    @numba.njit(cache=True)
    def el_objective_numba(w, lam, eps):
        n, q = w.shape
        obj = 0.0
        zmin = np.inf
        log_eps = np.log(eps)
        for i in range(n):
            z = 1.0
            for a in range(q):
                z += w[i, a] * lam[a]
            if z < zmin:
                zmin = z
            if z < eps:
                t = z / eps
                obj += log_eps - 1.5 + 2.0 * t - 0.5 * t * t
            else:
                obj += np.log(z)
        return obj, zmin

    @numba.njit(cache=True)
    def moment_rows_numba(gc, gv, k):
        q, n = gc.shape
        out = np.empty((n, q))
        for i in range(n):
            y = gv[i]
            for j in range(q):
                x = gc[j, i]
                acc = y
                for _ in range(k - 1):
                    acc *= x
                out[i, j] = acc
        return out

    @numba.njit(cache=True)
    def centered_numba(x):
        r, n = x.shape
        out = np.empty_like(x)
        for a in range(r):
            m = 0.0
            for i in range(n):
                m += x[a, i]
            m /= n
            for i in range(n):
                out[a, i] = x[a, i] - m
        return out


def el_terms(w, lam, eps):
    if USE_NUMBA:
        return el_terms_numba(np.ascontiguousarray(w, dtype=np.float64),
                              np.ascontiguousarray(lam, dtype=np.float64), float(eps))
    return el_terms_numpy(w, lam, eps)


def el_objective(w, lam, eps):
    if USE_NUMBA:
        return el_objective_numba(np.ascontiguousarray(w, dtype=np.float64),
                                  np.ascontiguousarray(lam, dtype=np.float64), float(eps))
    return el_objective_numpy(w, lam, eps)


def moment_rows(gc, gv, k):
    gc = np.atleast_2d(np.asarray(gc, dtype=np.float64))
    gv = np.asarray(gv, dtype=np.float64)
    if USE_NUMBA:
        return moment_rows_numba(np.ascontiguousarray(gc), np.ascontiguousarray(gv), int(k))
    return moment_rows_numpy(gc, gv, k)


def centered(x):
    """Subtract each row's mean; 1-d input is treated as a single row."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return centered(x[None, :])[0]
    if USE_NUMBA:
        return centered_numba(np.ascontiguousarray(x))
    return centered_numpy(x)
