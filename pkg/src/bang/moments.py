"""Residuals, debiased direct effects and cross-moments.

Residuals are represented as linear combinations of the observed variables:
a length-``p`` weight vector ``w`` stands for ``w @ Y``. Realizing it against
a *base* gives the residual itself, either as ``n`` observations (base is the
centered data ``Y^T``) or as coefficients over independent latent sources
(base is the total mixing matrix ``(I - B)^{-1} L``).
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .graph import transitive_closure
from .sem import SemParameters, UnsupportedOracle, source_moment

RCOND_MIN = 1e-12


class SingularSystem(np.linalg.LinAlgError):
    pass


def _solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if M.size == 0:
        return np.zeros(rhs.shape)
    if 1.0 / np.linalg.cond(M) < RCOND_MIN:
        raise SingularSystem("ill-conditioned system")
    return np.linalg.solve(M, rhs)


def pseudo_ancestors(D: np.ndarray, C: Iterable[int]) -> list[int]:
    """Vertices reachable backwards from ``C`` through the support of ``D``, plus ``C``."""
    C = list(C)
    if not C:
        return []
    R = transitive_closure(D != 0)
    out = set(C)
    for c in C:
        out.update(np.flatnonzero(R[c]).tolist())
    return sorted(out)


def residual_weights(D: np.ndarray) -> np.ndarray:
    """Rows of ``I - D``: ``gamma_c(D) = (I - D)[c] @ Y``."""
    return np.eye(len(D)) - D


def residuals(base: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Realize every ``gamma_c(D)`` against ``base`` (shape ``p x N``)."""
    D = np.asarray(D, dtype=float)
    if D.shape != (base.shape[0], base.shape[0]):
        raise ValueError(f"D has shape {D.shape}, expected {(base.shape[0],) * 2}")
    return residual_weights(D) @ base


def debiased_effect(v: int, C: Sequence[int], A: Sequence[int], S: np.ndarray,
                    D: np.ndarray) -> np.ndarray:
    """Direct effects of ``C`` on ``v`` corrected for upstream confounding.

    Solves ``[(I-D)_{C,A} S_{A,C}] delta = (I-D)_{C,A} S_{A,v}``. Raises
    :class:`SingularSystem` when the ``|C| x |C|`` system is ill-conditioned.
    """
    C = list(C)
    A = list(A)
    if not C:
        return np.zeros(0)
    if not set(C) <= set(A):
        raise ValueError("C must be a subset of A")
    if v in A:
        raise ValueError("v must not belong to A")
    lam = residual_weights(D)[np.ix_(C, A)]
    M = lam @ S[np.ix_(A, C)]
    rhs = lam @ S[A, v]
    return _solve(M, rhs)


def adjusted_weights(v: int, C: Sequence[int], S: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Weight vector of ``gamma_v(C, S, D) = Y_v - delta @ Y_C`` with ``A = psAn(C)``."""
    C = sorted(C)
    w = np.zeros(len(D))
    w[v] = 1.0
    if C:
        delta = debiased_effect(v, C, pseudo_ancestors(D, C), S, D)
        w[C] -= delta
    return w


def adjusted_residual(base: np.ndarray, v: int, C: Sequence[int], S: np.ndarray,
                      D: np.ndarray) -> np.ndarray:
    return adjusted_weights(v, C, S, D) @ base


def sample_cross_moment(x: np.ndarray, y: np.ndarray, K: int) -> float:
    """Empirical ``E(x^{K-1} y)`` after centering both vectors."""
    if K not in (3, 4):
        raise ValueError(f"unsupported moment order K={K}")
    x = _kernels.centered(x)
    y = _kernels.centered(y)
    if x.shape != y.shape:
        raise ValueError("vectors must have equal length")
    return float(np.mean(x ** (K - 1) * y))


class MomentOracle:
    """Exact moments of linear forms in independent standardized sources.

    ``mixing`` maps sources to observed variables (``p x m``); ``mu3`` and
    ``mu4`` hold the third and fourth moments of every source.
    """

    def __init__(self, mixing: np.ndarray, mu3: np.ndarray, mu4: np.ndarray):
        self.mixing = np.asarray(mixing, dtype=float)
        m = self.mixing.shape[1]
        self.mu3 = np.broadcast_to(np.asarray(mu3, dtype=float), (m,)).copy()
        self.mu4 = np.broadcast_to(np.asarray(mu4, dtype=float), (m,)).copy()

    @classmethod
    def from_params(cls, params: SemParameters, family: str) -> "MomentOracle":
        if family == "lognormal":
            raise UnsupportedOracle("lognormal errors have no latent-source moment oracle")
        return cls(params.mixing(), source_moment(family, 3), source_moment(family, 4))

    @property
    def covariance(self) -> np.ndarray:
        S = self.mixing @ self.mixing.T
        return (S + S.T) / 2

    def cross_moment(self, a: np.ndarray, b: np.ndarray, K: int) -> float:
        """``E[(a.h)^{K-1} (b.h)]`` for source-coefficient vectors ``a``, ``b``."""
        return oracle_cross_moment(a, b, K, self.mu3, self.mu4)

    def to_dict(self) -> dict:
        return {"mixing": self.mixing.tolist(), "mu3": self.mu3.tolist(), "mu4": self.mu4.tolist()}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def oracle_cross_moment(a, b, K, mu3, mu4) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if K == 3:
        return float(np.sum(a * a * b * mu3))
    if K == 4:
        # sum_i a_i^3 b_i mu4_i + 3 sum_{i != j} a_i^2 a_j b_j
        return float(np.sum(a**3 * b * (mu4 - 3.0)) + 3.0 * np.dot(a, a) * np.dot(a, b))
    raise ValueError(f"unsupported moment order K={K}")


def marginal_effects(B: np.ndarray, A: Sequence[int]) -> np.ndarray:
    """Direct effects among ``A`` after marginalizing the other vertices.

    Returns ``I - [((I - B)^{-1})_{A,A}]^{-1}`` indexed in the order of ``A``.
    """
    A = list(A)
    if not A:
        raise ValueError("A must be nonempty")
    p = len(B)
    T = np.linalg.solve(np.eye(p) - B, np.eye(p))
    sub = T[np.ix_(A, A)]
    return np.eye(len(A)) - _solve(sub, np.eye(len(A)))


def path_weight_sum(B: np.ndarray, u: int, v: int, avoid: Iterable[int] = ()) -> float:
    """Sum of path weights over directed paths ``u -> ... -> v`` avoiding ``avoid`` inside."""
    avoid = set(avoid)
    p = len(B)
    total = 0.0

    def walk(node, weight, seen):
        nonlocal total
        for nxt in range(p):
            b = B[nxt, node]
            if b == 0 or nxt in seen:
                continue
            if nxt == v:
                total += weight * b
            elif nxt not in avoid:
                walk(nxt, weight * b, seen | {nxt})

    if u != v:
        walk(u, 1.0, {u})
    return total


def effects_from_sets(B: np.ndarray, sets: dict[int, Iterable[int]]) -> np.ndarray:
    """Effect matrix whose row ``v`` holds marginal effects of ``sets[v]`` on ``v``."""
    p = len(B)
    D = np.zeros((p, p))
    for v, C in sets.items():
        C = sorted(set(C) - {v})
        if not C:
            continue
        A = C + [v]
        Bt = marginal_effects(B, A)
        D[v, C] = Bt[-1, :-1]
    return D
