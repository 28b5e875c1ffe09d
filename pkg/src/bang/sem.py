"""Linear SEM parameters, latent-source factorization and data simulation."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graph import MixedGraph, validate

FAMILIES = ("gamma", "uniform", "lognormal", "t13", "gaussian")

_T_DF = 13

# standardized source moments (mu1 = 0, mu2 = 1)
_MOMENTS = {
    "gamma": {3: 2.0, 4: 9.0},  # shape 1: Exp(1) - 1
    "uniform": {3: 0.0, 4: 1.8},
    "t13": {3: 0.0, 4: 3.0 + 6.0 / (_T_DF - 4)},
    "gaussian": {3: 0.0, 4: 3.0},
}

# default moment order per error family: 3 when skewed, 4 when symmetric
DEFAULT_K = {"gamma": 3, "lognormal": 3, "uniform": 4, "t13": 4, "gaussian": 4}

MIN_EIGENVALUE = 0.01
SHRINK = 0.97


class UnsupportedOracle(ValueError):
    """Raised when exact population moments are unavailable for a family."""


def source_moment(family: str, k: int) -> float:
    """Standardized ``k``-th moment of a single source of ``family``."""
    if family == "lognormal":
        raise UnsupportedOracle("lognormal errors have no latent-source moment oracle")
    if family not in _MOMENTS:
        raise ValueError(f"unknown error family {family!r}")
    if k == 1:
        return 0.0
    if k == 2:
        return 1.0
    return _MOMENTS[family][k]


def sample_sources(family: str, size, rng: np.random.Generator) -> np.ndarray:
    """Independent standardized draws (mean 0, variance 1) of ``family``."""
    if family == "gamma":
        return rng.standard_exponential(size) - 1.0
    if family == "uniform":
        return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size)
    if family == "t13":
        return rng.standard_t(_T_DF, size) / np.sqrt(_T_DF / (_T_DF - 2.0))
    if family == "gaussian":
        return rng.standard_normal(size)
    raise ValueError(f"unknown error family {family!r}")


@dataclass(frozen=True)
class SemParameters:
    graph: MixedGraph
    B: np.ndarray
    Omega: np.ndarray
    L: np.ndarray

    @property
    def p(self) -> int:
        return self.graph.p

    def total_effects(self) -> np.ndarray:
        """``(I - B)^{-1}``."""
        return np.linalg.solve(np.eye(self.p) - self.B, np.eye(self.p))

    def mixing(self) -> np.ndarray:
        """Total mixing matrix from independent sources to ``Y``."""
        return self.total_effects() @ self.L

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "B": self.B.tolist(),
            "Omega": self.Omega.tolist(),
            "L": self.L.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SemParameters":
        g = MixedGraph.from_dict(obj["graph"])
        B = np.asarray(obj["B"], dtype=float)
        Omega = np.asarray(obj["Omega"], dtype=float)
        L = np.asarray(obj["L"], dtype=float) if "L" in obj else latent_factorization(Omega, g)[0]
        return cls(g, B, Omega, L)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "SemParameters":
        return cls.from_dict(json.loads(text))


def _shrink_until_pd(Omega: np.ndarray) -> np.ndarray:
    Omega = Omega.copy()
    off = ~np.eye(len(Omega), dtype=bool)
    while np.linalg.eigvalsh(Omega).min() <= MIN_EIGENVALUE:
        Omega[off] *= SHRINK
    return Omega


def latent_factorization(Omega: np.ndarray, graph: MixedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Factor ``Omega = L L^T`` with one source per vertex and per bidirected edge.

    The confounder column of edge ``{u, v}`` carries ``sqrt|w|`` at ``u`` and
    ``sign(w) sqrt|w|`` at ``v``. The remaining variance at each vertex goes to
    its idiosyncratic source. If some idiosyncratic variance drops to 0.01 or
    below, the off-diagonal entries are shrunk by 0.97 and the split retried.

    Returns ``(L, Omega_used)``; ``Omega_used`` differs from the input only
    when shrinking was needed.
    """
    Omega = np.array(Omega, dtype=float)
    p = graph.p
    edges = sorted(graph.bidirected)
    off = ~np.eye(p, dtype=bool)
    while True:
        L = np.zeros((p, p + len(edges)))
        used = np.zeros(p)
        for k, (u, v) in enumerate(edges):
            w = Omega[u, v]
            r = np.sqrt(abs(w))
            L[u, p + k] = r
            L[v, p + k] = np.sign(w) * r
            used[u] += abs(w)
            used[v] += abs(w)
        idio = np.diag(Omega) - used
        if idio.min() > MIN_EIGENVALUE:
            L[np.arange(p), np.arange(p)] = np.sqrt(idio)
            return L, Omega
        Omega[off] *= SHRINK


def draw_parameters(graph: MixedGraph, signed: bool = True,
                    rng: np.random.Generator | None = None) -> SemParameters:
    """Random parameters: edge weights in (.6, 1), error correlations in (.3, .5).

    With ``signed`` each magnitude gets an independent random sign; otherwise
    all weights and error covariances are positive.
    """
    rng = np.random.default_rng() if rng is None else rng
    problems = validate(graph)
    if problems:
        raise ValueError("graph is not a BAP: " + "; ".join(problems))
    p = graph.p

    def draw(lo, hi):
        x = rng.uniform(lo, hi)
        return x * rng.choice((-1.0, 1.0)) if signed else x

    B = np.zeros((p, p))
    for u, v in sorted(graph.directed):
        B[v, u] = draw(0.6, 1.0)
    Omega = np.eye(p)
    for u, v in sorted(graph.bidirected):
        Omega[u, v] = Omega[v, u] = draw(0.3, 0.5)
    Omega = _shrink_until_pd(Omega)
    L, Omega = latent_factorization(Omega, graph)
    return SemParameters(graph, B, Omega, L)


def implied_covariance(params: SemParameters) -> np.ndarray:
    """``(I - B)^{-1} Omega (I - B)^{-T}``."""
    p = params.p
    lam = np.eye(p) - params.B
    if np.linalg.cond(lam) > 1e12:
        raise np.linalg.LinAlgError("I - B is singular")
    T = np.linalg.solve(lam, np.eye(p))
    S = T @ params.Omega @ T.T
    return (S + S.T) / 2


def sample_errors(params: SemParameters, family: str, n: int,
                  rng: np.random.Generator) -> np.ndarray:
    """``n x p`` matrix of errors with covariance ``Omega``."""
    if family == "lognormal":
        # exponentiate Gaussians with covariance Omega, then standardize each margin
        z = rng.standard_normal((n, params.L.shape[1])) @ params.L.T
        s2 = np.diag(params.Omega)
        mean = np.exp(s2 / 2)
        sd = np.sqrt((np.exp(s2) - 1) * np.exp(s2))
        return (np.exp(z) - mean) / sd
    h = sample_sources(family, (n, params.L.shape[1]), rng)
    return h @ params.L.T


def sample_data(params: SemParameters, family: str, n: int,
                rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw ``n`` observations ``Y = (I - B)^{-1} eps`` as an ``n x p`` array."""
    rng = np.random.default_rng() if rng is None else rng
    if family not in FAMILIES:
        raise ValueError(f"unknown error family {family!r}")
    eps = sample_errors(params, family, n, rng)
    return eps @ params.total_effects().T
