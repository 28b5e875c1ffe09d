"""Decide whether ``E(gamma_c^{K-1} gamma_v) = 0`` jointly over a set of regressors."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels
from .config import DiscoveryConfig
from .moments import MomentOracle, oracle_cross_moment

log = logging.getLogger(__name__)


@dataclass
class TestDecision:
    independent: bool
    statistic: float
    reference: str
    p_value: float | None = None
    df: int | None = None
    diagnostic: str | None = None
    iterations: int = 0
    lower_bound: bool = False

    __test__ = False  # not a pytest class


def threshold_test(statistics, eta: float) -> TestDecision:
    """Independent iff every ``|statistic| < eta / 2``."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    s = np.abs(np.atleast_1d(np.asarray(statistics, dtype=float)))
    top = float(s.max()) if s.size else 0.0
    return TestDecision(top < eta / 2, top, f"threshold {eta / 2:g}")


DECREMENT_TOL = 1e-10


class ConstraintViolation(AssertionError):
    pass


def el_test(g, alpha: float, max_iter: int = 50, tol: float = 1e-8,
            early_stop: bool = False) -> TestDecision:
    """Empirical-likelihood test of ``E(g_i) = 0`` for the rows of ``g``.

    The dual ``max_lam sum_i log(1 + lam . g_i)`` is solved by damped Newton
    on a pseudo-logarithm that is quadratic below ``1/n``; every accepted
    iterate keeps all weights ``1 + lam . g_i`` positive. The ratio statistic
    ``2 sum log(1 + lam . g_i)`` is referred to chi-square with as many degrees
    of freedom as ``g`` has linearly independent columns.

    Non-convergence and degenerate columns are reported as dependence.

    Any feasible multiplier gives a lower bound on the maximized dual, so with
    ``early_stop`` the solver returns as soon as the bound exceeds the
    critical value; the decision is unchanged but ``statistic`` is then only
    a lower bound.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    n, q = g.shape
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n <= q:
        raise ValueError(f"need more rows than conditions (n={n}, q={q})")
    if not np.all(np.isfinite(g)):
        return TestDecision(False, np.inf, "chi2", 0.0, q, "non-finite moment conditions")

    g = g[:, np.any(g != 0, axis=0)]
    if g.shape[1] == 0:
        return TestDecision(True, 0.0, "chi2 df=0", 1.0, 0)
    mean = g.mean(axis=0)
    sd = g.std(axis=0)
    if np.any(sd <= 1e-12 * np.abs(mean)):
        return TestDecision(False, np.inf, "chi2", 0.0, g.shape[1], "degenerate column")

    # whiten with the uncentered second-moment matrix; drops collinear columns
    G = g.T @ g / n
    evals, evecs = np.linalg.eigh(G)
    keep = evals > 1e-10 * evals.max()
    w = g @ (evecs[:, keep] / np.sqrt(evals[keep]))
    df = int(keep.sum())

    eps = 1.0 / n
    crit = float(stats.chi2.isf(alpha, df)) if early_stop else np.inf
    lam = np.zeros(df)
    obj, grad, hess, zmin = _kernels.el_terms(w, lam, eps)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(grad)) / n < tol:
            converged = True
            break
        try:
            step = np.linalg.solve(-hess, grad)
        except np.linalg.LinAlgError:
            step = grad / n
        # Newton decrement: predicted objective gain; sums over large n
        # saturate the gradient near 1e-7 in double precision
        if float(grad @ step) < DECREMENT_TOL:
            converged = True
            break
        t = 1.0
        while True:
            cand = lam + t * step
            c_obj, c_zmin = _kernels.el_objective(w, cand, eps)
            if c_zmin > 0 and c_obj >= obj:
                break
            t *= 0.5
            if t < 1e-12:
                break
        if t < 1e-12:
            break
        lam = cand
        obj, grad, hess, zmin = _kernels.el_terms(w, lam, eps)
        if zmin <= 0:
            raise ConstraintViolation("EL weights left the positive orthant")
        if 2.0 * obj > crit:
            return TestDecision(False, 2.0 * obj, f"chi2 df={df}", float(stats.chi2.sf(2.0 * obj, df)),
                                df, None, it, lower_bound=True)

    stat = max(2.0 * obj, 0.0)
    pval = float(stats.chi2.sf(stat, df))
    if not converged:
        log.debug("EL solver did not converge after %d iterations (stat=%.3g)", it, stat)
        return TestDecision(False, stat, f"chi2 df={df}", pval, df, "no convergence", it)
    return TestDecision(pval > alpha, stat, f"chi2 df={df}", pval, df, None, it)


def moment_conditions(gc, gv, K: int, both_directions: bool = False) -> np.ndarray:
    """Rows ``(gamma_c^{K-1} gamma_v)_c`` per observation; ``gc`` is ``q x n``."""
    gc = np.atleast_2d(gc)
    g = _kernels.moment_rows(gc, gv, K)
    if both_directions:
        rev = np.column_stack([_kernels.moment_rows(gv[None, :], row, K)[:, 0] for row in gc])
        g = np.hstack([g, rev])
    return g


def joint_residual_test(gc, gv, cfg: DiscoveryConfig) -> TestDecision:
    """Test all regressor residuals in ``gc`` (``q x n``) against ``gv`` at once."""
    gc = np.atleast_2d(np.asarray(gc, dtype=float))
    gv = np.asarray(gv, dtype=float)
    if gc.shape[0] == 0:
        raise ValueError("need at least one regressor residual")
    if gc.shape[1] != gv.shape[0]:
        raise ValueError("residual vectors must have equal length")
    g = moment_conditions(gc, gv, cfg.K, cfg.both_directions)
    if cfg.test == "threshold":
        return threshold_test(g.mean(axis=0), cfg.eta)
    return el_test(g, cfg.alpha, cfg.max_el_iters, cfg.el_tol, early_stop=True)


class SampleBackend:
    """Residuals realized on centered data; covariance normalized by ``n``."""

    mode = "sample"

    def __init__(self, Y: np.ndarray):
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2:
            raise ValueError("data must be an n x p matrix")
        self.base = np.ascontiguousarray(_kernels.centered(Y.T))
        self.n = Y.shape[0]
        self.S = self.base @ self.base.T / self.n

    @property
    def p(self) -> int:
        return self.base.shape[0]

    def test(self, wc: np.ndarray, wv: np.ndarray, cfg: DiscoveryConfig) -> TestDecision:
        gc = np.atleast_2d(wc) @ self.base
        gv = wv @ self.base
        return joint_residual_test(gc, gv, cfg)


class OracleBackend:
    """Exact population moments through a :class:`MomentOracle`."""

    mode = "oracle"

    def __init__(self, oracle: MomentOracle):
        self.oracle = oracle
        self.base = oracle.mixing
        self.S = oracle.covariance

    @property
    def p(self) -> int:
        return self.base.shape[0]

    def statistics(self, wc, wv, K: int, both_directions: bool = False) -> np.ndarray:
        A = np.atleast_2d(wc) @ self.base
        b = wv @ self.base
        o = self.oracle
        out = [oracle_cross_moment(a, b, K, o.mu3, o.mu4) for a in A]
        if both_directions:
            out += [oracle_cross_moment(b, a, K, o.mu3, o.mu4) for a in A]
        return np.array(out)

    def test(self, wc, wv, cfg: DiscoveryConfig) -> TestDecision:
        return threshold_test(self.statistics(wc, wv, cfg.K, cfg.both_directions), cfg.oracle_eta)


class ShadowBackend:
    """Oracle decisions drive the run; a sample backend is evaluated alongside.

    ``records`` collects ``(oracle_independent, sample_independent)`` pairs so
    the agreement rate of a finite-sample test with the exact decision can be
    measured on exactly the calls a population run makes.
    """

    mode = "oracle"

    def __init__(self, oracle: OracleBackend, sample: SampleBackend, sample_cfg: DiscoveryConfig):
        self.oracle = oracle
        self.sample = sample
        self.sample_cfg = sample_cfg
        self.base = oracle.base
        self.S = oracle.S
        self.records: list[tuple[bool, bool]] = []

    @property
    def p(self) -> int:
        return self.oracle.p

    def test(self, wc, wv, cfg: DiscoveryConfig) -> TestDecision:
        dec = self.oracle.test(wc, wv, cfg)
        sdec = self.sample.test(wc, wv, self.sample_cfg)
        self.records.append((dec.independent, sdec.independent))
        return dec

    def agreement(self) -> float:
        if not self.records:
            return 1.0
        return float(np.mean([a == b for a, b in self.records]))
