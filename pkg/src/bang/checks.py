"""Population-level property checks on random instances.

Each ``*_instance`` function draws one random configuration and returns the
quantity a property is stated about, so callers can aggregate over many draws
(the acceptance suite and the ``oracle-suite`` command both do).
"""

from __future__ import annotations

import itertools

import numpy as np

from .graph import random_bap
from .independence import OracleBackend
from .moments import (MomentOracle, SingularSystem, adjusted_weights, debiased_effect,
                      effects_from_sets, marginal_effects, path_weight_sum, pseudo_ancestors,
                      residual_weights)
from .sem import draw_parameters, implied_covariance


def _random_subset(rng, items):
    items = sorted(items)
    return {x for x in items if rng.random() < 0.5}


def _instance_setup(rng, p=6, d=8, b=5, max_tries=100):
    """Random graph, parameters, ``v`` and ``pa(v) <= C <= an(v) - sib(v)`` with ``C`` nonempty."""
    for _ in range(max_tries):
        g = random_bap(p, d, b, rng=rng)
        params = draw_parameters(g, rng=rng)
        R = g.ancestor_matrix()
        choices = []
        for v in range(p):
            an = set(np.flatnonzero(R[v]).tolist())
            allowed = an - g.siblings(v)
            if allowed:
                choices.append((v, an, allowed))
        if not choices:
            continue
        v, an, allowed = choices[rng.integers(len(choices))]
        pa = g.parents(v)
        C = pa | _random_subset(rng, allowed - pa)
        if not C:
            C = {sorted(allowed)[rng.integers(len(allowed))]}
        return g, params, v, sorted(C)
    raise RuntimeError("could not draw an instance")


def debiased_effect_instance(rng, **kw) -> float:
    """``max |delta - B[v, C]|`` when the upstream effects are known exactly."""
    g, params, v, C = _instance_setup(rng, **kw)
    R = g.ancestor_matrix()
    A = sorted(set(C) | {a for c in C for a in np.flatnonzero(R[c]).tolist()})
    D = np.zeros_like(params.B)
    D[np.ix_(A, A)] = params.B[np.ix_(A, A)]
    S = implied_covariance(params)
    delta = debiased_effect(v, C, A, S, D)
    return float(np.max(np.abs(delta - params.B[v, C])))


def sufficiency_instance(rng, K=3, family="gamma", **kw) -> float:
    """Largest ``|E(gamma_c^{K-1} gamma_v)|`` over ``c`` in a valid ``C``."""
    g, params, v, C = _instance_setup(rng, **kw)
    R = g.ancestor_matrix()
    A = sorted(set(C) | {a for c in C for a in np.flatnonzero(R[c]).tolist()})
    D = np.zeros_like(params.B)
    D[np.ix_(A, A)] = params.B[np.ix_(A, A)]
    ob = OracleBackend(MomentOracle.from_params(params, family))
    wv = adjusted_weights(v, C, ob.S, D)
    W = residual_weights(D)
    return float(np.max(np.abs(ob.statistics(W[C], wv, K))))


def sibling_necessity_instance(rng, K=3, family="gamma", p=6, d=5, b=5,
                               max_tries=200) -> float | None:
    """Largest ``|E(gamma_c^{K-1} gamma_v)|`` when ``C`` contains a sibling of ``v``.

    ``D`` is built from marginal effects of random ancestor sets. Returns None
    if no admissible configuration was found.
    """
    for _ in range(max_tries):
        g = random_bap(p, d, b, rng=rng)
        if not g.bidirected:
            continue
        params = draw_parameters(g, rng=rng)
        R = g.ancestor_matrix()
        sets = {u: _random_subset(rng, np.flatnonzero(R[u]).tolist()) for u in range(p)}
        D = effects_from_sets(params.B, sets)
        u, v = sorted(g.bidirected)[rng.integers(len(g.bidirected))]
        if rng.random() < 0.5:
            u, v = v, u
        others = set(range(p)) - {u, v}
        C = sorted({u} | _random_subset(rng, others))
        if v in pseudo_ancestors(D, C):
            continue
        ob = OracleBackend(MomentOracle.from_params(params, family))
        try:
            wv = adjusted_weights(v, C, ob.S, D)
        except SingularSystem:
            continue
        W = residual_weights(D)
        return float(np.max(np.abs(ob.statistics(W[C], wv, K))))
    return None


def marginal_path_instance(rng, p: int) -> float:
    """Largest gap between the matrix formula and path enumeration over all subsets."""
    d = int(rng.integers(0, p * (p - 1) // 2 + 1))
    g = random_bap(p, d, 0, rng=rng)
    B = draw_parameters(g, rng=rng).B
    return marginal_path_gap(B)


def marginal_path_gap(B: np.ndarray) -> float:
    """Compare ``marginal_effects(B, A)`` to ``path_weight_sum`` for every ``A`` and pair."""
    p = len(B)
    worst = 0.0
    for r in range(1, p + 1):
        for A in itertools.combinations(range(p), r):
            Bt = marginal_effects(B, A)
            avoid = set(A)
            for i, v in enumerate(A):
                for j, u in enumerate(A):
                    if u == v:
                        continue
                    ref = path_weight_sum(B, u, v, avoid - {u, v})
                    worst = max(worst, abs(Bt[i, j] - ref))
    return worst
