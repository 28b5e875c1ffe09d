"""The BANG discovery loop: sibling pruning, certification, ancestor pruning."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .config import DiscoveryConfig
from .graph import MixedGraph, topological_order_from_adjacency, transitive_closure
from .independence import OracleBackend, SampleBackend
from .moments import (MomentOracle, SingularSystem, adjusted_weights, debiased_effect,
                      pseudo_ancestors, residual_weights)

log = logging.getLogger(__name__)

# documented constant for the test-count audit: count <= BUDGET_CONSTANT * p^(J+3)
BUDGET_CONSTANT = 1.0


@dataclass
class DiscoveryState:
    D: np.ndarray
    pa_hat: list[set[int]]
    sib_hat: list[set[int]]
    l: int = 1
    test_count: int = 0
    sweep: int = 0
    audit: list[dict] = field(default_factory=list)

    @classmethod
    def initial(cls, p: int) -> "DiscoveryState":
        return cls(
            D=np.zeros((p, p)),
            pa_hat=[set() for _ in range(p)],
            sib_hat=[set(range(p)) - {v} for v in range(p)],
        )

    @property
    def p(self) -> int:
        return len(self.pa_hat)

    def check(self) -> list[str]:
        """Return violated state invariants (empty when consistent)."""
        bad = []
        for v in range(self.p):
            if self.pa_hat[v] & self.sib_hat[v]:
                bad.append(f"pa_hat({v}) meets sib_hat({v})")
            for u in self.sib_hat[v]:
                if v not in self.sib_hat[u]:
                    bad.append(f"sib_hat asymmetric on {{{u}, {v}}}")
            support = set(np.flatnonzero(self.D[v]).tolist())
            if not support <= self.pa_hat[v]:
                bad.append(f"D row {v} outside pa_hat({v})")
        R = transitive_closure(self.D != 0)
        if np.any(np.diag(R)):
            bad.append("pseudo-ancestor relation is cyclic")
        return bad

    def graph(self) -> MixedGraph:
        directed = [(u, v) for v in range(self.p) for u in self.pa_hat[v]]
        bidirected = [(u, v) for v in range(self.p) for u in self.sib_hat[v] if u < v]
        return MixedGraph(self.p, directed, bidirected)

    def certified_ever(self, v: int) -> set[int]:
        """Every vertex certified into ``pa_hat(v)`` at any point of the run."""
        out = set()
        for rec in self.audit:
            if rec["kind"] == "certify" and rec["v"] == v:
                out.update(rec["added"])
        return out


def _record(state: DiscoveryState, kind: str, v: int, C, dec, **extra) -> None:
    state.test_count += 1
    rec = {
        "kind": kind,
        "test_id": state.test_count,
        "sweep": state.sweep,
        "l": state.l,
        "v": v,
        "C": sorted(int(c) for c in C),
        "statistic": float(dec.statistic),
        "p_value": dec.p_value,
        "independent": bool(dec.independent),
        "diagnostic": dec.diagnostic,
    }
    rec.update(extra)
    state.audit.append(rec)
    log.debug("%s v=%d C=%s stat=%.4g indep=%s", kind, v, rec["C"], rec["statistic"],
              rec["independent"])


def prune_siblings(state: DiscoveryState, v: int, backend, cfg: DiscoveryConfig) -> DiscoveryState:
    """Drop ``u`` from ``sib_hat(v)`` when ``gamma_u(D)`` and ``gamma_v(D)`` test independent."""
    W = residual_weights(state.D)
    for u in sorted(state.sib_hat[v]):
        dec = backend.test(W[[u]], W[v], cfg)
        _record(state, "prune_sibling", v, [u], dec)
        if dec.independent:
            state.sib_hat[v].discard(u)
            state.sib_hat[u].discard(v)
    return state


def _creates_cycle(D: np.ndarray, v: int, C) -> bool:
    return v in pseudo_ancestors(D, C)


def certify_pseudo_parents(state: DiscoveryState, v: int, backend,
                           cfg: DiscoveryConfig) -> tuple[DiscoveryState, bool]:
    """Test every size-``l`` subset of ``sib_hat(v)`` and certify the passing ones."""
    l = state.l
    if l > len(state.sib_hat[v]):
        return state, False
    W = residual_weights(state.D)
    S = backend.S
    pa = state.pa_hat[v]
    accepted: set[int] = set()
    for C in itertools.combinations(sorted(state.sib_hat[v]), l):
        T = sorted(set(C) | pa)
        if _creates_cycle(state.D, v, T):
            continue
        try:
            wv = adjusted_weights(v, T, S, state.D)
        except SingularSystem:
            log.info("singular debiased-effect system for v=%d, C=%s; skipped", v, C)
            continue
        tested = T if cfg.retest_parents else sorted(C)
        dec = backend.test(W[tested], wv, cfg)
        _record(state, "certify_test", v, C, dec, tested=tested)
        if dec.independent:
            accepted.update(C)
    if not accepted:
        return state, False

    new_pa = sorted(pa | accepted)
    try:
        delta = debiased_effect(v, new_pa, pseudo_ancestors(state.D, new_pa), S, state.D)
    except SingularSystem:
        log.info("singular update system for v=%d, pa=%s; certification dropped", v, new_pa)
        return state, False
    state.pa_hat[v] = set(new_pa)
    state.D[v, :] = 0.0
    state.D[v, new_pa] = delta
    state.sib_hat[v] -= state.pa_hat[v]
    for s in state.pa_hat[v]:
        state.sib_hat[s].discard(v)
    state.audit.append({"kind": "certify", "sweep": state.sweep, "l": l, "v": v,
                        "added": sorted(accepted), "pa_hat": new_pa,
                        "effects": [float(x) for x in delta]})
    return state, True


def prune_ancestors(state: DiscoveryState, backend, cfg: DiscoveryConfig) -> DiscoveryState:
    """Remove certified ancestors that are not parents, in pseudo-topological order."""
    order = topological_order_from_adjacency(state.D != 0)
    S = backend.S
    for v in order:
        for s in sorted(state.pa_hat[v]):
            rest = sorted(state.pa_hat[v] - {s})
            try:
                wv = adjusted_weights(v, rest, S, state.D)
            except SingularSystem:
                continue
            W = residual_weights(state.D)
            dec = backend.test(W[[s]], wv, cfg)
            _record(state, "prune_ancestor", v, [s], dec)
            if dec.independent:
                state.pa_hat[v].discard(s)
                state.D[v, s] = 0.0
                state.audit.append({"kind": "remove_ancestor", "v": v, "s": s})
    return state


@dataclass
class DiscoveryResult:
    graph: MixedGraph
    state: DiscoveryState

    @property
    def audit(self) -> list[dict]:
        return self.state.audit

    @property
    def test_count(self) -> int:
        return self.state.test_count


def run_bang(backend, cfg: DiscoveryConfig | None = None, callback=None) -> DiscoveryResult:
    """Run the full procedure against a sample or oracle backend.

    ``callback(state)``, if given, is called after every per-vertex step of
    the main loop (before ancestor pruning).
    """
    cfg = DiscoveryConfig() if cfg is None else cfg
    p = backend.p
    state = DiscoveryState.initial(p)
    J = cfg.max_degree
    while max((len(s) for s in state.sib_hat), default=0) >= state.l:
        if J is not None and state.l > J:
            break
        state.sweep += 1
        updated = False
        for v in range(p):
            prune_siblings(state, v, backend, cfg)
            state, changed = certify_pseudo_parents(state, v, backend, cfg)
            updated |= changed
            if callback is not None:
                callback(state)
        state.l = 1 if updated else state.l + 1
    prune_ancestors(state, backend, cfg)
    return DiscoveryResult(state.graph(), state)


def discover(Y: np.ndarray, cfg: DiscoveryConfig | None = None) -> DiscoveryResult:
    """Convenience wrapper: run on an ``n x p`` data matrix."""
    return run_bang(SampleBackend(Y), cfg)


def discover_oracle(oracle: MomentOracle, cfg: DiscoveryConfig | None = None) -> DiscoveryResult:
    cfg = DiscoveryConfig(mode="oracle") if cfg is None else cfg
    return run_bang(OracleBackend(oracle), cfg)


def test_budget(state: DiscoveryState, J: int, constant: float = BUDGET_CONSTANT) -> tuple[int, bool]:
    """Tests executed and whether they fit in ``constant * p^(J+3)``."""
    bound = constant * state.p ** (J + 3)
    return state.test_count, state.test_count <= bound


test_budget.__test__ = False
