from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

ORACLE_ZERO_TOL = 1e-9


@dataclass
class DiscoveryConfig:
    """Settings for one discovery run.

    ``test`` is ``"el"`` (empirical likelihood at level ``alpha``) or
    ``"threshold"`` (declare independence when every statistic is below
    ``eta / 2`` in absolute value). Oracle mode always uses the threshold rule,
    with ``eta`` defaulting to twice :data:`ORACLE_ZERO_TOL`.
    """

    K: int = 3
    test: str = "el"
    alpha: float = 0.01
    eta: float | None = None
    max_degree: int | None = None
    mode: str = "sample"
    seed: int | None = None
    max_el_iters: int = 50
    el_tol: float = 1e-8
    # also test E(gamma_v^{K-1} gamma_c); doubles the number of conditions
    both_directions: bool = True
    # test every certified parent together with the new candidates
    retest_parents: bool = True

    def __post_init__(self):
        if self.K not in (3, 4):
            raise ValueError(f"K must be 3 or 4, got {self.K}")
        if self.test not in ("el", "threshold"):
            raise ValueError(f"unknown test kind {self.test!r}")
        if self.mode not in ("sample", "oracle"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_degree is not None and self.max_degree < 1:
            raise ValueError("max_degree must be at least 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.test == "threshold" and self.mode == "sample" and self.eta is None:
            raise ValueError("threshold test needs eta")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be positive")

    @property
    def oracle_eta(self) -> float:
        return self.eta if self.eta is not None else 2 * ORACLE_ZERO_TOL

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "DiscoveryConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in obj.items() if k in names})

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)
