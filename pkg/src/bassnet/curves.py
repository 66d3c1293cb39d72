"""Adoption-curve containers shared by the exact, Monte Carlo and io layers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["AdoptionCurve", "ExactCurve", "EnsembleEstimate"]


@dataclass
class AdoptionCurve:
    """Aggregate curve ``f(t)`` on a time grid.

    ``f_nodes`` has shape ``(M, len(t))`` when per-node curves are known.
    ``se``/``node_se`` are Monte Carlo standard errors (``None`` for exact or
    formula curves). ``lower``/``upper`` hold bound columns read back from a
    curve file. ``meta`` carries ``p``, ``q``, ``M``, ``source`` and the
    like; ``p``/``q`` are present only for networks homogeneous in both.
    """

    t: np.ndarray
    f: np.ndarray
    se: np.ndarray | None = None
    f_nodes: np.ndarray | None = None
    node_se: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    @property
    def source(self) -> str:
        return self.meta.get("source", "mc" if self.se is not None else "exact")

    @property
    def params(self):
        from .analytic import BassParams

        if self.meta.get("p") is None or self.meta.get("q") is None:
            return None
        return BassParams(float(self.meta["p"]), float(self.meta["q"]))

    def at(self, t_probe: float, rtol: float = 1e-12) -> int:
        """Grid index of ``t_probe``; no interpolation."""
        idx = int(np.argmin(np.abs(self.t - t_probe)))
        if abs(self.t[idx] - t_probe) > rtol * max(1.0, abs(t_probe)):
            raise ValueError(f"t_probe={t_probe} is not on the curve grid")
        return idx


@dataclass
class ExactCurve(AdoptionCurve):
    """Exact solution; ``pairs[(i, j)]`` is the joint nonadoption ``P(X_i = X_j = 0)``."""

    pairs: dict = field(default_factory=dict)
    mass: np.ndarray | None = None

    @property
    def nonadoption(self) -> np.ndarray:
        return 1.0 - self.f_nodes


@dataclass
class EnsembleEstimate(AdoptionCurve):
    runs: int = 0
    base_seed: int | None = None
