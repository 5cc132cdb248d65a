"""Restricted cones over which the invertibility factors are computed.

The cone of index (xi, S) with weight bound w collects the directions b
with |W_{S^c} b_{S^c}|_1 <= xi |b_S|_1 != 0; estimation errors live
there on the high-probability noise event.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError

__all__ = ["ConeSpec"]


@dataclass(frozen=True)
class ConeSpec:
    """Cone aperture xi, support index set S, and weight bound w.

    ``w_bound`` may be None (all-ones) or a length-p vector; entries on
    the complement of S must be positive, otherwise the cone degenerates.
    """

    xi: float
    support: tuple
    w_bound: np.ndarray | None = None

    def __post_init__(self):
        if not self.xi > 0:
            raise DomainError("xi must be positive")
        support = tuple(sorted(int(j) for j in self.support))
        if len(support) == 0:
            raise DomainError("support must be nonempty")
        if len(set(support)) != len(support):
            raise DomainError("support has repeated indices")
        object.__setattr__(self, "support", support)

    def with_xi(self, xi: float) -> "ConeSpec":
        return ConeSpec(xi=xi, support=self.support, w_bound=self.w_bound)

    def indices(self, p: int) -> tuple[np.ndarray, np.ndarray]:
        """(support, complement) index arrays for dimension p."""
        s = np.asarray(self.support, dtype=int)
        if s.min(initial=0) < 0 or (s.size and s.max() >= p):
            raise DomainError("support indices out of range for p")
        mask = np.zeros(p, dtype=bool)
        mask[s] = True
        return s, np.flatnonzero(~mask)

    def resolved_w(self, p: int) -> np.ndarray:
        if self.w_bound is None:
            return np.ones(p)
        w = np.asarray(self.w_bound, dtype=float).ravel()
        if w.shape[0] != p:
            raise DomainError(f"w_bound length {w.shape[0]} != p = {p}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("w_bound must be finite and nonnegative")
        _, comp = self.indices(p)
        if np.any(w[comp] <= 0):
            raise DomainError("w_bound must be positive off the support")
        return w

    def contains(self, b: np.ndarray, tol: float = 1e-12) -> bool:
        b = np.asarray(b, dtype=float).ravel()
        p = b.shape[0]
        s, comp = self.indices(p)
        w = self.resolved_w(p)
        s1 = float(np.sum(np.abs(b[s])))
        if s1 == 0.0:
            return False
        off = float(np.sum(w[comp] * np.abs(b[comp]))) if comp.size else 0.0
        return off <= self.xi * s1 * (1.0 + tol) + tol
