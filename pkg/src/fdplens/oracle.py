"""Brute-force closed testing over the full subset lattice (test-time ground truth).

Guarded to m <= 14; beyond that the 2^m tables stop being a sensible oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .study import PValueStudy, SubsetSelection

__all__ = ["ClosureTable", "build_closure", "oracle_t"]

MAX_ORACLE_M = 14


@dataclass
class ClosureTable:
    """Membership bitsets over all 2^m index sets; bit j of a mask is hypothesis j+1."""

    m: int
    alpha: float
    u_member: np.ndarray
    x_member: np.ndarray
    _t_all: np.ndarray | None = field(default=None, repr=False)

    def mask_of(self, selection: SubsetSelection) -> int:
        if selection.m != self.m:
            raise ValueError("selection built for a different m")
        mask = 0
        for i in selection.index_list:
            mask |= 1 << (i - 1)
        return mask

    def t_all(self) -> np.ndarray:
        """t for every mask at once: subset-max of |I| over I not in the closure."""
        if self._t_all is None:
            masks = np.arange(1 << self.m, dtype=np.int64)
            pop = _popcounts(self.m)
            g = np.where(self.x_member, -1, pop)
            g[0] = 0  # the empty set is never rejected
            for j in range(self.m):
                bit = 1 << j
                has = (masks & bit) != 0
                g[has] = np.maximum(g[has], g[masks[has] ^ bit])
            self._t_all = g
        return self._t_all


def _popcounts(m: int) -> np.ndarray:
    masks = np.arange(1 << m, dtype=np.int64)
    pop = np.zeros(1 << m, dtype=np.int64)
    for j in range(m):
        pop += (masks >> j) & 1
    return pop


def build_closure(study: PValueStudy, alpha: float) -> ClosureTable:
    """Run the Simes test on every nonempty subset, then intersect over supersets
    level-by-level from the top to obtain closed-testing membership.

    The local tests use the same float-product comparison rule as the shortcut
    (k * p <= i * alpha, both sides float64 products).
    """
    m = study.m
    if m > MAX_ORACLE_M:
        raise ValueError(f"oracle refuses m > {MAX_ORACLE_M} (got {m})")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    n_masks = 1 << m
    masks = np.arange(n_masks, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    sizes = bits.sum(axis=1)
    # pad absent positions with 2.0 (> any p); they are masked out of the test below
    vals = np.where(bits, study.p[None, :], 2.0)
    vals.sort(axis=1)
    ranks = np.arange(1, m + 1, dtype=np.int64)
    hit = (sizes[:, None] * vals <= ranks[None, :] * alpha) & (ranks[None, :] <= sizes[:, None])
    u = hit.any(axis=1)
    u[0] = False

    x = u.copy()
    pop = _popcounts(m)
    for level in range(m - 1, 0, -1):
        lvl = masks[pop == level]
        acc = x[lvl].copy()
        for j in range(m):
            bit = 1 << j
            absent = (lvl & bit) == 0
            if absent.any():
                acc[absent] &= x[lvl[absent] | bit]
        x[lvl] = acc
    x[0] = False
    return ClosureTable(m=m, alpha=float(alpha), u_member=u, x_member=x)


def oracle_t(table: ClosureTable, selection: SubsetSelection) -> int:
    """Literal evaluation of max{|I| : I subset of S, I not rejected} over all
    subsets of S."""
    smask = table.mask_of(selection)
    x = table.x_member
    best = 0
    sub = smask
    while True:
        if not x[sub]:
            size = bin(sub).count("1")
            if size > best:
                best = size
        if sub == 0:
            return best
        sub = (sub - 1) & smask
