"""Domain types: p-value studies, validated index sets, and bound reports.

All indices exposed to callers are 1-based hypothesis labels 1..m; rank i
refers to the hypothesis with the i-th smallest p-value.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = ["PValueStudy", "SubsetSelection", "BoundReport", "decimal_str"]


def decimal_str(value: Fraction | int | float, sig: int = 12) -> str:
    """Render an exact rational as a decimal string with `sig` significant digits."""
    fr = Fraction(value)
    if fr == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = sig
        d = Decimal(fr.numerator) / Decimal(fr.denominator)
    return str(d)


class PValueStudy:
    """Immutable table of m hypotheses with p-values, sorted once at construction.

    Ties among p-values are broken by original index (stable sort), so the
    sort permutation is deterministic.
    """

    __slots__ = ("_p", "_order", "_p_sorted", "_ids", "_p_list", "_id_index")

    def __init__(self, p: Sequence[float] | np.ndarray, ids: Sequence[str] | None = None):
        arr = np.asarray(p, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("p must be one-dimensional")
        if arr.size == 0:
            raise ValueError("a study needs at least one hypothesis")
        if not np.all(np.isfinite(arr)):
            raise ValueError("p-values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("p-values must lie in [0, 1]")
        arr = arr.copy()
        arr.setflags(write=False)
        self._p = arr
        order = np.argsort(arr, kind="stable")
        order.setflags(write=False)
        self._order = order
        ps = arr[order]
        ps.setflags(write=False)
        self._p_sorted = ps
        if ids is not None:
            ids = tuple(str(s) for s in ids)
            if len(ids) != arr.size:
                raise ValueError("ids and p must have equal length")
            if len(set(ids)) != len(ids):
                raise ValueError("ids must be unique")
        self._ids = ids
        self._p_list = None
        self._id_index = None

    @property
    def m(self) -> int:
        return int(self._p.size)

    @property
    def p(self) -> np.ndarray:
        return self._p

    @property
    def p_sorted(self) -> np.ndarray:
        return self._p_sorted

    @property
    def order(self) -> np.ndarray:
        """Sort permutation as 0-based positions: p[order[i]] is the (i+1)-th smallest."""
        return self._order

    @property
    def ranks(self) -> np.ndarray:
        """The permutation r as 1-based labels: label of the hypothesis at each rank."""
        return self._order + 1

    @property
    def ids(self) -> tuple[str, ...]:
        if self._ids is None:
            self._ids = tuple(f"H{i}" for i in range(1, self.m + 1))
        return self._ids

    @property
    def p_list(self) -> list[float]:
        """Plain-float copy of p, for scalar hot paths."""
        if self._p_list is None:
            self._p_list = self._p.tolist()
        return self._p_list

    def id_of(self, index: int) -> str:
        return self.ids[index - 1]

    def index_of(self, hypothesis_id: str) -> int:
        if self._id_index is None:
            self._id_index = {s: i + 1 for i, s in enumerate(self.ids)}
        try:
            return self._id_index[hypothesis_id]
        except KeyError:
            raise KeyError(f"unknown hypothesis id: {hypothesis_id!r}") from None

    # ---- subset constructors -------------------------------------------------

    def select_all(self) -> "SubsetSelection":
        return SubsetSelection(np.arange(1, self.m + 1), self.m, _validated=True)

    def select_indices(self, indices: Iterable[int]) -> "SubsetSelection":
        return SubsetSelection(indices, self.m)

    def select_ids(self, ids: Iterable[str]) -> "SubsetSelection":
        return SubsetSelection([self.index_of(s) for s in ids], self.m)

    def top(self, k: int) -> "SubsetSelection":
        """The k hypotheses with the smallest p-values (L_k)."""
        if not 0 <= k <= self.m:
            raise ValueError(f"rank range top:{k} outside 0..{self.m}")
        idx = np.sort(self._order[:k] + 1)
        return SubsetSelection(idx, self.m, _validated=True)

    def p_at_most(self, threshold: float) -> "SubsetSelection":
        idx = np.nonzero(self._p <= threshold)[0] + 1
        return SubsetSelection(idx, self.m, _validated=True)

    def __repr__(self) -> str:
        return f"PValueStudy(m={self.m})"


class SubsetSelection:
    """A validated set of hypothesis indices (1-based, stored strictly increasing)."""

    __slots__ = ("_indices", "_m", "_index_list")

    def __init__(self, indices: Iterable[int], m: int, *, _validated: bool = False):
        arr = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices,
                         dtype=np.int64).reshape(-1)
        if not _validated and arr.size:
            arr = np.sort(arr)
            if arr[0] < 1 or arr[-1] > m:
                raise ValueError(f"indices must lie in 1..{m}")
            if np.any(arr[1:] == arr[:-1]):
                raise ValueError("duplicate indices in selection")
        arr.setflags(write=False)
        self._indices = arr
        self._m = int(m)
        self._index_list = None

    @property
    def indices(self) -> np.ndarray:
        return self._indices

    @property
    def m(self) -> int:
        return self._m

    @property
    def size(self) -> int:
        return int(self._indices.size)

    @property
    def zero_based(self) -> np.ndarray:
        return self._indices - 1

    @property
    def index_list(self) -> list[int]:
        if self._index_list is None:
            self._index_list = self._indices.tolist()
        return self._index_list

    def intersection(self, other: "SubsetSelection") -> "SubsetSelection":
        common = np.intersect1d(self._indices, other._indices, assume_unique=True)
        return SubsetSelection(common, self._m, _validated=True)

    def __len__(self) -> int:
        return self.size

    def __iter__(self):
        return iter(self.index_list)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SubsetSelection) and self._m == other._m
                and np.array_equal(self._indices, other._indices))

    def __repr__(self) -> str:
        return f"SubsetSelection({self.index_list!r}, m={self._m})"


@dataclass(frozen=True)
class BoundReport:
    """Confidence quantities for one subset query: d + t = size, q = t/size."""

    size: int
    d: int
    t: int
    q: Fraction

    def __post_init__(self):
        if self.d + self.t != self.size or not 0 <= self.d <= self.size:
            raise ValueError("inconsistent bound report")
        expected = Fraction(self.t, self.size) if self.size else Fraction(0)
        if self.q != expected:
            raise ValueError("q must equal t/size (0 for an empty set)")

    @classmethod
    def empty(cls) -> "BoundReport":
        return cls(0, 0, 0, Fraction(0))

    def to_dict(self) -> dict:
        return {"size": self.size, "d": self.d, "t": self.t, "q": decimal_str(self.q)}
