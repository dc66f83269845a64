"""Exact closed-testing machinery with Simes local tests.

Everything here reduces to one comparison rule: a scaled p-value is compared
against a scaled level as two float64 products (`k * p <= i * alpha`), never
via division and never with an epsilon.  The brute-force oracle shares the
same rule, which is what makes the shortcut exactly equivalent to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .study import BoundReport, PValueStudy, SubsetSelection, decimal_str

__all__ = [
    "HommelContext",
    "hommel_context",
    "simes_rejects",
    "compute_h",
    "concentration_z",
    "concentration_set",
    "in_closure",
    "discoveries",
    "hommel_rejections",
    "bh_set",
    "BhCertificate",
    "bh_fdp_certificate",
    "min_alpha_for",
]

# Below this subset size plain-Python loops beat numpy call overhead.
_SMALL = 64


def _check_level(value: float, name: str = "alpha") -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise ValueError(f"{name} must lie in [0, 1]")
    return value


def _scaled_exceedance_any(mult: int, sorted_vals, alpha: float) -> bool:
    """True iff mult * v_(i) <= i * alpha for some i; the shared comparison rule.

    With mult = |I| this is the Simes local test; with mult = h it is the
    closure membership rule.
    """
    k = len(sorted_vals)
    if k <= _SMALL:
        vals = sorted_vals.tolist() if isinstance(sorted_vals, np.ndarray) else sorted_vals
        for i, v in enumerate(vals, start=1):
            if mult * v <= i * alpha:
                return True
        return False
    vals = np.asarray(sorted_vals)
    return bool(np.any(mult * vals <= alpha * np.arange(1, k + 1)))


def _sorted_subset(study: PValueStudy, selection: SubsetSelection):
    if selection.size <= _SMALL:
        plist = study.p_list
        return sorted(plist[i - 1] for i in selection.index_list)
    return np.sort(study.p[selection.zero_based])


def simes_rejects(study: PValueStudy, selection: SubsetSelection, alpha: float) -> bool:
    """Simes local test of the intersection hypothesis over `selection` at level alpha."""
    alpha = _check_level(alpha)
    n = selection.size
    if n == 0:
        raise ValueError("the Simes test is undefined for an empty selection")
    return _scaled_exceedance_any(n, _sorted_subset(study, selection), alpha)


def compute_h(study: PValueStudy, alpha: float) -> int:
    """Largest i such that the set of the i largest p-values is not Simes-rejected.

    Rejection of suffix sets is monotone in their size, so bisection over i
    needs O(log m) Simes tests, each on a suffix of the sorted p-values.
    """
    alpha = _check_level(alpha)
    ps = study.p_sorted
    m = study.m

    def rejected(i: int) -> bool:
        return i > 0 and _scaled_exceedance_any(i, ps[m - i:], alpha)

    if not rejected(m):
        return m
    lo, hi = 0, m  # invariant: K_lo not rejected, K_hi rejected
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rejected(mid):
            hi = mid
        else:
            lo = mid
    return lo


def concentration_z(study: PValueStudy, alpha: float, h: int) -> int:
    """Size of the concentration set: smallest rank from m-h on where the
    h-scaled sorted p-value drops under its critical value; 0 when h = m."""
    alpha = _check_level(alpha)
    m = study.m
    if h == m:
        return 0
    ranks = np.arange(m - h, m + 1, dtype=np.int64)
    hit = h * study.p_sorted[ranks - 1] <= (ranks - m + h + 1) * alpha
    nz = np.nonzero(hit)[0]
    if nz.size == 0:  # ruled out: the (h+1)-suffix is rejected, so a hit exists
        raise AssertionError("no concentration index found; invariant violated")
    return int(ranks[nz[0]])


@dataclass(frozen=True)
class HommelContext:
    """Per-alpha derived state reused across any number of subset queries."""

    study: PValueStudy = field(repr=False)
    alpha: float
    h: int
    z: int
    pi_hat: Fraction

    def __post_init__(self):
        if not 0 <= self.h <= self.study.m:
            raise ValueError("h out of range")


def hommel_context(study: PValueStudy, alpha: float) -> HommelContext:
    """O(m log m) preprocessing for a given alpha (the sort is shared across alphas)."""
    alpha = _check_level(alpha)
    h = compute_h(study, alpha)
    z = concentration_z(study, alpha, h)
    return HommelContext(study, alpha, h, z, Fraction(h, study.m))


def concentration_set(ctx: HommelContext) -> SubsetSelection:
    """The z hypotheses with the smallest p-values; discoveries never live outside it."""
    return ctx.study.top(ctx.z)


def _check_ctx(study: PValueStudy, ctx: HommelContext) -> None:
    if ctx.study is not study:
        raise ValueError("context was computed for a different study")


def in_closure(study: PValueStudy, selection: SubsetSelection, ctx: HommelContext) -> bool:
    """Membership of the intersection hypothesis in the closed-testing rejections,
    decided without enumerating supersets: some h * p_(i:I) <= i * alpha."""
    _check_ctx(study, ctx)
    if selection.size == 0:
        raise ValueError("closure membership is undefined for an empty selection")
    return _scaled_exceedance_any(ctx.h, _sorted_subset(study, selection), ctx.alpha)


def _critical_count_small(study, selection, h, alpha, cap, n):
    """Counting-sort scan of the shortcut objective, scalar path."""
    counts = [0] * (cap + 1)
    plist = study.p_list
    if alpha == 0.0:
        for i in selection.index_list:
            if h * plist[i - 1] == 0.0:
                counts[0] += 1
    else:
        for i in selection.index_list:
            hp = h * plist[i - 1]
            if hp > cap * alpha:  # no u <= cap can cover this one
                continue
            u = math.ceil(hp / alpha)
            if u > cap:
                u = cap
            # snap the division estimate onto the exact product-rule boundary
            while u > 0 and (u - 1) * alpha >= hp:
                u -= 1
            while u * alpha < hp:
                u += 1
            counts[u] += 1
    best = 0
    covered = counts[0]
    for u in range(1, cap + 1):
        covered += counts[u]
        val = 1 - u + covered
        if val > best:
            best = val
        if covered == n:  # objective only decreases from here on
            break
    return best


def _critical_count_vector(study, selection, h, alpha, cap, n):
    hp = h * study.p[selection.zero_based]
    if alpha == 0.0:
        c = np.where(hp == 0.0, 0, cap + 1).astype(np.int64)
    else:
        keep = hp <= cap * alpha
        c = np.full(hp.shape, cap + 1, dtype=np.int64)
        if np.any(keep):
            ratio = np.ceil(hp[keep] / alpha)
            ck = np.minimum(ratio, cap).astype(np.int64)
            np.maximum(ck, 0, out=ck)
            for _ in range(64):
                over = (ck > 0) & ((ck - 1) * alpha >= hp[keep])
                if not over.any():
                    break
                ck -= over
            for _ in range(64):
                under = ck * alpha < hp[keep]
                if not under.any():
                    break
                ck += under
            c[keep] = ck
    kept = c[c <= cap]
    counts = np.bincount(kept, minlength=cap + 1)
    covered = np.cumsum(counts)
    u = np.arange(1, cap + 1)
    return int(np.max(1 - u + covered[1:])) if cap >= 1 else 0


def discoveries(study: PValueStudy, selection: SubsetSelection, ctx: HommelContext) -> BoundReport:
    """Exact confidence bounds for one subset, linear in the subset size.

    Each member maps to the smallest integer u with h * p <= u * alpha; a
    counting sort and a single scan over u (capped at z - m + h + 1, stopped
    once all members are covered) yield the lower bound on true discoveries.
    """
    _check_ctx(study, ctx)
    n = selection.size
    if n == 0:
        return BoundReport.empty()
    cap = min(n, ctx.z - study.m + ctx.h + 1)
    if n <= _SMALL:
        d = _critical_count_small(study, selection, ctx.h, ctx.alpha, cap, n)
    else:
        d = _critical_count_vector(study, selection, ctx.h, ctx.alpha, cap, n)
    return BoundReport(n, d, n - d, Fraction(n - d, n))


def hommel_rejections(study: PValueStudy, ctx: HommelContext) -> SubsetSelection:
    """Elementary hypotheses rejected by closed testing (Hommel's FWER set)."""
    _check_ctx(study, ctx)
    idx = np.nonzero(ctx.h * study.p <= ctx.alpha)[0] + 1
    return SubsetSelection(idx, study.m, _validated=True)


def bh_set(study: PValueStudy, q: float) -> SubsetSelection:
    """Benjamini-Hochberg rejection set at level q (the b smallest p-values)."""
    q = _check_level(q, "q")
    m = study.m
    ok = m * study.p_sorted <= q * np.arange(1, m + 1)
    nz = np.nonzero(ok)[0]
    b = int(nz[-1]) + 1 if nz.size else 0
    return study.top(b)


@dataclass(frozen=True)
class BhCertificate:
    """FDP bound for a BH set together with its closed-form certificate.

    `certificate` is pi_hat * q / alpha, or None when alpha = 0 with h*q > 0
    (the certificate is infinite; only the bound is reported).  The median
    fields carry the alpha = 1/2 point estimate and its 2*q*pi_hat ceiling.
    """

    q_level: float
    b: int
    bound: Fraction
    certificate: Fraction | None
    equality: bool
    median_bound: Fraction
    median_certificate: Fraction

    def to_dict(self) -> dict:
        return {
            "q_level": self.q_level,
            "b": self.b,
            "bound": decimal_str(self.bound),
            "certificate": None if self.certificate is None else decimal_str(self.certificate),
            "equality": self.equality,
            "median_bound": decimal_str(self.median_bound),
            "median_certificate": decimal_str(self.median_certificate),
        }


def bh_fdp_certificate(study: PValueStudy, ctx: HommelContext, q: float) -> BhCertificate:
    """q_alpha of the BH set at level q, checked against alpha * bound <= pi_hat * q.

    The inequality is verified in exact rational arithmetic and is an internal
    guarantee; violation means a bug, hence AssertionError.
    """
    _check_ctx(study, ctx)
    q = _check_level(q, "q")
    bset = bh_set(study, q)
    bound = discoveries(study, bset, ctx).q
    alpha_fr = Fraction(ctx.alpha)
    rhs = ctx.pi_hat * Fraction(q)
    if alpha_fr * bound > rhs:
        raise AssertionError("certificate inequality alpha*q(B) <= pi_hat*q violated")
    if ctx.alpha == 0.0 and rhs > 0:
        certificate = None
    else:
        certificate = rhs / alpha_fr if ctx.alpha > 0.0 else Fraction(0)
    half = hommel_context(study, 0.5)
    median_bound = discoveries(study, bset, half).q
    median_certificate = 2 * Fraction(q) * half.pi_hat
    if median_bound > median_certificate:
        raise AssertionError("median-unbiased estimate exceeded 2*q*pi_hat(1/2)")
    return BhCertificate(
        q_level=q,
        b=bset.size,
        bound=bound,
        certificate=certificate,
        equality=alpha_fr * bound == rhs,
        median_bound=median_bound,
        median_certificate=median_certificate,
    )


def min_alpha_for(study: PValueStudy, selection: SubsetSelection, k: int,
                  tol: float = 1e-4) -> float | None:
    """Smallest alpha (within tol, by bisection) with at least k confident
    discoveries in the selection; None when unattainable.

    Levels are searched below 1: at alpha = 1 exactly the bound is vacuous
    (h = 0, every hypothesis a "discovery" at confidence 0), so feasibility
    only at that endpoint counts as unattainable.
    """
    if not 0 <= k <= selection.size:
        raise ValueError(f"k must lie in 0..{selection.size}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if k == 0:
        return 0.0

    def feasible(alpha: float) -> bool:
        return discoveries(study, selection, hommel_context(study, alpha)).d >= k

    if feasible(0.0):
        return 0.0
    top = math.nextafter(1.0, 0.0)
    if not feasible(top):
        return None
    lo, hi = 0.0, top
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi
