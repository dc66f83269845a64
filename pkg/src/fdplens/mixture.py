"""Two-groups mixture data generation and Monte-Carlo experiments.

Each p-value is independently a true null (probability gamma, uniform p) or a
false null whose p-value is the upper-tail probability of a unit-variance
normal shifted by mu.  Experiments draw one independent Philox stream per
replication, keyed on (seed, experiment, cell, rep), so results do not depend
on scheduling and are reproducible across platforms.
"""

from __future__ import annotations

import csv
import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from fractions import Fraction
from math import nextafter, sqrt
from typing import Callable, Sequence

import numpy as np

from . import core
from .normal import normal_isf, normal_sf
from .study import PValueStudy

__all__ = [
    "MixtureConfig",
    "ExperimentResult",
    "ExperimentError",
    "PiBar",
    "draw_study",
    "draw_tagged_study",
    "mixture_cdf",
    "pi_bar",
    "coverage_experiment",
    "scalability_experiment",
    "consistency_experiment",
]

_TAG_DRAW, _TAG_COVERAGE, _TAG_SCALABILITY, _TAG_CONSISTENCY = 0, 1, 2, 3


class ExperimentError(RuntimeError):
    """An exact per-replication guarantee failed inside an experiment."""


@dataclass(frozen=True)
class MixtureConfig:
    """Parameters of the mixture and of the Monte-Carlo run.

    mu is the effect size of false nulls and doubles as the sample-size knob:
    the alternative p-value distribution is stochastically decreasing in mu.
    gamma_subset/mu_subset, when set, tag an embedded sub-population with its
    own null proportion and effect (used by the consistency experiment).
    """

    gamma: float
    mu: float = 0.0
    m: int = 1000
    reps: int = 1
    seed: int = 0
    alpha: float = 0.05
    q: float = 0.1
    gamma_subset: float | None = None
    mu_subset: float | None = None

    def __post_init__(self):
        for name in ("gamma", "alpha", "q"):
            v = getattr(self, name)
            if not 0.0 <= float(v) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.gamma_subset is not None and not 0.0 <= self.gamma_subset <= 1.0:
            raise ValueError("gamma_subset must lie in [0, 1]")
        if self.mu < 0 or (self.mu_subset is not None and self.mu_subset < 0):
            raise ValueError("effect sizes must be nonnegative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def replace(self, **changes) -> "MixtureConfig":
        data = asdict(self)
        data.update(changes)
        return MixtureConfig(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentResult:
    """Per-replication records plus summary statistics recomputable from them."""

    kind: str
    config: dict
    rows: list[dict]
    summary: dict

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "config": self.config, "summary": self.summary,
             "rows": self.rows},
            indent=2,
        )

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def write_csv(self, path) -> None:
        columns: list[str] = []
        for row in self.rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns)
            writer.writeheader()
            writer.writerows(self.rows)


def _rng(seed: int, *key: int) -> np.random.Generator:
    entropy = (int(seed),) + tuple(int(k) for k in key)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _worker_count() -> int:
    raw = os.environ.get("FDPLENS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_reps(fn: Callable[[int], dict], reps: int) -> list[dict]:
    workers = _worker_count()
    if workers <= 1:
        return [fn(rep) for rep in range(reps)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(reps)))


def _draw(m: int, gamma: float, mu: float, rng: np.random.Generator):
    truth = rng.random(m) < gamma
    uniforms = rng.random(m)
    shifted = rng.standard_normal(m) + mu
    p = np.where(truth, uniforms, normal_sf(shifted))
    return p, truth


def draw_study(cfg: MixtureConfig, rep: int = 0) -> tuple[PValueStudy, np.ndarray]:
    """One draw from the mixture; returns the study and the true-null mask."""
    p, truth = _draw(cfg.m, cfg.gamma, cfg.mu, _rng(cfg.seed, _TAG_DRAW, rep))
    return PValueStudy(p), truth


def draw_tagged_study(cfg: MixtureConfig, c: float, mu: float | None = None,
                      rep: int = 0, _rng_override=None):
    """Draw with an embedded sub-population of expected relative size c.

    Members of the subset are null with probability gamma_subset and use
    effect mu_subset (both falling back to the global values); the complement
    is calibrated so the marginal null proportion stays cfg.gamma.  Returns
    (study, true-null mask, subset-membership mask).
    """
    if not 0.0 < c <= 1.0:
        raise ValueError("subset fraction c must lie in (0, 1]")
    mu_out = cfg.mu if mu is None else float(mu)
    gamma_s = cfg.gamma if cfg.gamma_subset is None else cfg.gamma_subset
    mu_s = mu_out if cfg.mu_subset is None else cfg.mu_subset
    if c < 1.0:
        gamma_out = (cfg.gamma - c * gamma_s) / (1.0 - c)
        if not 0.0 <= gamma_out <= 1.0:
            raise ValueError(
                "no complement null proportion in [0, 1] matches gamma, gamma_subset, c")
    else:
        gamma_out = gamma_s
    rng = _rng(cfg.seed, _TAG_CONSISTENCY, rep) if _rng_override is None else _rng_override
    m = cfg.m
    in_subset = rng.random(m) < c
    truth = rng.random(m) < np.where(in_subset, gamma_s, gamma_out)
    uniforms = rng.random(m)
    shifted = rng.standard_normal(m) + np.where(in_subset, mu_s, mu_out)
    p = np.where(truth, uniforms, normal_sf(shifted))
    return PValueStudy(p), truth, in_subset


def _mix_cdf(x, gamma: float, mu: float):
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    out[x <= 0.0] = 0.0
    out[x >= 1.0] = 1.0
    inner = (x > 0.0) & (x < 1.0)
    xi = x[inner]
    out[inner] = gamma * xi + (1.0 - gamma) * normal_sf(normal_isf(xi) - mu)
    return float(out[0]) if scalar else out


def mixture_cdf(cfg: MixtureConfig, x):
    """Closed-form marginal CDF of the p-values under the mixture."""
    return _mix_cdf(x, cfg.gamma, cfg.mu)


@dataclass(frozen=True)
class PiBar:
    """Limit of h/m, with the Simes-detectability flag (limit < 1)."""

    value: float
    detectable: bool


_GOLDEN = (sqrt(5.0) - 1.0) / 2.0


def pi_bar(cfg: MixtureConfig, level: float | None = None,
           grid_points: int = 100_000) -> PiBar:
    """inf over x in [0,1) of (1 - P(x*level)) / (1 - x), by dense grid plus
    golden-section refinement around the grid minimum."""
    level = cfg.alpha if level is None else float(level)
    if not 0.0 <= level <= 1.0:
        raise ValueError("level must lie in [0, 1]")
    gamma, mu = cfg.gamma, cfg.mu
    if _mix_cdf(level, gamma, mu) >= 1.0:
        return PiBar(0.0, True)
    x = np.linspace(0.0, 1.0, grid_points, endpoint=False)
    px = _mix_cdf(x * level, gamma, mu)
    vals = (1.0 - px) / (1.0 - x)
    j = int(np.argmin(vals))
    best = float(vals[j])

    def f(t: float) -> float:
        return (1.0 - _mix_cdf(t * level, gamma, mu)) / (1.0 - t)

    a = float(x[max(j - 1, 0)])
    b = float(x[min(j + 1, grid_points - 1)])
    c1 = b - _GOLDEN * (b - a)
    c2 = a + _GOLDEN * (b - a)
    f1, f2 = f(c1), f(c2)
    for _ in range(60):
        if f1 < f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - _GOLDEN * (b - a)
            f1 = f(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + _GOLDEN * (b - a)
            f2 = f(c2)
    best = min(best, f1, f2)
    detectable = bool(np.any(px > x))
    return PiBar(best, detectable)


def _lemma2_violates(h: int, alpha: float, p_true_sorted: np.ndarray) -> bool:
    """Exact coverage-violation event: the closure rejects the true-null set."""
    k = p_true_sorted.size
    if k == 0:
        return False
    return core._scaled_exceedance_any(h, p_true_sorted, alpha)


def coverage_experiment(cfg: MixtureConfig) -> ExperimentResult:
    """Empirical rate of the simultaneous-bound violation event, which under
    independence may not exceed alpha beyond Monte-Carlo error."""
    alpha, m = cfg.alpha, cfg.m

    def one(rep: int) -> dict:
        rng = _rng(cfg.seed, _TAG_COVERAGE, rep)
        p, truth = _draw(m, cfg.gamma, cfg.mu, rng)
        study = PValueStudy(p)
        h = core.compute_h(study, alpha)
        violated = _lemma2_violates(h, alpha, np.sort(p[truth]))
        return {"rep": rep, "h": h, "pi_hat": h / m,
                "n_true": int(truth.sum()), "violation": bool(violated)}

    rows = _map_reps(one, cfg.reps)
    rate = sum(r["violation"] for r in rows) / cfg.reps
    se = sqrt(rate * (1.0 - rate) / cfg.reps)
    bound = alpha + 3.0 * sqrt(alpha * (1.0 - alpha) / cfg.reps)
    summary = {
        "reps": cfg.reps,
        "violation_rate": rate,
        "mc_se": se,
        "alpha": alpha,
        "bound_alpha_plus_3se": bound,
        "within_bound": rate <= bound,
    }
    return ExperimentResult("coverage", cfg.to_dict(), rows, summary)


def scalability_experiment(cfg: MixtureConfig, m_grid: Sequence[int]) -> ExperimentResult:
    """Track the non-vanishing confident-discovery set against the vanishing
    FWER set as m grows.

    Per replication: J is the BH set at the adjusted level q*alpha*pibar/pihat
    (1 if pihat = 0); its FDP bound must satisfy q_alpha(J) <= pibar*q in
    every replication, checked exactly.
    """
    alpha, q = cfg.alpha, cfg.q
    pb = pi_bar(cfg, level=alpha)
    detect = pi_bar(cfg, level=q * alpha)
    if not detect.detectable:
        warnings.warn(
            "mixture is not Simes-detectable at q*alpha; |J|/m is expected to vanish",
            RuntimeWarning,
            stacklevel=2,
        )
    pb_fr = Fraction(pb.value)
    q_fr = Fraction(q)

    def one_cell(cell: int, m: int) -> list[dict]:
        def one(rep: int) -> dict:
            rng = _rng(cfg.seed, _TAG_SCALABILITY, cell, rep)
            p, _ = _draw(m, cfg.gamma, cfg.mu, rng)
            study = PValueStudy(p)
            ctx = core.hommel_context(study, alpha)
            h = ctx.h
            if h == 0:
                q_tilde = 1.0
            else:
                # one ulp down so pi_hat * q_tilde <= q*alpha*pibar holds exactly
                q_tilde = min(1.0, nextafter(q * alpha * pb.value * m / h, 0.0))
            jset = core.bh_set(study, q_tilde)
            rep_bound = core.discoveries(study, jset, ctx)
            q_j = rep_bound.q
            if q_j > pb_fr * q_fr:
                raise ExperimentError(
                    f"q_alpha(J) exceeded pibar*q at m={m} rep={rep}")
            if Fraction(alpha) * q_j > ctx.pi_hat * Fraction(q_tilde):
                raise ExperimentError(
                    f"alpha*q_alpha(B) exceeded pi_hat*q_tilde at m={m} rep={rep}")
            r_size = core.hommel_rejections(study, ctx).size
            b_alpha = core.bh_set(study, alpha).size
            return {
                "m": m, "rep": rep, "h": h, "pi_hat": h / m,
                "q_tilde": q_tilde,
                "J_size": jset.size, "J_frac": jset.size / m,
                "q_J": float(q_j),
                "R_size": r_size, "R_frac": r_size / m,
                "B_size": b_alpha, "B_frac": b_alpha / m,
                "bound_holds": True,
            }

        return _map_reps(one, cfg.reps)

    rows: list[dict] = []
    per_m: list[dict] = []
    for cell, m in enumerate(m_grid):
        cell_rows = one_cell(cell, int(m))
        rows.extend(cell_rows)
        per_m.append({
            "m": int(m),
            "mean_J_frac": float(np.mean([r["J_frac"] for r in cell_rows])),
            "se_J_frac": float(np.std([r["J_frac"] for r in cell_rows]) / sqrt(cfg.reps)),
            "mean_R_frac": float(np.mean([r["R_frac"] for r in cell_rows])),
            "mean_B_frac": float(np.mean([r["B_frac"] for r in cell_rows])),
            "mean_q_J": float(np.mean([r["q_J"] for r in cell_rows])),
        })
    summary = {
        "pi_bar": pb.value,
        "pi_bar_at_q_alpha": detect.value,
        "detectable_at_q_alpha": detect.detectable,
        "per_m": per_m,
        "all_bounds_hold": True,  # a violation raises before we get here
        "q_ceiling": pb.value * q,
    }
    return ExperimentResult("scalability", cfg.to_dict(), rows, summary)


def consistency_experiment(cfg: MixtureConfig, m_grid: Sequence[int],
                           mu_grid: Sequence[float], c: float) -> ExperimentResult:
    """FDP bound of a tagged sub-population across an (m, mu) grid.

    The error |mean q_alpha(S_m) - gamma_subset| should shrink along the grid
    diagonal; non-monotone diagonals are recorded and warned about, not raised,
    since the trend is statistical rather than exact.
    """
    if not 0.0 < c <= 1.0:
        raise ValueError("subset fraction c must be positive (and at most 1)")
    gamma_s = cfg.gamma if cfg.gamma_subset is None else cfg.gamma_subset
    alpha = cfg.alpha

    rows: list[dict] = []
    cells: list[dict] = []
    for ci, m in enumerate(m_grid):
        for cj, mu in enumerate(mu_grid):
            cell = ci * len(mu_grid) + cj
            cell_cfg = cfg.replace(m=int(m))

            def one(rep: int) -> dict:
                rng = _rng(cfg.seed, _TAG_CONSISTENCY, cell, rep)
                study, _, in_subset = draw_tagged_study(
                    cell_cfg, c, mu=float(mu), _rng_override=rng)
                sel = study.select_indices(np.nonzero(in_subset)[0] + 1)
                ctx = core.hommel_context(study, alpha)
                rep_bound = core.discoveries(study, sel, ctx)
                q_s = float(rep_bound.q)
                return {"m": int(m), "mu": float(mu), "rep": rep,
                        "S_size": sel.size, "h": ctx.h,
                        "q_S": q_s, "gap": abs(q_s - gamma_s)}

            cell_rows = _map_reps(one, cfg.reps)
            rows.extend(cell_rows)
            qs = [r["q_S"] for r in cell_rows]
            cells.append({
                "m": int(m), "mu": float(mu),
                "mean_q": float(np.mean(qs)),
                "sd_q": float(np.std(qs)),
                "mean_gap": float(abs(np.mean(qs) - gamma_s)),
            })

    diag_len = min(len(m_grid), len(mu_grid))
    diag = [cells[i * len(mu_grid) + i] for i in range(diag_len)]
    diag_gaps = [cell["mean_gap"] for cell in diag]
    decreasing = all(b < a for a, b in zip(diag_gaps, diag_gaps[1:]))
    if not decreasing:
        warnings.warn("diagonal error did not decrease monotonically",
                      RuntimeWarning, stacklevel=2)
    summary = {
        "gamma_subset": gamma_s,
        "c": c,
        "cells": cells,
        "diagonal_gaps": diag_gaps,
        "final_gap": diag_gaps[-1] if diag_gaps else None,
        "diagonal_decreasing": decreasing,
    }
    return ExperimentResult("consistency", cfg.to_dict(), rows, summary)
