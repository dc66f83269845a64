"""Command-line front end.

Exit codes: 0 success, 2 unparseable input or config, 3 set resolution
failure (unknown id, bad rank range), 4 environment problems (port in use).
"""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, core
from .mixture import (
    MixtureConfig,
    consistency_experiment,
    coverage_experiment,
    scalability_experiment,
)
from .study import PValueStudy, SubsetSelection, decimal_str
from .tables import ParseError, study_from_text

EXIT_PARSE = 2
EXIT_RESOLVE = 3
EXIT_ENV = 4

ANALYZE_SCHEMA = "fdplens.analyze/1"
CONCENTRATION_SCHEMA = "fdplens.concentration/1"


def _load_study(path: str) -> PValueStudy:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    try:
        return study_from_text(text)
    except ParseError as exc:
        click.echo(f"parse error in {path}: {exc}", err=True)
        sys.exit(EXIT_PARSE)


def resolve_set(study: PValueStudy, spec: str) -> SubsetSelection:
    """Resolve a set spec: "top:k", "p<=x", or a comma-separated id list."""
    spec = spec.strip()
    if spec.startswith("top:"):
        try:
            k = int(spec[4:])
        except ValueError:
            raise LookupError(f"bad rank range {spec!r}") from None
        if not 0 <= k <= study.m:
            raise LookupError(f"rank range top:{k} outside 0..{study.m}")
        return study.top(k)
    if spec.startswith("p<="):
        try:
            threshold = float(spec[3:])
        except ValueError:
            raise LookupError(f"bad threshold {spec!r}") from None
        return study.p_at_most(threshold)
    if not spec:
        raise LookupError("empty set spec")
    ids = [part.strip() for part in spec.split(",")]
    try:
        return study.select_ids(ids)
    except KeyError as exc:
        raise LookupError(str(exc)) from None


def _resolve_or_exit(study: PValueStudy, spec: str) -> SubsetSelection:
    try:
        return resolve_set(study, spec)
    except LookupError as exc:
        click.echo(f"cannot resolve set: {exc}", err=True)
        sys.exit(EXIT_RESOLVE)


def _check_level(value: float, name: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise click.BadParameter(f"{name} must lie in [0, 1]")
    return value


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@click.group()
@click.version_option(version=__version__, prog_name="fdplens")
def main():
    """Simultaneous FDP confidence bounds from closed testing with Simes tests."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, default=0.05, show_default=True,
              help="Significance level (confidence 1 - alpha).")
@click.option("--set", "set_spec", default="p<=1", show_default=True,
              help='Subset to query: "top:k", "p<=x", or comma-separated ids.')
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON report here instead of stdout.")
def analyze(file, alpha, set_spec, out):
    """Confidence bounds for a chosen subset of hypotheses."""
    _check_level(alpha, "--alpha")
    study = _load_study(file)
    selection = _resolve_or_exit(study, set_spec)
    ctx = core.hommel_context(study, alpha)
    report = core.discoveries(study, selection, ctx)
    payload = {
        "schema": ANALYZE_SCHEMA,
        "m": study.m,
        "alpha": alpha,
        "h": ctx.h,
        "z": ctx.z,
        "pi_hat": decimal_str(ctx.pi_hat),
        "r_size": core.hommel_rejections(study, ctx).size,
        "b": core.bh_set(study, alpha).size,
        "set": {
            "spec": set_spec,
            "size": selection.size,
            "ids": [study.id_of(i) for i in selection.index_list],
        },
        "bound": report.to_dict(),
    }
    _emit(payload, out)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def concentration(file, alpha, out):
    """The concentration set: discoveries never live outside it."""
    _check_level(alpha, "--alpha")
    study = _load_study(file)
    ctx = core.hommel_context(study, alpha)
    zset = core.concentration_set(ctx)
    b = core.bh_set(study, alpha).size
    payload = {
        "schema": CONCENTRATION_SCHEMA,
        "m": study.m,
        "alpha": alpha,
        "h": ctx.h,
        "z": ctx.z,
        "d_z": study.m - ctx.h,
        "b": b,
        "z_within_bh": ctx.z <= b,
        "ids": [study.id_of(i) for i in zset.index_list],
    }
    _emit(payload, out)


def _load_config(path: str) -> dict:
    raw = Path(path)
    try:
        if raw.suffix.lower() == ".toml":
            with open(raw, "rb") as fh:
                return tomllib.load(fh)
        return json.loads(raw.read_text(encoding="utf-8"))
    except (OSError, ValueError, tomllib.TOMLDecodeError) as exc:
        click.echo(f"cannot load config {path}: {exc}", err=True)
        sys.exit(EXIT_PARSE)


_CFG_KEYS = ("gamma", "mu", "m", "reps", "seed", "alpha", "q",
             "gamma_subset", "mu_subset")


@main.command()
@click.argument("kind", type=click.Choice(["coverage", "scalability", "consistency"]))
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="TOML or JSON file with mixture and experiment settings.")
@click.option("--out", type=click.Path(file_okay=False), default=".",
              show_default=True, help="Directory for result files.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--reps", type=int, default=None, help="Override the config reps.")
@click.option("--q", type=float, default=None, help="Override the config q.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "both"]),
              default="both", show_default=True)
def simulate(kind, config_path, out, seed, reps, q, fmt):
    """Monte-Carlo experiments under the two-groups mixture model."""
    raw = _load_config(config_path)
    fields = {k: raw[k] for k in _CFG_KEYS if k in raw}
    for name, value in (("seed", seed), ("reps", reps), ("q", q)):
        if value is not None:
            fields[name] = value
    try:
        cfg = MixtureConfig(**fields)
        if kind == "coverage":
            result = coverage_experiment(cfg)
        elif kind == "scalability":
            result = scalability_experiment(cfg, m_grid=raw.get("m_grid", [cfg.m]))
        else:
            result = consistency_experiment(
                cfg,
                m_grid=raw.get("m_grid", [cfg.m]),
                mu_grid=raw.get("mu_grid", [cfg.mu]),
                c=raw.get("c", 0.5),
            )
    except (TypeError, ValueError) as exc:
        click.echo(f"invalid config: {exc}", err=True)
        sys.exit(EXIT_PARSE)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt in ("json", "both"):
        result.write_json(out_dir / f"{kind}.json")
    if fmt in ("csv", "both"):
        result.write_csv(out_dir / f"{kind}.csv")

    summary = result.summary
    if kind == "coverage":
        tol = raw.get("max_violation_rate", summary["bound_alpha_plus_3se"])
        ok = summary["violation_rate"] <= tol
        line = (f"coverage: rate={summary['violation_rate']:.4f} "
                f"tolerance={tol:.4f} {'PASS' if ok else 'FAIL'}")
    elif kind == "scalability":
        ok = summary["all_bounds_hold"]
        last = summary["per_m"][-1]
        line = (f"scalability: mean|J|/m={last['mean_J_frac']:.4f} "
                f"mean|R|/m={last['mean_R_frac']:.5f} ceiling q*pibar="
                f"{summary['q_ceiling']:.4f} bounds "
                f"{'PASS' if ok else 'FAIL'}")
    else:
        tol = raw.get("max_final_gap", 0.05)
        ok = summary["final_gap"] <= tol and summary["diagonal_decreasing"]
        line = (f"consistency: final_gap={summary['final_gap']:.4f} "
                f"tolerance={tol:.4f} diagonal "
                f"{'decreasing' if summary['diagonal_decreasing'] else 'non-monotone'} "
                f"{'PASS' if ok else 'FAIL'}")
    click.echo(line)


@main.command()
@click.argument("file", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False, exists=True),
              default=None, help="Serve a built explorer UI from this directory.")
def serve(file, port, host, ui_dir):
    """Run the HTTP session service (optionally preloading a study)."""
    study = _load_study(file) if file else None
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        click.echo(f"cannot bind {host}:{port}: {exc}", err=True)
        sys.exit(EXIT_ENV)
    finally:
        probe.close()

    import uvicorn

    from .service import create_app

    app = create_app(preloaded=study, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
