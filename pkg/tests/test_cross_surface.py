"""Cross-surface consistency: the HTTP service must answer exactly like the
CLI for the same study, levels, and subsets."""

import json

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from fdplens.cli import main
from fdplens.service import create_app


@pytest.fixture(scope="module")
def study_csv(tmp_path_factory):
    rng = np.random.default_rng(77)
    m = 30
    p = np.concatenate([rng.random(10) * 0.01, rng.random(m - 10)])
    rng.shuffle(p)
    lines = ["id,p"] + [f"g{i+1},{float(p[i])!r}" for i in range(m)]
    path = tmp_path_factory.mktemp("data") / "study.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_200_sequential_bound_queries_match_cli(study_csv):
    client = TestClient(create_app())
    sid = client.post("/studies", content=study_csv.read_text(),
                      headers={"content-type": "text/csv"}).json()["session_id"]
    runner = CliRunner()
    rng = np.random.default_rng(78)
    for trial in range(200):
        alpha = float(rng.choice([0.01, 0.05, 0.1, 0.5]))
        style = trial % 3
        if style == 0:
            k = int(rng.integers(0, 31))
            spec, body = f"top:{k}", {"top": k}
        elif style == 1:
            x = float(np.round(rng.random() * 0.6, 3))
            spec, body = f"p<={x}", {"p_max": x}
        else:
            ids = [f"g{i+1}" for i in np.flatnonzero(rng.random(30) < 0.4)]
            if not ids:
                ids = ["g1"]
            spec, body = ",".join(ids), {"ids": ids}
        via_http = client.post(f"/studies/{sid}/bound",
                               json={"alpha": alpha, **body}).json()
        cli_run = runner.invoke(main, ["analyze", str(study_csv),
                                       "--alpha", str(alpha), "--set", spec])
        assert cli_run.exit_code == 0, cli_run.output
        via_cli = json.loads(cli_run.output)["bound"]
        assert via_http == via_cli, (alpha, spec)


def test_summary_endpoint_matches_cli_fields(study_csv):
    client = TestClient(create_app())
    sid = client.post("/studies", content=study_csv.read_text(),
                      headers={"content-type": "text/csv"}).json()["session_id"]
    runner = CliRunner()
    for alpha in (0.01, 0.05, 0.5):
        http_summary = client.get(f"/studies/{sid}/summary",
                                  params={"alpha": alpha}).json()
        cli_payload = json.loads(runner.invoke(
            main, ["analyze", str(study_csv), "--alpha", str(alpha)]).output)
        for key in ("m", "h", "z", "pi_hat", "r_size", "b"):
            assert http_summary[key] == cli_payload[key], (alpha, key)
