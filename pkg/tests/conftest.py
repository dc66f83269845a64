import numpy as np
import pytest

from fdplens import PValueStudy


@pytest.fixture
def fig1() -> PValueStudy:
    """The four-hypothesis worked example: three p-values just under the
    Simes line plus one clear non-rejection."""
    return PValueStudy([0.03, 0.031, 0.032, 0.06], ids=["g1", "g2", "g3", "g4"])


def random_study(rng: np.random.Generator, m: int, style: int) -> PValueStudy:
    """Mixed generators: plain uniform, near-zero spikes, heavy ties, and
    values sitting exactly on critical boundaries."""
    style = style % 4
    if style == 0:
        p = rng.random(m)
    elif style == 1:
        k = rng.integers(0, m + 1)
        p = np.concatenate([rng.random(k) * 0.02, rng.random(m - k)])
        rng.shuffle(p)
    elif style == 2:
        p = np.round(rng.random(m), 2)
    else:
        # exact multiples of alpha/m for a few common alphas, plus 0 and 1
        base = rng.choice([0.0, 1.0, 0.05, 0.01, 0.5], size=m)
        scale = rng.integers(1, m + 1, size=m)
        p = np.minimum(1.0, base * scale / m)
    return PValueStudy(p)
