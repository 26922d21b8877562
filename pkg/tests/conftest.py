import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from uipid.distributions import validate

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def load_data(name: str) -> np.ndarray:
    d = json.loads((DATA / f"{name}.json").read_text())
    return np.array(d["p"], dtype=float).reshape(d["shape"])


@pytest.fixture
def data():
    return load_data


def random_dist(shape, seed, zero_frac=0.0):
    """Dirichlet(1) tensor, optionally with some atoms zeroed, as a validated distribution."""
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(int(np.prod(shape))))
    if zero_frac:
        p[rng.random(p.size) < zero_frac] = 0.0
        if p.sum() == 0:
            p[0] = 1.0
        p /= p.sum()
    p = p.reshape(shape)
    # absorb float noise so the sum is within round-off of one
    p.flat[np.argmax(p)] += 1.0 - p.sum()
    return validate(p)


shapes = st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
small_shapes = st.sampled_from([(2, 2, 2), (2, 2, 3), (2, 3, 2), (3, 2, 2), (2, 3, 3), (3, 2, 3), (3, 3, 3)])
seeds = st.integers(0, 2**32 - 1)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def record(request):
    """Store one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def _record(n: int, ok: bool, detail: str) -> None:
        lines[n] = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        print(lines[n])

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
