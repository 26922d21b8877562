"""Uniform sampling of joint distributions and interior/uniqueness statistics."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .deltap import EPS_INT, build_spec
from .distributions import JointDist3, from_solver
from .errors import UipidError
from .solver import PATHS, SolveOptions, solve

log = logging.getLogger(__name__)

MARGINAL_BAND = (1e-9, 1e-7)
# share of failed samples tolerated before the experiment is declared broken
MAX_FAILURE_RATE = 1e-3
MAX_ATOMS = 4096


@dataclass(frozen=True)
class ExperimentConfig:
    shape: tuple[int, int, int]
    n_samples: int
    seed: int = 0
    eps_int: float = EPS_INT
    restarts: int = 8
    max_iter: int = 10000

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if len(self.shape) != 3 or min(self.shape) < 1:
            raise ValueError(f"invalid shape {self.shape}")

    def options(self) -> SolveOptions:
        return SolveOptions(restarts=self.restarts, max_iter=self.max_iter, seed=self.seed, eps_int=self.eps_int)


@dataclass(frozen=True)
class ExperimentResult:
    shape: tuple[int, int, int]
    n_samples: int
    seed: int
    interior_fraction: float
    unique_fraction: float
    unique_fraction_all: float
    n_interior: int
    n_unique_interior: int
    n_marginal: int
    n_failed: int
    support_violations: int
    zero_atom_violations: int = 0
    path_counts: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def summary(self) -> dict:
        """JSON-ready summary; wall time excluded so repeated runs compare equal."""
        d = asdict(self)
        d.pop("wall_time")
        d["shape"] = list(self.shape)
        return {_camel(k): v for k, v in d.items()}


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(w.capitalize() for w in rest)


def sample_uniform(shape, rng: np.random.Generator) -> JointDist3:
    """Uniform draw from the probability simplex on ``|T| * |X| * |Y|`` atoms.

    Uses the spacings of sorted uniform variables, which are exactly uniform
    on the simplex.
    """
    shape = tuple(int(s) for s in shape)
    n = int(np.prod(shape))
    u = np.sort(rng.random(n - 1))
    p = np.diff(np.concatenate(([0.0], u, [1.0])))
    return from_solver(p.reshape(shape))


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index``; order of evaluation does not matter."""
    return np.random.default_rng([seed, index])


def zero_atom_violation(spec, q, atom_tol: float = 1e-9, cell_tol: float = 1e-8) -> bool:
    """True if an atom of the domain's support vanishes while its ``(x, y)`` cell does not."""
    low = spec.support & (q < atom_tol)
    if not low.any():
        return False
    cells = q.sum(axis=0)
    return bool(np.any(cells[np.nonzero(low)[1:]] >= cell_tol))


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Solve ``cfg.n_samples`` uniform instances and aggregate location and uniqueness.

    Raises
    ------
    UipidError
        When more than 0.1% of the samples fail to solve.
    """
    if int(np.prod(cfg.shape)) > MAX_ATOMS:
        raise ValueError(f"shape {cfg.shape} exceeds the {MAX_ATOMS}-atom guard")
    t0 = time.perf_counter()
    opts = cfg.options()
    paths = Counter({p: 0 for p in PATHS})
    verdicts = Counter()
    n_int = n_uniq_int = n_uniq = n_marg = violations = zero_viol = 0
    failures = []
    for i in range(cfg.n_samples):
        P = sample_uniform(cfg.shape, sample_rng(cfg.seed, i))
        spec = build_spec(P)
        if not spec.support.all() or P.p.min() <= 0:
            violations += 1
        try:
            r = solve(P, opts)
        except UipidError as exc:
            failures.append((i, repr(exc)))
            log.warning("sample %d failed: %r", i, exc)
            continue
        paths[r.path] += 1
        zero_viol += zero_atom_violation(spec, r.optimizer.p)
        verdicts[r.uniqueness.verdict] += 1
        if MARGINAL_BAND[0] <= r.location.min_atom <= MARGINAL_BAND[1]:
            n_marg += 1
        unique = r.uniqueness.verdict == "Unique"
        n_uniq += unique
        if r.interior:
            n_int += 1
            n_uniq_int += unique
    if len(failures) > MAX_FAILURE_RATE * cfg.n_samples:
        raise UipidError(f"{len(failures)} of {cfg.n_samples} samples failed; first: {failures[0]}")
    solved = cfg.n_samples - len(failures)
    return ExperimentResult(
        shape=tuple(cfg.shape),
        n_samples=cfg.n_samples,
        seed=cfg.seed,
        interior_fraction=100.0 * n_int / solved,
        unique_fraction=100.0 * n_uniq_int / n_int if n_int else 0.0,
        unique_fraction_all=100.0 * n_uniq / solved,
        n_interior=n_int,
        n_unique_interior=n_uniq_int,
        n_marginal=n_marg,
        n_failed=len(failures),
        support_violations=violations,
        zero_atom_violations=zero_viol,
        path_counts=dict(paths),
        verdicts=dict(sorted(verdicts.items())),
        wall_time=time.perf_counter() - t0,
    )


CSV_FIELDS = (
    "shape",
    "nSamples",
    "seed",
    "interiorFraction",
    "uniqueFraction",
    "uniqueFractionAll",
    "nInterior",
    "nUniqueInterior",
    "nMarginal",
    "nFailed",
    "supportViolations",
    "zeroAtomViolations",
)


def results_csv(results) -> str:
    """One row per shape."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS + tuple(f"path{p}" for p in PATHS))
    for r in results:
        s = r.summary()
        row = ["x".join(str(v) for v in r.shape)] + [s[k] for k in CSV_FIELDS[1:]]
        row += [r.path_counts.get(p, 0) for p in PATHS]
        w.writerow(row)
    return buf.getvalue()


def results_json(results) -> str:
    return json.dumps({"experiments": [r.summary() for r in results]}, sort_keys=True, indent=2)
