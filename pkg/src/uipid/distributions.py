"""Finite joint distributions of a target ``T`` and two predictors ``X``, ``Y``.

A distribution is a dense tensor ``p[t, x, y]``.  All information quantities
are in bits and use the convention ``0 log 0 = 0``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DistributionFormatError, InvalidShape, NegativeEntry, NotNormalized

NORMALIZATION_TOL = 1e-9
# solver output may carry round-off negatives of this size; they are zeroed
ROUNDOFF_TOL = 1e-12

AXES = ("T", "X", "Y")
PAIRS = ("TX", "TY", "XY")


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.size < 1:
            raise InvalidShape(f"alphabet size must be >= 1, got {self.size}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.size)))
        labels = tuple(str(s) for s in self.labels)
        if len(labels) != self.size or len(set(labels)) != self.size:
            raise InvalidShape(f"labels {labels!r} do not match alphabet size {self.size}")
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True, eq=False)
class JointDist3:
    """Validated joint distribution over ``T x X x Y``.

    Construct through :func:`validate`; the stored array is read-only.
    """

    p: np.ndarray
    alphabets: tuple[Alphabet, Alphabet, Alphabet] = field(default=())

    def __post_init__(self):
        if not self.alphabets:
            object.__setattr__(self, "alphabets", tuple(Alphabet(n) for n in self.p.shape))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.p.shape

    def swapped(self) -> "JointDist3":
        """The same distribution with the roles of ``X`` and ``Y`` exchanged."""
        a = self.alphabets
        return _wrap(self.p.transpose(0, 2, 1), (a[0], a[2], a[1]))

    def __repr__(self):
        return f"JointDist3(shape={self.shape})"


@dataclass(frozen=True, eq=False)
class Marginal2:
    pair: str
    m: np.ndarray


def _wrap(p, alphabets=()) -> JointDist3:
    arr = np.array(p, dtype=float, copy=True)
    arr.setflags(write=False)
    return JointDist3(arr, tuple(alphabets))


def validate(p, alphabets: Sequence[Alphabet] = ()) -> JointDist3:
    """Check a raw tensor and return it as a :class:`JointDist3`.

    Raises
    ------
    InvalidShape
        If the tensor does not have three non-empty axes.
    NegativeEntry
        On the first (row-major) negative entry.
    NotNormalized
        If the entries do not sum to one within ``1e-9``.  The tensor is never
        renormalized.
    """
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise InvalidShape(f"expected a 3-axis tensor with non-empty axes, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = tuple(np.argwhere(~np.isfinite(arr))[0])
        raise NegativeEntry(bad, arr[bad])
    neg = np.argwhere(arr < 0)
    if len(neg):
        idx = tuple(neg[0])
        raise NegativeEntry(idx, arr[idx])
    total = arr.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(total)
    if alphabets and tuple(a.size for a in alphabets) != arr.shape:
        raise InvalidShape("alphabet sizes do not match tensor shape")
    return _wrap(arr, alphabets)


def from_solver(q, alphabets: Sequence[Alphabet] = ()) -> JointDist3:
    """Wrap a numerically computed point, zeroing round-off negatives."""
    arr = np.array(q, dtype=float, copy=True)
    small = (arr < 0) & (arr >= -ROUNDOFF_TOL)
    arr[small] = 0.0
    return validate(arr, alphabets)


def as_array(d) -> np.ndarray:
    return d.p if isinstance(d, JointDist3) else np.asarray(d, dtype=float)


def marginal(d, pair: str) -> Marginal2:
    """Exact pair marginal ``TX``, ``TY`` or ``XY``."""
    p = as_array(d)
    axis = {"TX": 2, "TY": 1, "XY": 0}
    if pair not in axis:
        raise ValueError(f"unknown pair {pair!r}")
    return Marginal2(pair, p.sum(axis=axis[pair]))


def conditional_T_given_XY(d) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(cond, defined)`` with ``cond[t, x, y] = p(t | x, y)``.

    ``defined[x, y]`` is False where ``p(x, y) = 0``; those cells hold zeros.
    """
    p = as_array(d)
    pxy = p.sum(axis=0)
    defined = pxy > 0
    cond = np.zeros_like(p)
    np.divide(p, pxy[None], out=cond, where=defined[None])
    return cond, defined


def entropy(p) -> float:
    """Shannon entropy in bits of an array of probabilities."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def conditional_entropy(joint, given_axes) -> float:
    """``H(rest | given)`` for an n-axis joint array."""
    joint = np.asarray(joint, dtype=float)
    other = tuple(i for i in range(joint.ndim) if i not in given_axes)
    return entropy(joint) - entropy(joint.sum(axis=other))


@dataclass(frozen=True)
class InfoSuite:
    H_T: float
    H_T_given_X: float
    H_T_given_Y: float
    H_T_given_XY: float
    I_TX: float
    I_TY: float
    I_TXY: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def entropy_and_mi_suite(d) -> InfoSuite:
    p = as_array(d)
    h_t = entropy(p.sum(axis=(1, 2)))
    h_t_x = conditional_entropy(p.sum(axis=2), (1,))
    h_t_y = conditional_entropy(p.sum(axis=1), (1,))
    h_t_xy = conditional_entropy(p, (1, 2))
    return InfoSuite(
        H_T=h_t,
        H_T_given_X=h_t_x,
        H_T_given_Y=h_t_y,
        H_T_given_XY=h_t_xy,
        I_TX=h_t - h_t_x,
        I_TY=h_t - h_t_y,
        I_TXY=h_t - h_t_xy,
    )


def ci_residual(d, given: str = "Y", mass_floor: float = 0.0) -> float:
    """Largest violation of a conditional independence statement.

    ``given="Y"`` measures ``T _||_ X | Y`` as ``max |p(t|x,y) - p(t|y)|`` over
    cells with ``p(x, y) > mass_floor``; ``given="X"`` measures ``T _||_ Y | X``.
    """
    p = as_array(d)
    if given == "X":
        p = p.transpose(0, 2, 1)
    elif given != "Y":
        raise ValueError("given must be 'X' or 'Y'")
    pxy = p.sum(axis=0)
    pty = p.sum(axis=1)
    py = pty.sum(axis=0)
    cells = pxy > mass_floor
    if not cells.any():
        return 0.0
    cond = p[:, cells] / pxy[cells]
    ty = np.divide(pty, py, out=np.zeros_like(pty), where=py > 0)
    ys = np.nonzero(cells)[1]
    return float(np.abs(cond - ty[:, ys]).max())


def support_sets(d):
    """``(t_support, x_support, y_support)`` with per-``t`` index arrays."""
    p = as_array(d)
    pt = p.sum(axis=(1, 2))
    ptx = p.sum(axis=2)
    pty = p.sum(axis=1)
    tsup = np.nonzero(pt > 0)[0]
    xs = {int(t): np.nonzero(ptx[t] > 0)[0] for t in tsup}
    ys = {int(t): np.nonzero(pty[t] > 0)[0] for t in tsup}
    return tsup, xs, ys


# --------------------------------------------------------------------------
# file formats


def _labels_from_json(obj, shape):
    labels = obj.get("labels") or {}
    if not isinstance(labels, Mapping):
        raise DistributionFormatError("'labels' must be an object keyed by T, X, Y")
    out = []
    for axis, n in zip(AXES, shape):
        out.append(Alphabet(n, tuple(labels.get(axis, ()))))
    return tuple(out)


def loads_json(text: str) -> JointDist3:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, Mapping) or "shape" not in obj or "p" not in obj:
        raise DistributionFormatError("expected an object with 'shape' and 'p'")
    shape = tuple(int(s) for s in obj["shape"])
    if len(shape) != 3:
        raise InvalidShape(f"shape must have three entries, got {shape}")
    flat = np.asarray(obj["p"], dtype=float)
    if flat.size != int(np.prod(shape)):
        raise DistributionFormatError(
            f"'p' has {flat.size} entries but shape {shape} needs {int(np.prod(shape))}"
        )
    return validate(flat.reshape(shape), _labels_from_json(obj, shape))


def loads_csv(text: str) -> JointDist3:
    """Parse ``t,x,y,prob`` rows; a header row and omitted atoms are allowed."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not _is_number(rows[0][-1]):
        rows = rows[1:]
    if not rows:
        raise DistributionFormatError("no probability rows found")
    keys: list[list[str]] = [[], [], []]
    entries = []
    for r in rows:
        if len(r) != 4:
            raise DistributionFormatError(f"expected 't,x,y,prob', got {r!r}")
        *states, prob = (c.strip() for c in r)
        if not _is_number(prob):
            raise DistributionFormatError(f"bad probability {prob!r}")
        for axis, s in enumerate(states):
            if s not in keys[axis]:
                keys[axis].append(s)
        entries.append((states, float(prob)))
    alphabets = []
    index = []
    for axis in range(3):
        if all(k.isdigit() for k in keys[axis]):
            n = max(int(k) for k in keys[axis]) + 1
            alphabets.append(Alphabet(n))
            index.append({k: int(k) for k in keys[axis]})
        else:
            alphabets.append(Alphabet(len(keys[axis]), tuple(keys[axis])))
            index.append({k: i for i, k in enumerate(keys[axis])})
    p = np.zeros(tuple(a.size for a in alphabets))
    for states, prob in entries:
        p[tuple(index[axis][s] for axis, s in enumerate(states))] += prob
    return validate(p, alphabets)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load(path) -> JointDist3:
    """Read a distribution from a ``.json`` or ``.csv`` file (``-`` for stdin)."""
    if str(path) == "-":
        import sys

        text = sys.stdin.read()
        suffix = ".json" if text.lstrip().startswith("{") else ".csv"
    else:
        path = Path(path)
        text = path.read_text()
        suffix = path.suffix.lower()
    if suffix == ".csv":
        return loads_csv(text)
    return loads_json(text)


def to_json_obj(d: JointDist3) -> dict:
    obj = {"shape": list(d.shape), "p": [float(v) for v in d.p.ravel()]}
    default = [Alphabet(n).labels for n in d.shape]
    labels = {ax: list(a.labels) for ax, a, dl in zip(AXES, d.alphabets, default) if a.labels != dl}
    if labels:
        obj["labels"] = labels
    return obj


def dumps_json(d: JointDist3) -> str:
    return json.dumps(to_json_obj(d), sort_keys=True)
