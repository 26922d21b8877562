"""The objective ``I_Q(T:X|Y)`` and its first-order analysis on the domain.

Along a move ``gamma[t; x, x'; y, y']`` the pair marginals are fixed, so only
``H(T|X,Y)`` changes and the derivative of ``I_Q(T:X|Y)`` is

    log2 [ Q(t|x,y) Q(t|x',y') / (Q(t|x,y') Q(t|x',y)) ].

Zero atoms are handled by one-sided limits:

* a decreasing atom with zero mass makes the move infeasible (``+inf``);
* an increasing zero atom in a cell with positive mass gives ``-inf``;
* an increasing atom in an empty cell contributes ``0``, since its
  conditional jumps to one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import as_array, conditional_T_given_XY

EPS_RANK = 1e-8
# relative singular-value cutoff for the flat-direction kernel
FLAT_RTOL = 1e-7


@dataclass(frozen=True)
class DirectionalDerivative:
    value: float
    finite: bool
    direction: tuple[int, int, int, int, int]


@dataclass(frozen=True, eq=False)
class StationarityReport:
    conditionals: np.ndarray
    defined: np.ndarray
    ranks: tuple[int, ...]
    stationary: bool
    worst_residual: float
    factors: tuple | None = None


def cmi(Q) -> float:
    """``I_Q(T:X|Y)`` in bits."""
    q = as_array(Q)
    return _cmi(q)


def _cmi(q: np.ndarray) -> float:
    pxy = q.sum(axis=0)
    pty = q.sum(axis=1)
    py = pty.sum(axis=0)
    num = q * py[None, None, :]
    den = pty[:, None, :] * pxy[None, :, :]
    mask = q > 0
    val = float(np.sum(q[mask] * np.log2(num[mask] / den[mask])))
    return max(val, 0.0)


def cmi_swapped(Q) -> float:
    """``I_Q(T:Y|X)`` in bits."""
    return _cmi(as_array(Q).transpose(0, 2, 1))


def _log_conditionals(qt: np.ndarray, cell: np.ndarray) -> np.ndarray:
    """``log2 Q(t|x,y)`` with ``-inf`` for zero atoms in occupied cells and 0 in empty cells."""
    out = np.zeros_like(qt)
    pos = qt > 0
    out[pos] = np.log2(qt[pos] / cell[pos])
    out[~pos & (cell > 0)] = -np.inf
    return out


def directional_derivative(Q, t, x, x2, y, y2) -> DirectionalDerivative:
    """One-sided derivative of ``I_Q(T:X|Y)`` along ``gamma[t; x, x2; y, y2]``."""
    q = as_array(Q)
    direction = (int(t), int(x), int(x2), int(y), int(y2))
    qt = q[t]
    cell = q.sum(axis=0)
    if qt[x, y2] <= 0 or qt[x2, y] <= 0:
        return DirectionalDerivative(float("inf"), False, direction)
    lc = _log_conditionals(qt, cell)
    val = lc[x, y] + lc[x2, y2] - lc[x, y2] - lc[x2, y]
    return DirectionalDerivative(float(val), bool(np.isfinite(val)), direction)


def derivative_table(q: np.ndarray, t: int) -> np.ndarray:
    """All one-sided derivatives ``D[x, x2, y, y2]`` for the slice ``t``.

    Infeasible moves carry ``+inf``; entries with ``x == x2`` or ``y == y2``
    are zero.
    """
    qt = q[t]
    cell = q.sum(axis=0)
    lc = _log_conditionals(qt, cell)
    dec = np.where(qt > 0, lc, 0.0)
    D = lc[:, None, :, None] + lc[None, :, None, :] - dec[:, None, None, :] - dec[None, :, :, None]
    infeasible = (qt[:, None, None, :] <= 0) | (qt[None, :, :, None] <= 0)
    D = np.where(infeasible, np.inf, D)
    nx, ny = qt.shape
    D[np.arange(nx), np.arange(nx)] = 0.0
    D[:, :, np.arange(ny), np.arange(ny)] = 0.0
    return D


def min_feasible_derivative(Q) -> float:
    """Smallest derivative over all feasible generating moves; ``-inf`` if a descent is unbounded."""
    q = as_array(Q)
    best = 0.0
    for t in range(q.shape[0]):
        if q[t].sum() <= 0 or min(q.shape[1:]) < 2:
            continue
        best = min(best, float(np.min(derivative_table(q, t))))
    return best


def gamma_gradient(q: np.ndarray, basis, anchors) -> np.ndarray:
    """Derivatives along the anchored basis moves, in bits."""
    cell = q.sum(axis=0)
    out = np.empty(len(basis))
    for j, (t, x, y) in enumerate(basis):
        x0, y0 = anchors[t]
        lc = _log_conditionals(q[t], cell)
        out[j] = lc[x, y] + lc[x0, y0] - lc[x, y0] - lc[x0, y]
    return out


def stationarity_test(Q, eps_rank: float = EPS_RANK) -> StationarityReport:
    """Rank-one test of the conditional matrices ``Q(t|., .)``.

    Minors are taken over 2x2 blocks whose four cells are all defined.
    """
    q = as_array(Q)
    cond, defined = conditional_T_given_XY(q)
    nt = q.shape[0]
    worst = 0.0
    ranks = []
    for t in range(nt):
        m = cond[t]
        w = _worst_minor(m, defined)
        worst = max(worst, w)
        if not np.any(m[defined] > 0):
            ranks.append(0)
        elif w <= eps_rank:
            ranks.append(1)
        else:
            ranks.append(max(2, int(np.linalg.matrix_rank(np.where(defined, m, 0.0), tol=eps_rank))))
    stationary = worst <= eps_rank
    factors = tuple(_rank_one_factors(cond[t], defined) for t in range(nt)) if stationary else None
    cond.setflags(write=False)
    return StationarityReport(cond, defined, tuple(ranks), stationary, worst, factors)


def _worst_minor(m: np.ndarray, defined: np.ndarray) -> float:
    M = m[:, None, :, None] * m[None, :, None, :] - m[:, None, None, :] * m[None, :, :, None]
    ok = (
        defined[:, None, :, None]
        & defined[None, :, None, :]
        & defined[:, None, None, :]
        & defined[None, :, :, None]
    )
    vals = np.abs(M[ok])
    return float(vals.max()) if vals.size else 0.0


def _rank_one_factors(m: np.ndarray, defined: np.ndarray, iters: int = 50):
    """Weighted alternating least squares for ``m ~ v w^T`` on defined cells."""
    W = defined.astype(float)
    mm = np.where(defined, m, 0.0)
    v = mm.sum(axis=1) + 1e-300
    w = np.ones(m.shape[1])
    for _ in range(iters):
        w = (W * mm).T @ v / np.maximum(W.T @ (v * v), 1e-300)
        v = (W * mm) @ w / np.maximum(W @ (w * w), 1e-300)
    scale = np.abs(v).max()
    if scale > 0:
        v, w = v / scale, w * scale
    return v, w


def flat_kernel(Q, rtol: float = FLAT_RTOL) -> np.ndarray:
    """Moves that preserve ``Q(T|X,Y)`` on occupied cells.

    Returns an array of shape ``(k, |T|, |X|, |Y|)``.  Each direction has the
    form ``d(t,x,y) = Q(t|x,y) m(x,y)`` with ``m`` supported on occupied cells
    and zero ``(T,X)`` and ``(T,Y)`` marginals.  ``H(T|X,Y)`` is affine along
    these moves.
    """
    q = as_array(Q)
    cond, defined = conditional_T_given_XY(q)
    cells = np.argwhere(defined)
    nt, nx, ny = q.shape
    k = len(cells)
    if k == 0:
        return np.zeros((0,) + q.shape)
    # rows: (t,x) sums and (t,y) sums of c(t|x,y) m(x,y)
    M = np.zeros((nt * (nx + ny), k))
    for j, (x, y) in enumerate(cells):
        c = cond[:, x, y]
        M[np.arange(nt) * (nx + ny) + x, j] = c
        M[np.arange(nt) * (nx + ny) + nx + y, j] = c
    _, s, vt = np.linalg.svd(M)
    cutoff = rtol * max(s[0] if s.size else 0.0, 1.0)
    rank = int(np.sum(s > cutoff))
    null = vt[rank:]
    out = np.zeros((len(null),) + q.shape)
    for i, m in enumerate(null):
        for j, (x, y) in enumerate(cells):
            out[i, :, x, y] = cond[:, x, y] * m[j]
        out[i] /= np.abs(out[i]).max()
    return out


def flat_directions(Q, eps_rank: float = EPS_RANK, rtol: float = FLAT_RTOL) -> list[np.ndarray]:
    """Basis of the moves along which ``H(T|X,Y)`` is affine at a stationary ``Q``.

    Empty when ``Q`` fails the rank-one test.
    """
    if not stationarity_test(Q, eps_rank).stationary:
        return []
    return list(flat_kernel(Q, rtol))


def conditional_gap(q1, q2, mass_floor: float = 1e-6) -> float:
    """Largest difference of ``Q(T|X,Y)`` over cells occupied in both points."""
    c1, d1 = conditional_T_given_XY(q1)
    c2, d2 = conditional_T_given_XY(q2)
    cells = d1 & d2 & (as_array(q1).sum(axis=0) > mass_floor) & (as_array(q2).sum(axis=0) > mass_floor)
    if not cells.any():
        return 0.0
    return float(np.abs(c1[:, cells] - c2[:, cells]).max())
