"""Brute-force reference minimizers for small domains (dimension at most 4)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .deltap import GammaCoords, build_spec, is_all_binary
from .distributions import as_array
from .errors import DimensionTooLarge, InconsistencyDetected

MAX_DIM = 4


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 21
    refinements: int = 3
    shrink: float = 5.0
    max_points: int = 10**7
    recenter: int = 10

    def __post_init__(self):
        if self.resolution < 3:
            raise ValueError("resolution must be >= 3")
        if self.refinements < 0 or self.recenter < 0:
            raise ValueError("refinements and recenter must be >= 0")


@dataclass(frozen=True, eq=False)
class GridResult:
    ui_bits: float
    g_coords: GammaCoords
    optimizer: np.ndarray
    history: tuple[float, ...] = ()
    cell_size: float = 0.0


def gamma_box(spec) -> np.ndarray:
    """``(dim, 2)`` bounds of each gamma coordinate over the domain, by LP."""
    act = spec.support.ravel()
    B = spec.basis_matrix[act]
    q0 = spec.q0.ravel()[act]
    box = np.zeros((spec.dim, 2))
    for j in range(spec.dim):
        for k, sign in enumerate((1.0, -1.0)):
            c = np.zeros(spec.dim)
            c[j] = sign
            res = linprog(c, A_ub=-B, b_ub=q0, bounds=[(None, None)] * spec.dim, method="highs")
            box[j, k] = sign * res.fun
    return box


def _evaluate(spec, B, q0, G, center):
    """Objective at grid nodes ``G``.

    Nodes outside the domain are pulled back along the segment towards the
    feasible ``center``, so the faces near the incumbent are sampled densely.
    When the centre lies on a face, the displacements projected onto that face
    are evaluated as well; otherwise the search could not slide along it.
    Returns the values and the nodes actually evaluated.
    """
    qc = q0 + B @ center
    zero = spec.support.ravel() & (qc <= 1e-15)
    if zero.any() and len(G) > 1:
        Bz = B[zero]
        D = G - center[None, :]
        along = D - (D @ Bz.T) @ np.linalg.pinv(Bz).T
        G = np.vstack([G, center[None, :] + along])
    D = (G - center[None, :]) @ B.T
    Q = qc[None, :] + D
    outside = Q.min(axis=1) < 0
    if outside.any():
        Do = D[outside]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(Do < 0, np.maximum(qc, 0.0)[None, :] / -Do, np.inf)
        t = np.minimum(ratio.min(axis=1), 1.0)
        G = G.copy()
        G[outside] = center[None, :] + t[:, None] * (G[outside] - center[None, :])
        Q[outside] = qc[None, :] + t[:, None] * Do
    Q[(Q < 0) & (Q > -1e-14)] = 0.0
    vals = np.full(len(G), np.inf)
    feasible = Q.min(axis=1) >= 0
    if feasible.any():
        vals[feasible] = kernels.cmi_batch(Q[feasible].reshape((-1,) + spec.shape))
    return vals, G


def grid_min(P, grid: GridSpec | None = None) -> GridResult:
    """Exhaustive grid search in gamma coordinates with coarse-to-fine refinement.

    Every evaluated node is checked for nonnegativity; infeasible nodes are
    never returned.  The incumbent is carried between rounds, so the objective
    is non-increasing across refinements.
    """
    grid = grid or GridSpec()
    p = as_array(P)
    spec = build_spec(p)
    if spec.dim > MAX_DIM:
        raise DimensionTooLarge(f"grid oracle supports dim <= {MAX_DIM}, got {spec.dim}")
    q0 = spec.q0.ravel()
    B = spec.basis_matrix
    if spec.dim == 0:
        val = float(kernels.cmi_batch(spec.q0[None])[0])
        return GridResult(val, GammaCoords((), np.zeros(0)), spec.q0.copy(), (val,), 0.0)
    if grid.resolution**spec.dim > grid.max_points:
        raise DimensionTooLarge(f"{grid.resolution}^{spec.dim} grid nodes exceed {grid.max_points}")
    full = gamma_box(spec)
    lo, hi = full[:, 0].copy(), full[:, 1].copy()
    best_g = np.zeros(spec.dim)
    best = float(_evaluate(spec, B, q0, best_g[None], best_g)[0][0])
    history = []
    width = hi - lo
    for level in range(grid.refinements + 1):
        # recentre at this width while the incumbent keeps moving, then shrink
        for _ in range(grid.recenter + 1):
            axes = [np.linspace(a, b, grid.resolution) for a, b in zip(lo, hi)]
            G = np.array(list(itertools.product(*axes))) if spec.dim > 1 else axes[0][:, None]
            vals, G = _evaluate(spec, B, q0, G, best_g)
            i = int(np.argmin(vals))
            moved = vals[i] < best
            if moved:
                best, best_g = float(vals[i]), G[i]
            history.append(best)
            if level == 0 or not moved:
                break
            lo = np.maximum(best_g - width / 2, full[:, 0])
            hi = np.minimum(best_g + width / 2, full[:, 1])
        width = width / grid.shrink
        lo = np.maximum(best_g - width / 2, full[:, 0])
        hi = np.minimum(best_g + width / 2, full[:, 1])
    cell = float(np.max(width * grid.shrink) / (grid.resolution - 1))
    q = spec.point(best_g)
    q[q < 0] = 0.0
    return GridResult(best, GammaCoords(spec.basis, best_g.copy()), q, tuple(history), cell)


@dataclass(frozen=True, eq=False)
class CrossCheckReport:
    ui: dict
    max_ui_gap: float
    max_conditional_gap: float
    optimizers: dict = field(repr=False, default_factory=dict)


def pairwise_cross_check(
    P,
    grid: GridSpec | None = None,
    ui_tol: float = 1e-6,
    cond_tol: float = 1e-5,
) -> CrossCheckReport:
    """Run every applicable solver and the grid oracle and compare them.

    Raises
    ------
    InconsistencyDetected
        When two unique-information values differ by more than ``ui_tol`` or
        two exact optimizers disagree on ``Q(T|X,Y)`` by more than ``cond_tol``.
    """
    from .solver import _ci_lp, solve, solve_all_binary, solve_generic
    from .objective import cmi, conditional_gap

    p = as_array(P)
    ui, opt = {}, {}
    r = solve(p)
    ui["dispatch:" + r.path], opt["dispatch:" + r.path] = r.ui_bits, r.optimizer.p
    r = solve_generic(p)
    ui["generic"], opt["generic"] = r.ui_bits, r.optimizer.p
    if is_all_binary(p):
        r = solve_all_binary(p)
        ui["closed_form"], opt["closed_form"] = r.ui_bits, r.optimizer.p
    for d in ("X", "Y"):
        out = _ci_lp(p, d)
        if out is not None:
            ui["ci_lp_" + d], opt["ci_lp_" + d] = cmi(out[0]), out[0]
    g = grid_min(p, grid)
    ui["grid"] = g.ui_bits
    vals = list(ui.values())
    gap = max(vals) - min(vals)
    names = list(opt)
    cgap = 0.0
    for a, b in itertools.combinations(names, 2):
        cgap = max(cgap, conditional_gap(opt[a], opt[b]))
    dump = {"p": p.tolist(), "ui": ui}
    if gap > ui_tol:
        raise InconsistencyDetected(f"unique information disagrees by {gap:.3e}", dump)
    if cgap > cond_tol:
        raise InconsistencyDetected(f"optimizer conditionals disagree by {cgap:.3e}", dump)
    return CrossCheckReport(ui, gap, cgap, opt)
