"""Minimize ``I_Q(T:X|Y)`` over the domain and assemble the decomposition.

The dispatcher tries, in order: a singleton domain, the all-binary closed
form, a conditional-independence LP in each direction, and a log-barrier
Newton method in gamma coordinates.

``I_Q(T:X|Y) - I_Q(T:Y|X) = I(T:X) - I(T:Y)`` is constant on the domain, so a
point with ``T _||_ Y | X`` is also a minimizer and both unique informations
are read off the same optimizer.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .deltap import (
    EPS_INT,
    AllBinaryParams,
    DeltaPSpec,
    GammaCoords,
    all_binary_params,
    bounds_222,
    build_spec,
    classify_point,
    constraint_matrix,
    is_all_binary,
    max_step,
    point_222,
    random_point,
    to_gamma,
)
from .distributions import JointDist3, as_array, ci_residual, entropy_and_mi_suite, from_solver
from .errors import MaxIterationsExceeded, NotAllBinary
from .objective import cmi, cmi_swapped, derivative_table, flat_kernel

log = logging.getLogger(__name__)

PATHS = ("ClosedForm222", "CiLpX", "CiLpY", "GenericDescent", "SingletonDomain")

CI_TOL_SOLVER = 1e-7
# cells lighter than this carry no reliable conditional at a numerical optimizer
CELL_FLOOR = 1e-8
BOX_TOL = 1e-12
KKT_TOL = 1e-8
WITNESS_OBJ_TOL = 1e-8
WITNESS_MIN_DIST = 1e-6
LP_FEAS_TOL = 1e-10
# after the barrier phase, cells below SNAP_CANDIDATE start out as vanishing;
# cells up to SNAP_LIMIT may be added when the first-order test asks for it
SNAP_CANDIDATE = 1e-7
SNAP_LIMIT = 1e-5
# entering moves must ascend by at least this much (bits per unit new mass)
ENTER_MARGIN = 1e-6
ENTER_BOX = 1e3
ENTER_ROUNDS = 60


@dataclass(frozen=True)
class SolveOptions:
    restarts: int = 8
    max_iter: int = 10000
    seed: int = 0
    eps_int: float = EPS_INT
    mu0: float = 1e-2
    mu_min: float = 1e-12
    mu_factor: float = 0.1
    newton_tol: float = 1e-14
    armijo: float = 1e-4


@dataclass(frozen=True)
class Location:
    kind: str  # "Interior" | "Boundary"
    atoms: tuple[tuple[int, int, int], ...] = ()
    min_atom: float = float("inf")


@dataclass(frozen=True, eq=False)
class Uniqueness:
    verdict: str  # "Unique" | "NonUnique" | "Undetermined"
    witnesses: tuple | None = None
    reason: str = ""


@dataclass(frozen=True)
class CIFlags:
    t_x_given_y: bool
    t_y_given_x: bool


@dataclass(frozen=True, eq=False)
class SolveReport:
    ui_bits: float
    optimizer: JointDist3
    g_coords: GammaCoords
    path: str
    location: Location
    uniqueness: Uniqueness
    ci_flags: CIFlags
    iterations: int = 0
    final_grad_norm: float = 0.0
    all_binary_case: int | None = None
    lp_margin: float | None = None
    history: np.ndarray | None = field(default=None, repr=False)

    @property
    def interior(self) -> bool:
        return self.location.kind == "Interior"

    def to_json_obj(self) -> dict:
        obj = {
            "uiBits": self.ui_bits,
            "path": self.path,
            "location": {
                "kind": self.location.kind,
                "atoms": [list(a) for a in self.location.atoms],
                "minAtom": self.location.min_atom,
            },
            "uniqueness": {"verdict": self.uniqueness.verdict, "reason": self.uniqueness.reason},
            "ciFlags": {"TXgivenY": self.ci_flags.t_x_given_y, "TYgivenX": self.ci_flags.t_y_given_x},
            "iterations": self.iterations,
            "finalGradNorm": self.final_grad_norm,
            "optimizer": {"shape": list(self.optimizer.shape), "p": [float(v) for v in self.optimizer.p.ravel()]},
            "gCoords": [[list(k), float(v)] for k, v in zip(self.g_coords.keys, self.g_coords.values)],
        }
        if self.uniqueness.witnesses is not None:
            obj["uniqueness"]["witnesses"] = [[float(v) for v in w.ravel()] for w in self.uniqueness.witnesses]
        if self.all_binary_case is not None:
            obj["allBinaryCase"] = self.all_binary_case
        if self.lp_margin is not None:
            obj["lpMargin"] = self.lp_margin
        return obj


@dataclass(frozen=True)
class PidDecomposition:
    ui_x: float
    ui_y: float
    shared: float
    synergy: float
    mi_tx: float
    mi_ty: float
    mi_txy: float

    def as_dict(self) -> dict:
        return {
            "uiX": self.ui_x,
            "uiY": self.ui_y,
            "shared": self.shared,
            "synergy": self.synergy,
            "miTX": self.mi_tx,
            "miTY": self.mi_ty,
            "miTXY": self.mi_txy,
        }


# --------------------------------------------------------------------------
# report assembly


def _ci_flags(q) -> CIFlags:
    return CIFlags(
        t_x_given_y=ci_residual(q, "Y", CELL_FLOOR) <= CI_TOL_SOLVER,
        t_y_given_x=ci_residual(q, "X", CELL_FLOOR) <= CI_TOL_SOLVER,
    )


def _location(spec, q, eps_int) -> Location:
    m = classify_point(spec, q, eps_int)
    kind = "Interior" if m.kind == "interior" else "Boundary"
    return Location(kind, m.atoms, m.min_atom)


def _clean(q: np.ndarray) -> np.ndarray:
    q = np.array(q, dtype=float)
    q[q < 0] = 0.0
    return q


def analyze_uniqueness(spec: DeltaPSpec, q: np.ndarray, interior: bool, ui: float | None = None) -> Uniqueness:
    """Verdict from the flat kernel at an optimizer.

    A nontrivial kernel yields a verified witness pair (the endpoints of the
    feasible segment).  A trivial kernel certifies uniqueness only at
    interior points.
    """
    qc = np.array(q, dtype=float)
    qc[:, qc.sum(axis=0) < CELL_FLOOR * 1e-4] = 0.0
    K = flat_kernel(qc)
    if len(K):
        if ui is None:
            ui = cmi(qc)
        for d in K:
            sp, sm = max_step(qc, d), max_step(qc, -d)
            if not (np.isfinite(sp) and np.isfinite(sm)):
                continue
            w1, w2 = _clean(qc + sp * d), _clean(qc - sm * d)
            if np.abs(w1 - w2).max() < WITNESS_MIN_DIST:
                continue
            f1, f2 = cmi(w1), cmi(w2)
            if abs(f1 - ui) <= WITNESS_OBJ_TOL and abs(f2 - ui) <= WITNESS_OBJ_TOL:
                return Uniqueness("NonUnique", (w1, w2), "flat direction preserving Q(T|X,Y)")
        return Uniqueness("Undetermined", None, "flat kernel without a verified witness")
    if interior:
        return Uniqueness("Unique", None, "interior optimizer with trivial flat kernel")
    margin, direction = entering_margin(spec, qc, with_direction=True)
    if margin is None or margin > ENTER_MARGIN:
        return Uniqueness("Unique", None, "trivial flat kernel and every move into an empty cell ascends")
    if direction is not None:
        if ui is None:
            ui = cmi(qc)
        s = max_step(qc, direction)
        for frac in (1.0, 0.5, 0.1, 0.01):
            w = _clean(qc + frac * s * direction)
            if np.abs(w - qc).max() < WITNESS_MIN_DIST:
                break
            if abs(cmi(w) - ui) <= WITNESS_OBJ_TOL:
                return Uniqueness("NonUnique", (qc.copy(), w), "zero-slope move into empty cells keeps the optimum")
    return Uniqueness("Undetermined", None, f"boundary optimizer, entering margin {margin:.2e}")


def entering_margin(spec: DeltaPSpec, q: np.ndarray, rounds: int = ENTER_ROUNDS, with_direction: bool = False):
    """Lower bound on the slope of the objective along moves that fill empty cells.

    A second optimizer occupying a cell that is empty at ``q`` would be
    reached along a move ``d`` with zero slope.  Along ``d`` the slope is

        sum_old d log Q(t|x,y) + sum_new z log(z / Z),

    with ``z`` the new mass of a cell and ``Z`` its total.  The second term is
    convex and positively homogeneous, and ``z log(z / Z) >= z log r`` for any
    distribution ``r`` on the cell.  The minimum over marginal-preserving
    moves with unit new mass is bounded from below by cutting planes built
    from such ``r``; the best lower bound is returned.  ``None`` means no
    such move exists.  With ``with_direction`` the last LP move is returned
    as well, as a full tensor.
    """
    sup = spec.support
    cells = q.sum(axis=0)
    occupied = cells > 0
    new_atoms = sup & ~occupied[None]
    if not new_atoms.any():
        return (None, None) if with_direction else None
    old_atoms = sup & occupied[None]
    if np.any(old_atoms & (q <= 0)):
        return (-np.inf, None) if with_direction else -np.inf
    cond = np.divide(q, cells[None], out=np.ones_like(q), where=occupied[None])
    var = np.flatnonzero((old_atoms | new_atoms).ravel())
    nv = len(var)
    is_new = new_atoms.ravel()[var]
    cell_of = (var % (q.shape[1] * q.shape[2]))
    new_cells = np.unique(cell_of[is_new])
    nc = len(new_cells)
    members = [np.flatnonzero(is_new & (cell_of == c)) for c in new_cells]
    cost = np.concatenate([np.where(is_new, 0.0, np.log2(np.where(is_new, 1.0, cond.ravel()[var]))), np.ones(nc)])
    A = constraint_matrix(q.shape)[:, var]
    A_eq = np.zeros((len(A) + 1, nv + nc))
    A_eq[: len(A), :nv] = A
    A_eq[-1, :nv] = is_new
    b_eq = np.zeros(len(A_eq))
    b_eq[-1] = 1.0
    bounds = [(0.0, None) if n else (-ENTER_BOX, ENTER_BOX) for n in is_new] + [(None, None)] * nc
    cuts = []

    def add_cut(j, r):
        row = np.zeros(nv + nc)
        row[members[j]] = np.log2(np.maximum(r, 1e-12))
        row[nv + j] = -1.0
        cuts.append(row)

    for j, m in enumerate(members):
        add_cut(j, np.full(len(m), 1.0 / len(m)))
    best = -np.inf
    move = None
    for _ in range(rounds):
        res = linprog(
            cost, A_ub=np.array(cuts), b_ub=np.zeros(len(cuts)), A_eq=A_eq, b_eq=b_eq, bounds=bounds,
            method="highs",
            options={"primal_feasibility_tolerance": LP_FEAS_TOL, "dual_feasibility_tolerance": LP_FEAS_TOL},
        )
        if res.status == 2:
            return (None, None) if with_direction else None
        if res.status != 0:
            break
        best = max(best, float(res.fun))
        move = np.zeros(q.size)
        move[var] = np.where(is_new, np.maximum(res.x[:nv], 0.0), res.x[:nv])
        move[np.abs(move) < 1e-13] = 0.0
        move = move.reshape(q.shape)
        if best > ENTER_MARGIN:
            break
        x = res.x
        exact = float(cost[:nv] @ x[:nv])
        for j, m in enumerate(members):
            z = np.maximum(x[m], 0.0)
            Z = z.sum()
            if Z > 1e-12:
                r = z / Z
                exact += float(np.sum(z[z > 0] * np.log2(r[z > 0])))
                add_cut(j, r)
        # the true slope at the LP point is an upper bound on the minimum
        if exact - best <= ENTER_MARGIN:
            break
    return (best, move) if with_direction else best


def _report(spec, q, path, opts, uniqueness=None, **kw) -> SolveReport:
    q = _clean(q)
    dist = from_solver(q)
    loc = _location(spec, q, opts.eps_int)
    ui = cmi(q)
    if uniqueness is None:
        uniqueness = analyze_uniqueness(spec, q, loc.kind == "Interior", ui)
    kw.setdefault("final_grad_norm", kkt_residual(q))
    return SolveReport(
        ui_bits=ui,
        optimizer=dist,
        g_coords=to_gamma(spec, q),
        path=path,
        location=loc,
        uniqueness=uniqueness,
        ci_flags=_ci_flags(q),
        **kw,
    )


def kkt_residual(q) -> float:
    """``max(0, -min derivative)`` over feasible generating moves (``inf`` if unbounded)."""
    q = as_array(q)
    worst = 0.0
    if min(q.shape[1:]) < 2:
        return 0.0
    for t in range(q.shape[0]):
        if q[t].sum() <= 0:
            continue
        worst = max(worst, -float(np.min(derivative_table(q, t))))
    return worst


# --------------------------------------------------------------------------
# conditional-independence LP


def _ci_lp(p: np.ndarray, direction: str):
    """Max-margin point with ``T _||_ X | Y`` (``"X"``) or ``T _||_ Y | X`` (``"Y"``).

    Returns ``(Q, margin)`` or ``None`` when infeasible.
    """
    if direction not in ("X", "Y"):
        raise ValueError("direction must be 'X' or 'Y'")
    P = p if direction == "X" else p.transpose(0, 2, 1)
    nt, nx, ny = P.shape
    pty = P.sum(axis=1)
    ptx = P.sum(axis=2)
    ys = np.nonzero(pty.sum(axis=0) > 0)[0]
    m = len(ys)
    nv = nx * m + 1
    # variable q(x|y) sits at x * m + j for y = ys[j]
    A1 = np.zeros((m, nv))
    for j in range(m):
        A1[j, np.arange(nx) * m + j] = 1.0
    A2 = np.zeros((nt * nx, nv))
    for t in range(nt):
        for x in range(nx):
            A2[t * nx + x, x * m : (x + 1) * m] = pty[t, ys]
    A_eq = np.vstack([A1, A2])
    b_eq = np.concatenate([np.ones(m), ptx.ravel()])
    supp = (ptx[:, :, None] > 0) & (pty[:, None, ys] > 0)
    ts, xs, js = np.nonzero(supp)
    A_ub = np.zeros((len(ts), nv))
    A_ub[np.arange(len(ts)), xs * m + js] = -pty[ts, ys[js]]
    A_ub[:, -1] = 1.0
    c = np.zeros(nv)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=A_ub if len(ts) else None,
        b_ub=np.zeros(len(ts)) if len(ts) else None,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=[(0, None)] * (nv - 1) + [(0, 1)],
        method="highs",
        options={"primal_feasibility_tolerance": LP_FEAS_TOL, "dual_feasibility_tolerance": LP_FEAS_TOL},
    )
    if res.status != 0:
        return None
    z = res.x.copy()
    z += np.linalg.lstsq(A_eq, b_eq - A_eq @ z, rcond=None)[0]
    z = np.maximum(z, 0.0)
    qxy = np.zeros((nx, ny))
    qxy[:, ys] = z[:-1].reshape(nx, m)
    Q = pty[:, None, :] * qxy[None, :, :]
    if direction == "Y":
        Q = Q.transpose(0, 2, 1)
    dev = max(np.abs(Q.sum(axis=2) - p.sum(axis=2)).max(), np.abs(Q.sum(axis=1) - p.sum(axis=1)).max())
    if dev > 1e-9:
        return None
    return np.ascontiguousarray(Q), float(res.x[-1])


def ci_feasibility_lp(P, direction: str = "X") -> JointDist3 | None:
    """A distribution in the domain satisfying the requested CI statement, if any."""
    out = _ci_lp(as_array(P), direction)
    if out is None:
        return None
    return from_solver(out[0])


# --------------------------------------------------------------------------
# all-binary closed form


def _in_box(box, g1, g2) -> bool:
    return (
        box.g1min - BOX_TOL <= g1 <= box.g1max + BOX_TOL
        and box.g2min - BOX_TOL <= g2 <= box.g2max + BOX_TOL
    )


def _box_clip(box, g1, g2):
    return float(np.clip(g1, box.g1min, box.g1max)), float(np.clip(g2, box.g2min, box.g2max))


def _is_ci(q, given) -> bool:
    return ci_residual(q, given, 0.0) <= 1e-9


def _line_candidate(par: AllBinaryParams, box, fixed: int):
    """Stationary point on a degenerate line where factor ``fixed`` is a single point.

    The fixed slice lives on one row or one column.  Equal conditionals on
    that line give a linear equation in the free coordinate.
    """
    g = (box.g1min, box.g2min)
    q = point_222(par, *g)
    R = q[fixed]
    free = 1 - fixed
    base = point_222(par, 0.0, 0.0)[free]
    pt = base.sum()
    sgn = np.array([[1.0, -1.0], [-1.0, 1.0]])
    rows = [r for r in range(2) if R[r].sum() > 0]
    cols = [c for c in range(2) if R[:, c].sum() > 0]
    cands = []
    lines = []
    if len(rows) == 1:
        lines.append([(rows[0], 0), (rows[0], 1)])
    if len(cols) == 1:
        lines.append([(0, cols[0]), (1, cols[0])])
    for (i0, j0), (i1, j1) in lines:
        r0, r1 = R[i0, j0], R[i1, j1]
        # u_k = base_k + pt * s_k * g ; condition u0 r1 = u1 r0
        s0, s1 = sgn[i0, j0], sgn[i1, j1]
        den = pt * (s0 * r1 - s1 * r0)
        if den == 0:
            continue
        cands.append((base[i1, j1] * r0 - base[i0, j0] * r1) / den)
    lo, hi = (box.g1min, box.g1max) if free == 0 else (box.g2min, box.g2max)
    cands = [float(np.clip(c, lo, hi)) for c in cands] + [lo, hi]
    pts = [(c, g[1]) if free == 0 else (g[0], c) for c in cands]
    vals = [cmi(point_222(par, *pt_)) for pt_ in pts]
    return pts[int(np.argmin(vals))]


def solve_all_binary(P, opts: SolveOptions | None = None) -> SolveReport:
    """Closed-form minimizer for binary ``T``, ``X``, ``Y`` with both ``t`` present."""
    opts = opts or SolveOptions()
    p = as_array(P)
    if not is_all_binary(p):
        raise NotAllBinary(f"closed form needs shape (2,2,2) with P(T=t) > 0, got {p.shape}")
    spec = build_spec(p)
    par = all_binary_params(p)
    box = bounds_222(p)
    b, c, d, e = par.b, par.c, par.d, par.e
    line0 = box.g1min == box.g1max
    line1 = box.g2min == box.g2max

    if abs(b - c) <= BOX_TOL and abs(d - e) <= BOX_TOL and not (line0 or line1):
        q = point_222(par, 0.0, 0.0)
        w1 = point_222(par, box.g1min, box.g2min)
        w2 = point_222(par, box.g1max, box.g2max)
        uniq = Uniqueness("NonUnique", (_clean(w1), _clean(w2)), "b = c and d = e: the diagonal is optimal")
        return _report(spec, q, "ClosedForm222", opts, uniq, all_binary_case=1)

    g = None
    case = None
    if d != e:
        cand = (d * (b - c) * (1 - d) / (d - e), e * (b - c) * (1 - e) / (d - e))
        if _in_box(box, *cand) and _is_ci(_clean(point_222(par, *_box_clip(box, *cand))), "Y"):
            g, case = _box_clip(box, *cand), 2
    if g is None and b != c:
        cand = (b * (d - e) * (1 - b) / (b - c), c * (d - e) * (1 - c) / (b - c))
        if _in_box(box, *cand) and _is_ci(_clean(point_222(par, *_box_clip(box, *cand))), "X"):
            g, case = _box_clip(box, *cand), 3
    if g is None:
        if line0 and line1:
            g = (box.g1min, box.g2min)
        elif line0 or line1:
            g = _line_candidate(par, box, 0 if line0 else 1)
        else:
            lo, hi = (box.g1min, box.g2min), (box.g1max, box.g2max)
            g = lo if cmi(point_222(par, *lo)) <= cmi(point_222(par, *hi)) else hi
        q = _clean(point_222(par, *g))
        if _is_ci(q, "Y"):
            case = 2
        elif _is_ci(q, "X"):
            case = 3
        else:
            case = 4 if np.allclose(g, (box.g1min, box.g2min), atol=BOX_TOL, rtol=0) else 5
    q = _clean(point_222(par, *g))
    uniq = Uniqueness("Unique", None, "all-binary domain without b = c and d = e")
    return _report(spec, q, "ClosedForm222", opts, uniq, all_binary_case=case)


# --------------------------------------------------------------------------
# generic descent


@dataclass
class _Active:
    idx: np.ndarray  # flat indices of the active atoms
    q0: np.ndarray
    B: np.ndarray
    cell: np.ndarray
    ncell: int


def _active_system(spec: DeltaPSpec) -> _Active:
    nt, nx, ny = spec.shape
    idx = np.flatnonzero(spec.support.ravel())
    cell = (idx % (nx * ny)).astype(np.int64)
    return _Active(idx, spec.q0.ravel()[idx].copy(), np.ascontiguousarray(spec.basis_matrix[idx]), cell, nx * ny)


def _face_newton(spec: DeltaPSpec, act: _Active, g: np.ndarray, zero: np.ndarray, iters: int = 30) -> np.ndarray:
    """Newton steps on ``-H(T|X,Y)`` restricted to the face where ``zero`` atoms vanish."""
    B, q0 = act.B, act.q0
    if zero.any():
        Bz = B[zero]
        g = g + np.linalg.lstsq(Bz, -(q0[zero] + Bz @ g), rcond=None)[0]
        _, s, vt = np.linalg.svd(Bz)
        rank = int(np.sum(s > 1e-12 * max(s[0], 1.0))) if s.size else 0
        N = vt[rank:].T
    else:
        N = np.eye(B.shape[1])
    if N.shape[1] == 0:
        return g
    keep = ~zero
    Bk = B[keep] @ N
    cell = act.cell[keep]
    C = np.zeros((act.ncell, keep.sum()))
    C[cell, np.arange(keep.sum())] = 1.0
    Bck = C @ Bk

    def fval(gg):
        q = q0[keep] + B[keep] @ gg
        if np.any(q <= 0):
            return np.inf
        Qc = C @ q
        return float(np.sum(q * np.log(q / Qc[cell])))

    f = fval(g)
    if not np.isfinite(f):
        return g
    for _ in range(iters):
        q = q0[keep] + B[keep] @ g
        Qc = C @ q
        grad = Bk.T @ np.log(q / Qc[cell])
        inv_c = np.where(Qc > 0, 1.0 / np.where(Qc > 0, Qc, 1.0), 0.0)
        H = (Bk.T / q) @ Bk - (Bck.T * inv_c) @ Bck
        h = -np.linalg.lstsq(H, grad, rcond=1e-13)[0]
        slope = float(grad @ h)
        if np.abs(grad).max() <= 1e-13 or -slope <= 1e-30:
            break
        dq = Bk @ h
        neg = dq < 0
        s = min(1.0, 0.99 * float(np.min(-q[neg] / dq[neg]))) if neg.any() else 1.0
        if -slope < 1e-12:
            # decrease is below the resolution of f; trust the local quadratic model
            gn = g + s * (N @ h)
            fn = fval(gn)
            if not np.isfinite(fn):
                break
            g, f = gn, fn
            continue
        while s > 1e-12:
            gn = g + s * (N @ h)
            fn = fval(gn)
            if fn <= f + 1e-4 * s * slope:
                break
            s *= 0.5
        else:
            break
        g, f = gn, fn
    return g


def _face_point(spec: DeltaPSpec, act: _Active, g: np.ndarray, zero_cells: np.ndarray):
    nx, ny = spec.shape[1:]
    g = _face_newton(spec, act, g, zero_cells[act.cell])
    q = spec.point(g)
    q[:, zero_cells.reshape(nx, ny)] = 0.0
    if q.min() < -1e-12:
        return None
    return _clean(q)


def _violations(q: np.ndarray):
    """Cells entered and left by generating moves with negative derivative."""
    enter, leave = set(), set()
    for t in range(q.shape[0]):
        if q[t].sum() <= 0:
            continue
        D = derivative_table(q, t)
        for x, x2, y, y2 in np.argwhere(D < -KKT_TOL):
            enter.update({(x, y), (x2, y2)})
            leave.update({(x, y2), (x2, y)})
    return enter, leave


def _polish(spec: DeltaPSpec, act: _Active, g: np.ndarray) -> np.ndarray:
    """Identify the vanishing cells and re-optimize on the corresponding face.

    Cells that are light after the barrier phase are set to zero; cells the
    first-order test says should gain mass are released, and light cells it
    says should lose mass are added.
    """
    nx, ny = spec.shape[1:]
    q_bar = _clean(spec.point(g))
    cells = q_bar.sum(axis=0)
    zero_cells = cells.ravel() < SNAP_CANDIDATE
    best = (kkt_residual(q_bar) > KKT_TOL, cmi(q_bar), q_bar)
    seen = set()
    for _ in range(8):
        key = zero_cells.tobytes()
        if key in seen:
            break
        seen.add(key)
        q = _face_point(spec, act, g, zero_cells)
        if q is None:
            break
        k = kkt_residual(q)
        cand = (k > KKT_TOL, cmi(q), q)
        if cand[:2] < best[:2]:
            best = cand
        if k <= KKT_TOL:
            break
        enter, leave = _violations(q)
        new = zero_cells.copy()
        for x, y in enter:
            new[x * ny + y] = False
        for x, y in leave:
            if cells[x, y] < SNAP_LIMIT:
                new[x * ny + y] = True
        if np.array_equal(new, zero_cells):
            break
        zero_cells = new
    return best[2]


def _descend(spec: DeltaPSpec, act: _Active, g_start: np.ndarray, opts: SolveOptions, budget: int):
    g, it, status, hist = kernels.barrier_newton(
        act.q0, act.B, act.cell, act.ncell, g_start,
        opts.mu0, opts.mu_min, opts.mu_factor, opts.newton_tol, budget, opts.armijo,
    )
    q = _polish(spec, act, np.asarray(g))
    return q, it, status, hist


def solve_generic(P, opts: SolveOptions | None = None) -> SolveReport:
    """Barrier Newton descent in gamma coordinates, with random restarts as a fallback."""
    opts = opts or SolveOptions()
    p = as_array(P)
    spec = build_spec(p)
    if spec.dim == 0:
        return _report(spec, spec.q0, "GenericDescent", opts)
    act = _active_system(spec)
    budget = opts.max_iter
    q, it, status, hist = _descend(spec, act, np.zeros(spec.dim), opts, budget)
    total = it
    best = (cmi(q), q, hist)
    kkt = kkt_residual(q)
    attempt = 0
    while kkt > KKT_TOL and attempt < opts.restarts and total < opts.max_iter:
        rng = np.random.default_rng([opts.seed, attempt])
        start = random_point(spec, rng, spread=0.9)
        g0 = to_gamma(spec, start).values
        q2, it2, status, hist2 = _descend(spec, act, g0, opts, opts.max_iter - total)
        total += it2
        f2 = cmi(q2)
        if f2 < best[0] - 1e-15:
            best = (f2, q2, hist2)
        kkt = min(kkt, kkt_residual(q2))
        attempt += 1
        log.debug("restart %d: f=%.3e kkt=%.3e", attempt, f2, kkt)
    _, q, hist = best
    report = _report(spec, q, "GenericDescent", opts, iterations=total, history=hist)
    if total >= opts.max_iter and report.final_grad_norm > KKT_TOL:
        raise MaxIterationsExceeded(report)
    return report


# --------------------------------------------------------------------------
# dispatcher and decomposition


def solve(P, opts: SolveOptions | None = None) -> SolveReport:
    opts = opts or SolveOptions()
    p = as_array(P)
    spec = build_spec(p)
    if spec.dim == 0:
        return _report(spec, spec.q0, "SingletonDomain", opts, Uniqueness("Unique", None, "singleton domain"))
    if is_all_binary(p):
        return solve_all_binary(p, opts)
    for direction, path in (("X", "CiLpX"), ("Y", "CiLpY")):
        out = _ci_lp(p, direction)
        if out is not None:
            Q, margin = out
            return _report(spec, Q, path, opts, lp_margin=margin)
    return solve_generic(p, opts)


def decompose(P, opts: SolveOptions | None = None, report: SolveReport | None = None) -> PidDecomposition:
    """Bivariate decomposition from a single optimizer.

    ``uiY = I_{Q*}(T:Y|X)`` at the optimizer ``Q*`` of ``I(T:X|Y)``, which is
    also a minimizer of ``I(T:Y|X)`` on the same domain.
    """
    p = as_array(P)
    report = report or solve(p, opts)
    suite = entropy_and_mi_suite(p)
    ui_x = report.ui_bits
    ui_y = cmi_swapped(report.optimizer)
    shared = suite.I_TX - ui_x
    synergy = suite.I_TXY - suite.I_TY - ui_x
    return PidDecomposition(ui_x, ui_y, shared, synergy, suite.I_TX, suite.I_TY, suite.I_TXY)
