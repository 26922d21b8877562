"""Checkable non-uniqueness and support predicates, each with a witness.

Every raised flag either carries two feasible optimizers that agree in
objective and differ in max norm, or records the precondition values that
triggered it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .deltap import build_spec, is_all_binary, marginal_deviation, max_step
from .distributions import as_array, ci_residual, entropy, support_sets
from .errors import NotBinaryT, WitnessConstructionFailed
from .objective import cmi, conditional_gap, stationarity_test
from .solver import (
    BOX_TOL,
    CELL_FLOOR,
    CI_TOL_SOLVER,
    KKT_TOL,
    WITNESS_MIN_DIST,
    WITNESS_OBJ_TOL,
    SolveOptions,
    SolveReport,
    kkt_residual,
    solve,
    solve_generic,
)

# CI tests on exact input data
CI_TOL_EXACT = 1e-10
FULL_SUPPORT_TOL = 1e-9
ATOM_ZERO = 1e-12
SHARED_COND_TOL = 1e-5


@dataclass(frozen=True, eq=False)
class Flag:
    raised: bool
    reason: str
    witnesses: tuple[np.ndarray, np.ndarray] | None = None
    details: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        obj = {"raised": self.raised, "reason": self.reason, "details": _jsonable(self.details)}
        if self.witnesses is not None:
            obj["witnesses"] = [[float(v) for v in w.ravel()] for w in self.witnesses]
        return obj


@dataclass(frozen=True)
class CIExpectation:
    """What must hold at any interior optimizer for binary ``T``.

    ``kind`` is one of ``"either"``, ``"x_ci"``, ``"y_ci"``, ``"always"``,
    ``"no_interior"`` or ``"restricted"``.
    """

    kind: str
    statements: tuple[str, ...]
    x_sets: tuple[tuple[int, ...], tuple[int, ...]]
    y_sets: tuple[tuple[int, ...], tuple[int, ...]]
    restricted: tuple[tuple[str, int], ...] = ()

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "statements": list(self.statements),
            "xSets": [list(s) for s in self.x_sets],
            "ySets": [list(s) for s in self.y_sets],
        }


@dataclass(frozen=True)
class CheckItem:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True, eq=False)
class DiagnosticReport:
    cardinality_non_unique: Flag
    ci_cardinality_non_unique: Flag
    double_independence_non_unique: Flag
    blockwise_non_unique: Flag
    binary_t_interior_ci: CIExpectation | None
    inner_uniqueness_veto: Flag
    all_binary_case: int | None
    checks: tuple[CheckItem, ...] = ()

    @property
    def any_non_unique(self) -> bool:
        return any(
            f.raised
            for f in (
                self.cardinality_non_unique,
                self.ci_cardinality_non_unique,
                self.double_independence_non_unique,
                self.blockwise_non_unique,
                self.inner_uniqueness_veto,
            )
        )

    def to_json_obj(self) -> dict:
        return {
            "cardinalityNonUnique": self.cardinality_non_unique.to_json_obj(),
            "ciCardinalityNonUnique": self.ci_cardinality_non_unique.to_json_obj(),
            "doubleIndependenceNonUnique": self.double_independence_non_unique.to_json_obj(),
            "blockwiseNonUnique": self.blockwise_non_unique.to_json_obj(),
            "binaryTInteriorCI": None if self.binary_t_interior_ci is None else self.binary_t_interior_ci.to_json_obj(),
            "innerUniquenessVeto": self.inner_uniqueness_veto.to_json_obj(),
            "allBinaryCase": self.all_binary_case,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def witness_ok(p, w1, w2, value=None) -> bool:
    """Both points feasible, objective-equal within tolerance, and distinct."""
    spec = build_spec(p)
    for w in (w1, w2):
        if w.min() < -ATOM_ZERO or marginal_deviation(spec, w) > 1e-9:
            return False
    f1, f2 = cmi(w1), cmi(w2)
    if value is not None and max(abs(f1 - value), abs(f2 - value)) > WITNESS_OBJ_TOL:
        return False
    return abs(f1 - f2) <= WITNESS_OBJ_TOL and float(np.abs(w1 - w2).max()) >= WITNESS_MIN_DIST


def _orthogonal(vectors: np.ndarray, n: int) -> np.ndarray | None:
    """Unit vector orthogonal to every row of ``vectors``, or ``None``."""
    if len(vectors) == 0:
        v = np.zeros(n)
        v[0] = 1.0
        return v
    _, s, vt = np.linalg.svd(np.atleast_2d(vectors), full_matrices=True)
    rank = int(np.sum(s > 1e-10 * max(s[0], 1.0)))
    if rank >= n:
        return None
    return vt[rank]


def _project(spec, d: np.ndarray) -> np.ndarray:
    """Least-squares projection of a move onto the tangent space of the domain."""
    B = spec.basis_matrix
    coef = np.linalg.lstsq(B, d.ravel(), rcond=None)[0]
    return (B @ coef).reshape(d.shape)


def _witness_along(p, q, direction, value):
    """Pair ``(Q*, Q* + eps d)`` with ``eps`` half the feasible step in the better sign."""
    for sign in (1.0, -1.0):
        d = sign * direction
        s = max_step(q, d)
        if not np.isfinite(s) or s <= 0:
            continue
        w = q + 0.5 * min(s, 1.0) * d
        w[w < 0] = 0.0
        if witness_ok(p, q, w, value):
            return q.copy(), w
    return None


def _cardinality_witness(p, q, vs, ws, value):
    nt, nx, ny = q.shape
    v0 = _orthogonal(vs, nx)
    w0 = _orthogonal(ws, ny)
    if v0 is None or w0 is None:
        raise WitnessConstructionFailed("no vectors orthogonal to the rank-one factors")
    cond = q / q.sum(axis=0)[None]
    d = cond * np.outer(v0, w0)[None]
    spec = build_spec(p)
    dp = _project(spec, d)
    if np.abs(dp - d).max() > 1e-6 * np.abs(d).max():
        raise WitnessConstructionFailed("direction leaves the domain: optimizer is not rank-one stationary")
    dp /= np.abs(dp).max()
    pair = _witness_along(p, q, dp, value)
    if pair is None:
        raise WitnessConstructionFailed("no step keeps the second point nonnegative with equal objective")
    return pair


def check_cardinality_rule(P, report: SolveReport, variant: str = "auto") -> Flag:
    """Non-uniqueness from too few target states relative to ``X`` and ``Y``.

    ``variant="general"`` needs ``|T'| < min(|X|, |Y|)`` and uses the rank-one
    factors of ``Q*(t|x,y)``.  ``variant="ci"`` needs ``UI = 0`` and
    ``|T'| < |Y|``, with all-ones row factors; its mirror image (``T`` and
    ``Y`` independent given ``X``, ``|T'| < |X|``) is covered too.
    ``"auto"`` tries the general form first.

    Raises
    ------
    WitnessConstructionFailed
        The precondition holds but no verified second optimizer was found.
    """
    if variant not in ("auto", "general", "ci"):
        raise ValueError("variant must be 'auto', 'general' or 'ci'")
    p = as_array(P)
    q = np.array(report.optimizer.p, dtype=float)
    nt, nx, ny = p.shape
    tprime = [t for t in range(nt) if p[t].sum() > 0]
    k = len(tprime)
    full = bool(q.min() > FULL_SUPPORT_TOL)
    pre = {"tPrime": k, "nX": nx, "nY": ny, "fullSupport": full, "minAtom": float(q.min())}
    if not full:
        return Flag(False, "optimizer does not have full support", details=pre)

    if variant in ("auto", "general") and k < min(nx, ny):
        st = stationarity_test(q)
        if not st.stationary:
            raise WitnessConstructionFailed(f"optimizer fails the rank-one test (residual {st.worst_residual:.2e})")
        vs = np.array([st.factors[t][0] for t in tprime])
        ws = np.array([st.factors[t][1] for t in tprime])
        pair = _cardinality_witness(p, q, vs, ws, report.ui_bits)
        return Flag(True, "fewer target states than X and Y states at a full-support optimizer", pair,
                    {**pre, "variant": "general"})
    if variant == "general":
        return Flag(False, "|T'| >= min(|X|, |Y|)", details=pre)

    x_ci = ci_residual(q, "Y", CELL_FLOOR) <= CI_TOL_SOLVER
    y_ci = ci_residual(q, "X", CELL_FLOOR) <= CI_TOL_SOLVER
    pre.update({"TXgivenY": x_ci, "TYgivenX": y_ci})
    if x_ci and k < ny and nx >= 2:
        pty = q.sum(axis=1)
        ws = np.array([pty[t] / pty.sum(axis=0) for t in tprime])
        vs = np.ones((1, nx))
        pair = _cardinality_witness(p, q, vs, ws, report.ui_bits)
        return Flag(True, "UI(T:X\\Y) = 0 with |T'| < |Y| at a full-support optimizer", pair,
                    {**pre, "variant": "ci", "given": "Y"})
    if y_ci and k < nx and ny >= 2:
        ptx = q.sum(axis=2)
        vs = np.array([ptx[t] / ptx.sum(axis=0) for t in tprime])
        ws = np.ones((1, ny))
        pair = _cardinality_witness(p, q, vs, ws, report.ui_bits)
        return Flag(True, "UI(T:Y\\X) = 0 with |T'| < |X| at a full-support optimizer", pair,
                    {**pre, "variant": "ci", "given": "X"})
    return Flag(False, "cardinality preconditions not met", details=pre)


def check_double_independence(P) -> Flag:
    """Non-uniqueness when ``T`` is independent of ``X`` and of ``Y`` separately.

    The witness pair are the endpoints of ``Q0 + delta * sum_t P(t) gamma_t``,
    along which ``T`` stays independent of ``(X, Y)``.
    """
    p = as_array(P)
    ptx, pty = p.sum(axis=2), p.sum(axis=1)
    pt, px, py = ptx.sum(axis=1), ptx.sum(axis=0), pty.sum(axis=0)
    hx, hy = entropy(px), entropy(py)
    dev_x = float(np.abs(ptx - np.outer(pt, px)).max())
    dev_y = float(np.abs(pty - np.outer(pt, py)).max())
    pre = {"HX": hx, "HY": hy, "devTX": dev_x, "devTY": dev_y}
    if hx <= 0 or hy <= 0:
        return Flag(False, "H(X) or H(Y) vanishes", details=pre)
    if dev_x > CI_TOL_EXACT or dev_y > CI_TOL_EXACT:
        return Flag(False, "T is not independent of X and of Y", details=pre)
    xs, ys = np.nonzero(px > 0)[0], np.nonzero(py > 0)[0]
    x0, x1, y0, y1 = int(xs[0]), int(xs[1]), int(ys[0]), int(ys[1])
    q0 = pt[:, None, None] * np.outer(px, py)[None]
    d = np.zeros_like(p)
    d[:, x0, y0] = d[:, x1, y1] = pt
    d[:, x0, y1] = d[:, x1, y0] = -pt
    hi, lo = max_step(q0, d), max_step(q0, -d)
    w1, w2 = q0 + hi * d, q0 - lo * d
    w1[w1 < 0] = 0.0
    w2[w2 < 0] = 0.0
    pre.update({"deltaInterval": [-lo, hi], "moves": [x0, x1, y0, y1]})
    if not witness_ok(p, w1, w2, 0.0):
        raise WitnessConstructionFailed("double-independence segment failed verification")
    return Flag(True, "T independent of X and of Y with H(X), H(Y) > 0", (w1, w2), pre)


def _support_components(pxy: np.ndarray):
    nx, ny = pxy.shape
    xi, yi = np.nonzero(pxy > 0)
    g = coo_matrix((np.ones(len(xi)), (xi, nx + yi)), shape=(nx + ny, nx + ny))
    _, labels = connected_components(g, directed=False)
    used_x = pxy.sum(axis=1) > 0
    used_y = pxy.sum(axis=0) > 0
    comps = []
    for lab in np.unique(labels):
        bx = tuple(int(x) for x in range(nx) if labels[x] == lab and used_x[x])
        by = tuple(int(y) for y in range(ny) if labels[nx + y] == lab and used_y[y])
        if bx and by:
            comps.append((bx, by))
    return comps


def block_partition(P, tol: float = CI_TOL_EXACT) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Coarsest blocks ``X_i x Y_i`` covering the support with ``T`` independent of ``(X, Y)`` inside.

    Components of the bipartite support graph of ``P(X,Y)`` are merged when
    their conditional distributions of ``T`` coincide within ``tol``.  States
    with zero probability are left out.  Assumes both conditional
    independences hold at ``P``.
    """
    p = as_array(P)
    comps = _support_components(p.sum(axis=0))
    groups: list[tuple[np.ndarray, list, list]] = []
    for bx, by in comps:
        mass = p[:, list(bx)][:, :, list(by)].sum(axis=(1, 2))
        c = mass / mass.sum()
        for grp in groups:
            if np.abs(grp[0] - c).max() <= tol:
                grp[1].extend(bx)
                grp[2].extend(by)
                break
        else:
            groups.append((c, list(bx), list(by)))
    return [(tuple(sorted(gx)), tuple(sorted(gy))) for _, gx, gy in groups]


def check_blockwise(P) -> Flag:
    """Non-uniqueness when ``T`` is independent of ``X`` given ``Y`` and of ``Y`` given ``X``.

    Then ``T`` is independent of ``(X, Y)`` within every block of
    :func:`block_partition`.  Raised when some block spans at least two ``X``
    and two ``Y`` states with two occupied cells on distinct rows and
    columns: shifting mass inside the block while keeping ``Q(T|block)``
    fixed stays optimal.
    """
    p = as_array(P)
    rx, ry = ci_residual(p, "Y"), ci_residual(p, "X")
    pre = {"ciResidualTXgivenY": rx, "ciResidualTYgivenX": ry}
    if rx > CI_TOL_EXACT or ry > CI_TOL_EXACT:
        return Flag(False, "P does not satisfy both conditional independences", details=pre)
    blocks = block_partition(p)
    pre["partition"] = [[list(bx), list(by)] for bx, by in blocks]
    pxy = p.sum(axis=0)
    for bx, by in blocks:
        if len(bx) < 2 or len(by) < 2:
            continue
        sub = pxy[np.ix_(bx, by)]
        ct = p[:, list(bx)][:, :, list(by)].sum(axis=(1, 2)) / sub.sum()
        cells = np.argwhere(sub > 0)
        pair = next(
            ((a, b) for a in cells for b in cells if a[0] != b[0] and a[1] != b[1]),
            None,
        )
        if pair is None:
            continue
        (i0, j0), (i1, j1) = pair
        x0, x1, y0, y1 = bx[i0], bx[i1], by[j0], by[j1]
        d = np.zeros_like(p)
        d[:, x0, y0] = d[:, x1, y1] = -ct
        d[:, x0, y1] = d[:, x1, y0] = ct
        s = max_step(p, d)
        w = p + s * d
        w[w < 0] = 0.0
        details = {**pre, "block": [list(bx), list(by)], "moves": [int(x0), int(x1), int(y0), int(y1)], "step": s}
        if witness_ok(p, p.copy(), w, 0.0):
            return Flag(True, "T independent of (X, Y) inside a block spanning two X and two Y states",
                        (p.copy(), w), details)
        raise WitnessConstructionFailed("blockwise move failed verification")
    return Flag(False, "no block spans two X and two Y states", details=pre)


def binary_t_interior_expectations(P) -> CIExpectation:
    """CI statements forced at any interior optimizer when ``T`` takes two values."""
    p = as_array(P)
    tsup, xs, ys = support_sets(p)
    if len(tsup) != 2:
        raise NotBinaryT(f"need exactly two target states with positive mass, got {len(tsup)}")
    t0, t1 = (int(t) for t in tsup)
    X = (set(xs[t0].tolist()), set(xs[t1].tolist()))
    Y = (set(ys[t0].tolist()), set(ys[t1].tolist()))
    xsets = (tuple(sorted(X[0])), tuple(sorted(X[1])))
    ysets = (tuple(sorted(Y[0])), tuple(sorted(Y[1])))

    def exp(kind, *statements, restricted=()):
        return CIExpectation(kind, statements, xsets, ysets, restricted)

    if not (X[0] & X[1]) or not (Y[0] & Y[1]):
        st = []
        if not (X[0] & X[1]):
            st.append("T _||_ Y | X for every Q in the domain")
        if not (Y[0] & Y[1]):
            st.append("T _||_ X | Y for every Q in the domain")
        return exp("always", *st)
    for a, b in ((0, 1), (1, 0)):
        if X[a] - X[b] and Y[a] - Y[b]:
            return exp("no_interior", "no optimizer lies in the interior")
    if X[0] == X[1] and Y[0] == Y[1]:
        return exp("either", "T _||_ X | Y or T _||_ Y | X at any interior optimizer")
    if X[0] == X[1]:
        return exp("x_ci", "T _||_ X | Y at any interior optimizer")
    if Y[0] == Y[1]:
        return exp("y_ci", "T _||_ Y | X at any interior optimizer")
    restricted = []
    st = []
    for a, b in ((0, 1), (1, 0)):
        if X[a] - X[b]:
            restricted.append(("Y", a))
            st.append(f"T _||_ Y | X given Y in {sorted(Y[a])}")
        if Y[a] - Y[b]:
            restricted.append(("X", a))
            st.append(f"T _||_ X | Y given X in {sorted(X[a])}")
    return exp("restricted", *st, restricted=tuple(restricted))


def _restricted_residual(q, exp: CIExpectation, axis: str, idx: int) -> float:
    """``T _||_ axis | other`` with the conditioning variable restricted to slice ``idx``'s support."""
    if axis == "Y":
        return ci_residual(q[:, :, list(exp.y_sets[idx])], "X", CELL_FLOOR)
    return ci_residual(q[:, list(exp.x_sets[idx]), :], "Y", CELL_FLOOR)


def classify_all_binary(P, opts: SolveOptions | None = None) -> int:
    """Case label 1..5 of an all-binary instance, computed from a numerical optimizer."""
    from .deltap import all_binary_params, bounds_222, g_222

    p = as_array(P)
    par = all_binary_params(p)
    box = bounds_222(p)
    if (abs(par.b - par.c) <= BOX_TOL and abs(par.d - par.e) <= BOX_TOL
            and box.g1min < box.g1max and box.g2min < box.g2max):
        return 1
    q = solve_generic(p, opts).optimizer.p
    if ci_residual(q, "Y") <= 1e-7:
        return 2
    if ci_residual(q, "X") <= 1e-7:
        return 3
    g = g_222(q)
    return 4 if max(abs(g[0] - box.g1min), abs(g[1] - box.g2min)) <= 1e-7 else 5


def verify_report(P, report: SolveReport) -> list[CheckItem]:
    """Itemized checks of a solver report against first-order and support facts."""
    p = as_array(P)
    q = np.array(report.optimizer.p, dtype=float)
    spec = build_spec(p)
    items = []

    zero_atoms = spec.support & (q <= ATOM_ZERO)
    cells = q.sum(axis=0)
    bad = [tuple(int(i) for i in a) for a in np.argwhere(zero_atoms & (cells[None] > CELL_FLOOR))]
    items.append(CheckItem("vanishing_atoms_vanish_cellwise", not bad,
                           "" if not bad else f"zero atoms in occupied cells: {bad[:5]}"))

    kkt = kkt_residual(q)
    items.append(CheckItem("first_order", kkt <= KKT_TOL, f"worst descent slope {kkt:.2e}"))

    rx, ry = ci_residual(q, "Y", CELL_FLOOR), ci_residual(q, "X", CELL_FLOOR)
    if report.all_binary_case == 2:
        items.append(CheckItem("ci_expectation", rx <= CI_TOL_SOLVER, f"T_||_X|Y residual {rx:.2e}"))
    elif report.all_binary_case == 3:
        items.append(CheckItem("ci_expectation", ry <= CI_TOL_SOLVER, f"T_||_Y|X residual {ry:.2e}"))
    elif report.path == "CiLpX":
        items.append(CheckItem("ci_expectation", rx <= CI_TOL_SOLVER, f"T_||_X|Y residual {rx:.2e}"))
    elif report.path == "CiLpY":
        items.append(CheckItem("ci_expectation", ry <= CI_TOL_SOLVER, f"T_||_Y|X residual {ry:.2e}"))

    if report.interior and len(spec.t_support) == 2:
        exp = binary_t_interior_expectations(p)
        ok, detail = _expectation_holds(q, exp, rx, ry)
        items.append(CheckItem("binary_t_interior_ci", ok, detail))

    if report.uniqueness.verdict == "NonUnique" and report.uniqueness.witnesses:
        gaps = [conditional_gap(q, w) for w in report.uniqueness.witnesses]
        w1, w2 = report.uniqueness.witnesses
        gaps.append(conditional_gap(w1, w2))
        items.append(CheckItem("shared_conditional", max(gaps) <= SHARED_COND_TOL, f"max gap {max(gaps):.2e}"))
    return items


def _expectation_holds(q, exp: CIExpectation, rx: float, ry: float):
    if exp.kind == "no_interior":
        return False, "interior optimizer where none can exist"
    if exp.kind == "either":
        return min(rx, ry) <= CI_TOL_SOLVER, f"residuals X|Y {rx:.2e}, Y|X {ry:.2e}"
    if exp.kind == "x_ci":
        return rx <= CI_TOL_SOLVER, f"T_||_X|Y residual {rx:.2e}"
    if exp.kind == "y_ci":
        return ry <= CI_TOL_SOLVER, f"T_||_Y|X residual {ry:.2e}"
    if exp.kind == "always":
        worst = 0.0
        for s in exp.statements:
            worst = max(worst, ry if s.startswith("T _||_ Y") else rx)
        return worst <= CI_TOL_SOLVER, f"residual {worst:.2e}"
    worst = max((_restricted_residual(q, exp, axis, idx) for axis, idx in exp.restricted), default=0.0)
    return worst <= CI_TOL_SOLVER, f"restricted residual {worst:.2e}"


def _inner_uniqueness(p, report: SolveReport) -> Flag:
    spec = build_spec(p)
    nt, nx, ny = p.shape
    k = len(spec.t_support)
    full = bool(spec.support.all())
    pre = {"interior": report.interior, "fullSupportDomain": full, "tPrime": k,
           "TXgivenY": report.ci_flags.t_x_given_y, "TYgivenX": report.ci_flags.t_y_given_x}
    if not (report.interior and full):
        return Flag(False, "needs an interior optimizer and a full-support domain", details=pre)
    if (report.ci_flags.t_x_given_y and k < ny) or (report.ci_flags.t_y_given_x and k < nx):
        try:
            f = check_cardinality_rule(p, report, "ci")
        except WitnessConstructionFailed as exc:
            return Flag(True, "UI = 0 at an interior optimizer with enough free states", None,
                        {**pre, "witnessError": str(exc)})
        return Flag(f.raised, "UI = 0 at an interior optimizer with enough free states" if f.raised else f.reason,
                    f.witnesses, {**pre, **f.details})
    return Flag(False, "no vanishing unique information with enough free states", details=pre)


def _safe(fn, *args, **kw) -> Flag:
    try:
        return fn(*args, **kw)
    except WitnessConstructionFailed as exc:
        return Flag(True, "preconditions hold; witness construction failed", None, {"witnessError": str(exc)})


def diagnose(P, report: SolveReport | None = None, opts: SolveOptions | None = None) -> DiagnosticReport:
    """Run every predicate on ``P`` and its solver report."""
    p = as_array(P)
    report = report or solve(p, opts)
    card = _safe(check_cardinality_rule, p, report, "general")
    card_ci = _safe(check_cardinality_rule, p, report, "ci")
    try:
        exp = binary_t_interior_expectations(p)
    except NotBinaryT:
        exp = None
    case = report.all_binary_case if is_all_binary(p) else None
    return DiagnosticReport(
        cardinality_non_unique=card,
        ci_cardinality_non_unique=card_ci,
        double_independence_non_unique=_safe(check_double_independence, p),
        blockwise_non_unique=_safe(check_blockwise, p),
        binary_t_interior_ci=exp,
        inner_uniqueness_veto=_inner_uniqueness(p, report),
        all_binary_case=case,
        checks=tuple(verify_report(p, report)),
    )
