"""Plot data for the 2x2x3 domain, one planar polygon per target state.

For ``T = t`` the factor is parameterized by

    Q(t,.,.) = Q0(t,.,.) + P(t) * (g0 * gamma[t; 0,1; 0,2] + g1 * gamma[t; 0,1; 1,2])

so ``g0`` and ``g1`` are the offsets of ``Q(t,0,0)`` and ``Q(t,0,1)`` from the
anchor, divided by ``P(t)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .deltap import build_spec
from .distributions import as_array
from .errors import InvalidShape
from .solver import SolveOptions, SolveReport, solve

SHAPE = (2, 2, 3)
VERTEX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FactorView:
    t: int
    polygon: np.ndarray  # (k, 2), counterclockwise
    projection_kind: str  # "point" | "segment" | "empty"
    projection: np.ndarray  # (1, 2) or (2, 2)


@dataclass(frozen=True, eq=False)
class VizPayload223:
    factors: tuple[FactorView, ...]
    metadata: dict

    def to_json_obj(self) -> dict:
        return {
            "coordinates": ["g_t00", "g_t01"],
            "factors": [
                {
                    "t": f.t,
                    "polygon": [[float(a), float(b)] for a, b in f.polygon],
                    "projection": {
                        "kind": f.projection_kind,
                        "points": [[float(a), float(b)] for a, b in f.projection],
                    },
                }
                for f in self.factors
            ],
            "metadata": self.metadata,
        }


def _plane(q0t: np.ndarray, pt: float):
    """Affine map ``g -> Q(t,.,.)`` as ``base + M @ g`` on the 6 atoms."""
    m0 = np.zeros((2, 3))
    m0[0, 0], m0[1, 2], m0[0, 2], m0[1, 0] = 1, 1, -1, -1
    m1 = np.zeros((2, 3))
    m1[0, 1], m1[1, 2], m1[0, 2], m1[1, 1] = 1, 1, -1, -1
    M = pt * np.stack([m0.ravel(), m1.ravel()], axis=1)
    return q0t.ravel(), M


def factor_polygon(q0t: np.ndarray, pt: float) -> np.ndarray:
    """Extreme points of ``{g : base + M g >= 0}`` in counterclockwise order."""
    base, M = _plane(q0t, pt)
    verts = []
    for i, j in itertools.combinations(range(len(base)), 2):
        A = M[[i, j]]
        if abs(np.linalg.det(A)) < 1e-14:
            continue
        g = np.linalg.solve(A, -base[[i, j]])
        if np.all(base + M @ g >= -VERTEX_TOL * max(1.0, pt)):
            verts.append(g)
    if not verts:
        return np.zeros((0, 2))
    V = np.unique(np.round(np.array(verts), 12), axis=0) + 0.0  # drop negative zeros
    if len(V) > 2:
        c = V.mean(axis=0)
        V = V[np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]))]
    return V


def to_plane(q: np.ndarray, q0: np.ndarray, pt: np.ndarray, t: int) -> np.ndarray:
    return np.array([q[t, 0, 0] - q0[t, 0, 0], q[t, 0, 1] - q0[t, 0, 1]]) / pt[t]


def build_viz223(P, report: SolveReport | None = None, opts: SolveOptions | None = None) -> VizPayload223:
    """Factor polygons and the projection of the optimal set.

    Raises
    ------
    InvalidShape
        Unless ``P`` has shape ``(2, 2, 3)``.
    """
    p = as_array(P)
    if p.shape != SHAPE:
        raise InvalidShape(f"viz223 needs shape {SHAPE}, got {p.shape}")
    spec = build_spec(p)
    report = report or solve(p, opts)
    q = report.optimizer.p
    pt = spec.p_t
    wit = report.uniqueness.witnesses if report.uniqueness.verdict == "NonUnique" else None
    factors = []
    for t in range(2):
        if pt[t] <= 0:
            factors.append(FactorView(t, np.zeros((0, 2)), "empty", np.zeros((0, 2))))
            continue
        poly = factor_polygon(spec.q0[t], pt[t])
        if wit is not None:
            ends = np.array([to_plane(w, spec.q0, pt, t) for w in wit])
            if np.abs(ends[0] - ends[1]).max() > 1e-12:
                factors.append(FactorView(t, poly, "segment", ends))
                continue
        factors.append(FactorView(t, poly, "point", to_plane(q, spec.q0, pt, t)[None]))
    meta = {
        "uiBits": report.ui_bits,
        "path": report.path,
        "verdict": report.uniqueness.verdict,
        "location": report.location.kind,
        "TXgivenY": report.ci_flags.t_x_given_y,
        "TYgivenX": report.ci_flags.t_y_given_x,
    }
    return VizPayload223(tuple(factors), meta)


def inside_polygon(poly: np.ndarray, pt: np.ndarray, tol: float = 1e-9) -> bool:
    """Point-in-convex-polygon test for counterclockwise vertices (segments and points allowed)."""
    if len(poly) == 0:
        return False
    if len(poly) == 1:
        return bool(np.abs(poly[0] - pt).max() <= tol)
    if len(poly) == 2:
        a, b = poly
        ab = b - a
        s = np.clip(np.dot(pt - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        return bool(np.linalg.norm(a + s * ab - pt) <= tol)
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        e = b - a
        cross = e[0] * (pt[1] - a[1]) - e[1] * (pt[0] - a[0])
        if cross < -tol * max(1.0, np.linalg.norm(e)):
            return False
    return True


def on_boundary(poly: np.ndarray, pt: np.ndarray, tol: float = 1e-9) -> bool:
    """Distance from ``pt`` to the polygon's edges is at most ``tol``."""
    if len(poly) < 3:
        return inside_polygon(poly, pt, tol)
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        ab = b - a
        s = np.clip(np.dot(pt - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        if np.linalg.norm(a + s * ab - pt) <= tol:
            return True
    return False
