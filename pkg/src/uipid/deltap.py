"""Geometry of the set of distributions sharing the (T,X) and (T,Y) marginals.

The domain factorizes over the states ``t`` with positive probability.  Each
factor is a transportation polytope over ``X_t x Y_t`` where ``X_t`` and
``Y_t`` are the supports of ``P(X|T=t)`` and ``P(Y|T=t)``.  Points are
addressed by coordinates ``g`` with respect to the moves

    gamma[t; x, x0; y, y0] = d(t,x,y) + d(t,x0,y0) - d(t,x,y0) - d(t,x0,y)

anchored at ``(x0, y0)``, the first element of ``X_t x Y_t``, and scaled by
``P(T=t)``::

    Q = Q0 + sum_t P(t) sum_{x != x0, y != y0} g[t,x,y] * gamma[t; x, x0; y, y0]

where ``Q0(t,x,y) = P(t) P(x|t) P(y|t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .distributions import JointDist3, as_array, from_solver
from .errors import IndexOutOfRange, NotAllBinary, NotInDeltaP

EPS_INT = 1e-9
EPS_OUT = 1e-12
MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DeltaPSpec:
    shape: tuple[int, int, int]
    p_t: np.ndarray
    m_tx: np.ndarray
    m_ty: np.ndarray
    t_support: tuple[int, ...]
    x_support: dict
    y_support: dict
    q0: np.ndarray
    anchors: dict
    basis: tuple[tuple[int, int, int], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def support(self) -> np.ndarray:
        """Boolean mask of atoms that are positive somewhere in the domain."""
        return self.q0 > 0

    @cached_property
    def basis_matrix(self) -> np.ndarray:
        """``(n_atoms, dim)`` matrix whose columns are ``P(t) * gamma``."""
        n = int(np.prod(self.shape))
        B = np.zeros((n, self.dim))
        for j, (t, x, y) in enumerate(self.basis):
            x0, y0 = self.anchors[t]
            B[:, j] = self.p_t[t] * gamma_vector(self.shape, t, x, x0, y, y0).ravel()
        B.setflags(write=False)
        return B

    def point(self, g) -> np.ndarray:
        """Raw tensor ``Q0 + B g``; may contain negative entries."""
        g = np.asarray(g, dtype=float)
        return self.q0 + (self.basis_matrix @ g).reshape(self.shape)


@dataclass(frozen=True, eq=False)
class GammaCoords:
    keys: tuple[tuple[int, int, int], ...]
    values: np.ndarray

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in zip(self.keys, self.values)}

    def __getitem__(self, key):
        return float(self.values[self.keys.index(tuple(key))])

    def __len__(self):
        return len(self.keys)


@dataclass(frozen=True)
class BoxBounds222:
    g1min: float
    g1max: float
    g2min: float
    g2max: float


@dataclass(frozen=True)
class AllBinaryParams:
    """``a = P(T=0)``, ``b, c = P(X=0|T=0,1)``, ``d, e = P(Y=0|T=0,1)``."""

    a: float
    b: float
    c: float
    d: float
    e: float


@dataclass(frozen=True)
class Membership:
    kind: str  # "interior" | "boundary" | "outside"
    atoms: tuple[tuple[int, int, int], ...] = ()
    min_atom: float = float("inf")

    @property
    def interior(self) -> bool:
        return self.kind == "interior"


def build_spec(P) -> DeltaPSpec:
    p = as_array(P)
    shape = p.shape
    p_t = p.sum(axis=(1, 2))
    m_tx = p.sum(axis=2)
    m_ty = p.sum(axis=1)
    t_support = tuple(int(t) for t in np.nonzero(p_t > 0)[0])
    if not t_support:
        raise ValueError("distribution has no mass")
    x_support, y_support, anchors = {}, {}, {}
    q0 = np.zeros(shape)
    basis = []
    for t in t_support:
        px = m_tx[t] / p_t[t]
        py = m_ty[t] / p_t[t]
        xs = tuple(int(i) for i in np.nonzero(px > 0)[0])
        ys = tuple(int(i) for i in np.nonzero(py > 0)[0])
        x_support[t], y_support[t] = xs, ys
        anchors[t] = (xs[0], ys[0])
        q0[t] = p_t[t] * np.outer(px, py)
        basis.extend((t, x, y) for x in xs[1:] for y in ys[1:])
    for arr in (p_t, m_tx, m_ty, q0):
        arr.setflags(write=False)
    return DeltaPSpec(
        shape=shape,
        p_t=p_t,
        m_tx=m_tx,
        m_ty=m_ty,
        t_support=t_support,
        x_support=x_support,
        y_support=y_support,
        q0=q0,
        anchors=anchors,
        basis=tuple(basis),
    )


def gamma_vector(shape, t, x, x2, y, y2) -> np.ndarray:
    """The move ``d(t,x,y) + d(t,x2,y2) - d(t,x,y2) - d(t,x2,y)``."""
    nt, nx, ny = shape
    if not (0 <= t < nt and 0 <= x < nx and 0 <= x2 < nx and 0 <= y < ny and 0 <= y2 < ny):
        raise IndexOutOfRange(f"gamma index ({t}; {x},{x2}; {y},{y2}) outside shape {tuple(shape)}")
    if x == x2 or y == y2:
        raise IndexOutOfRange("gamma needs x != x' and y != y'")
    v = np.zeros(shape)
    v[t, x, y] += 1
    v[t, x2, y2] += 1
    v[t, x, y2] -= 1
    v[t, x2, y] -= 1
    return v


def marginal_deviation(spec: DeltaPSpec, Q) -> float:
    q = as_array(Q)
    return float(max(np.abs(q.sum(axis=2) - spec.m_tx).max(), np.abs(q.sum(axis=1) - spec.m_ty).max()))


def to_gamma(spec: DeltaPSpec, Q) -> GammaCoords:
    q = as_array(Q)
    dev = marginal_deviation(spec, q)
    if dev > MEMBERSHIP_TOL:
        raise NotInDeltaP(dev)
    vals = np.array([(q[t, x, y] - spec.q0[t, x, y]) / spec.p_t[t] for t, x, y in spec.basis])
    return GammaCoords(spec.basis, vals)


def from_gamma(spec: DeltaPSpec, g) -> np.ndarray:
    """Raw tensor for coordinates ``g``; negative entries are possible."""
    vals = g.values if isinstance(g, GammaCoords) else np.asarray(g, dtype=float)
    return spec.point(vals)


def from_gamma_dist(spec: DeltaPSpec, g) -> JointDist3:
    return from_solver(from_gamma(spec, g))


def membership(spec: DeltaPSpec, g, eps_int: float = EPS_INT, eps_out: float = EPS_OUT) -> Membership:
    q = from_gamma(spec, g) if not (isinstance(g, np.ndarray) and g.ndim == 3) else g
    return classify_point(spec, q, eps_int, eps_out)


def classify_point(spec: DeltaPSpec, q, eps_int: float = EPS_INT, eps_out: float = EPS_OUT) -> Membership:
    """Interior/boundary/outside for a tensor already known to share the marginals."""
    q = as_array(q)
    vals = q[spec.support]
    min_atom = float(vals.min()) if vals.size else float("inf")
    outside = (q < -eps_out) | (~spec.support & (np.abs(q) > eps_out))
    if outside.any():
        atoms = tuple(tuple(int(i) for i in a) for a in np.argwhere(outside))
        return Membership("outside", atoms, min_atom)
    low = spec.support & (q <= eps_int)
    if low.any():
        atoms = tuple(tuple(int(i) for i in a) for a in np.argwhere(low))
        return Membership("boundary", atoms, min_atom)
    return Membership("interior", (), min_atom)


def is_all_binary(P) -> bool:
    p = as_array(P)
    return p.shape == (2, 2, 2) and bool(np.all(p.sum(axis=(1, 2)) > 0))


def all_binary_params(P) -> AllBinaryParams:
    p = as_array(P)
    if not is_all_binary(p):
        raise NotAllBinary(f"need a 2x2x2 distribution with P(T=t) > 0 for both t, got shape {p.shape}")
    pt = p.sum(axis=(1, 2))
    px = p.sum(axis=2)
    py = p.sum(axis=1)
    return AllBinaryParams(
        a=float(pt[0]),
        b=float(px[0, 0] / pt[0]),
        c=float(px[1, 0] / pt[1]),
        d=float(py[0, 0] / pt[0]),
        e=float(py[1, 0] / pt[1]),
    )


def bounds_222(P_or_spec) -> BoxBounds222:
    """Box of admissible ``(g1, g2)`` in the all-binary parameterization."""
    P = _spec_to_q0(P_or_spec)
    par = all_binary_params(P)
    b, c, d, e = par.b, par.c, par.d, par.e
    return BoxBounds222(
        g1min=-min(b * d, (1 - b) * (1 - d)),
        g1max=min(b * (1 - d), (1 - b) * d),
        g2min=-min(c * e, (1 - c) * (1 - e)),
        g2max=min(c * (1 - e), (1 - c) * e),
    )


def _spec_to_q0(obj):
    # the box depends only on the marginals, which Q0 carries
    return obj.q0 if isinstance(obj, DeltaPSpec) else as_array(obj)


def point_222(par: AllBinaryParams, g1: float, g2: float) -> np.ndarray:
    """Tensor of the all-binary parameterization at ``(g1, g2)``."""
    a, b, c, d, e = par.a, par.b, par.c, par.d, par.e
    q = np.empty((2, 2, 2))
    q[0, 0, 0] = a * (b * d + g1)
    q[0, 0, 1] = a * (b * (1 - d) - g1)
    q[0, 1, 0] = a * ((1 - b) * d - g1)
    q[0, 1, 1] = a * ((1 - b) * (1 - d) + g1)
    q[1, 0, 0] = (1 - a) * (c * e + g2)
    q[1, 0, 1] = (1 - a) * (c * (1 - e) - g2)
    q[1, 1, 0] = (1 - a) * ((1 - c) * e - g2)
    q[1, 1, 1] = (1 - a) * ((1 - c) * (1 - e) + g2)
    return q


def g_222(Q) -> tuple[float, float]:
    """``(g1, g2)`` of a 2x2x2 tensor in the all-binary parameterization."""
    q = as_array(Q)
    pt = q.sum(axis=(1, 2))
    px = q.sum(axis=2) / pt[:, None]
    py = q.sum(axis=1) / pt[:, None]
    g1 = q[0, 0, 0] / pt[0] - px[0, 0] * py[0, 0]
    g2 = q[1, 0, 0] / pt[1] - px[1, 0] * py[1, 0]
    return float(g1), float(g2)


def face_analysis(P) -> list[tuple[int, int, int]]:
    """Atoms that vanish on the whole domain: ``P(t,x) P(t,y) = 0``."""
    p = as_array(P)
    ptx = p.sum(axis=2)
    pty = p.sum(axis=1)
    zero = (ptx[:, :, None] * pty[:, None, :]) == 0
    return [tuple(int(i) for i in a) for a in np.argwhere(zero)]


def constraint_matrix(shape) -> np.ndarray:
    """Matrix of the linear map ``Q -> (Q(T,X), Q(T,Y))`` on flattened tensors."""
    nt, nx, ny = shape
    n = nt * nx * ny
    rows = []
    idx = np.arange(n).reshape(shape)
    for t in range(nt):
        for x in range(nx):
            r = np.zeros(n)
            r[idx[t, x, :]] = 1
            rows.append(r)
        for y in range(ny):
            r = np.zeros(n)
            r[idx[t, :, y]] = 1
            rows.append(r)
    return np.array(rows)


def max_step(q, direction) -> float:
    """Largest ``s >= 0`` with ``q + s * direction >= 0``."""
    q = np.asarray(q).ravel()
    d = np.asarray(direction).ravel()
    neg = d < 0
    if not neg.any():
        return float("inf")
    return float(np.min(np.maximum(q[neg], 0.0) / -d[neg]))


def random_point(spec: DeltaPSpec, rng, spread: float = 1.0) -> np.ndarray:
    """A random point of the domain: a random ray from ``Q0`` cut at a uniform fraction."""
    if spec.dim == 0:
        return spec.q0.copy()
    g = rng.standard_normal(spec.dim)
    d = (spec.basis_matrix @ g).reshape(spec.shape)
    s = max_step(spec.q0, d)
    return spec.q0 + rng.uniform(0, spread) * s * d
