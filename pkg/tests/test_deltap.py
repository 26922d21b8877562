import itertools

import numpy as np
import pytest
from hypothesis import given
from scipy.optimize import linprog

from uipid.deltap import (
    AllBinaryParams,
    all_binary_params,
    bounds_222,
    build_spec,
    constraint_matrix,
    face_analysis,
    from_gamma,
    g_222,
    gamma_vector,
    marginal_deviation,
    membership,
    point_222,
    random_point,
    to_gamma,
)
from uipid.errors import IndexOutOfRange, NotAllBinary, NotInDeltaP

from conftest import load_data, random_dist, seeds, small_shapes


def test_uniform_q0_and_dim():
    P = np.full((2, 2, 2), 1 / 8)
    spec = build_spec(P)
    assert np.allclose(spec.q0, P) and spec.dim == 2


def test_singleton_dim_zero():
    assert build_spec(load_data("binary_singleton")).dim == 0


def test_line_dim_one():
    assert build_spec(load_data("suppdp_line")).dim == 1


def test_ternary_dim_three():
    assert build_spec(load_data("ternary")).dim == 3


@given(small_shapes, seeds)
def test_q0_properties(shape, seed):
    d = random_dist(shape, seed, zero_frac=0.3)
    spec = build_spec(d)
    p = d.p
    pt = p.sum(axis=(1, 2))
    assert marginal_deviation(spec, spec.q0) <= 1e-12
    # Q0 = P(t) P(x|t) P(y|t)
    for t in np.nonzero(pt)[0]:
        expect = np.outer(p[t].sum(axis=1), p[t].sum(axis=0)) / pt[t]
        assert np.allclose(spec.q0[t], expect, atol=1e-15)
    # dimension counts (|X_t| - 1)(|Y_t| - 1)
    dim = sum((np.count_nonzero(p[t].sum(axis=1)) - 1) * (np.count_nonzero(p[t].sum(axis=0)) - 1)
              for t in np.nonzero(pt)[0])
    assert spec.dim == dim


def test_gamma_vector_definition():
    g = gamma_vector((2, 2, 2), 0, 0, 1, 0, 1)
    assert np.array_equal(g[0].ravel(), [1, -1, -1, 1]) and not g[1].any()


@given(small_shapes, seeds)
def test_gamma_kernel_property(shape, seed):
    rng = np.random.default_rng(seed)
    nt, nx, ny = shape
    if nx < 2 or ny < 2:
        return
    t = rng.integers(nt)
    x, x2 = rng.choice(nx, 2, replace=False)
    y, y2 = rng.choice(ny, 2, replace=False)
    g = gamma_vector(shape, t, x, x2, y, y2)
    assert not g.sum(axis=2).any() and not g.sum(axis=1).any() and g.sum() == 0


def test_gamma_vector_bad_index():
    with pytest.raises(IndexOutOfRange):
        gamma_vector((2, 2, 2), 0, 0, 0, 0, 1)
    with pytest.raises(IndexOutOfRange):
        gamma_vector((2, 2, 2), 0, 0, 2, 0, 1)


def test_to_gamma_q0_is_zero():
    spec = build_spec(random_dist((2, 3, 3), 4))
    assert np.allclose(to_gamma(spec, spec.q0).values, 0.0)


def test_table_point_coordinates():
    par = AllBinaryParams(0.5, 0.5, 0.5, 0.5, 0.5)
    q = point_222(par, 0.1, -0.05)
    assert g_222(q) == pytest.approx((0.1, -0.05), abs=1e-15)
    spec = build_spec(q)
    g = to_gamma(spec, q)
    # the first basis move is anchored at (x, y) = (0, 0), as in the table
    assert g[(0, 1, 1)] == pytest.approx(0.1, abs=1e-15)
    assert g[(1, 1, 1)] == pytest.approx(-0.05, abs=1e-15)


@given(small_shapes, seeds)
def test_gamma_roundtrip(shape, seed):
    spec = build_spec(random_dist(shape, seed, zero_frac=0.2))
    rng = np.random.default_rng(seed)
    c = rng.normal(size=spec.dim) * 0.01
    q = from_gamma(spec, c)
    assert marginal_deviation(spec, q) <= 1e-12
    assert np.allclose(to_gamma(spec, q).values, c, atol=1e-12)
    q2 = random_point(spec, rng)
    assert np.allclose(from_gamma(spec, to_gamma(spec, q2)), q2, atol=1e-12)


def test_to_gamma_rejects_foreign_point():
    spec = build_spec(np.full((2, 2, 2), 1 / 8))
    q = np.zeros((2, 2, 2))
    q[0, 0, 0] = 1.0
    with pytest.raises(NotInDeltaP):
        to_gamma(spec, q)


def test_membership_examples():
    P = point_222(AllBinaryParams(0.4, 0.6, 0.3, 0.7, 0.2), 0.0, 0.0)
    spec = build_spec(P)
    assert membership(spec, np.zeros(2)).kind == "interior"
    box = bounds_222(P)
    m = membership(spec, np.array([box.g1max, 0.0]))
    assert m.kind == "boundary"
    # g1max = min(b(1-d), (1-b)d) = min(.18, .28): atom (0, 0, 1) vanishes
    assert m.atoms == ((0, 0, 1),)
    assert membership(spec, np.array([box.g1max + 0.1, 0.0])).kind == "outside"


def test_bounds_examples():
    b = bounds_222(np.full((2, 2, 2), 1 / 8))
    assert (b.g1min, b.g1max, b.g2min, b.g2max) == pytest.approx((-0.25, 0.25, -0.25, 0.25))
    b = bounds_222(point_222(AllBinaryParams(0.5, 0.0, 0.5, 0.5, 0.5), 0, 0))
    assert b.g1min == 0 and b.g1max == 0
    b = bounds_222(point_222(AllBinaryParams(0.5, 0.6, 0.5, 0.7, 0.5), 0, 0))
    assert b.g1max == pytest.approx(0.18)


def test_bounds_not_all_binary():
    with pytest.raises(NotAllBinary):
        bounds_222(random_dist((2, 2, 3), 0))
    with pytest.raises(NotAllBinary):
        all_binary_params(np.array([[[0.5, 0.5], [0, 0]], [[0, 0], [0, 0]]]))


@given(seeds)
def test_bounds_are_exact_extremes(seed):
    P = random_dist((2, 2, 2), seed).p
    box = bounds_222(P)
    par = all_binary_params(P)
    assert box.g1min <= box.g1max and box.g2min <= box.g2max
    for g1, g2 in itertools.product((box.g1min, box.g1max), (box.g2min, box.g2max)):
        q = point_222(par, g1, g2)
        assert q.min() >= -1e-15 and q.min() <= 1e-15


def test_face_analysis_examples():
    assert face_analysis(random_dist((2, 3, 3), 0)) == []
    assert face_analysis(load_data("suppdp_line")) == [(1, 0, 0), (1, 1, 0)]
    assert face_analysis(load_data("blockwise")) == []


def _vertices(spec):
    """Vertices of the domain via LP in random directions."""
    n = int(np.prod(spec.shape))
    A = constraint_matrix(spec.shape)
    b = np.concatenate([np.concatenate([spec.m_tx[t], spec.m_ty[t]]) for t in range(spec.shape[0])])
    rng = np.random.default_rng(0)
    pts = []
    for _ in range(60):
        res = linprog(rng.normal(size=n), A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
        pts.append(res.x.reshape(spec.shape))
    return np.array(pts)


@pytest.mark.parametrize("seed", range(4))
def test_support_equals_product_of_slice_supports(seed):
    d = random_dist((2, 3, 3), seed, zero_frac=0.35)
    spec = build_spec(d)
    V = _vertices(spec)
    # an atom is in the support iff some vertex puts mass on it
    assert np.array_equal(V.max(axis=0) > 1e-12, spec.support)


@given(small_shapes, seeds)
def test_face_analysis_matches_random_points(shape, seed):
    d = random_dist(shape, seed, zero_frac=0.3)
    spec = build_spec(d)
    rng = np.random.default_rng(seed)
    pts = np.array([random_point(spec, rng) for _ in range(200)] + [spec.q0])
    empty = {tuple(int(i) for i in a) for a in np.argwhere(pts.max(axis=0) < 1e-12)}
    assert set(face_analysis(d)) == empty


@given(small_shapes, seeds)
def test_singleton_iff_one_sided(shape, seed):
    d = random_dist(shape, seed, zero_frac=0.4)
    spec = build_spec(d)
    for t in spec.t_support:
        nx = np.count_nonzero(d.p[t].sum(axis=1))
        ny = np.count_nonzero(d.p[t].sum(axis=0))
        moves = [b for b in spec.basis if b[0] == t]
        assert (len(moves) == 0) == (nx == 1 or ny == 1)
