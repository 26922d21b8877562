import numpy as np
import pytest
from hypothesis import given, settings

from uipid.deltap import AllBinaryParams, build_spec, g_222, marginal_deviation, point_222
from uipid.distributions import ci_residual, entropy_and_mi_suite
from uipid.errors import MaxIterationsExceeded, NotAllBinary
from uipid.objective import cmi, cmi_swapped, conditional_gap
from uipid.sampling import sample_rng, sample_uniform
from uipid.solver import (
    SolveOptions,
    ci_feasibility_lp,
    decompose,
    solve,
    solve_all_binary,
    solve_generic,
)

from conftest import load_data, random_dist, seeds, small_shapes

# Minima of I(T:X|Y) and I(T:Y|X) for sample_uniform(shape, sample_rng(2024, i)),
# computed with an exponential-cone formulation in an independent convex solver.
FROZEN = {
    ((2, 2, 3), 0): (0.0, 0.075986898702),
    ((2, 2, 3), 1): (0.076151172524, 0.0),
    ((2, 2, 3), 2): (0.011755394421, 0.048013016207),
    ((3, 2, 3), 0): (0.005295963197, 0.078624700349),
    ((3, 2, 3), 1): (0.037289687587, 0.069921971565),
    ((3, 2, 3), 2): (0.150928716234, 0.025954706900),
    ((2, 3, 3), 0): (0.0, 0.040779675603),
    ((2, 3, 3), 1): (0.0, 0.065412302066),
    ((2, 3, 3), 2): (0.061437764902, 0.0),
    ((3, 3, 3), 0): (0.018036128957, 0.090556475252),
    ((3, 3, 3), 1): (0.111536292423, 0.006638681714),
    ((3, 3, 3), 2): (0.031194296418, 0.025249643468),
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_oracle_values(key):
    shape, i = key
    P = sample_uniform(shape, sample_rng(2024, i))
    ux, uy = FROZEN[key]
    d = decompose(P)
    assert d.ui_x == pytest.approx(ux, abs=1e-9)
    assert d.ui_y == pytest.approx(uy, abs=1e-9)


def check_report(P, r):
    p = np.asarray(P.p if hasattr(P, "p") else P)
    spec = build_spec(p)
    q = r.optimizer.p
    assert marginal_deviation(spec, q) <= 1e-9
    assert r.ui_bits == pytest.approx(cmi(q), abs=1e-10)
    # an atom of the domain's support may vanish only together with its whole cell
    low = spec.support & (q < 1e-9)
    cells = q.sum(axis=0)
    assert np.all(cells[np.nonzero(low)[1:]] < 1e-8)
    if r.uniqueness.verdict == "NonUnique":
        w1, w2 = r.uniqueness.witnesses
        assert abs(cmi(w1) - r.ui_bits) <= 1e-8 and abs(cmi(w2) - r.ui_bits) <= 1e-8
        assert np.abs(w1 - w2).max() >= 1e-6
        assert marginal_deviation(spec, w1) <= 1e-9 and marginal_deviation(spec, w2) <= 1e-9
        assert w1.min() >= 0 and w2.min() >= 0


@given(small_shapes, seeds)
@settings(max_examples=40)
def test_report_invariants(shape, seed):
    P = random_dist(shape, seed, zero_frac=0.15)
    check_report(P, solve(P))


def test_uniform_independent_zero():
    r = solve_generic(np.full((2, 2, 2), 1 / 8))
    assert r.ui_bits <= 1e-8


def test_ternary_example_is_its_own_unique_minimizer():
    P = load_data("ternary")
    r = solve(P)
    assert r.path == "GenericDescent"
    assert np.abs(r.optimizer.p - P).max() < 1e-7
    assert r.uniqueness.verdict == "Unique" and r.interior
    assert not r.ci_flags.t_x_given_y and not r.ci_flags.t_y_given_x
    assert r.ui_bits == pytest.approx(0.1325461289248, abs=1e-10)


@pytest.mark.parametrize("seed", range(30))
def test_generic_matches_closed_form(seed):
    P = sample_uniform((2, 2, 2), sample_rng(99, seed))
    a, b = solve_all_binary(P), solve_generic(P)
    assert abs(a.ui_bits - b.ui_bits) <= 1e-7


def test_case_one_candidate():
    P = point_222(AllBinaryParams(0.5, 0.6, 0.4, 0.7, 0.3), 0.0, 0.0)
    r = solve_all_binary(P)
    assert g_222(r.optimizer.p) == pytest.approx((0.105, 0.105), abs=1e-12)
    assert r.all_binary_case == 2 and r.ci_flags.t_x_given_y
    assert r.ui_bits <= 1e-12
    assert r.uniqueness.verdict == "Unique"


def test_equal_marginals_diagonal_non_unique():
    r = solve_all_binary(np.full((2, 2, 2), 1 / 8))
    assert r.all_binary_case == 1 and r.uniqueness.verdict == "NonUnique" and r.ui_bits == 0.0
    w1, w2 = r.uniqueness.witnesses
    g1, g2 = g_222(w1), g_222(w2)
    # endpoints of the diagonal g1 = g2 of the square [-1/4, 1/4]^2
    assert abs(g1[0] - g1[1]) < 1e-12 and abs(g2[0] - g2[1]) < 1e-12
    assert sorted([g1[0], g2[0]]) == pytest.approx([-0.25, 0.25])


def test_line_example():
    P = load_data("suppdp_line")
    r = solve(P)
    assert r.path == "ClosedForm222" and r.uniqueness.verdict == "Unique"
    assert np.abs(r.optimizer.p - P).max() < 1e-12
    assert g_222(r.optimizer.p)[0] == pytest.approx(0.0, abs=1e-12)
    assert r.ui_bits == 0.0 and r.ci_flags.t_x_given_y


def test_singleton_example():
    P = load_data("binary_singleton")
    r = solve(P)
    assert r.path == "SingletonDomain"
    assert np.array_equal(r.optimizer.p, P)
    assert r.ui_bits == pytest.approx(0.18872187554086714, abs=1e-14)
    assert not r.ci_flags.t_x_given_y and not r.ci_flags.t_y_given_x


def test_blockwise_example():
    P = load_data("blockwise")
    r = solve(P)
    assert r.path == "CiLpX" and r.ui_bits == 0.0
    assert r.uniqueness.verdict == "NonUnique"
    check_report(P, r)
    for direction in ("X", "Y"):
        Q = ci_feasibility_lp(P, direction)
        assert Q is not None
        assert (cmi(Q) if direction == "X" else cmi_swapped(Q)) < 1e-12


def test_lp_returns_p_when_ci_holds():
    P = load_data("suppdp_line")
    assert ci_residual(P, "Y") == 0.0
    Q = ci_feasibility_lp(P, "X")
    assert Q is not None and cmi(Q) < 1e-12


def test_xor_lp_feasible_via_uniform():
    # the uniform distribution shares the XOR pair marginals and has T independent of (X, Y)
    P = load_data("xor")
    for direction in ("X", "Y"):
        assert ci_feasibility_lp(P, direction) is not None


def test_lp_infeasible_when_ui_positive():
    P = sample_uniform((3, 3, 3), sample_rng(2024, 0))
    assert ci_feasibility_lp(P, "X") is None


def test_not_all_binary():
    with pytest.raises(NotAllBinary):
        solve_all_binary(random_dist((2, 2, 3), 0))


def test_dispatcher_paths():
    assert solve(random_dist((2, 2, 2), 0)).path == "ClosedForm222"
    assert solve(sample_uniform((2, 2, 3), sample_rng(2024, 2))).path == "GenericDescent"
    assert solve(sample_uniform((2, 2, 3), sample_rng(2024, 1))).path == "CiLpY"


def test_max_iterations():
    P = sample_uniform((3, 3, 3), sample_rng(2024, 1))
    with pytest.raises(MaxIterationsExceeded) as exc:
        solve_generic(P, SolveOptions(max_iter=3, restarts=0))
    assert exc.value.report.iterations == 3


@given(small_shapes, seeds)
@settings(max_examples=25)
def test_pid_identities(shape, seed):
    P = random_dist(shape, seed, zero_frac=0.15)
    d = decompose(P)
    assert d.ui_x + d.shared == pytest.approx(d.mi_tx, abs=1e-8)
    assert d.ui_y + d.shared == pytest.approx(d.mi_ty, abs=1e-8)
    assert d.ui_x + d.ui_y + d.shared + d.synergy == pytest.approx(d.mi_txy, abs=1e-8)
    assert min(d.ui_x, d.ui_y, d.shared, d.synergy) >= -1e-9


@given(small_shapes, seeds)
@settings(max_examples=25)
def test_swap_symmetry(shape, seed):
    P = random_dist(shape, seed)
    d = decompose(P)
    assert solve(P.swapped()).ui_bits == pytest.approx(d.ui_y, abs=1e-8)
    assert decompose(P.swapped()).ui_y == pytest.approx(d.ui_x, abs=1e-8)


@given(small_shapes, seeds)
@settings(max_examples=25)
def test_relabeling_invariance(shape, seed):
    P = random_dist(shape, seed).p
    rng = np.random.default_rng(seed)
    Q = P[np.ix_(*(rng.permutation(n) for n in shape))]
    assert solve(Q).ui_bits == pytest.approx(solve(P).ui_bits, abs=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_optimizer_conditionals_agree_across_paths_and_restarts(seed):
    P = sample_uniform((2, 3, 3), sample_rng(5, seed))
    ra = solve(P)
    rb = solve_generic(P, SolveOptions(seed=seed + 1))
    assert conditional_gap(ra.optimizer.p, rb.optimizer.p) <= 1e-6


def test_descent_progress_is_monotone_per_stage():
    r = solve_generic(sample_uniform((3, 3, 3), sample_rng(2024, 2)))
    h = r.history
    assert len(h) > 0
    for mu in np.unique(h[:, 0]):
        f = h[h[:, 0] == mu, 1]
        assert np.all(np.diff(f) <= 1e-12)


def test_decompose_examples():
    d = decompose(load_data("xor"))
    assert (d.ui_x, d.ui_y, d.shared) == pytest.approx((0, 0, 0), abs=1e-12)
    assert d.synergy == pytest.approx(1.0, abs=1e-12)
    d = decompose(np.full((2, 2, 2), 1 / 8))
    assert (d.ui_x, d.ui_y, d.shared, d.synergy) == pytest.approx((0, 0, 0, 0), abs=1e-12)
    copy = np.zeros((2, 2, 2))
    copy[:, 0, 0] = copy[:, 1, 1] = 0.25
    d = decompose(copy)
    assert (d.ui_x, d.ui_y, d.shared, d.synergy) == pytest.approx((0, 0, 0, 0), abs=1e-12)


def test_decompose_matches_suite():
    P = random_dist((3, 3, 3), 11)
    d = decompose(P)
    s = entropy_and_mi_suite(P)
    assert (d.mi_tx, d.mi_ty, d.mi_txy) == (s.I_TX, s.I_TY, s.I_TXY)


def test_deterministic_given_seed():
    P = sample_uniform((3, 3, 3), sample_rng(1, 1))
    a = solve(P, SolveOptions(seed=4)).to_json_obj()
    b = solve(P, SolveOptions(seed=4)).to_json_obj()
    assert a == b


# Samples where a face Newton step once drove an atom to exactly zero; values
# from the same independent convex solver as FROZEN.
@pytest.mark.parametrize("shape, index, value", [
    ((2, 3, 3), 4512, 0.000223743730103),
    ((2, 4, 4), 1442, 0.000465230158077),
])
def test_face_newton_keeps_atoms_positive(shape, index, value):
    r = solve(sample_uniform(shape, sample_rng(0, index)))
    assert r.ui_bits == pytest.approx(value, abs=1e-9)
    assert r.optimizer.p.min() >= 0
