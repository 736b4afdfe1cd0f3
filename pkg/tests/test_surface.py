import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ghlab.config import chen_chen
from ghlab.directions import make_frame, project
from ghlab.entire import MINIMAL_GENUS, PAPER_INDEX, build_product, eval_product, zero_audit
from ghlab.errors import PoleError, ZeroFibreError
from ghlab.surface import (
    CHEN_CHEN_CHARTS,
    MINUS,
    PLUS,
    blowup_equations,
    blowup_fixture_check,
    build_atlas,
    chen_chen_chi0,
    chen_chen_theta0,
    chi_map,
    cocycle_check,
    pole_order,
    singular_points,
    surface_residual,
    transition,
)

M1, M2, M3 = (CHEN_CHEN_CHARTS[k] for k in ("M1", "M2", "M3"))


@pytest.fixture
def cc_atlas():
    return build_atlas(build_product(project(chen_chen(), make_frame([1, 0, 0]))))


@pytest.fixture
def a2_atlas():
    return build_atlas(build_product([(1 + 1j, 3), (2 - 1j, 1), (-3.0, 2)], PAPER_INDEX, delta=1))


@pytest.fixture
def generic_atlas():
    return build_atlas(build_product([(1j * 2.0**k, 1) for k in range(1, 15)], PAPER_INDEX))


def test_index_table_matches_rules(a2_atlas):
    t = a2_atlas.index_table
    assert a2_atlas.charts == (MINUS, (1, 1), (1, 2), (3, 1), PLUS)
    assert t["minus"] == [0, 0, 0, 0]
    assert t["plus"] == [1, 3, 1, 2]
    assert t["1_2"] == [0, 2, 0, 0]
    assert t["3_1"] == [0, 0, 0, 1]


def test_chen_chen_transitions(cc_atlas):
    assert cc_atlas.charts == (M1, M2, M3)
    assert transition(cc_atlas, M1, M2, 2.0) == 0.5
    assert transition(cc_atlas, M1, M3, 3.0) == pytest.approx(1 / 9, rel=1e-15)
    assert cocycle_check(cc_atlas, M1, M2, M3, 3.0) <= 1e-12
    assert cocycle_check(cc_atlas, M2, M2, M2, 3.0) == 0.0
    assert pole_order(cc_atlas, M1, M3, 0) == -2
    assert pole_order(cc_atlas, M1, M2, 0) == -1


def test_identity_transition(a2_atlas):
    u = np.array([0.1, 1 + 1j, -3.0, 7j])
    for a in a2_atlas.charts:
        np.testing.assert_array_equal(transition(a2_atlas, a, a, u), np.ones(4))


def test_pole_and_zero_at_centers(cc_atlas):
    with pytest.raises(PoleError):
        transition(cc_atlas, M1, M2, 0.0)
    assert transition(cc_atlas, M2, M1, 0.0) == 0


def test_generic_atlas_is_inverse_product(generic_atlas):
    assert generic_atlas.charts == (MINUS, PLUS)
    rng = np.random.default_rng(3)
    u = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    P = eval_product(generic_atlas.product, u)[0]
    np.testing.assert_allclose(transition(generic_atlas, MINUS, PLUS, u) * P, 1.0, rtol=1e-10)
    for k in range(1, 15):
        assert pole_order(generic_atlas, MINUS, PLUS, k) == -1


def test_pole_orders_are_index_differences(a2_atlas):
    for a, b in itertools.permutations(a2_atlas.charts, 2):
        for k in range(4):
            assert pole_order(a2_atlas, a, b, k) == a2_atlas.J(a)[k] - a2_atlas.J(b)[k]
    assert pole_order(a2_atlas, (1, 1), (1, 2), 1) == -1


@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4))
def test_exponent_additivity(i, j, k):
    atlas = build_atlas(build_product([(1 + 1j, 3), (2 - 1j, 1), (-3.0, 2)], PAPER_INDEX, delta=1))
    a, b, c = (atlas.charts[n] for n in (i, j, k))
    for r in range(4):
        assert pole_order(atlas, a, c, r) == pole_order(atlas, a, b, r) + pole_order(atlas, b, c, r)


def test_cocycle_on_random_points(a2_atlas):
    rng = np.random.default_rng(0)
    u = 2 * (rng.standard_normal(100) + 1j * rng.standard_normal(100))
    for a, b, c in itertools.product(a2_atlas.charts, repeat=3):
        assert np.max(cocycle_check(a2_atlas, a, b, c, u)) <= 1e-10


def test_chi_examples(cc_atlas):
    P = cc_atlas.product
    u, v = 2.0 + 1j, 0.5 - 0.25j
    assert chi_map(cc_atlas, M1, u, v) == pytest.approx((u * u / v, v, u))
    assert chi_map(cc_atlas, M2, u, v) == pytest.approx((u / v, u * v, u))
    assert chi_map(cc_atlas, M3, u, v) == pytest.approx((1 / v, u * u * v, u))
    assert surface_residual(P, *chi_map(cc_atlas, M2, u, v)) <= 1e-14
    with pytest.raises(ZeroFibreError):
        chi_map(cc_atlas, M1, u, 0)


def test_surface_residual_examples(cc_atlas, generic_atlas):
    P = cc_atlas.product
    assert surface_residual(P, 1, 4, 2) == 0
    w, t = 0.7 - 0.3j, 2.5j
    Pw = eval_product(P, w)[0]
    assert surface_residual(P, Pw / t, t, w) <= 1e-12
    Q = generic_atlas.product
    assert surface_residual(Q, 1, 1, 2j) == 1


@pytest.mark.parametrize("name", ["a2_atlas", "generic_atlas", "cc_atlas"])
def test_chi_cross_chart_consistency(name, request):
    atlas = request.getfixturevalue(name)
    rng = np.random.default_rng(11)
    u = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    v = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    for a, b in itertools.permutations(atlas.charts, 2):
        x = chi_map(atlas, a, u, v)
        y = chi_map(atlas, b, u, transition(atlas, a, b, u) * v)
        for xi, yi in zip(x, y):
            assert np.max(np.abs(xi - yi) / np.maximum(np.abs(xi), 1e-300)) <= 1e-10
        assert np.max(surface_residual(atlas.product, *x, relative=True)) <= 1e-10


def test_chi_is_defined_over_zeros(a2_atlas):
    # charts only use nonnegative powers, so the fibre over b_k is reached
    img = chi_map(a2_atlas, (1, 1), 1 + 1j, 2.0)
    assert img[0] == 0 and img[1] == 0


def test_singularities():
    assert singular_points(build_product([(1.0, 1), (2j, 1)], PAPER_INDEX)).smooth
    cc = build_product(project(chen_chen(), make_frame([1, 0, 0])))
    rep = singular_points(cc)
    (s,) = rep.singular
    assert (s.b, s.type, s.chain) == (0, "A1", ("E_0_1",))
    assert s.gradient_norm < 1e-12
    a2 = singular_points(build_product([(1.5, 3)], PAPER_INDEX))
    (s,) = a2.singular
    assert s.type == "A2" and s.chain == ("E_1_1", "E_1_2")
    assert s.adjacency == (("E_1_1", "E_1_2"),)
    assert s.to_dict()["self_intersection"] == -2


@given(st.lists(st.integers(1, 4), min_size=1, max_size=5))
def test_smoothness_dichotomy_and_chain_shape(mults):
    zeros = [(complex(k + 1, 0.5 * k), m) for k, m in enumerate(mults)]
    P = build_product(zeros, MINIMAL_GENUS, radius=1.0, tol=1e-6)
    rep = singular_points(P)
    windings = [zero_audit(P, b, 0.25) for b, _ in zeros]
    assert rep.smooth == all(m == 1 for m in mults) == all(w == 1 for w in windings)
    for s in rep.singular:
        assert len(s.chain) == s.m - 1
        assert len(s.adjacency) == max(0, s.m - 2)
        for (a, b), (c, d) in zip(s.adjacency, zip(s.chain, s.chain[1:])):
            assert (a, b) == (c, d)


def test_blowup_fixture():
    rep = blowup_fixture_check()
    assert rep.passed, rep.failures
    assert rep.samples == 1200
    assert rep.equation_residual <= 1e-10
    assert rep.roundtrip_residual <= 1e-12


def test_blowup_chart_example():
    point, proj = chen_chen_chi0("M2", 1, 1)
    assert point == (1, 1, 1) and proj == (1, 1, 1)
    assert np.max(blowup_equations(point, proj)) == 0
    assert chen_chen_theta0(point, proj) == {"M1": (1, 1), "M2": (1, 1), "M3": (1, 1)}
