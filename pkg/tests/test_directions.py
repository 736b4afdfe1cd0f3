import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ghlab.config import PunctureConfig, TailModel, generate_config
from ghlab.directions import (
    bad_set_membership,
    cap_estimate,
    exact_cap_measure,
    exact_sin_cap_measure,
    genericity_survey,
    make_frame,
    project,
)
from ghlab.errors import OriginPunctureError

unit_vectors = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda t: np.linalg.norm(t) > 1e-3
)


@given(unit_vectors)
def test_frame_is_right_handed_orthonormal(t):
    f = make_frame(t)
    M = np.array([f.f1, f.f2, f.v])
    np.testing.assert_allclose(M @ M.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(M) == pytest.approx(1.0, abs=1e-12)


def test_frame_for_x_axis_gives_y_plus_iz():
    f = make_frame([1, 0, 0])
    assert f.to_complex(np.array([[5.0, 2.0, 3.0]]))[0] == 2 + 3j


@given(unit_vectors, st.floats(-np.pi, np.pi))
def test_frame_rotation_multiplies_by_phase(t, phi):
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((5, 3))
    f = make_frame(t)
    np.testing.assert_allclose(f.rotated(phi).to_complex(pts), np.exp(1j * phi) * f.to_complex(pts), atol=1e-12)


def test_chen_chen_along_x(cc):
    rep = project(cc, make_frame([1, 0, 0]))
    assert len(rep.clusters) == 1
    assert rep.clusters[0].b == 0 and rep.clusters[0].members == (0, 1)
    assert rep.m0 == 2 and not rep.generic
    assert bad_set_membership(cc, [1, 0, 0]) == [(0, 1)]
    assert bad_set_membership(cc, [0, 0, 1]) == []
    assert project(cc, make_frame([0, 0, 1])).generic


def test_geometric_projection_along_x(gz):
    rep = project(gz, make_frame([1, 0, 0]))
    assert rep.generic and rep.m0 == 0
    np.testing.assert_allclose([c.b for c in rep.clusters[:3]], [2j, 4j, 8j])


def test_cluster_members_sorted_by_height():
    cfg = PunctureConfig([[0, 1, 3], [0, 1, -2], [0, 1, 0], [0, 2, 0]], [-1] * 4)
    rep = project(cfg, make_frame([0, 0, 1]))
    assert rep.clusters[0].members == (1, 2, 0)
    assert [c.m for c in rep.clusters] == [3, 1]


def test_accumulation_heuristic_flags_converging_projections():
    pts = [[2.0**j, 1.0 / j, 0.0] for j in range(1, 9)]
    cfg = PunctureConfig(pts, [-1] * 8, TailModel("geometric", 2.0))
    assert project(cfg, make_frame([1, 0, 0])).accumulation_flag
    assert not project(cfg, make_frame([0, 0, 1])).accumulation_flag


@given(
    st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=12, unique=True),
    st.sampled_from([(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1)]),
)
def test_multiplicities_sum_to_count(pts, v):
    cfg = PunctureConfig([list(p) for p in pts], [-1] * len(pts))
    rep = project(cfg, make_frame(v))
    assert sum(c.m for c in rep.clusters) == len(pts)
    assert rep.m0 == sum(c.m for c in rep.clusters if c.b == 0)
    assert rep.generic == (len(rep.clusters) == len(pts))
    assert rep.generic == (not bad_set_membership(cfg, v))


def test_single_cap_values():
    # exact measure of a cap with angular radius 1/2
    assert exact_cap_measure(0.5) == pytest.approx(0.76917145, abs=1e-8)
    assert exact_cap_measure(0.5) <= math.pi * 0.25
    assert exact_cap_measure(4.0) == pytest.approx(4 * math.pi)
    assert exact_sin_cap_measure(1.5) == pytest.approx(4 * math.pi)


@given(st.floats(0, 10))
def test_cap_inequality(s):
    assert exact_cap_measure(s) <= math.pi * s * s + 1e-15


def test_cap_estimate_consistency(gz):
    est = cap_estimate(gz, 1.0, samples=200_000, seed=5)
    assert np.all(est.exact_measures <= est.bound_terms)
    assert est.mc_union_estimate <= est.exact_sum + 3 * est.mc_stddev
    assert est.sin_mc_union_estimate <= float(np.sum(est.sin_exact_measures)) + 3 * est.sin_mc_stddev


def test_cap_estimate_independent_of_workers(gz):
    a = cap_estimate(gz, 1.0, samples=150_000, seed=9, workers=1)
    b = cap_estimate(gz, 1.0, samples=150_000, seed=9, workers=4)
    assert a.mc_union_estimate == b.mc_union_estimate


def test_cap_estimate_rejects_origin_center(cc):
    with pytest.raises(OriginPunctureError):
        cap_estimate(cc, 1.0)


def test_survey_random_ball():
    cfg = generate_config("random_ball", radius=1.0, count=10, seed=7)
    s = genericity_survey(cfg, 500, seed=1)
    assert s.fraction_generic == 1.0 and s.fraction_accumulating_heuristic == 0.0
