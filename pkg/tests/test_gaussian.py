import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvpol import optics
from cvpol.errors import PreconditionError
from cvpol.gaussian import (
    OMEGA,
    SqueezedModeParams,
    TwoModeGaussianState,
    apply_transform,
    cross_moment,
    from_covariance_matrix,
    heisenberg_min_eigenvalue,
    load_state,
    make_independent_squeezed_pair,
    make_vacuum,
    quadrature_variance,
    save_state,
    state_to_dict,
    symplectic_matrix,
    to_covariance_matrix,
    total_excitation,
)
from conftest import ref_pair, random_state
from oracles import moments_from_covariance, random_covariance


def test_vacuum():
    s = make_vacuum()
    assert quadrature_variance(s, 0, 0.3) == 1
    assert cross_moment(s) == 0
    np.testing.assert_allclose(to_covariance_matrix(s, 0.7), np.eye(4), atol=1e-15)


def test_unit_squeezing_is_vacuum():
    p = SqueezedModeParams(1, 1, 0)
    assert make_independent_squeezed_pair(p, p).allclose(make_vacuum(), atol=0)


def test_five_percent_squeezing_at_its_angle():
    th = 1.1
    p = SqueezedModeParams(0.95, 1 / 0.95, th)
    s = make_independent_squeezed_pair(p, p)
    assert quadrature_variance(s, 0, th) == pytest.approx(0.95, abs=1e-14)
    assert quadrature_variance(s, 1, th) == pytest.approx(0.95, abs=1e-14)


def test_interpolation_between_axes():
    s = make_independent_squeezed_pair(SqueezedModeParams(0.5, 2.0, 0), SqueezedModeParams(1, 1))
    # 0.5 cos^2 + 2 sin^2 at pi/4
    assert quadrature_variance(s, 0, np.pi / 4) == pytest.approx(1.25, abs=1e-14)
    assert quadrature_variance(s, 0, np.pi / 2) == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize(
    "args, msg",
    [
        ((-0.1, 2, 0), "v_min >= 0"),
        ((0.5, 0.4, 0), "v_max >= v_min"),
        ((0.5, 1.5, 0), "Heisenberg"),
        ((float("nan"), 1, 0), "finite"),
    ],
)
def test_squeezing_params_invariants(args, msg):
    with pytest.raises(PreconditionError, match=msg):
        SqueezedModeParams(*args)


def test_theta_sq_reduced_mod_pi():
    assert SqueezedModeParams(0.5, 2, np.pi + 0.2).theta_sq == pytest.approx(0.2)


def test_non_params_rejected():
    with pytest.raises(PreconditionError):
        make_independent_squeezed_pair((0.5, 2, 0), SqueezedModeParams(1, 1))


def test_state_invariants_enforced():
    with pytest.raises(PreconditionError, match="symmetric"):
        TwoModeGaussianState([[0, 0.1], [0.2, 0]], np.zeros((2, 2)))
    with pytest.raises(PreconditionError, match="Hermitian"):
        TwoModeGaussianState(np.zeros((2, 2)), [[0, 0.1], [0.2, 0]])
    with pytest.raises(PreconditionError, match="Heisenberg"):
        # squeezing without the accompanying excess noise
        TwoModeGaussianState(np.diag([-0.2, 0]), np.zeros((2, 2)))


def test_identity_and_vacuum_invariance(rng):
    s = ref_pair()
    assert apply_transform(s, optics.identity()).allclose(s, atol=0)
    for _ in range(5):
        assert apply_transform(make_vacuum(), optics.random_transform(rng)).allclose(make_vacuum(), atol=1e-15)


def test_transform_round_trip(rng):
    for _ in range(20):
        s = random_state(rng)
        u = optics.random_transform(rng)
        back = apply_transform(apply_transform(s, u), u.inverse())
        assert back.allclose(s, atol=1e-12)


def test_cross_moment_after_pm45():
    # M'_01 = (M_00 - M_11)/2 in the native basis
    s = make_independent_squeezed_pair(SqueezedModeParams(0.5, 2, 0), SqueezedModeParams(0.5, 2, np.pi / 2))
    expected = 0.5 * (s.m_matrix[0, 0] - s.m_matrix[1, 1])
    got = cross_moment(apply_transform(s, optics.half_wave(np.pi / 8)))
    assert got == pytest.approx(expected, abs=1e-15)
    assert abs(got) > 0.1


def test_covariance_matches_hand_expansion():
    # symmetric 5% state at theta_sq: n = (v_min+v_max)/2, off-diagonal (v_min-v_max)/2
    th = 0.4
    s = apply_transform(ref_pair(theta_sq=th), optics.pm45())
    g = to_covariance_matrix(s, th)
    n = (0.95 + 1 / 0.95) / 2
    c = (0.95 - 1 / 0.95) / 2
    expected = np.array([[n, 0, c, 0], [0, n, 0, -c], [c, 0, n, 0], [0, -c, 0, n]])
    np.testing.assert_allclose(g, expected, atol=1e-12)


def test_covariance_diagonal_is_quadrature_variance(rng):
    s = random_state(rng)
    th = 0.83
    g = to_covariance_matrix(s, th)
    for mode in (0, 1):
        assert g[2 * mode, 2 * mode] == pytest.approx(quadrature_variance(s, mode, th), abs=1e-12)
        assert g[2 * mode + 1, 2 * mode + 1] == pytest.approx(quadrature_variance(s, mode, th + np.pi / 2), abs=1e-12)


def test_from_covariance_matches_independent_inverse(rng):
    for _ in range(10):
        g = random_covariance(rng)
        m, n = moments_from_covariance(g)
        s = from_covariance_matrix(g)
        np.testing.assert_allclose(s.m_matrix, m, atol=1e-13)
        np.testing.assert_allclose(s.n_matrix, n, atol=1e-13)
        np.testing.assert_allclose(to_covariance_matrix(s), g, atol=1e-12)


@pytest.mark.parametrize("theta_ref", [0.0, 0.37, 2.0])
def test_covariance_commutes_with_symplectic(rng, theta_ref):
    for _ in range(10):
        s = random_state(rng)
        u = optics.random_transform(rng)
        sp = symplectic_matrix(u)
        np.testing.assert_allclose(sp @ OMEGA @ sp.T, OMEGA, atol=1e-12)
        direct = to_covariance_matrix(apply_transform(s, u), theta_ref)
        via = sp @ to_covariance_matrix(s, theta_ref) @ sp.T
        np.testing.assert_allclose(direct, via, atol=1e-10)


def test_reference_angle_round_trip(rng):
    s = random_state(rng)
    assert from_covariance_matrix(to_covariance_matrix(s, 1.3), 1.3).allclose(s, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    v=st.floats(0.05, 1.0),
    excess=st.floats(1.0, 3.0),
    th=st.floats(0, np.pi),
    seed=st.integers(0, 2**32 - 1),
)
def test_properties_of_constructed_states(v, excess, th, seed):
    rng = np.random.default_rng(seed)
    s = make_independent_squeezed_pair(SqueezedModeParams(v, excess / v, th), SqueezedModeParams.pure(0.7, 0.1))
    s2 = apply_transform(s, optics.random_transform(rng))
    assert total_excitation(s2) == pytest.approx(total_excitation(s), abs=1e-12)
    assert heisenberg_min_eigenvalue(s2) > -1e-9
    thetas = np.linspace(0, np.pi, 181)
    for mode in (0, 1):
        a = quadrature_variance(s2, mode, thetas)
        b = quadrature_variance(s2, mode, thetas + np.pi / 2)
        np.testing.assert_allclose(quadrature_variance(s2, mode, thetas + np.pi), a, atol=1e-12)
        assert np.min(a * b) >= 1 - 1e-9
    assert quadrature_variance(s, 0, th) == pytest.approx(v, abs=1e-12)
    assert quadrature_variance(s, 0, th + np.pi / 2) == pytest.approx(excess / v, rel=1e-12)


def test_bad_mode_index():
    with pytest.raises(PreconditionError):
        quadrature_variance(make_vacuum(), 2, 0.0)


def test_states_are_immutable(ref_xy):
    with pytest.raises(ValueError):
        ref_xy.m_matrix[0, 0] = 1


# JSON schema -------------------------------------------------------------


def test_json_round_trip(tmp_path, rng):
    s = random_state(rng)
    p = tmp_path / "s.json"
    save_state(s, p)
    doc = json.loads(p.read_text())
    assert doc["convention"] == "vacuum_variance_1"
    assert load_state(p).allclose(s, atol=0)


def test_json_reader_reports_decode_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "convention": "vacuum_variance_1",\n  "M": [,\n}')
    with pytest.raises(PreconditionError, match="line 3"):
        load_state(p)


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.update(convention="hbar_half"), "convention"),
        (lambda d: d.pop("N"), "'N'"),
        (lambda d: d["M"][0].__setitem__(1, [1, 2, 3]), r"M\[0\]\[1\]"),
        (lambda d: d.update(M=[[[0, 0], [0.3, 0]], [[0, 0], [0, 0]]]), "symmetric"),
        (lambda d: d.update(N=[[[-0.5, 0], [0, 0]], [[0, 0], [0, 0]]]), "non-negative"),
    ],
)
def test_json_reader_rejects_invariant_violations(tmp_path, mutate, field):
    d = state_to_dict(make_vacuum())
    mutate(d)
    p = tmp_path / "s.json"
    p.write_text(json.dumps(d))
    with pytest.raises(PreconditionError, match=field):
        load_state(p)


def test_state_json_matches_shipped_schema(rng):
    from cvpol.config import validate

    validate(state_to_dict(random_state(rng)), "state")
