import numpy as np
import pytest

from cvpol import optics
from cvpol.errors import PreconditionError


def test_non_unitary_rejected():
    with pytest.raises(PreconditionError, match="unitary"):
        optics.PolarizationTransform([[1, 1], [0, 1]])
    with pytest.raises(PreconditionError, match="2x2"):
        optics.PolarizationTransform(np.eye(3))


def test_half_wave_at_22_5_gives_pm45_modes():
    u = optics.half_wave(np.pi / 8).u_matrix
    np.testing.assert_allclose(u, np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)


def test_half_wave_matches_general_retarder():
    for a in np.linspace(0, np.pi, 7):
        assert optics.half_wave(a).allclose(optics.retarder(np.pi, a), atol=1e-14)


def test_quarter_wave_on_axis_is_phase_on_y():
    np.testing.assert_allclose(optics.quarter_wave(0).u_matrix, np.diag([1, 1j]), atol=1e-15)


def test_two_quarter_waves_make_a_half_wave():
    for a in (0.0, 0.3, 1.2):
        q = optics.quarter_wave(a)
        assert (q @ q).allclose(optics.half_wave(a), atol=1e-14)


def test_compose_and_inverse(rng):
    a, b = optics.random_transform(rng), optics.random_transform(rng)
    assert (a @ a.inverse()).allclose(optics.identity(), atol=1e-14)
    np.testing.assert_allclose((a @ b).u_matrix, a.u_matrix @ b.u_matrix)


def test_from_angles_is_unitary_and_covers_identity():
    assert optics.from_angles(0, 0, 0, 0).allclose(optics.identity())
    rng = np.random.default_rng(0)
    for _ in range(50):
        optics.from_angles(*rng.uniform(-7, 7, 4))  # validates unitarity


def test_transforms_are_immutable():
    t = optics.identity()
    with pytest.raises(ValueError):
        t.u_matrix[0, 0] = 2
