r"""Jones-matrix polarization transforms acting on the two mode operators.

A transform :math:`U` maps the annihilation operators as
:math:`A'_i = \sum_j U_{ij} A_j`, so rows of ``u_matrix`` are the new modes
written in the old basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

UNITARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PolarizationTransform:
    """A 2x2 unitary Jones matrix."""

    u_matrix: np.ndarray

    def __post_init__(self):
        u = np.array(self.u_matrix, dtype=complex)
        if u.shape != (2, 2):
            raise PreconditionError(f"Jones matrix must be 2x2, got shape {u.shape}")
        err = np.max(np.abs(u.conj().T @ u - np.eye(2)))
        if err > UNITARY_TOL:
            raise PreconditionError(f"Jones matrix is not unitary (max |U^dag U - 1| = {err:.2e})")
        u.setflags(write=False)
        object.__setattr__(self, "u_matrix", u)

    def __matmul__(self, other: PolarizationTransform) -> PolarizationTransform:
        """Composition; ``(a @ b)`` applies ``b`` first."""
        return PolarizationTransform(self.u_matrix @ other.u_matrix)

    def inverse(self) -> PolarizationTransform:
        return PolarizationTransform(self.u_matrix.conj().T)

    def allclose(self, other: PolarizationTransform, atol: float = 1e-10) -> bool:
        return bool(np.allclose(self.u_matrix, other.u_matrix, atol=atol, rtol=0))

    def __repr__(self):
        return f"PolarizationTransform({np.array2string(self.u_matrix, precision=6)})"


def identity() -> PolarizationTransform:
    return PolarizationTransform(np.eye(2))


def rotation(angle: float) -> PolarizationTransform:
    """Rotate the polarization basis by ``angle`` radians."""
    c, s = np.cos(angle), np.sin(angle)
    return PolarizationTransform(np.array([[c, s], [-s, c]]))


def phase_shift(phi0: float = 0.0, phi1: float = 0.0) -> PolarizationTransform:
    """Independent phases on each mode: diag(exp(i phi0), exp(i phi1))."""
    return PolarizationTransform(np.diag([np.exp(1j * phi0), np.exp(1j * phi1)]))


def retarder(retardance: float, axis_angle: float) -> PolarizationTransform:
    r"""Linear retarder with its fast axis at ``axis_angle`` from mode 0.

    :math:`J = R(\alpha)\,\mathrm{diag}(1, e^{i\delta})\,R(-\alpha)` with
    :math:`R` the active rotation.
    """
    c, s = np.cos(axis_angle), np.sin(axis_angle)
    rot = np.array([[c, -s], [s, c]])
    return PolarizationTransform(rot @ np.diag([1.0, np.exp(1j * retardance)]) @ rot.T)


def half_wave(axis_angle: float) -> PolarizationTransform:
    """Half-wave plate; at 22.5 deg it maps (x, y) onto the (+45, -45) modes."""
    c, s = np.cos(2 * axis_angle), np.sin(2 * axis_angle)
    return PolarizationTransform(np.array([[c, s], [s, -c]]))


def quarter_wave(axis_angle: float = 0.0) -> PolarizationTransform:
    """Quarter-wave plate; with the axis on mode 0 this is diag(1, i)."""
    return retarder(np.pi / 2, axis_angle)


def pm45() -> PolarizationTransform:
    """The (x, y) -> (+45, -45) basis change, A_pm45 = (A_x +- A_y)/sqrt(2)."""
    return half_wave(np.pi / 8)


def from_angles(alpha: float, beta: float, gamma: float, t: float) -> PolarizationTransform:
    r"""General element of U(2) from four angles.

    .. math::
        U = e^{i\alpha}\begin{pmatrix} e^{i\beta}\cos t & e^{i\gamma}\sin t \\
        -e^{-i\gamma}\sin t & e^{-i\beta}\cos t\end{pmatrix}
    """
    return PolarizationTransform(unitary_from_angles(alpha, beta, gamma, t))


def unitary_from_angles(alpha, beta, gamma, t):
    """Raw-array version of :func:`from_angles`; broadcasts over its inputs."""
    alpha, beta, gamma, t = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (alpha, beta, gamma, t))
    )
    g = np.exp(1j * alpha)
    u = np.empty(alpha.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = g * np.exp(1j * beta) * np.cos(t)
    u[..., 0, 1] = g * np.exp(1j * gamma) * np.sin(t)
    u[..., 1, 0] = -g * np.exp(-1j * gamma) * np.sin(t)
    u[..., 1, 1] = g * np.exp(-1j * beta) * np.cos(t)
    return u


def random_transform(rng: np.random.Generator) -> PolarizationTransform:
    """Haar-random element of U(2)."""
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return PolarizationTransform(q * (d / np.abs(d)))
