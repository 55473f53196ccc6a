r"""Zero-mean two-mode Gaussian fluctuation states.

The state is stored through its complex second moments

.. math::
    M_{ij} = \langle \delta A_i \delta A_j \rangle, \qquad
    N_{ij} = \langle \delta A_i^\dagger \delta A_j \rangle .

Quadratures follow :math:`X(\theta) = A^\dagger e^{i\theta} + A e^{-i\theta}`
and :math:`Y(\theta) = X(\theta + \pi/2)`, so the vacuum variance is 1 and
:math:`[X, Y] = 2i`. No other normalization is supported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PreconditionError
from .optics import PolarizationTransform

CONVENTION = "vacuum_variance_1"
CONSTRUCTION_TOL = 1e-12
VERIFY_TOL = 1e-9

# [R_i, R_j] = 2i * OMEGA_ij for R = (X0, Y0, X1, Y1)
OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class SqueezedModeParams:
    """Phenomenological single-mode squeezing.

    ``v_min`` is the variance along the quadrature angle ``theta_sq`` and
    ``v_max`` the variance of the orthogonal quadrature. Impure states
    (``v_min * v_max > 1``) are allowed.
    """

    v_min: float
    v_max: float
    theta_sq: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.v_min) and np.isfinite(self.v_max) and np.isfinite(self.theta_sq)):
            raise PreconditionError("SqueezedModeParams: fields must be finite")
        if self.v_min < 0:
            raise PreconditionError(f"SqueezedModeParams: v_min >= 0 violated (v_min={self.v_min})")
        if self.v_max < self.v_min:
            raise PreconditionError(
                f"SqueezedModeParams: v_max >= v_min violated ({self.v_max} < {self.v_min})"
            )
        if self.v_min * self.v_max < 1 - CONSTRUCTION_TOL:
            raise PreconditionError(
                f"SqueezedModeParams: Heisenberg v_min*v_max >= 1 violated "
                f"({self.v_min * self.v_max:.12g})"
            )
        object.__setattr__(self, "theta_sq", float(np.mod(self.theta_sq, np.pi)))

    @classmethod
    def pure(cls, v_min: float, theta_sq: float = 0.0) -> SqueezedModeParams:
        """Minimum-uncertainty squeezing, ``v_max = 1 / v_min``."""
        if v_min <= 0:
            raise PreconditionError(f"SqueezedModeParams: pure squeezing needs v_min > 0 (v_min={v_min})")
        return cls(v_min, 1.0 / v_min, theta_sq)

    def moments(self) -> tuple[complex, float]:
        """Single-mode (M, N) reproducing the variance ellipse."""
        m = 0.25 * (self.v_min - self.v_max) * np.exp(2j * self.theta_sq)
        n = 0.25 * (self.v_min + self.v_max) - 0.5
        return complex(m), float(n)


def _as_matrix(value, name):
    arr = np.array(value, dtype=complex)
    if arr.shape != (2, 2):
        raise PreconditionError(f"{name}: expected a 2x2 matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"{name}: entries must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class TwoModeGaussianState:
    """Second moments of the two polarization modes' fluctuations.

    Instances are immutable; the arrays are made read-only on construction.
    Set ``check=False`` only for states produced by trusted internal
    operations that preserve the invariants by construction.
    """

    m_matrix: np.ndarray
    n_matrix: np.ndarray
    basis_label: str = "xy"
    check: bool = True

    def __post_init__(self):
        m = _as_matrix(self.m_matrix, "M")
        n = _as_matrix(self.n_matrix, "N")
        if self.check:
            _validate_moments(m, n)
        m.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "m_matrix", m)
        object.__setattr__(self, "n_matrix", n)

    def __repr__(self):
        return (
            f"TwoModeGaussianState(basis_label={self.basis_label!r}, "
            f"M={self.m_matrix.tolist()}, N={self.n_matrix.tolist()})"
        )

    def allclose(self, other: TwoModeGaussianState, atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.m_matrix, other.m_matrix, atol=atol, rtol=0)
            and np.allclose(self.n_matrix, other.n_matrix, atol=atol, rtol=0)
        )

    def relabel(self, basis_label: str) -> TwoModeGaussianState:
        return TwoModeGaussianState(self.m_matrix, self.n_matrix, basis_label, check=False)


def _validate_moments(m, n, tol=VERIFY_TOL):
    scale = 1.0 + np.max(np.abs(m)) + np.max(np.abs(n))
    if abs(m[0, 1] - m[1, 0]) > tol * scale:
        raise PreconditionError(f"M must be symmetric (M01={m[0, 1]}, M10={m[1, 0]})")
    if np.max(np.abs(n - n.conj().T)) > tol * scale:
        raise PreconditionError("N must be Hermitian")
    for i in range(2):
        if n[i, i].real < -tol * scale:
            raise PreconditionError(f"N must have a non-negative diagonal (N{i}{i}={n[i, i].real})")
    gamma = _covariance(m, n, 0.0)
    low = np.linalg.eigvalsh(gamma + 1j * OMEGA).min()
    if low < -tol * scale:
        raise PreconditionError(f"Heisenberg condition gamma + i*Omega >= 0 violated (min eigenvalue {low:.3e})")


def make_vacuum(basis_label: str = "xy") -> TwoModeGaussianState:
    return TwoModeGaussianState(np.zeros((2, 2)), np.zeros((2, 2)), basis_label, check=False)


def make_independent_squeezed_pair(
    p_a: SqueezedModeParams, p_b: SqueezedModeParams, basis_label: str = "xy"
) -> TwoModeGaussianState:
    """Two uncorrelated squeezed modes (``M01 = N01 = 0``)."""
    for name, p in (("p_a", p_a), ("p_b", p_b)):
        if not isinstance(p, SqueezedModeParams):
            raise PreconditionError(f"{name} must be SqueezedModeParams, got {type(p).__name__}")
    (ma, na), (mb, nb) = p_a.moments(), p_b.moments()
    return TwoModeGaussianState(np.diag([ma, mb]), np.diag([na, nb]), basis_label, check=False)


def apply_transform(
    s: TwoModeGaussianState, t: PolarizationTransform, basis_label: str | None = None
) -> TwoModeGaussianState:
    r"""Moments after :math:`A' = U A`: :math:`M' = U M U^T`, :math:`N' = U^* N U^T`."""
    if not isinstance(t, PolarizationTransform):
        t = PolarizationTransform(t)
    u = t.u_matrix
    m = u @ s.m_matrix @ u.T
    n = u.conj() @ s.n_matrix @ u.T
    # strip rounding asymmetry so invariants hold exactly
    m = 0.5 * (m + m.T)
    n = 0.5 * (n + n.conj().T)
    label = s.basis_label if basis_label is None else basis_label
    return TwoModeGaussianState(m, n, label, check=False)


def _check_mode(mode):
    if mode not in (0, 1):
        raise PreconditionError(f"mode index must be 0 or 1, got {mode!r}")


def quadrature_variance(s: TwoModeGaussianState, mode: int, theta) -> float | np.ndarray:
    r""":math:`\Delta^2 X_m(\theta) = 1 + 2N_{mm} + 2\,\mathrm{Re}(e^{-2i\theta}M_{mm})`.

    ``theta`` may be an array.
    """
    _check_mode(mode)
    theta = np.asarray(theta, dtype=float)
    v = 1.0 + 2.0 * s.n_matrix[mode, mode].real + 2.0 * np.real(np.exp(-2j * theta) * s.m_matrix[mode, mode])
    return float(v) if v.ndim == 0 else v


def quadrature_covariance(s: TwoModeGaussianState, mode_i: int, theta_i, mode_j: int, theta_j):
    """Symmetrized covariance of X_i(theta_i) and X_j(theta_j)."""
    _check_mode(mode_i)
    _check_mode(mode_j)
    ti = np.asarray(theta_i, dtype=float)
    tj = np.asarray(theta_j, dtype=float)
    c = 2.0 * np.real(np.exp(-1j * (ti + tj)) * s.m_matrix[mode_i, mode_j])
    c = c + 2.0 * np.real(np.exp(1j * (ti - tj)) * s.n_matrix[mode_i, mode_j])
    if mode_i == mode_j:
        c = c + np.cos(ti - tj)
    return float(c) if np.ndim(c) == 0 else c


def cross_moment(s: TwoModeGaussianState) -> complex:
    r""":math:`\langle \delta A_0 \delta A_1 \rangle`."""
    return complex(s.m_matrix[0, 1])


def _covariance(m, n, theta_ref):
    angles = theta_ref + np.array([0.0, np.pi / 2])
    gamma = np.empty((4, 4))
    for i in range(2):
        for j in range(2):
            ti = angles[:, None]
            tj = angles[None, :]
            block = 2.0 * np.real(np.exp(-1j * (ti + tj)) * m[i, j])
            block += 2.0 * np.real(np.exp(1j * (ti - tj)) * n[i, j])
            if i == j:
                block += np.cos(ti - tj)
            gamma[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = block
    return 0.5 * (gamma + gamma.T)


def to_covariance_matrix(s: TwoModeGaussianState, theta_ref: float = 0.0) -> np.ndarray:
    r"""4x4 real covariance of :math:`(X_0, Y_0, X_1, Y_1)` at ``theta_ref``.

    Entries are :math:`\gamma_{ij} = \langle \delta R_i\delta R_j + \delta R_j\delta R_i\rangle / 2`;
    the vacuum maps to the identity.
    """
    return _covariance(s.m_matrix, s.n_matrix, float(theta_ref))


def from_covariance_matrix(gamma, theta_ref: float = 0.0, basis_label: str = "xy") -> TwoModeGaussianState:
    """Inverse of :func:`to_covariance_matrix`; validates the result."""
    g = np.asarray(gamma, dtype=float)
    if g.shape != (4, 4):
        raise PreconditionError(f"covariance matrix must be 4x4, got shape {g.shape}")
    if np.max(np.abs(g - g.T)) > VERIFY_TOL * (1 + np.max(np.abs(g))):
        raise PreconditionError("covariance matrix must be symmetric")
    g = 0.5 * (g + g.T)
    m = np.empty((2, 2), dtype=complex)
    n = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            xx, yy = g[2 * i, 2 * j], g[2 * i + 1, 2 * j + 1]
            xy, yx = g[2 * i, 2 * j + 1], g[2 * i + 1, 2 * j]
            m[i, j] = 0.25 * (xx - yy + 1j * (xy + yx))
            n[i, j] = 0.25 * (xx + yy + 1j * (xy - yx)) - 0.5 * (i == j)
    # undo the reference rotation: the quadratures above belong to A e^{-i theta_ref}
    m = m * np.exp(2j * theta_ref)
    return TwoModeGaussianState(m, n, basis_label)


def symplectic_matrix(t: PolarizationTransform) -> np.ndarray:
    """Real 4x4 symplectic matrix acting on (X0, Y0, X1, Y1) for a passive transform."""
    u = t.u_matrix
    s = np.empty((4, 4))
    for i in range(2):
        for j in range(2):
            a, b = u[i, j].real, u[i, j].imag
            s[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = [[a, -b], [b, a]]
    return s


def heisenberg_min_eigenvalue(s: TwoModeGaussianState) -> float:
    """Smallest eigenvalue of gamma + i*Omega; non-negative for physical states."""
    return float(np.linalg.eigvalsh(to_covariance_matrix(s) + 1j * OMEGA).min())


def total_excitation(s: TwoModeGaussianState) -> float:
    """trace(N), invariant under polarization transforms."""
    return float(np.trace(s.n_matrix).real)


# JSON state files ----------------------------------------------------------


def _pack(mat):
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def _unpack(value, field):
    if not isinstance(value, list) or len(value) != 2:
        raise PreconditionError(f"field {field!r}: expected a 2-row list")
    out = np.empty((2, 2), dtype=complex)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != 2:
            raise PreconditionError(f"field {field}[{i}]: expected a 2-entry list")
        for j, entry in enumerate(row):
            ok = (
                isinstance(entry, list)
                and len(entry) == 2
                and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
            )
            if not ok:
                raise PreconditionError(f"field {field}[{i}][{j}]: expected [re, im] numbers, got {entry!r}")
            out[i, j] = complex(entry[0], entry[1])
    return out


def state_to_dict(s: TwoModeGaussianState) -> dict:
    return {
        "convention": CONVENTION,
        "basis_label": s.basis_label,
        "M": _pack(s.m_matrix),
        "N": _pack(s.n_matrix),
    }


def state_from_dict(data: dict) -> TwoModeGaussianState:
    if not isinstance(data, dict):
        raise PreconditionError("state document must be a JSON object")
    for key in ("convention", "basis_label", "M", "N"):
        if key not in data:
            raise PreconditionError(f"field {key!r}: missing")
    if data["convention"] != CONVENTION:
        raise PreconditionError(
            f"field 'convention': expected {CONVENTION!r}, got {data['convention']!r}"
        )
    if not isinstance(data["basis_label"], str):
        raise PreconditionError("field 'basis_label': expected a string")
    m = _unpack(data["M"], "M")
    n = _unpack(data["N"], "N")
    try:
        return TwoModeGaussianState(m, n, data["basis_label"])
    except PreconditionError as exc:
        raise PreconditionError(f"fields 'M'/'N': {exc}") from None


def save_state(s: TwoModeGaussianState, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(s), indent=2) + "\n")


def load_state(path) -> TwoModeGaussianState:
    """Read a JSON state file; decoding errors carry the line number."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return state_from_dict(data)
    except PreconditionError as exc:
        raise PreconditionError(f"{path}: {exc}") from None
