r"""Inseparability criterion, optimal mode basis and entanglement of formation.

For two modes :math:`a, b` the EPR-type criterion is

.. math::
    I_{a,b}(\theta) = \tfrac12\left[\Delta^2(X_a+X_b)(\theta) + \Delta^2(Y_a-Y_b)(\theta)\right]
    = 2 + 2N_{aa} + 2N_{bb} + 4|M_{ab}|\cos(2\theta - \arg M_{ab}),

and separable states satisfy :math:`I \ge 2`. The first part is invariant
under polarization transforms, so the global minimum over bases is reached
where :math:`|M_{ab}|` is largest. Those modes are built from any basis in
which :math:`M` is diagonal with phase-aligned entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import optics
from .errors import DomainError, NonConvergenceError, StandardFormError
from .gaussian import (
    CONVENTION,
    TwoModeGaussianState,
    apply_transform,
    quadrature_variance,
    to_covariance_matrix,
)
from .optics import PolarizationTransform

DECOUPLE_TOL = 1e-10
DECOUPLE_MAXITER = 10_000
STANDARD_FORM_TOL = 1e-6


def reduce_angle(theta: float) -> float:
    """Map an angle onto [0, pi)."""
    r = float(np.mod(theta, np.pi))
    return 0.0 if r >= np.pi else r


def _base(s):
    return 2.0 + 2.0 * (s.n_matrix[0, 0].real + s.n_matrix[1, 1].real)


def duan_value(s: TwoModeGaussianState, theta):
    """Criterion value of the state's two modes at quadrature angle ``theta``."""
    theta = np.asarray(theta, dtype=float)
    v = _base(s) + 4.0 * np.real(np.exp(-2j * theta) * s.m_matrix[0, 1])
    return float(v) if v.ndim == 0 else v


def duan_minimize_theta(s: TwoModeGaussianState) -> tuple[float, float]:
    """Return ``(theta_star, value)`` minimizing :func:`duan_value` over theta.

    With no cross moment the criterion is flat and ``theta_star = 0``.
    """
    m01 = s.m_matrix[0, 1]
    if m01 == 0:
        return 0.0, float(_base(s))
    phi = 0.5 * np.angle(m01)
    return reduce_angle(phi + np.pi / 2), float(_base(s) - 4.0 * abs(m01))


def criterion_xy_form(s_xy: TwoModeGaussianState, theta):
    r""":math:`\Delta^2 X_x(\theta) + \Delta^2 Y_y(\theta)`, the (+45, -45) criterion read off the x, y modes."""
    theta = np.asarray(theta, dtype=float)
    v = quadrature_variance(s_xy, 0, theta) + quadrature_variance(s_xy, 1, theta + np.pi / 2)
    return float(v) if np.ndim(v) == 0 else v


# basis search ---------------------------------------------------------------


def _offdiag_sq(params, m):
    u = optics.unitary_from_angles(*params)
    # (U M U^T)_01
    z = u[0] @ m @ u[1]
    return z.real**2 + z.imag**2


def _seeds():
    ts = (np.pi / 8, 3 * np.pi / 8)
    phases = ((0.0, 0.0), (np.pi / 2, 0.0), (0.0, np.pi / 2), (np.pi / 4, 3 * np.pi / 4))
    return [np.array([0.0, b, g, t]) for t in ts for b, g in phases]


def _align_phases(m_diag):
    """Phase on mode 1 so that M_11 carries the same phase as M_00."""
    m0, m1 = m_diag
    if abs(m0) == 0 or abs(m1) == 0:
        return 0.0
    return reduce_angle(0.5 * (np.angle(m0) - np.angle(m1)))


def find_decoupled_basis(s: TwoModeGaussianState) -> tuple[PolarizationTransform, TwoModeGaussianState]:
    """Find a basis u, v with ``<dA_u dA_v> = 0``.

    The returned basis is also phase aligned: the v mode is rotated so both
    diagonal entries of M share one phase, meaning u and v are squeezed along
    the same quadrature. Nelder-Mead runs over four U(2) angles from eight
    fixed seeds; the first result meeting the residual tolerance wins.
    """
    m = s.m_matrix
    scale = float(np.max(np.abs(m)))

    def accept(u):
        t = apply_transform(s, u)
        mm = t.m_matrix
        return abs(mm[0, 1]) <= DECOUPLE_TOL * (1 + abs(mm[0, 0]) + abs(mm[1, 1])), t

    if scale == 0 or abs(m[0, 1]) <= DECOUPLE_TOL * (1 + abs(m[0, 0]) + abs(m[1, 1])):
        u = optics.identity()
    else:
        mn = m / scale
        best = None
        u = None
        for x0 in _seeds():
            res = minimize(
                _offdiag_sq,
                x0,
                args=(mn,),
                method="Nelder-Mead",
                options={"xatol": 1e-9, "fatol": 1e-26, "maxiter": DECOUPLE_MAXITER, "maxfev": 4 * DECOUPLE_MAXITER},
            )
            cand = optics.from_angles(*res.x)
            ok, t = accept(cand)
            resid = abs(t.m_matrix[0, 1])
            if best is None or resid < best:
                best = resid
            if ok:
                u = cand
                break
        if u is None:
            raise NonConvergenceError("find_decoupled_basis: residual tolerance not reached", best)
    t = apply_transform(s, u)
    beta = _align_phases(np.diag(t.m_matrix))
    u = optics.phase_shift(0.0, beta) @ u
    return u, apply_transform(s, u, basis_label="uv")


def correlated_modes_from_uv() -> PolarizationTransform:
    """(u, v) -> (a*, b*) = ((u + i v)/sqrt2, (u - i v)/sqrt2)."""
    return PolarizationTransform(np.array([[1, 1j], [1, -1j]]) / np.sqrt(2))


def _canonical_row_phases(t: PolarizationTransform) -> PolarizationTransform:
    # the optimizer leaves each mode's phase free; fix it so angles are reproducible
    u = t.u_matrix.copy()
    for row in u:
        pivot = row[0] if abs(row[0]) > 1e-9 else row[1]
        row *= np.exp(-1j * np.angle(pivot))
    return PolarizationTransform(u)


# standard form and EOF ------------------------------------------------------


def standard_form(s_pm45: TwoModeGaussianState, theta_sq: float) -> tuple[float, float]:
    r"""Return ``(n, k)`` of the symmetric standard form at ``theta_sq``.

    The covariance matrix must read

    .. math::
        \begin{pmatrix} n & 0 & \pm k & 0\\ 0 & n & 0 & \mp k\\ \pm k & 0 & n & 0\\ 0 & \mp k & 0 & n\end{pmatrix}

    up to ``STANDARD_FORM_TOL``. The sign of the X-X correlation is removed
    by a pi phase flip on one mode, so ``k >= 0``.
    """
    g = to_covariance_matrix(s_pm45, theta_sq)
    n = g[0, 0]
    k_raw = g[0, 2]
    expected = np.array(
        [[n, 0, k_raw, 0], [0, n, 0, -k_raw], [k_raw, 0, n, 0], [0, -k_raw, 0, n]]
    )
    bad = np.argwhere(np.abs(g - expected) > STANDARD_FORM_TOL)
    if bad.size:
        entries = ", ".join(f"gamma[{i},{j}]={g[i, j]:.6g}" for i, j in bad if i <= j)
        raise StandardFormError(f"standard form not applicable: {entries}")
    return float(n), float(abs(k_raw))


def _c_pm(x):
    a, b = x ** -0.5, x ** 0.5
    return (a + b) ** 2 / 4, (a - b) ** 2 / 4


def eof_function(x: float) -> float:
    r""":math:`f(x) = c_+\log_2 c_+ - c_-\log_2 c_-` for :math:`0 < x \le 1`, with ``f(1) = 0``."""
    if x >= 1:
        return 0.0
    cp, cm = _c_pm(x)
    return cp * math.log2(cp) - cm * math.log2(cm)


def eof_symmetric(i_value: float) -> float:
    """Entanglement of formation (ebits) of a symmetric state with criterion value ``i_value``.

    Returns 0 for ``i_value >= 2``.
    """
    if not (i_value > 0) or not math.isfinite(i_value):
        raise DomainError(f"eof_symmetric: criterion value must be positive and finite, got {i_value}")
    if i_value >= 2:
        return 0.0
    return eof_function(i_value / 2)


def correct_losses(i_measured: float, efficiency: float) -> float:
    """Undo detection loss modeled as a vacuum-admixing beamsplitter on both modes.

    ``I_meas = eta * I_true + (1 - eta) * 2``.
    """
    if not (0 < efficiency <= 1):
        raise DomainError(f"efficiency must lie in (0, 1], got {efficiency}")
    if not (i_measured > 0):
        raise DomainError(f"measured criterion must be positive, got {i_measured}")
    if efficiency == 1:
        return float(i_measured)
    return 2.0 + (i_measured - 2.0) / efficiency


# report --------------------------------------------------------------------


@dataclass(frozen=True)
class EntanglementReport:
    """Results of the full basis and angle optimization.

    ``theta_min``/``i_of_theta_min`` refer to the analyzed basis,
    ``theta_star``/``i_star`` to the maximally correlated modes ``basis_star``
    (expressed in the analyzed basis). ``n_param``/``k_param`` are ``None``
    when the optimal modes are not in symmetric standard form; ``eof`` is then
    the symmetric-state formula evaluated at ``i_star`` and ``eof_exact`` is false.
    """

    i_of_theta_min: float
    theta_min: float
    theta_star: float
    basis_star: PolarizationTransform
    i_star: float
    n_param: float | None
    k_param: float | None
    eof: float
    eof_exact: bool
    basis_label: str = "xy"

    @property
    def entangled(self) -> bool:
        return self.i_star < 2

    def to_dict(self) -> dict:
        u = self.basis_star.u_matrix
        return {
            "convention": CONVENTION,
            "basis_label": self.basis_label,
            "i_of_theta_min": self.i_of_theta_min,
            "theta_min": self.theta_min,
            "theta_star": self.theta_star,
            "basis_star": [[[float(z.real), float(z.imag)] for z in row] for row in u],
            "i_star": self.i_star,
            "n_param": self.n_param,
            "k_param": self.k_param,
            "eof": self.eof,
            "eof_exact": self.eof_exact,
            "entangled": self.entangled,
        }

    @classmethod
    def from_dict(cls, d: dict) -> EntanglementReport:
        if d.get("convention") != CONVENTION:
            raise ValueError(f"report convention must be {CONVENTION!r}")
        u = np.array([[complex(re, im) for re, im in row] for row in d["basis_star"]])
        return cls(
            i_of_theta_min=d["i_of_theta_min"],
            theta_min=d["theta_min"],
            theta_star=d["theta_star"],
            basis_star=PolarizationTransform(u),
            i_star=d["i_star"],
            n_param=d["n_param"],
            k_param=d["k_param"],
            eof=d["eof"],
            eof_exact=d["eof_exact"],
            basis_label=d.get("basis_label", "xy"),
        )


def maximally_correlated_modes(s: TwoModeGaussianState) -> EntanglementReport:
    """Optimize the criterion over polarization basis and quadrature angle."""
    theta_min, i_min = duan_minimize_theta(s)
    u_dec, _ = find_decoupled_basis(s)
    basis_star = _canonical_row_phases(correlated_modes_from_uv() @ u_dec)
    s_star = apply_transform(s, basis_star, basis_label="ab*")
    theta_star, i_star = duan_minimize_theta(s_star)
    # the analyzed basis can never beat the optimum; absorb optimizer rounding only
    if i_min < i_star <= i_min + 1e-8:
        i_star = i_min
    try:
        n, k = standard_form(s_star, theta_star)
    except StandardFormError:
        n = k = None
    return EntanglementReport(
        i_of_theta_min=i_min,
        theta_min=theta_min,
        theta_star=theta_star,
        basis_star=basis_star,
        i_star=i_star,
        n_param=n,
        k_param=k,
        eof=eof_symmetric(i_star),
        eof_exact=n is not None,
        basis_label=s.basis_label,
    )
