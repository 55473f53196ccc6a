r"""Polarization entanglement of two bright beams.

The (+45, -45) modes, relabelled :math:`A'_x, A'_y` after a half-wave plate,
are separated on a polarizing beamsplitter whose other port receives a strong
field :math:`B` polarized at 45 degrees. Beam alpha carries :math:`A'_x` and
:math:`B_y`, beam beta carries :math:`A'_y` and :math:`B_x`. With
:math:`B = \alpha_B e^{i\theta_B}` the Stokes fluctuations linearize to

.. math::
    \delta S_2^\alpha = \alpha_B\,\delta X'_x(\theta_B),\quad
    \delta S_3^\alpha = -\alpha_B\,\delta Y'_x(\theta_B),\quad
    \delta S_2^\beta = \alpha_B\,\delta X'_y(\theta_B),\quad
    \delta S_3^\beta = \alpha_B\,\delta Y'_y(\theta_B).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import PreconditionError, RegimeError
from .gaussian import CONVENTION, TwoModeGaussianState, to_covariance_matrix
from .metrics import EntanglementReport

DEFAULT_REGIME_FACTOR = 1e3

# rows: S2a, S3a, S2b, S3b ; columns: X'x, Y'x, X'y, Y'y (per unit alpha_B)
_STOKES_MAP = np.diag([1.0, -1.0, 1.0, 1.0])


@dataclass(frozen=True)
class BrightBeamPair:
    """Weak (+45, -45) fluctuations mixed with a strong locked field.

    ``alpha_a`` is the mean amplitude of the weak modes (zero by default);
    it only enters through ``b_noise``, which gives B vacuum-level noise,
    and the small correction to the S1 means. ``phase_jitter`` is the rms
    error of the phase lock in radians.
    """

    state_pm45: TwoModeGaussianState
    alpha_b: float
    theta_b: float = 0.0
    alpha_a: float = 0.0
    b_noise: bool = False
    phase_jitter: float = 0.0
    regime_factor: float = DEFAULT_REGIME_FACTOR

    def __post_init__(self):
        if not (self.alpha_b > 0 and np.isfinite(self.alpha_b)):
            raise PreconditionError(f"alpha_b must be positive, got {self.alpha_b}")
        if not np.isfinite(self.theta_b):
            raise PreconditionError("theta_b must be finite")
        if self.alpha_a < 0:
            raise PreconditionError(f"alpha_a must be non-negative, got {self.alpha_a}")
        if self.phase_jitter < 0:
            raise PreconditionError(f"phase_jitter must be non-negative, got {self.phase_jitter}")

    def fluctuation_scale(self) -> float:
        """Largest quadrature standard deviation of either weak mode, including the mean field."""
        n = self.state_pm45.n_matrix
        m = self.state_pm45.m_matrix
        v = max(1 + 2 * n[i, i].real + 2 * abs(m[i, i]) for i in range(2))
        return float(np.sqrt(v)) + self.alpha_a

    def check_regime(self) -> None:
        need = self.regime_factor * self.fluctuation_scale()
        if self.alpha_b < need:
            raise RegimeError(
                f"linearization needs alpha_b >= {self.regime_factor:g} x fluctuation scale "
                f"= {need:.4g}, got alpha_b = {self.alpha_b:.4g}"
            )


@dataclass(frozen=True)
class StokesReport:
    s1_mean_alpha: float
    s1_mean_beta: float
    var_s2_sum: float
    var_s3_sum: float
    i_stokes_normalized: float
    entangled: bool
    alpha_b: float
    theta_b: float

    def to_dict(self) -> dict:
        return {
            "convention": CONVENTION,
            "s1_mean_alpha": self.s1_mean_alpha,
            "s1_mean_beta": self.s1_mean_beta,
            "var_s2_sum": self.var_s2_sum,
            "var_s3_sum": self.var_s3_sum,
            "i_stokes_normalized": self.i_stokes_normalized,
            "entangled": self.entangled,
            "alpha_b": self.alpha_b,
            "theta_b": self.theta_b,
        }


def stokes_means(pair: BrightBeamPair) -> tuple[float, float]:
    """<S1> of the two beams, ``(|alpha_a|^2 - alpha_b^2, alpha_b^2 - |alpha_a|^2)``."""
    pair.check_regime()
    d = pair.alpha_a**2 - pair.alpha_b**2
    return float(d), float(-d)


def stokes_covariance(pair: BrightBeamPair, theta_b: float | None = None) -> np.ndarray:
    """Covariance of (S2a, S3a, S2b, S3b) in the linearized model.

    This is the weak-mode covariance at ``theta_b`` mapped through the linear
    Stokes relations, plus the B-noise term when enabled.
    """
    theta = pair.theta_b if theta_b is None else theta_b
    gamma = to_covariance_matrix(pair.state_pm45, theta)
    cov = pair.alpha_b**2 * (_STOKES_MAP @ gamma @ _STOKES_MAP.T)
    if pair.b_noise:
        # independent vacuum on B_x, B_y, amplified by the weak mean field
        cov = cov + pair.alpha_a**2 * np.eye(4)
    return cov


def _sum_variances(cov):
    e2 = np.array([1.0, 0.0, 1.0, 0.0])
    e3 = np.array([0.0, 1.0, 0.0, 1.0])
    return float(e2 @ cov @ e2), float(e3 @ cov @ e3)


def stokes_sum_variances(
    pair: BrightBeamPair,
    rng: np.random.Generator | None = None,
    n_draws: int = 10_000,
) -> StokesReport:
    """Variances of S2a+S2b and S3a+S3b and the normalized polarization criterion.

    With ``phase_jitter > 0`` the variances are averaged over ``n_draws``
    Gaussian phase errors drawn from ``rng``, which is then required.
    """
    s1a, s1b = stokes_means(pair)
    if pair.phase_jitter > 0:
        if rng is None:
            raise PreconditionError("phase_jitter > 0 requires a seeded rng")
        thetas = pair.theta_b + pair.phase_jitter * rng.standard_normal(n_draws)
        v2 = v3 = 0.0
        for th in thetas:
            a, b = _sum_variances(stokes_covariance(pair, th))
            v2 += a
            v3 += b
        v2 /= n_draws
        v3 /= n_draws
    else:
        v2, v3 = _sum_variances(stokes_covariance(pair))
    i_norm = 0.5 * (v2 + v3) / pair.alpha_b**2
    return StokesReport(
        s1_mean_alpha=s1a,
        s1_mean_beta=s1b,
        var_s2_sum=v2,
        var_s3_sum=v3,
        i_stokes_normalized=i_norm,
        entangled=bool(i_norm < 2),
        alpha_b=pair.alpha_b,
        theta_b=pair.theta_b,
    )


def lock_phase_to_squeezing(
    pair: BrightBeamPair, report: EntanglementReport, jitter: float = 0.0
) -> BrightBeamPair:
    """Ideal servo: set ``theta_b`` to the report's optimal angle, with optional rms ``jitter``."""
    if not np.isfinite(report.theta_star):
        raise PreconditionError("report.theta_star must be finite")
    return replace(pair, theta_b=float(report.theta_star), phase_jitter=float(jitter))
