"""Synthetic balanced-homodyne scans and their variance estimates.

Two detectors record the same quadrature X(theta) of modes 0 and 1 while the
local-oscillator phase steps through a ramp. The noise is white over the
analysis band, so each sample is a draw from the state's quadrature
covariance at that theta.

Random numbers come from numpy's counter-based Philox generator. Bin ``k`` of
a scan with seed ``s`` uses the key derived by ``SeedSequence([s, k])``, so a
bin's samples depend only on (seed, bin index) and not on evaluation order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import optics
from .errors import PreconditionError, TraceFormatError
from .gaussian import TwoModeGaussianState, apply_transform, quadrature_covariance

log = logging.getLogger(__name__)

CSV_HEADER = ("theta_rad", "x_a", "x_b")


@dataclass(frozen=True, eq=False)
class HomodyneTrace:
    """Simultaneous shot-noise-normalized quadrature samples of two modes."""

    theta: np.ndarray
    x_a: np.ndarray
    x_b: np.ndarray
    analysis_frequency_mhz: float | None = 5.0
    seed: int | None = None
    state_ref: str | None = None

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in (self.theta, self.x_a, self.x_b)]
        if not (arrays[0].shape == arrays[1].shape == arrays[2].shape) or arrays[0].ndim != 1:
            raise PreconditionError("theta, x_a and x_b must be 1-D arrays of equal length")
        for name, a in zip(("theta", "x_a", "x_b"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self):
        return len(self.theta)

    def __eq__(self, other):
        if not isinstance(other, HomodyneTrace):
            return NotImplemented
        return (
            np.array_equal(self.theta, other.theta)
            and np.array_equal(self.x_a, other.x_a)
            and np.array_equal(self.x_b, other.x_b)
        )

    def metadata(self) -> dict:
        return {
            "analysis_frequency_mhz": self.analysis_frequency_mhz,
            "seed": self.seed,
            "state_ref": self.state_ref,
        }


@dataclass(frozen=True)
class BinEstimate:
    theta_center: float
    var_a: float
    var_b: float
    cov_ab: float
    i_plus_estimate: float
    sample_count: int
    stderr_a: float
    stderr_b: float
    stderr: float


@dataclass(frozen=True)
class ScanEstimate:
    bins: list[BinEstimate]
    skipped: list[dict] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(b, name) for b in self.bins])


def measurement_transform(criterion_basis: str = "pm45") -> optics.PolarizationTransform:
    """Plates placed before the homodyne pair so ``var_a + var_b`` reads a criterion.

    The input state is in the x, y basis. For the (+45, -45) criterion a
    quarter-wave plate turns A_y into iA_y; for the x, y criterion a half-wave
    plate at 22.5 deg comes first.
    """
    if criterion_basis == "pm45":
        return optics.quarter_wave(0.0)
    if criterion_basis == "xy":
        return optics.quarter_wave(0.0) @ optics.half_wave(np.pi / 8)
    raise PreconditionError(f"criterion basis must be 'pm45' or 'xy', got {criterion_basis!r}")


def prepare_for_scan(s_xy: TwoModeGaussianState, criterion_basis: str = "pm45") -> TwoModeGaussianState:
    return apply_transform(s_xy, measurement_transform(criterion_basis), basis_label=f"measure-{criterion_basis}")


def bin_rng(seed: int, bin_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, bin_index])))


def quadrature_pair_covariance(s: TwoModeGaussianState, theta: float) -> np.ndarray:
    """Covariance of (X_0(theta), X_1(theta))."""
    c00 = quadrature_covariance(s, 0, theta, 0, theta)
    c11 = quadrature_covariance(s, 1, theta, 1, theta)
    c01 = quadrature_covariance(s, 0, theta, 1, theta)
    return np.array([[c00, c01], [c01, c11]])


def _sample_bin(cov, n, rng):
    # symmetric square root tolerates singular covariances
    w, v = np.linalg.eigh(cov)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    return rng.standard_normal((n, 2)) @ root.T


def simulate_scan(
    s: TwoModeGaussianState,
    ramp,
    n_per_bin: int,
    seed: int,
    analysis_frequency_mhz: float | None = 5.0,
    state_ref: str | None = None,
) -> HomodyneTrace:
    """Draw ``n_per_bin`` joint samples of (X_0, X_1) at every angle of ``ramp``."""
    if n_per_bin < 2:
        raise PreconditionError(f"n_per_bin must be >= 2, got {n_per_bin}")
    ramp = np.asarray(ramp, dtype=float)
    if ramp.ndim != 1 or ramp.size == 0:
        raise PreconditionError("ramp must be a non-empty 1-D array of angles")
    thetas, xa, xb = [], [], []
    for k, th in enumerate(ramp):
        x = _sample_bin(quadrature_pair_covariance(s, th), n_per_bin, bin_rng(seed, k))
        thetas.append(np.full(n_per_bin, th))
        xa.append(x[:, 0])
        xb.append(x[:, 1])
    return HomodyneTrace(
        np.concatenate(thetas),
        np.concatenate(xa),
        np.concatenate(xb),
        analysis_frequency_mhz=analysis_frequency_mhz,
        seed=seed,
        state_ref=state_ref,
    )


def _estimate_bin(theta_center, xa, xb):
    n = len(xa)
    c = np.cov(np.vstack([xa, xb]), ddof=1)
    va, vb, cab = float(c[0, 0]), float(c[1, 1]), float(c[0, 1])
    k = math.sqrt(2.0 / (n - 1))
    # Var(s_a^2 + s_b^2) for jointly Gaussian data
    se = math.sqrt(2.0 / (n - 1) * (va**2 + vb**2 + 2 * cab**2))
    return BinEstimate(
        theta_center=float(theta_center),
        var_a=va,
        var_b=vb,
        cov_ab=cab,
        i_plus_estimate=va + vb,
        sample_count=n,
        stderr_a=va * k,
        stderr_b=vb * k,
        stderr=se,
    )


def estimate_scan(trace: HomodyneTrace, n_bins: int | None = None) -> ScanEstimate:
    """Per-bin unbiased variances and the sum-of-variances criterion estimate.

    Without ``n_bins`` samples are grouped by identical theta; otherwise theta
    is histogrammed into ``n_bins`` equal bins. Bins with fewer than two
    samples are skipped and listed in ``skipped``.
    """
    theta = trace.theta
    if n_bins is None:
        centers, inverse = np.unique(theta, return_inverse=True)
        groups = [(centers[k], np.flatnonzero(inverse == k)) for k in range(len(centers))]
    else:
        edges = np.linspace(theta.min(), theta.max(), n_bins + 1)
        idx = np.clip(np.searchsorted(edges, theta, side="right") - 1, 0, n_bins - 1)
        groups = [(0.5 * (edges[k] + edges[k + 1]), np.flatnonzero(idx == k)) for k in range(n_bins)]
    bins, skipped = [], []
    for center, sel in groups:
        if len(sel) < 2:
            log.warning("bin at theta=%.6g has %d sample(s); skipped", center, len(sel))
            skipped.append({"theta_center": float(center), "sample_count": int(len(sel))})
            continue
        bins.append(_estimate_bin(center, trace.x_a[sel], trace.x_b[sel]))
    return ScanEstimate(bins, skipped)


def harmonic_fit(est: ScanEstimate, quantity: str = "i_plus_estimate") -> dict:
    r"""Weighted fit of :math:`c_0 + c_1\cos 2\theta + c_2\sin 2\theta` to a binned curve.

    Returns the coefficients and the fitted minimum/maximum with their angles.
    """
    th = est.column("theta_center")
    y = est.column(quantity)
    se = est.column("stderr" if quantity == "i_plus_estimate" else quantity.replace("var", "stderr"))
    design = np.column_stack([np.ones_like(th), np.cos(2 * th), np.sin(2 * th)])
    w = 1.0 / se
    coef, *_ = np.linalg.lstsq(design * w[:, None], y * w, rcond=None)
    amp = float(np.hypot(coef[1], coef[2]))
    phase = float(np.arctan2(coef[2], coef[1]))
    return {
        "offset": float(coef[0]),
        "amplitude": amp,
        "minimum": float(coef[0]) - amp,
        "maximum": float(coef[0]) + amp,
        "theta_min": float(np.mod(0.5 * (phase + np.pi), np.pi)),
    }


def flatness_test(est: ScanEstimate, confidence: float = 0.95) -> dict:
    """Test whether the criterion estimate is independent of theta.

    Two checks run at ``confidence``: the least-squares slope on theta must
    be consistent with zero, and so must the weighted cos/sin(2 theta)
    amplitude (a chi-square test with two degrees of freedom using the
    per-bin standard errors). A pi-periodic oscillation sampled over whole
    periods has no linear trend, so the slope alone cannot detect it.
    """
    th = est.column("theta_center")
    y = est.column("i_plus_estimate")
    se = est.column("stderr")
    res = stats.linregress(th, y)

    design = np.column_stack([np.ones_like(th), np.cos(2 * th), np.sin(2 * th)])
    w = 1.0 / se
    xw = design * w[:, None]
    coef, *_ = np.linalg.lstsq(xw, y * w, rcond=None)
    cov = np.linalg.inv(xw.T @ xw)
    amp = coef[1:]
    chi2 = float(amp @ np.linalg.solve(cov[1:, 1:], amp))
    harmonic_p = float(stats.chi2.sf(chi2, df=2))

    alpha = 1 - confidence
    return {
        "slope": float(res.slope),
        "slope_stderr": float(res.stderr),
        "p_value": float(res.pvalue),
        "harmonic_amplitude": float(np.hypot(*amp)),
        "harmonic_p_value": harmonic_p,
        "flat": bool(res.pvalue > alpha and harmonic_p > alpha),
    }


# CSV traces ----------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def emit_trace_csv(trace: HomodyneTrace, path, sidecar: bool = True) -> None:
    """Write ``theta_rad,x_a,x_b`` rows with 17 significant digits."""
    lines = [",".join(CSV_HEADER)]
    lines.extend(
        f"{_fmt(t)},{_fmt(a)},{_fmt(b)}" for t, a, b in zip(trace.theta, trace.x_a, trace.x_b)
    )
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")
    if sidecar:
        sidecar_path(path).write_text(json.dumps(trace.metadata(), indent=2, sort_keys=True) + "\n")


def parse_trace_csv(path) -> HomodyneTrace:
    """Read a trace CSV and its optional metadata sidecar."""
    cols = ([], [], [])
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise TraceFormatError(f"header must be {','.join(CSV_HEADER)!r}, got {header!r}", line=1)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 3:
                raise TraceFormatError(f"expected 3 fields, got {len(row)}", line=line)
            for col, (name, cell) in enumerate(zip(CSV_HEADER, row), start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise TraceFormatError(f"{name}: not a number: {cell!r}", line=line, column=col) from None
                if not math.isfinite(v):
                    raise TraceFormatError(f"{name}: non-finite value {cell!r}", line=line, column=col)
                cols[col - 1].append(v)
    theta = np.array(cols[0])
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    return HomodyneTrace(
        theta,
        np.array(cols[1]),
        np.array(cols[2]),
        analysis_frequency_mhz=meta.get("analysis_frequency_mhz"),
        seed=meta.get("seed"),
        state_ref=meta.get("state_ref"),
    )


def emit_estimate_csv(est: ScanEstimate, path) -> None:
    names = ["theta_center", "var_a", "var_b", "cov_ab", "i_plus_estimate", "sample_count", "stderr_a", "stderr_b", "stderr"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for b in est.bins:
            w.writerow([b.sample_count if n == "sample_count" else _fmt(getattr(b, n)) for n in names])
