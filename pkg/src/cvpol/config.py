"""Scenario configuration files for the command-line front end.

Precedence, lowest first: built-in defaults, the JSON config file, command
line flags.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import PreconditionError
from .gaussian import SqueezedModeParams, TwoModeGaussianState, load_state, make_independent_squeezed_pair

REFERENCE_V_MIN = 0.95
REFERENCE_ETA = 5 / 7

# descriptive context of the source experiment; never enters a calculation
REFERENCE_METADATA = {
    "coupling_mirror_transmission": 0.1,
    "probe_detuning_mhz": "about 50, red of the F=4 -> F'=5 line",
    "probe_power_uw": "5 to 15",
    "squeezing_band_mhz": [3, 12],
}


def load_schema(name: str) -> dict:
    return json.loads(resources.files("cvpol").joinpath("schemas", f"{name}.schema.json").read_text())


def validate(document, name: str) -> None:
    """Validate against a shipped schema, reporting the offending field path."""
    try:
        jsonschema.validate(document, load_schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise PreconditionError(f"field {where}: {exc.message}") from None


@dataclass(frozen=True)
class ScenarioConfig:
    v_min: tuple[float, float] = (REFERENCE_V_MIN, REFERENCE_V_MIN)
    # None means minimum-uncertainty squeezing, v_max = 1/v_min
    v_max: tuple[float, float] | None = None
    theta_sq: float = 0.0
    eta: float = REFERENCE_ETA
    alpha_b: float = 1e4
    theta_b: float | str = "locked"
    theta_start: float = 0.0
    theta_stop: float = 2 * np.pi
    n_bins: int = 72
    n_per_bin: int = 10_000
    scan_basis: str = "pm45"
    seed: int = 20040101
    analysis_frequency_mhz: float = 5.0
    state_file: str | None = None
    metadata: dict = field(default_factory=lambda: dict(REFERENCE_METADATA))

    def __post_init__(self):
        # builds the mode parameters so invariant violations surface at load
        self.mode_params()
        if not (0 < self.eta <= 1):
            raise PreconditionError(f"field eta: must lie in (0, 1], got {self.eta}")
        if not self.alpha_b > 0:
            raise PreconditionError(f"field alpha_b: must be positive, got {self.alpha_b}")
        if isinstance(self.theta_b, str) and self.theta_b != "locked":
            raise PreconditionError(f"field theta_b: must be 'locked' or a number, got {self.theta_b!r}")
        if self.n_per_bin < 2:
            raise PreconditionError(f"field scan/n_per_bin: must be >= 2, got {self.n_per_bin}")
        if self.n_bins < 1:
            raise PreconditionError(f"field scan/n_bins: must be >= 1, got {self.n_bins}")

    def mode_params(self) -> tuple[SqueezedModeParams, SqueezedModeParams]:
        """Mode x squeezed at theta_sq, mode y on the orthogonal quadrature."""
        angles = (self.theta_sq, self.theta_sq + np.pi / 2)
        out = []
        for i, name in enumerate(("x", "y")):
            try:
                if self.v_max is None:
                    out.append(SqueezedModeParams.pure(self.v_min[i], angles[i]))
                else:
                    out.append(SqueezedModeParams(self.v_min[i], self.v_max[i], angles[i]))
            except PreconditionError as exc:
                raise PreconditionError(f"field squeezing (mode {name}): {exc}") from None
        return out[0], out[1]

    def state_xy(self, base_dir: Path | None = None) -> TwoModeGaussianState:
        if self.state_file is not None:
            path = Path(self.state_file)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return load_state(path)
        return make_independent_squeezed_pair(*self.mode_params(), basis_label="xy")

    def ramp(self) -> np.ndarray:
        return np.linspace(self.theta_start, self.theta_stop, self.n_bins, endpoint=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["v_min"] = list(self.v_min)
        d["v_max"] = None if self.v_max is None else list(self.v_max)
        scan = {k: d.pop(k) for k in ("theta_start", "theta_stop", "n_bins", "n_per_bin")}
        scan["basis"] = d.pop("scan_basis")
        d["scan"] = scan
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> ScenarioConfig:
        validate(doc, "config")
        kw = dict(doc)
        scan = kw.pop("scan", {})
        for key in ("theta_start", "theta_stop", "n_bins", "n_per_bin"):
            if key in scan:
                kw[key] = scan[key]
        if "basis" in scan:
            kw["scan_basis"] = scan["basis"]
        for key in ("v_min", "v_max"):
            v = kw.get(key)
            if isinstance(v, (int, float)):
                kw[key] = (float(v), float(v))
            elif isinstance(v, list):
                kw[key] = tuple(float(x) for x in v)
        return cls(**kw)

    def with_overrides(self, **flags) -> ScenarioConfig:
        return replace(self, **{k: v for k, v in flags.items() if v is not None})


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return ScenarioConfig.from_dict(doc)
    except PreconditionError as exc:
        raise PreconditionError(f"{path}: {exc}") from None
