"""Run configuration: validated fields, flat key=value files, flag overrides.

Config files are intentionally plain, one `key=value` per line with keys named
exactly like the RunConfig fields, so experiment logs diff cleanly. Unknown
keys are rejected with the offending name. The riskless rate may be given
directly (`r`) or as an annual growth factor (`annual_factor`, meaning
r = ln(factor)); setting both is an error.
"""

from __future__ import annotations

import math
from typing import Any, Mapping

from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from .errors import ConfigError
from .grid import Grid2, build_grid
from .model import MarketParams, RHO_MAX
from .solver import SCHEMES, SolveConfig

_LIST_FIELDS = {"study_ns", "study_rhos"}


class RunConfig(BaseModel):
    """Everything a batch command needs; defaults reproduce the standard
    two-asset setup (sigma1=0.25, sigma2=0.35, gamma=0.25, r=ln 1.05,
    omega1=0.35, K=10, mesh ratio 0.4)."""

    model_config = ConfigDict(extra="forbid")

    sigma1: float = 0.25
    sigma2: float = 0.35
    r: float | None = None
    annual_factor: float | None = None
    rho12: float = 0.8
    omega1: float = 0.35
    omega2: float | None = None
    K: float = 10.0
    T: float = 1.0
    gamma: float = 0.25

    xmin1: float = -2.0
    xmax1: float = 2.0
    xmin2: float = -2.0
    xmax2: float = 2.0
    n1: int = 128
    n2: int = 128

    scheme: str = "hoc"
    mesh_ratio: float = 0.4
    smoothing: bool = True
    solver_tol: float = 1e-11
    max_iterations: int = 400

    study_ns: list[int] = [16, 32, 64, 128]
    reference_n: int = 512
    reference_mesh_ratio: float = 1.0
    study_rhos: list[float] = [-0.8, 0.0, 0.8]
    study_baseline: bool = False
    workers: int = 2

    quad_tol: float = 1e-8
    mc_paths: int = 1_000_000
    mc_seed: int = 20240
    confidence: float = 3.0

    s1: float | None = None
    s2: float | None = None

    field_csv: str = "field.csv"
    report_csv: str = "report.csv"
    report_svg: str = "report.svg"
    smooth_csv: str = "smooth_check.csv"

    @field_validator("rho12")
    @classmethod
    def _rho_range(cls, v):
        if abs(v) > RHO_MAX:
            raise ValueError(f"rho12 must lie in [-{RHO_MAX}, {RHO_MAX}], got {v}")
        return v

    @field_validator("scheme")
    @classmethod
    def _scheme_known(cls, v):
        if v not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {v!r}")
        return v

    @model_validator(mode="after")
    def _fill_derived(self):
        if self.r is not None and self.annual_factor is not None:
            raise ValueError("set either r or annual_factor, not both")
        if self.r is None:
            factor = 1.05 if self.annual_factor is None else self.annual_factor
            if factor <= 0:
                raise ValueError(f"annual_factor must be positive, got {factor}")
            object.__setattr__(self, "r", math.log(factor))
        if self.omega2 is None:
            object.__setattr__(self, "omega2", 1.0 - self.omega1)
        if self.s1 is None:
            object.__setattr__(self, "s1", self.K)
        if self.s2 is None:
            object.__setattr__(self, "s2", self.K)
        return self

    def market_params(self, rho: float | None = None) -> MarketParams:
        return MarketParams(
            sigma1=self.sigma1, sigma2=self.sigma2, r=self.r,
            rho12=self.rho12 if rho is None else rho,
            omega1=self.omega1, omega2=self.omega2,
            K=self.K, T=self.T, gamma=self.gamma,
        )

    def grid(self, n: int | None = None) -> Grid2:
        n1 = self.n1 if n is None else n
        n2 = self.n2 if n is None else n
        return build_grid(self.xmin1, self.xmax1, self.xmin2, self.xmax2, n1, n2)

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            scheme=self.scheme, mesh_ratio=self.mesh_ratio, tol=self.solver_tol,
            max_iterations=self.max_iterations, smoothing=self.smoothing,
        )

    def study_bounds(self) -> tuple[float, float, float, float]:
        return (self.xmin1, self.xmax1, self.xmin2, self.xmax2)


def _coerce(key: str, raw: str) -> Any:
    if key in _LIST_FIELDS:
        return [item.strip() for item in raw.split(",") if item.strip()]
    return raw


def read_config_file(path) -> dict[str, str]:
    """Parse a flat key=value file; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line.strip()!r}")
            key, _, value = text.partition("=")
            out[key.strip()] = value.strip()
    return out


def _format_pydantic_error(exc: PydanticValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "config"
        if err["type"] == "extra_forbidden":
            parts.append(f"unknown key {loc!r}")
        else:
            parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(path=None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Build a RunConfig from an optional file plus overriding key/value pairs."""
    data: dict[str, Any] = {}
    if path is not None:
        data.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    payload = {k: _coerce(k, v) if isinstance(v, str) else v for k, v in data.items()}
    try:
        return RunConfig(**payload)
    except PydanticValidationError as exc:
        raise ConfigError(_format_pydantic_error(exc)) from exc
