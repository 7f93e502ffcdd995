"""Run configuration: a JSON file with one section per subsystem.

Every invariant of the referenced modules is validated at load time, before
any computation starts; an invalid file raises ConfigError.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .dispersion import default_sweep_radius
from .errors import ConfigError, RtmhdError
from .profiles import (
    DensityProfile,
    Grid1D,
    MagneticConfig,
    Orientation,
    PhysicalParams,
    ProfileSpec,
    build_profile,
)

__all__ = ["RunConfig", "load_config"]


@dataclass
class RunConfig:
    profile_spec: ProfileSpec
    params: PhysicalParams
    mag: MagneticConfig
    grid: Grid1D
    sweep_radius: float | None
    verify_dt: float | None
    verify_T: float | None
    seeds: tuple[int, ...]
    output_dir: str
    profile: DensityProfile = field(init=False)

    def __post_init__(self):
        try:
            self.profile = build_profile(self.profile_spec, self.grid)
        except (RtmhdError, ValueError) as exc:
            raise ConfigError(f"profile rejected: {exc}") from exc
        lo, hi = self.profile.support
        half = 0.5 * self.grid.half_length
        if not (-half < lo and hi < half):
            raise ConfigError(
                f"bump support [{lo:g}, {hi:g}] must sit strictly inside "
                f"[-Lz/2, Lz/2] = [{-half:g}, {half:g}]"
            )
        if self.sweep_radius is not None and self.sweep_radius <= 0:
            raise ConfigError("sweep radius must be positive")
        if self.verify_dt is not None and self.verify_dt <= 0:
            raise ConfigError("verify dt must be positive")
        if self.verify_T is not None and self.verify_T <= 0:
            raise ConfigError("verify T must be positive")
        if not self.seeds:
            raise ConfigError("at least one seed is required")

    @property
    def radius(self) -> float:
        if self.sweep_radius is not None:
            return self.sweep_radius
        return default_sweep_radius(self.profile)

    def to_dict(self) -> dict:
        return {
            "profile": self.profile_spec.to_dict(),
            "params": {"mu": self.params.mu, "g": self.params.g, "L": self.params.L},
            "mag": {
                "orientation": self.mag.orientation.value,
                "magnitude": self.mag.magnitude,
            },
            "grid": {"half_length": self.grid.half_length, "n": self.grid.n},
            "sweep": {"radius": self.sweep_radius},
            "verify": {"dt": self.verify_dt, "T": self.verify_T, "seeds": list(self.seeds)},
            "output_dir": self.output_dir,
        }


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing key '{key}' in {where}")
    return d[key]


def config_from_dict(raw: dict) -> RunConfig:
    try:
        spec = ProfileSpec.from_dict(_require(raw, "profile", "config"))
        p = _require(raw, "params", "config")
        params = PhysicalParams(float(p["mu"]), float(p["g"]), float(p["L"]))
        m = _require(raw, "mag", "config")
        mag = MagneticConfig(Orientation(m["orientation"]), float(m["magnitude"]))
        g = _require(raw, "grid", "config")
        grid = Grid1D(float(g["half_length"]), int(g["n"]))
        sweep = raw.get("sweep", {})
        radius = sweep.get("radius")
        radius = float(radius) if radius is not None else None
        verify = raw.get("verify", {})
        dt = verify.get("dt")
        T = verify.get("T")
        seeds = tuple(int(s) for s in verify.get("seeds", [0, 1, 2, 3, 4]))
        output_dir = raw.get("output_dir", "out")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return RunConfig(
        profile_spec=spec,
        params=params,
        mag=mag,
        grid=grid,
        sweep_radius=radius,
        verify_dt=float(dt) if dt is not None else None,
        verify_T=float(T) if T is not None else None,
        seeds=seeds,
        output_dir=output_dir,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as f:
            raw = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)
