"""
JSON run configuration for the command-line tool.

Example
-------
{
  "dispersion": {"family": "lattice", "hopping": 1.0},
  "state": {"kind": "constant", "n": 0.333333333333333333},
  "quench": {"kind": "gamma", "gamma": 0.8},
  "alphas": [2],
  "grids": {"x": [10.0], "t": [5.0], "xi": [], "lambda": []},
  "oracle": {"L": 512, "ell": 64},
  "quadrature": {"rtol": 1e-12},
  "lightcone": {"theta0": [0.1, 0.3], "zeta": [0.2, 0.6], "eps": 0.2,
                "ells": [50, 100, 200, 400, 800, 1600]},
  "seed": 0
}

Relative file paths are resolved against the directory of the config.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .dispersion import Dispersion
from .state import GGEState, QuenchSpec


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


@dataclass(frozen=True)
class Grids:
    x: tuple[float, ...] = ()
    t: tuple[float, ...] = ()
    xi: tuple[float, ...] = ()
    lam: tuple[float, ...] = ()


@dataclass(frozen=True)
class OracleSettings:
    L: int = 512
    ell: int = 64


@dataclass(frozen=True)
class QuadratureSettings:
    rtol: float = 1e-12


@dataclass(frozen=True)
class LightConeSettings:
    theta0: tuple[float, ...] = ()
    zeta: tuple[float, ...] = ()
    eps: float = 0.2
    ells: tuple[float, ...] = tuple(float(v) for v in np.geomspace(50, 800, 8))


@dataclass(frozen=True)
class RunConfig:
    dispersion: dict
    state: Optional[dict] = None
    quench: Optional[dict] = None
    alphas: tuple[float, ...] = (2,)
    grids: Grids = field(default_factory=Grids)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    lightcone: LightConeSettings = field(default_factory=LightConeSettings)
    seed: int = 0
    base_dir: Path = Path(".")
    digest: str = ""

    def __post_init__(self):
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ConfigError("alphas must be a nonempty list of positive numbers")

    def build_dispersion(self) -> Dispersion:
        spec = dict(self.dispersion)
        family = spec.pop("family", None)
        try:
            if family == "lattice":
                return Dispersion.lattice_cosine(float(spec.get("hopping", 1.0)))
            if family == "continuum":
                return Dispersion.continuum_quadratic(float(spec.get("mass", 1.0)))
            if family == "tabulated":
                return Dispersion.from_csv(self._file(spec), periodic=bool(spec.get("periodic", False)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"dispersion: {exc}") from exc
        raise ConfigError(f"unknown dispersion family {family!r}")

    def build_state(self, allow_branch_risk: bool = False) -> GGEState:
        if self.state is None:
            raise ConfigError("config has no 'state' section")
        disp = self.build_dispersion()
        spec = dict(self.state)
        kind = spec.get("kind")
        cutoff = spec.get("cutoff")
        try:
            if kind == "constant":
                if "n" in spec:
                    n = float(spec["n"])
                    state = GGEState.from_occupation(disp, lambda t: np.full(np.shape(t), n),
                                                     f"constant(n={n:g})", cutoff)
                else:
                    state = GGEState.constant(disp, float(spec["w"]), cutoff)
            elif kind == "thermal":
                state = GGEState.thermal(disp, float(spec["beta"]), float(spec.get("mu", 0.0)), cutoff)
            elif kind == "table":
                data = np.loadtxt(self._file(spec), delimiter=",", comments="#")
                state = GGEState.from_table(disp, data[:, 0], data[:, 1])
            elif kind == "quench":
                from .state import gge_from_quench
                return gge_from_quench(self.build_quench(), allow_branch_risk)
            else:
                raise ConfigError(f"unknown state kind {kind!r}")
        except KeyError as exc:
            raise ConfigError(f"state: missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"state: {exc}") from exc
        return state.validate(allow_branch_risk)

    def build_quench(self) -> QuenchSpec:
        if self.quench is None:
            raise ConfigError("config has no 'quench' section")
        disp = self.build_dispersion()
        kind = self.quench.get("kind")
        if kind == "gamma":
            if not disp.compact:
                raise ConfigError("the gamma quench needs a lattice dispersion")
            return QuenchSpec.gamma_quench(float(self.quench["gamma"]), disp.params["J"])
        if kind == "gaussian":
            if disp.compact:
                raise ConfigError("the gaussian quench needs a continuum dispersion")
            return QuenchSpec.gaussian_quench(float(self.quench["gamma"]), disp.params["m"])
        if kind == "trivial":
            one = lambda t: np.ones(np.shape(t), dtype=complex)
            zero = lambda t: np.zeros(np.shape(t), dtype=complex)
            return QuenchSpec(disp, one, zero, "trivial", None if disp.compact else 1.0)
        if kind == "table":
            data = np.loadtxt(self._file(self.quench), delimiter=",", comments="#", ndmin=2)
            if data.shape[1] != 5:
                raise ConfigError("quench table needs columns theta, Re f, Im f, Re g, Im g")
            return QuenchSpec.from_table(disp, data[:, 0], data[:, 1] + 1j * data[:, 2],
                                         data[:, 3] + 1j * data[:, 4])
        raise ConfigError(f"unknown quench kind {kind!r}")

    def _file(self, spec: dict) -> Path:
        if "file" not in spec:
            raise ConfigError("tabulated input needs a 'file' entry")
        path = Path(spec["file"])
        if not path.is_absolute():
            path = self.base_dir / path
        if not path.exists():
            raise ConfigError(f"file not found: {path}")
        return path


def _floats(values: Any, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in (values or ()))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid {name!r} must be a list of numbers") from exc


def config_from_dict(data: dict, base_dir: Path = Path("."), digest: str = "") -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "dispersion" not in data or not isinstance(data["dispersion"], dict):
        raise ConfigError("config needs a 'dispersion' object")
    grids = data.get("grids", {})
    oracle = data.get("oracle", {})
    quad = data.get("quadrature", {})
    cone = data.get("lightcone", {})
    try:
        return RunConfig(
            dispersion=data["dispersion"],
            state=data.get("state"),
            quench=data.get("quench"),
            alphas=tuple(float(a) for a in data.get("alphas", [2])),
            grids=Grids(_floats(grids.get("x"), "x"), _floats(grids.get("t"), "t"),
                        _floats(grids.get("xi"), "xi"), _floats(grids.get("lambda"), "lambda")),
            oracle=OracleSettings(int(oracle.get("L", 512)), int(oracle.get("ell", 64))),
            quadrature=QuadratureSettings(float(quad.get("rtol", 1e-12))),
            lightcone=LightConeSettings(
                _floats(cone.get("theta0"), "theta0"), _floats(cone.get("zeta"), "zeta"),
                float(cone.get("eps", 0.2)),
                _floats(cone.get("ells"), "ells") or LightConeSettings.ells),
            seed=int(data.get("seed", 0)),
            base_dir=base_dir,
            digest=digest,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = path.read_bytes()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, path.parent, hashlib.sha256(raw).hexdigest()[:16])
