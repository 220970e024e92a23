"""Run configuration: nested YAML mirroring the command-line flags.

Precedence is command-line flag, then config file, then built-in default.
Unknown keys anywhere in the file are rejected.

Example::

    task: denoise
    regularizer: {kind: hsstv, omega: 0.04, p: 1}
    noise: {sigma: 0.05, s_p: 0.04, l_v: 0.04, l_h: 0.04}
    constraints: {epsilon: null, eta: null, box: [0.0, 1.0]}
    solver: {gamma: 0.05, max_iter: 10000, stop_tol: 0.01, path: fft}
    cs: {rate: 0.4, sigma: 0.1}
    seed: 0
    paths: {trace: trace.csv, report: report.json}
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .admm import SolverConfig
from .problems import CS_ASSTV_TAU, CS_OMEGA, DENOISE_OMEGA, MixedNoiseParams
from .prox import BoxSpec
from .regularizers import RegKind, RegularizerSpec


class ConfigError(ValueError):
    pass


@dataclass
class RegularizerSection:
    kind: str = "hsstv"
    omega: Optional[float] = None
    p: int = 1
    tau: Optional[list] = None


@dataclass
class NoiseSection:
    sigma: float = 0.05
    s_p: float = 0.04
    l_v: float = 0.04
    l_h: float = 0.04


@dataclass
class ConstraintSection:
    epsilon: Optional[float] = None
    eta: Optional[float] = None
    box: list = field(default_factory=lambda: [0.0, 1.0])


@dataclass
class SolverSection:
    gamma: float = 0.05
    max_iter: int = 10000
    stop_tol: float = 0.01
    path: str = "fft"
    cg_tol: float = 1e-8
    cg_max_iter: int = 1000


@dataclass
class CsSection:
    rate: float = 0.4
    sigma: float = 0.1


@dataclass
class PathSection:
    input: Optional[str] = None
    output: Optional[str] = None
    mask: Optional[str] = None
    truth: Optional[str] = None
    report: Optional[str] = None
    trace: Optional[str] = None


@dataclass
class RunConfig:
    task: str = "denoise"
    regularizer: RegularizerSection = field(default_factory=RegularizerSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    constraints: ConstraintSection = field(default_factory=ConstraintSection)
    solver: SolverSection = field(default_factory=SolverSection)
    cs: CsSection = field(default_factory=CsSection)
    seed: int = 0
    paths: PathSection = field(default_factory=PathSection)

    def regularizer_spec(self) -> RegularizerSpec:
        r = self.regularizer
        cs = self.task == "cs"
        omega = r.omega if r.omega is not None else (CS_OMEGA if cs else DENOISE_OMEGA)
        if r.tau is not None:
            tau = tuple(r.tau)
        elif cs:
            tau = CS_ASSTV_TAU
        else:
            tau = (1.0, 1.0, 3.0)
        return RegularizerSpec(RegKind(r.kind), omega, r.p, tau)

    def noise_params(self) -> MixedNoiseParams:
        n = self.noise
        return MixedNoiseParams(n.sigma, n.s_p, n.l_v, n.l_h)

    def box(self) -> BoxSpec:
        lo, hi = self.constraints.box
        return BoxSpec(float(lo), float(hi))

    def solver_config(self) -> SolverConfig:
        s = self.solver
        return SolverConfig(s.gamma, s.max_iter, s.stop_tol, s.cg_tol, s.cg_max_iter)

    def validate(self) -> "RunConfig":
        if self.task not in ("denoise", "cs"):
            raise ConfigError(f"task must be 'denoise' or 'cs', got {self.task!r}")
        if self.solver.path not in ("fft", "cg"):
            raise ConfigError(f"solver.path must be 'fft' or 'cg', got {self.solver.path!r}")
        if len(self.constraints.box) != 2:
            raise ConfigError("constraints.box must be [lo, hi]")
        if self.regularizer.tau is not None and len(self.regularizer.tau) != 3:
            raise ConfigError("regularizer.tau needs three weights")
        if not 0 < self.cs.rate < 1:
            raise ConfigError(f"cs.rate must lie in (0, 1), got {self.cs.rate}")
        try:
            self.regularizer_spec()
            self.noise_params()
            self.box()
            self.solver_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        f = known[name]
        sub = f.default_factory if f.default_factory is not dataclasses.MISSING else None
        if sub is not None and dataclasses.is_dataclass(sub):
            kwargs[name] = _build(sub, value, f"{where}.{name}" if where else name)
        else:
            kwargs[name] = value
    return cls(**kwargs)


def from_mapping(data: dict) -> RunConfig:
    return _build(RunConfig, data or {}, "").validate()


def load_config(path) -> RunConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return from_mapping(data or {})


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Apply dotted-key overrides (``"solver.gamma": 0.1``) whose value is not None."""
    for key, value in overrides.items():
        if value is None:
            continue
        target = cfg
        *parents, leaf = key.split(".")
        for p in parents:
            target = getattr(target, p)
        if not hasattr(target, leaf):
            raise ConfigError(f"unknown config key {key!r}")
        setattr(target, leaf, value)
    return cfg.validate()
