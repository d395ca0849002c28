"""Flat ``key = value`` run configuration.

Blank lines and lines starting with ``#`` are ignored.  Every key must be one
of :data:`KEYS`; values are parsed by the matching converter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..grid import DomainSpec
from ..pde_operator import OperatorSpec
from ..psi import PsiModel, parse_psi
from ..solver import DEFAULT_EPS_SCHEDULE, SolverConfig

COMMANDS = ("solve", "verify-props", "barrier-check", "manufactured", "monitor")
U64 = 2**64


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _floats(v: str) -> tuple:
    return tuple(float(x) for x in v.split(",") if x.strip())


def _seed(v: str) -> int:
    s = int(v, 0)
    if not 0 <= s < U64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return s


KEYS = {
    "command": str,
    "shape": str,
    "size": float,
    "n": int,
    "k": int,
    "l": int,
    "m": int,
    "refine": lambda v: tuple(int(x) for x in v.split(",") if x.strip()),
    "psi": str,
    "exact": str,
    "newton_tol": float,
    "max_iters": int,
    "damping": float,
    "max_halvings": int,
    "eps_schedule": _floats,
    "cone_margin_floor": float,
    "uniqueness_probe": _bool,
    "seed": _seed,
    "sample_count": int,
    "threads": int,
    "output_dir": str,
    # barrier constants; unset ones are searched
    "theta": float,
    "K": float,
    "eta0": float,
    "delta": float,
    "t": float,
    "N": float,
    "b": float,
    "R": float,
    "collar_nodes": int,
}

BARRIER_KEYS = ("theta", "K", "eta0", "delta", "t", "N", "b", "R")


@dataclass
class RunConfig:
    command: str = "solve"
    shape: str = "disc"
    size: float = 1.0
    n: int = 2
    k: int = 1
    l: int = 0
    m: int = 33
    refine: tuple = ()
    psi: str = "constant:1.0"
    exact: str | None = None
    newton_tol: float = 1e-8
    max_iters: int = 50
    damping: float = 0.5
    max_halvings: int = 30
    eps_schedule: tuple = DEFAULT_EPS_SCHEDULE
    cone_margin_floor: float = 1e-12
    uniqueness_probe: bool = False
    seed: int = 42
    sample_count: int = 10_000
    threads: int = 1
    output_dir: str = "out"
    barrier: dict = field(default_factory=dict)
    collar_nodes: int = 21

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.sample_count < 1 or self.threads < 1:
            raise ConfigError("sample_count and threads must be >= 1")
        if self.command != "verify-props":
            self.domain()
            self.operator()
            self.solver_config()
        elif not 0 <= self.l < self.k <= self.n:
            raise ConfigError(f"need 0 <= l < k <= n, got n={self.n} k={self.k} l={self.l}")
        return self

    def domain(self) -> DomainSpec:
        return DomainSpec(self.shape, self.size, self.n)

    def operator(self) -> OperatorSpec:
        try:
            return OperatorSpec(self.n, self.k, self.l)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def psi_model(self) -> PsiModel:
        try:
            return parse_psi(self.psi, self.k - self.l)
        except ValueError as exc:
            raise ConfigError(f"bad psi {self.psi!r}: {exc}") from exc

    def solver_config(self) -> SolverConfig:
        return SolverConfig(self.newton_tol, self.max_iters, self.damping, self.max_halvings,
                            self.eps_schedule, self.cone_margin_floor, self.uniqueness_probe)


def parse_config_text(text: str, cfg: RunConfig | None = None) -> RunConfig:
    cfg = cfg or RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        set_key(cfg, key, value, where=f"line {lineno}")
    return cfg


def set_key(cfg: RunConfig, key: str, value: str, where: str = "") -> None:
    if key not in KEYS:
        raise ConfigError(
            f"{where + ': ' if where else ''}unknown key {key!r}; documented keys: {', '.join(sorted(KEYS))}")
    try:
        parsed = KEYS[key](value)
    except ValueError as exc:
        raise ConfigError(f"{where + ': ' if where else ''}bad value for {key!r}: {exc}") from exc
    if key in BARRIER_KEYS:
        cfg.barrier[key] = parsed
    else:
        setattr(cfg, key, parsed)


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(encoding="utf-8"))
