"""JSON run configuration with exact rational time steps and field-path error messages."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .git_fom import STOPPING_KINDS, StoppingRule
from .monolithic import BOOTSTRAP_MODES
from .problem import BiotParameters, ConstantCase, ManufacturedCase, WellCase
from .rom import POD_METHODS, build_index_set

ALGORITHMS = ("monolithic", "git-fom", "git-rom")
CASES = ("example1", "example2", "custom")


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path


def parse_rational(value, path: str) -> Fraction:
    """Accept ints, floats or strings like ``"1/64"``; strings are parsed exactly."""
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    try:
        if isinstance(value, str):
            return Fraction(value.strip())
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, float):
            return Fraction(repr(value))
    except (ValueError, ZeroDivisionError):
        pass
    raise ConfigError(path, f"expected a number or a rational string such as '1/64', got {value!r}")


def _get(d: dict, key: str, path: str, kind, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"{path}{key}", "missing required field")
        return default
    v = d[key]
    if kind is int and (isinstance(v, bool) or not isinstance(v, int)):
        raise ConfigError(f"{path}{key}", f"expected an integer, got {v!r}")
    if kind is bool and not isinstance(v, bool):
        raise ConfigError(f"{path}{key}", f"expected true or false, got {v!r}")
    if kind is str and not isinstance(v, str):
        raise ConfigError(f"{path}{key}", f"expected a string, got {v!r}")
    if kind is dict and not isinstance(v, dict):
        raise ConfigError(f"{path}{key}", f"expected an object, got {v!r}")
    if kind is float:
        return float(parse_rational(v, f"{path}{key}"))
    return v


def _check_keys(d: dict, allowed, path: str):
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{path}{k}", f"unknown field (allowed: {', '.join(sorted(allowed))})")


@dataclass
class RomOptions:
    index_set: str = "full"
    nr: int = 16
    validate: bool = False
    enrich_initial: bool = False
    pod_method: str = "qr"
    index_sets: list = field(default_factory=lambda: ["stride:4", "stride:8", "legendre", "full"])


@dataclass
class IterationOptions:
    initial_guess: str = "first"  # first | zero | from-file:<path.npz>
    stopping: str = "increment_tolerance"
    tol: float = 1e-10
    max_iterations: int = 50
    reference: bool = True  # run the monolithic solver for S_i and reference errors

    def stopping_rule(self) -> StoppingRule:
        return StoppingRule(self.stopping, self.tol, self.max_iterations)


@dataclass
class RunConfig:
    case: str = "example1"
    case_params: dict = field(default_factory=dict)
    nx: int = 32
    ny: int = 32
    degree_u: int = 2
    degree_p: int = 2
    dt: list = field(default_factory=lambda: [Fraction(1, 8)])  # Fractions
    T: Fraction = Fraction(1)
    algorithm: str = "monolithic"
    bootstrap: str | None = None
    iteration: IterationOptions = field(default_factory=IterationOptions)
    rom: RomOptions = field(default_factory=RomOptions)
    output: str = "run"
    seed: int = 0
    backend: str | None = None

    @property
    def dt_value(self) -> Fraction:
        return self.dt[0]

    def num_steps(self, dt: Fraction | None = None) -> int:
        dt = self.dt_value if dt is None else dt
        return int(self.T / dt)

    @property
    def bootstrap_mode(self) -> str:
        if self.bootstrap is not None:
            return self.bootstrap
        return "exact" if self.case == "example1" else "bdf1"

    def make_case(self):
        p = dict(self.case_params)
        if self.case == "example1":
            return ManufacturedCase(BiotParameters(**{**dict(lam=1e2, mu=1e2, alpha=1.0, c0=1e-2, k_p=1e-2), **p}))
        if self.case == "example2":
            return WellCase(**p)
        f = p.pop("f", (0.0, 0.0))
        g = p.pop("g", 0.0)
        return ConstantCase(BiotParameters(**p), f=f, g=g)

    def to_json(self) -> dict:
        d = asdict(self)
        d["dt"] = [str(x) for x in self.dt]
        d["T"] = str(self.T)
        d["bootstrap"] = self.bootstrap_mode
        return d


_TOP = {"case", "params", "mesh", "degrees", "dt", "T", "algorithm", "bootstrap", "iteration", "rom", "output", "seed", "backend"}
_CASE_PARAMS = {
    "example1": {"lam", "mu", "alpha", "c0", "k_p"},
    "example2": {"k_high", "k_low", "lam", "mu", "alpha", "c0", "rate", "width"},
    "custom": {"lam", "mu", "alpha", "c0", "k_p", "f", "g"},
}


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("", "configuration must be a JSON object")
    _check_keys(raw, _TOP, "")
    cfg = RunConfig()

    cfg.case = _get(raw, "case", "", str, "example1")
    if cfg.case not in CASES:
        raise ConfigError("case", f"expected one of {CASES}, got {cfg.case!r}")
    params = _get(raw, "params", "", dict, {})
    _check_keys(params, _CASE_PARAMS[cfg.case], "params.")
    parsed = {}
    for k, v in params.items():
        if k == "f":
            if not (isinstance(v, list) and len(v) == 2):
                raise ConfigError("params.f", "expected a list of two numbers")
            parsed[k] = tuple(float(parse_rational(x, f"params.f[{i}]")) for i, x in enumerate(v))
        else:
            parsed[k] = float(parse_rational(v, f"params.{k}"))
    if cfg.case == "custom":
        missing = {"lam", "mu", "alpha", "c0", "k_p"} - set(parsed)
        if missing:
            raise ConfigError(f"params.{sorted(missing)[0]}", "missing required field for the custom case")
    cfg.case_params = parsed

    mesh = _get(raw, "mesh", "", dict, {})
    _check_keys(mesh, {"nx", "ny"}, "mesh.")
    cfg.nx = _get(mesh, "nx", "mesh.", int, 32)
    cfg.ny = _get(mesh, "ny", "mesh.", int, cfg.nx)
    for k in ("nx", "ny"):
        if getattr(cfg, k) < 1:
            raise ConfigError(f"mesh.{k}", "must be a positive integer")

    deg = _get(raw, "degrees", "", dict, {})
    _check_keys(deg, {"u", "p"}, "degrees.")
    cfg.degree_u = _get(deg, "u", "degrees.", int, 2)
    cfg.degree_p = _get(deg, "p", "degrees.", int, cfg.degree_u)
    if cfg.degree_u < 2:
        raise ConfigError("degrees.u", f"displacement degree k must satisfy k >= 2, got {cfg.degree_u}")
    if cfg.degree_p < 1:
        raise ConfigError("degrees.p", f"pressure degree l must satisfy l >= 1, got {cfg.degree_p}")
    if cfg.degree_u > 4 or cfg.degree_p > 4:
        raise ConfigError("degrees", "degrees above 4 are not supported")

    cfg.T = parse_rational(raw.get("T", 1), "T")
    if cfg.T <= 0:
        raise ConfigError("T", "final time must be positive")
    dts = raw.get("dt", "1/8")
    dts = dts if isinstance(dts, list) else [dts]
    if not dts:
        raise ConfigError("dt", "empty list")
    cfg.dt = [parse_rational(v, f"dt[{i}]" if len(dts) > 1 else "dt") for i, v in enumerate(dts)]
    for i, dt in enumerate(cfg.dt):
        where = f"dt[{i}]" if len(dts) > 1 else "dt"
        if dt <= 0:
            raise ConfigError(where, "time step must be positive")
        ratio = cfg.T / dt
        if ratio.denominator != 1:
            raise ConfigError(where, f"T/dt = {ratio} is not an integer")
        if ratio < 2:
            raise ConfigError(where, "need at least two time steps")

    cfg.algorithm = _get(raw, "algorithm", "", str, "monolithic")
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError("algorithm", f"expected one of {ALGORITHMS}, got {cfg.algorithm!r}")
    cfg.bootstrap = _get(raw, "bootstrap", "", str, None)
    if cfg.bootstrap is not None and cfg.bootstrap not in BOOTSTRAP_MODES:
        raise ConfigError("bootstrap", f"expected one of {BOOTSTRAP_MODES}, got {cfg.bootstrap!r}")
    if cfg.bootstrap_mode == "exact" and cfg.case != "example1":
        raise ConfigError("bootstrap", "exact bootstrap needs the manufactured case example1")

    it = _get(raw, "iteration", "", dict, {})
    _check_keys(it, {"initial_guess", "stopping", "tol", "max_iterations", "reference"}, "iteration.")
    io = IterationOptions(
        initial_guess=_get(it, "initial_guess", "iteration.", str, "first"),
        stopping=_get(it, "stopping", "iteration.", str, "increment_tolerance"),
        tol=_get(it, "tol", "iteration.", float, 1e-10),
        max_iterations=_get(it, "max_iterations", "iteration.", int, 50),
        reference=_get(it, "reference", "iteration.", bool, True),
    )
    if io.initial_guess not in ("first", "zero") and not io.initial_guess.startswith("from-file:"):
        raise ConfigError("iteration.initial_guess", "expected 'first', 'zero' or 'from-file:<path>'")
    if io.stopping not in STOPPING_KINDS:
        raise ConfigError("iteration.stopping", f"expected one of {STOPPING_KINDS}")
    try:
        io.stopping_rule()
    except ValueError as exc:
        raise ConfigError("iteration", str(exc)) from None
    cfg.iteration = io

    rom = _get(raw, "rom", "", dict, {})
    _check_keys(rom, {"index_set", "nr", "validate", "enrich_initial", "pod_method", "index_sets"}, "rom.")
    ro = RomOptions(
        index_set=_get(rom, "index_set", "rom.", str, "full"),
        nr=_get(rom, "nr", "rom.", int, 16),
        validate=_get(rom, "validate", "rom.", bool, False),
        enrich_initial=_get(rom, "enrich_initial", "rom.", bool, False),
        pod_method=_get(rom, "pod_method", "rom.", str, "qr"),
        index_sets=rom.get("index_sets", RomOptions().index_sets),
    )
    if ro.nr < 1:
        raise ConfigError("rom.nr", "must be at least 1")
    if ro.pod_method not in POD_METHODS:
        raise ConfigError("rom.pod_method", f"expected one of {POD_METHODS}")
    if not isinstance(ro.index_sets, list) or not all(isinstance(s, str) for s in ro.index_sets):
        raise ConfigError("rom.index_sets", "expected a list of strategy strings")
    # defaults are checked where they are used, so monolithic runs with short horizons stay valid
    given = [(f"rom.{k}", [ro.index_set] if k == "index_set" else ro.index_sets) for k in ("index_set", "index_sets") if k in rom]
    for name, strategies in given:
        for s in strategies:
            for dt in cfg.dt:
                try:
                    build_index_set(s, cfg.num_steps(dt))
                except ValueError as exc:
                    raise ConfigError(name, str(exc)) from None
    cfg.rom = ro

    cfg.output = _get(raw, "output", "", str, "run")
    cfg.seed = _get(raw, "seed", "", int, 0)
    cfg.backend = _get(raw, "backend", "", str, None)
    if cfg.backend not in (None, "numpy", "numba"):
        raise ConfigError("backend", "expected 'numpy' or 'numba'")
    return cfg


def load_raw(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: invalid JSON ({exc})") from None


def load_config(path) -> RunConfig:
    return parse_config(load_raw(path))
