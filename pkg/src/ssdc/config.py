"""Run configuration: INI-style ``key = value`` files with sections.

    [run]
    case = tgv            ; vortex | mms | tgv | chit | freestream
    scheme = es-c         ; es-c | sf-kg | dc
    p = 3
    elements = 3          ; one value or three (K1, K2, K3)
    viscous = auto        ; auto | true | false
    dissipation = true
    c_diss = 1.0
    c_ip = auto
    atol = 1e-8
    rtol = 1e-8
    t_final = auto
    max_steps = 1000000
    seed = 0
    output = out/run
    dump_every = 0        ; accepted steps between field dumps (0: final only)
    log_every = 1
    max_wall = 0          ; seconds of integration before giving up (0: no limit)

    [sweep]
    grids = 1: 2 4 8; 3: 1 2 4     ; p: K list
    expect_order = true

    [robustness]
    schemes = es-c, sf-kg, dc
    p_list = 2, 3
    elements = 3, 6
    budget = 3600                   ; seconds, 0 = unlimited
    seeds = 0                       ; chit only

Any case parameter can be overridden in a ``[case]`` section using the
field names of the case dataclasses (e.g. ``mach = 0.1``).
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .fluxes import SCHEMES
from .sbp import ConfigurationError

CASE_NAMES = ("vortex", "mms", "tgv", "chit", "freestream")
_PERIODIC = {"tgv", "chit", "freestream"}
_INVISCID_ONLY = {"vortex", "freestream"}


@dataclass(frozen=True)
class RunConfig:
    case: str = "tgv"
    scheme: str = "es-c"
    p: int = 3
    elements: tuple = (3, 3, 3)
    viscous: bool | None = None          # None: case default
    dissipation: bool = True
    c_diss: float = 1.0
    c_ip: float | None = None
    atol: float = 1e-8
    rtol: float = 1e-8
    t_final: float | None = None         # None: case default
    max_steps: int = 1_000_000
    seed: int = 0
    output: str = "out/run"
    dump_every: int = 0
    log_every: int = 1
    max_wall: float = 0.0
    case_params: tuple = ()              # ((name, value), ...) overrides

    def __post_init__(self):
        if self.case not in CASE_NAMES:
            raise ConfigurationError(f"unknown case {self.case!r}; choose from {CASE_NAMES}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not 1 <= self.p <= 15:
            raise ConfigurationError(f"polynomial degree {self.p} outside 1..15")
        if len(self.elements) != 3 or min(self.elements) < 1:
            raise ConfigurationError(f"bad element counts {self.elements}")
        if self.case in _INVISCID_ONLY and self.viscous:
            raise ConfigurationError(f"case {self.case} is inviscid; viscous must be off")
        if self.atol <= 0 or self.rtol < 0:
            raise ConfigurationError("tolerances must be positive")
        if self.t_final is not None and self.t_final <= 0:
            raise ConfigurationError("t_final must be positive")
        if self.dump_every < 0 or self.log_every < 1 or self.max_steps < 1:
            raise ConfigurationError("dump_every >= 0, log_every >= 1, max_steps >= 1")
        if self.max_wall < 0:
            raise ConfigurationError("max_wall must be non-negative")

    @property
    def use_viscous(self):
        if self.viscous is None:
            return self.case not in _INVISCID_ONLY
        return self.viscous

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["elements"] = list(self.elements)
        d["case_params"] = dict(self.case_params)
        return d


@dataclass(frozen=True)
class SweepSpec:
    base: RunConfig
    grids: tuple                     # ((p, K), ...)
    expect_order: bool = True

    def __post_init__(self):
        by_p = {}
        for p, K in self.grids:
            by_p.setdefault(p, []).append(K)
        if not by_p:
            raise ConfigurationError("sweep has no grids")
        for p, Ks in by_p.items():
            if len(set(Ks)) < 2:
                raise ConfigurationError(f"sweep needs at least two grids for p={p}")

    @property
    def degrees(self):
        return sorted({p for p, _ in self.grids})


@dataclass(frozen=True)
class RobustnessSpec:
    base: RunConfig
    schemes: tuple = SCHEMES
    p_list: tuple = (2, 3)
    elements: tuple = (3, 6)
    budget: float = 0.0
    seeds: tuple = (0,)

    def __post_init__(self):
        if self.base.case not in ("tgv", "chit"):
            raise ConfigurationError("robustness matrices are defined for tgv and chit")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigurationError(f"unknown scheme {s!r}")


# ---------------------------------------------------------------------------
# parsing


def _bool(v):
    v = v.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {v!r}")


def _auto(v, conv):
    return None if v.strip().lower() in ("auto", "none", "") else conv(v)


def _ints(v):
    return tuple(int(t) for t in v.replace(",", " ").split())


def _elements(v):
    k = _ints(v)
    if len(k) == 1:
        return k * 3
    if len(k) != 3:
        raise ConfigurationError(f"elements needs 1 or 3 values, got {v!r}")
    return k


def _number(v):
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v.strip()


_RUN_KEYS = {
    "case": str.strip, "scheme": lambda v: v.strip().lower(), "p": int,
    "elements": _elements, "viscous": lambda v: _auto(v, _bool),
    "dissipation": _bool, "c_diss": float, "c_ip": lambda v: _auto(v, float),
    "atol": float, "rtol": float, "t_final": lambda v: _auto(v, float),
    "max_steps": int, "seed": int, "output": str.strip, "dump_every": int,
    "log_every": int, "max_wall": float,
}


def _parser(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as err:
        raise ConfigurationError(f"cannot read config {path}: {err}") from err
    return cp


def run_config_from_parser(cp) -> RunConfig:
    if not cp.has_section("run"):
        raise ConfigurationError("config needs a [run] section")
    kw = {}
    for key, val in cp.items("run"):
        if key not in _RUN_KEYS:
            raise ConfigurationError(f"unknown [run] key {key!r}")
        try:
            kw[key] = _RUN_KEYS[key](val)
        except ValueError as err:
            raise ConfigurationError(f"bad value for {key}: {val!r}") from err
    if cp.has_section("case"):
        kw["case_params"] = tuple((k, _number(v)) for k, v in cp.items("case"))
    return RunConfig(**kw)


def load_run(path) -> RunConfig:
    return run_config_from_parser(_parser(path))


def load_sweep(path) -> SweepSpec:
    cp = _parser(path)
    base = run_config_from_parser(cp)
    if not cp.has_section("sweep"):
        raise ConfigurationError("sweep config needs a [sweep] section")
    sec = cp["sweep"]
    grids = []
    for chunk in sec.get("grids", "").split(";"):
        if not chunk.strip():
            continue
        if ":" not in chunk:
            raise ConfigurationError(f"grid entry must read 'p: K K ...', got {chunk!r}")
        p, Ks = chunk.split(":", 1)
        grids += [(int(p), K) for K in _ints(Ks)]
    return SweepSpec(base, tuple(grids), _bool(sec.get("expect_order", "true")))


def load_robustness(path) -> RobustnessSpec:
    cp = _parser(path)
    base = run_config_from_parser(cp)
    sec = cp["robustness"] if cp.has_section("robustness") else {}
    schemes = tuple(s.strip().lower() for s in sec.get("schemes", ",".join(SCHEMES)).split(",")
                    if s.strip())
    return RobustnessSpec(base, schemes, _ints(sec.get("p_list", "2, 3")),
                          _ints(sec.get("elements", "3, 6")),
                          float(sec.get("budget", "0")), _ints(sec.get("seeds", "0")))


def output_dir(cfg: RunConfig) -> Path:
    return Path(cfg.output)
