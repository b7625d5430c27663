"""Run configuration: a flat key = value file with sections.

The format is deliberately minimal so runs diff cleanly:

    [physical]
    R = 1.0
    gamma = 1.0
    alpha = 1.0
    ubar = 0.5
    T = 0.24

    [mobility]
    H0 = 1.0
    H1 = 0.0
    H2 = 0.0
    # profile = poly 1.0 0.5          (coefficients in powers of s)
    # profile = table 0:1 0.5:1.2 1:1 (piecewise-linear samples)

    [domain]
    L1 = 3.141592653589793
    L2 = 2.0
    L3 = 1.0

Unknown keys and sections are rejected with the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import (
    DomainCase,
    DomainSpec,
    MobilityProfile,
    MobilitySpec,
    PhysicalParams,
)
from .spectral import Mode

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_kv_file"]


class ConfigError(ValueError):
    """Invalid configuration; message carries file and line when known."""

    def __init__(self, message: str, path=None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f"{path}:"
            if line is not None:
                loc += f"{line}:"
            loc += " "
        super().__init__(loc + message)


def parse_kv_file(path) -> dict[str, dict[str, tuple[str, int]]]:
    """Parse ``[section]`` / ``key = value`` lines, keeping line numbers."""
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].split(";", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip().lower()
                if not current:
                    raise ConfigError("empty section name", path, lineno)
                sections.setdefault(current, {})
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value', got {line!r}", path, lineno)
            if current is None:
                raise ConfigError("key outside any [section]", path, lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError("empty key", path, lineno)
            if key in sections[current]:
                raise ConfigError(f"duplicate key {key!r}", path, lineno)
            sections[current][key] = (value, lineno)
    return sections


class _Section:
    def __init__(self, path, name: str, raw: dict[str, tuple[str, int]]):
        self.path = path
        self.name = name
        self.raw = dict(raw)
        self.seen: set[str] = set()

    def _take(self, key: str):
        self.seen.add(key)
        return self.raw.get(key)

    def require(self, key: str, conv):
        item = self._take(key)
        if item is None:
            raise ConfigError(f"missing key {key!r} in section [{self.name}]", self.path)
        return self._convert(key, item, conv)

    def optional(self, key: str, conv, default):
        item = self._take(key)
        if item is None:
            return default
        return self._convert(key, item, conv)

    def _convert(self, key: str, item: tuple[str, int], conv):
        value, lineno = item
        try:
            return conv(value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", self.path, lineno)

    def reject_unknown(self) -> None:
        for key, (_, lineno) in self.raw.items():
            if key not in self.seen:
                raise ConfigError(
                    f"unknown key {key!r} in section [{self.name}]", self.path, lineno
                )


def _as_float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _as_int(s: str) -> int:
    return int(s)


def _as_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _as_floats(s: str) -> tuple[float, ...]:
    parts = s.replace(",", " ").split()
    if not parts:
        raise ValueError("expected at least one number")
    return tuple(_as_float(p) for p in parts)


def _as_grid(s: str) -> tuple[int, int, int]:
    parts = s.replace(",", " ").split()
    if len(parts) == 1:
        n = _as_int(parts[0])
        return (n, n, n)
    if len(parts) == 3:
        return tuple(_as_int(p) for p in parts)  # type: ignore[return-value]
    raise ValueError("expected one or three grid sizes")


def _as_choice(*choices: str):
    def conv(s: str) -> str:
        v = s.strip().lower()
        if v not in choices:
            raise ValueError(f"expected one of {choices}, got {s!r}")
        return v

    return conv


def _as_profile(s: str) -> MobilityProfile:
    parts = s.split()
    if not parts:
        raise ValueError("empty profile")
    kind = parts[0].lower()
    if kind in ("poly", "polynomial"):
        coeffs = tuple(_as_float(p) for p in parts[1:])
        if not coeffs:
            raise ValueError("polynomial profile needs coefficients")
        return MobilityProfile(kind="polynomial", data=coeffs)
    if kind == "table":
        ss, hs = [], []
        for item in parts[1:]:
            if ":" not in item:
                raise ValueError(f"table entries are s:H pairs, got {item!r}")
            a, b = item.split(":", 1)
            ss.append(_as_float(a))
            hs.append(_as_float(b))
        return MobilityProfile(kind="table", data=(tuple(ss), tuple(hs)))
    raise ValueError(f"profile must start with 'poly' or 'table', got {parts[0]!r}")


def _as_modes(s: str) -> dict[Mode, float]:
    # "1 0 0 : 0.05, 0 1 0 : 0.02"
    out: dict[Mode, float] = {}
    for chunk in s.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ValueError(f"mode entries are 'k1 k2 k3 : amplitude', got {chunk!r}")
        idx, amp = chunk.rsplit(":", 1)
        k = tuple(int(v) for v in idx.split())
        if len(k) != 3:
            raise ValueError(f"mode index needs three integers, got {idx!r}")
        out[k] = _as_float(amp)
    if not out:
        raise ValueError("expected at least one mode")
    return out


@dataclass(frozen=True)
class SimulateSettings:
    grid: tuple[int, int, int] = (32, 32, 32)
    dt: float = 0.05
    t_end: float = 200.0
    record_every: int = 10
    scheme: str = "imex1"
    rhs: str = "taylor"
    stabilization: float = 0.0
    dealias: bool = True
    seed_amplitude: float = 1e-3
    band_limit: int = 4
    seed_modes: dict[Mode, float] | None = None
    save_final_field: bool = False


@dataclass(frozen=True)
class ReduceSettings:
    y0: tuple[float, ...] = (0.01,)
    dt: float = 0.01
    steps: int = 20000
    record_every: int = 10
    sigma_at: str = "ambient"


@dataclass(frozen=True)
class SweepSettings:
    epsilons: tuple[float, ...] = (0.01, 0.02, 0.04, 0.06, 0.08)
    workers: int = 2


@dataclass(frozen=True)
class ValidateSettings:
    y0: tuple[float, ...] = (0.02,)
    relaxation_times: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    physical: PhysicalParams
    domain: DomainSpec
    T: float
    simulate: SimulateSettings = field(default_factory=SimulateSettings)
    reduce: ReduceSettings = field(default_factory=ReduceSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    validate: ValidateSettings = field(default_factory=ValidateSettings)
    seed: int = 0


_KNOWN_SECTIONS = {
    "physical", "mobility", "domain", "simulate", "reduce", "sweep", "validate", "run",
}


def load_config(path) -> RunConfig:
    raw = parse_kv_file(path)
    for name in raw:
        if name not in _KNOWN_SECTIONS:
            raise ConfigError(f"unknown section [{name}]", path)

    def section(name: str) -> _Section:
        return _Section(path, name, raw.get(name, {}))

    phys = section("physical")
    r = phys.require("R", _as_float)
    gamma = phys.require("gamma", _as_float)
    alpha = phys.require("alpha", _as_float)
    ubar = phys.require("ubar", _as_float)
    temp = phys.require("T", _as_float)
    phys.reject_unknown()

    mob = section("mobility")
    h0 = mob.optional("H0", _as_float, 1.0)
    h1 = mob.optional("H1", _as_float, 0.0)
    h2 = mob.optional("H2", _as_float, 0.0)
    profile = mob.optional("profile", _as_profile, None)
    mob.reject_unknown()

    dom = section("domain")
    l1 = dom.require("L1", _as_float)
    l2 = dom.require("L2", _as_float)
    l3 = dom.require("L3", _as_float)
    case = dom.optional(
        "case", _as_choice("distinct", "two_equal", "all_equal"), None
    )
    tie_tol = dom.optional("tie_tolerance", _as_float, 1e-12)
    dom.reject_unknown()

    try:
        mobility = MobilitySpec(h0=h0, h1=h1, h2=h2, profile=profile)
        physical = PhysicalParams(R=r, gamma=gamma, alpha=alpha, ubar=ubar, mobility=mobility)
        domain = DomainSpec(
            lengths=(l1, l2, l3),
            case=DomainCase(case) if case else None,
            tie_tolerance=tie_tol,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), path)

    sim = section("simulate")
    simulate = SimulateSettings(
        grid=sim.optional("grid", _as_grid, (32, 32, 32)),
        dt=sim.optional("dt", _as_float, 0.05),
        t_end=sim.optional("t_end", _as_float, 200.0),
        record_every=sim.optional("record_every", _as_int, 10),
        scheme=sim.optional("scheme", _as_choice("imex1", "imex2"), "imex1"),
        rhs=sim.optional("rhs", _as_choice("taylor", "divergence"), "taylor"),
        stabilization=sim.optional("stabilization", _as_float, 0.0),
        dealias=sim.optional("dealias", _as_bool, True),
        seed_amplitude=sim.optional("seed_amplitude", _as_float, 1e-3),
        band_limit=sim.optional("band_limit", _as_int, 4),
        seed_modes=sim.optional("seed_modes", _as_modes, None),
        save_final_field=sim.optional("save_final_field", _as_bool, False),
    )
    sim.reject_unknown()

    red = section("reduce")
    reduce_ = ReduceSettings(
        y0=red.optional("y0", _as_floats, (0.01,)),
        dt=red.optional("dt", _as_float, 0.01),
        steps=red.optional("steps", _as_int, 20000),
        record_every=red.optional("record_every", _as_int, 10),
        sigma_at=red.optional("sigma_at", _as_choice("ambient", "critical"), "ambient"),
    )
    red.reject_unknown()

    sw = section("sweep")
    sweep = SweepSettings(
        epsilons=sw.optional("epsilons", _as_floats, (0.01, 0.02, 0.04, 0.06, 0.08)),
        workers=sw.optional("workers", _as_int, 2),
    )
    sw.reject_unknown()

    val = section("validate")
    validate = ValidateSettings(
        y0=val.optional("y0", _as_floats, (0.02,)),
        relaxation_times=val.optional("relaxation_times", _as_float, 1.0),
    )
    val.reject_unknown()

    run = section("run")
    seed = run.optional("seed", _as_int, 0)
    run.reject_unknown()

    return RunConfig(
        physical=physical,
        domain=domain,
        T=temp,
        simulate=simulate,
        reduce=reduce_,
        sweep=sweep,
        validate=validate,
        seed=seed,
    )
