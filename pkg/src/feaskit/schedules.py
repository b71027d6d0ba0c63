"""Perturbation sequences eps_k used by the perturbed subgradient methods."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParseError


@dataclass(frozen=True)
class PowerLaw:
    """``eps_k = nu * (k + 1) ** (-r)``.

    The shift by one keeps ``eps_0 = nu`` finite. Exponents ``r <= 1`` give a
    divergent series, which is what finite termination needs; larger `r` is
    allowed for experiments.
    """

    nu: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be positive, got {self.nu!r}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"r must be positive, got {self.r!r}")

    @property
    def divergent(self) -> bool:
        return self.r <= 1.0

    def __call__(self, k: int) -> float:
        return epsilon(self, k)

    def __str__(self):
        return f"powerlaw:nu={self.nu:g},r={self.r:g}"


@dataclass(frozen=True)
class Zero:
    """No perturbation: ``eps_k = 0``."""

    divergent = False

    def __call__(self, k: int) -> float:
        return 0.0

    def __str__(self):
        return "zero"


PerturbationSchedule = PowerLaw | Zero


def epsilon(s: PerturbationSchedule, k: int) -> float:
    if k < 0:
        raise ValueError("iteration index must be nonnegative")
    if isinstance(s, Zero):
        return 0.0
    return s.nu * (k + 1) ** (-s.r)


def parse_schedule(text: str) -> PerturbationSchedule:
    """Parse ``zero`` or ``powerlaw:nu=<float>,r=<float>`` (keys optional, default 1)."""
    text = text.strip().lower()
    if text == "zero":
        return Zero()
    kind, _, rest = text.partition(":")
    if kind != "powerlaw":
        raise ParseError(f"unknown schedule {text!r}; expected 'zero' or 'powerlaw:nu=..,r=..'")
    kwargs = {}
    for item in filter(None, rest.split(",")):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in ("nu", "r"):
            raise ParseError(f"bad schedule parameter {item!r}", field=key or None)
        try:
            kwargs[key] = float(val)
        except ValueError:
            raise ParseError(f"not a number: {val!r}", field=key) from None
    try:
        return PowerLaw(**kwargs)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
