"""Closed-form microwave leakage estimates for openings in the cavity wall.

A slot or bore below its dominant-mode cut-off attenuates any field that
tries to pass, so the hose cannot act as a loss channel.  Vacuum filling and
perfectly conducting walls are assumed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .constants import C0
from .errors import ConfigurationError

# first zero of J1', the TE11 cut-off of a circular guide
TE11_ROOT = 1.8412
# dB per neper
DB_PER_NEPER = 20 / math.log(10)


@dataclass(frozen=True)
class WaveguideSpec:
    """``kind`` is ``"rectangular"`` (broad side ``a``, narrow side ``b``) or ``"circular"`` (``diameter``)."""

    kind: str
    length: float
    a: float | None = None
    b: float | None = None
    diameter: float | None = None
    name: str = ""

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigurationError(f"waveguide length must be > 0, got {self.length}")
        if self.kind == "rectangular":
            if self.a is None or self.b is None or not (self.a > 0 and self.b > 0):
                raise ConfigurationError("rectangular guide needs a > 0 and b > 0")
            if self.a < self.b:
                raise ConfigurationError(f"rectangular guide needs a >= b, got a={self.a}, b={self.b}")
        elif self.kind == "circular":
            if self.diameter is None or not self.diameter > 0:
                raise ConfigurationError("circular guide needs diameter > 0")
        else:
            raise ConfigurationError(f"unknown waveguide kind {self.kind!r}")

    @classmethod
    def rectangular(cls, a: float, b: float, length: float, name: str = "") -> "WaveguideSpec":
        return cls("rectangular", length, a=a, b=b, name=name)

    @classmethod
    def circular(cls, diameter: float, length: float, name: str = "") -> "WaveguideSpec":
        return cls("circular", length, diameter=diameter, name=name)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "WaveguideSpec":
        allowed = {"kind", "length", "a", "b", "diameter", "name"}
        extra = set(doc) - allowed
        if extra:
            raise ConfigurationError(f"waveguide: unknown field(s) {', '.join(sorted(extra))}")
        try:
            return cls(**{k: (float(v) if k not in ("kind", "name") else v) for k, v in doc.items()})
        except TypeError as exc:
            raise ConfigurationError(f"waveguide: {exc}") from None

    @property
    def cutoff(self) -> float:
        """Dominant-mode cut-off frequency (TE10 or TE11) in Hz."""
        if self.kind == "rectangular":
            return C0 / (2 * self.a)
        return TE11_ROOT * C0 / (math.pi * self.diameter)


def quarter_wave(length: float) -> float:
    """Fundamental of a shorted quarter-wave stub, ``c / (4 L)``."""
    if not length > 0:
        raise ConfigurationError(f"stub length must be > 0, got {length}")
    return C0 / (4 * length)


def cutoff_and_attenuation(spec: WaveguideSpec, f: float) -> tuple[float, float]:
    """``(f_c, alpha)`` with ``alpha`` the evanescent decay in dB/mm (0 at or above cut-off).

    ``alpha = 20 log10(e) * (2 pi / lambda_c) * sqrt(1 - (f / f_c)^2)``.
    """
    if not f >= 0:
        raise ConfigurationError(f"frequency must be >= 0, got {f}")
    f_c = spec.cutoff
    if f >= f_c:
        return f_c, 0.0
    k_c = 2 * math.pi * f_c / C0  # 1/m
    alpha = DB_PER_NEPER * k_c * math.sqrt(1 - (f / f_c) ** 2) * 1e-3
    return f_c, alpha


def report(specs: Iterable[tuple[WaveguideSpec, float]], stub_lengths: Iterable[float] = ()) -> dict:
    """Per-guide cut-off and attenuation at the given frequency, plus quarter-wave stub frequencies."""
    guides = []
    for spec, f in specs:
        f_c, alpha = cutoff_and_attenuation(spec, f)
        guides.append({
            "name": spec.name,
            "kind": spec.kind,
            "frequency_hz": f,
            "length_m": spec.length,
            "f_c_hz": f_c,
            "alpha_db_per_mm": alpha,
            "total_attenuation_db": alpha * spec.length * 1e3,
        })
    stubs = [{"length_m": L, "quarter_wave_hz": quarter_wave(L)} for L in stub_lengths]
    return {"waveguides": guides, "quarter_wave": stubs}


def write_report_json(data: dict, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


# slot cut along the hose and the bore of the outermost shell
HOSE_CUT = WaveguideSpec.rectangular(1.2e-3, 0.4e-3, 10e-3, "hose cut")
WALL_BORE = WaveguideSpec.circular(3e-3, 10e-3, "outer shell bore")
