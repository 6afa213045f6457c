"""Flux-tunable transmon pair: SQUID Josephson energy, transition frequency,
avoided crossing, flux-map synthesis and fitting.

All energies are expressed as frequencies in Hz.  Flux is in units of the
flux quantum, ``phi = Phi / Phi0``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import optimize

from .constants import PHI0
from .errors import ArityError, ConfigurationError, DegeneracyError, RegimeError


@dataclass(frozen=True)
class TransmonSpec:
    """``f_max``: 0-1 frequency at the sweet spot; ``e_c``: charging energy; ``d``: junction asymmetry."""

    f_max: float
    e_c: float
    d: float

    def __post_init__(self):
        if not (math.isfinite(self.f_max) and self.f_max > 0):
            raise ConfigurationError(f"f_max must be > 0, got {self.f_max}")
        if not (math.isfinite(self.e_c) and self.e_c > 0):
            raise ConfigurationError(f"e_c must be > 0, got {self.e_c}")
        if not 0 <= self.d < 1:
            raise ConfigurationError(f"asymmetry d must lie in [0, 1), got {self.d}")

    @property
    def e_j_sum(self) -> float:
        """Total Josephson energy that puts ``f01(0)`` exactly at ``f_max``."""
        return (self.f_max + self.e_c) ** 2 / (8 * self.e_c)


@dataclass(frozen=True)
class FluxTransfer:
    """Linear map from bias to reduced flux: ``phi = k * bias + offset``."""

    k: float
    offset: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.k):
            raise ConfigurationError(f"flux transfer k must be finite, got {self.k}")
        if not -0.5 < self.offset <= 0.5:
            raise ConfigurationError(f"flux offset must lie in (-0.5, 0.5], got {self.offset}")

    def phi(self, bias):
        return self.k * np.asarray(bias, dtype=float) + self.offset


@dataclass(frozen=True)
class CoupledPairSpec:
    """Two transmons driven by one shared bias, coupled transversally with strength ``g``."""

    q1: TransmonSpec
    q2: TransmonSpec
    t1: FluxTransfer
    t2: FluxTransfer
    g: float

    def __post_init__(self):
        if not self.g >= 0:
            raise ConfigurationError(f"coupling g must be >= 0, got {self.g}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc) -> "CoupledPairSpec":
        try:
            return cls(TransmonSpec(**doc["q1"]), TransmonSpec(**doc["q2"]), FluxTransfer(**doc["t1"]),
                       FluxTransfer(**doc["t2"]), float(doc["g"]))
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"invalid pair specification: {exc}") from None


def wrap_offset(phi: float) -> float:
    """Reduce a flux offset into ``(-0.5, 0.5]``."""
    w = phi - math.floor(phi + 0.5)
    return 0.5 if w == -0.5 else w


# -- single transmon ------------------------------------------------------

def _reduced(phi):
    phi = np.asarray(phi, dtype=float)
    # fold into [0, 0.5] so evenness and periodicity hold to rounding
    return np.abs(phi - np.round(phi))


def ej_of_flux(spec: TransmonSpec, phi):
    """Josephson energy of an asymmetric SQUID.

    ``E_JS |cos(pi phi)| sqrt(1 + d^2 tan^2(pi phi))``, written as
    ``E_JS sqrt(cos^2 + d^2 sin^2)`` so it stays finite at half flux.
    """
    x = np.pi * _reduced(phi)
    out = spec.e_j_sum * np.sqrt(np.cos(x) ** 2 + spec.d ** 2 * np.sin(x) ** 2)
    return float(out) if out.ndim == 0 else out


def _f01_unchecked(f_max, e_c, d, phi):
    e_j_sum = (f_max + e_c) ** 2 / (8 * e_c)
    x = np.pi * _reduced(phi)
    e_j = e_j_sum * np.sqrt(np.cos(x) ** 2 + d ** 2 * np.sin(x) ** 2)
    return np.sqrt(8 * np.maximum(e_j, e_c) * e_c) - e_c


def f01(spec: TransmonSpec, phi):
    """Transmon 0-1 frequency ``sqrt(8 E_J E_C) - E_C``.

    Raises :class:`RegimeError` where ``E_J <= E_C``.
    """
    e_j = np.asarray(ej_of_flux(spec, phi))
    if np.any(e_j <= spec.e_c):
        raise RegimeError(
            f"E_J = {float(np.min(e_j)):.4g} Hz drops to or below E_C = {spec.e_c:.4g} Hz; outside the transmon regime"
        )
    out = np.sqrt(8 * e_j * spec.e_c) - spec.e_c
    return float(out) if out.ndim == 0 else out


def tunability(spec: TransmonSpec) -> float:
    """Frequency span between the sweet spot and half flux."""
    return spec.f_max - f01(spec, 0.5)


def flux_from_field(b_axial: float, loop_area: float) -> float:
    """Flux through a loop of ``loop_area`` m^2 in a uniform axial field, in flux quanta."""
    if not loop_area > 0:
        raise ConfigurationError("loop_area must be > 0")
    return b_axial * loop_area / PHI0


# -- coupled pair ---------------------------------------------------------

def coupled_spectrum(f1, f2, g):
    """Dressed frequencies of two resonantly coupled two-level systems.

    Returns ``(f_plus, f_minus, f_two_photon)``; the last is the two-photon
    transition to the doubly excited state, seen at the mean frequency.
    """
    if np.any(np.asarray(g) < 0):
        raise ConfigurationError("coupling g must be >= 0")
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    mean = 0.5 * (f1 + f2)
    half = np.hypot(0.5 * (f1 - f2), g)
    out = (mean + half, mean - half, mean)
    if f1.ndim == 0 and f2.ndim == 0:
        return tuple(float(v) for v in out)
    return out


def _bare(pair: CoupledPairSpec, bias):
    return f01(pair.q1, pair.t1.phi(bias)), f01(pair.q2, pair.t2.phi(bias))


def branch_gap(pair: CoupledPairSpec, bias: float) -> float:
    f_plus, f_minus, _ = coupled_spectrum(*_bare(pair, bias), pair.g)
    return f_plus - f_minus


def min_branch_gap(pair: CoupledPairSpec, biases: Sequence[float]) -> tuple[float, float]:
    """Smallest dressed-branch splitting over ``biases``, refined between samples.

    Scans the grid, then polishes the best sample: a sign change of the bare
    detuning is located with Brent's method, otherwise the gap itself is
    minimised on the neighbouring interval.  Returns ``(bias, gap)``.
    """
    b = np.asarray(sorted(biases), dtype=float)
    if b.size == 0:
        raise ArityError("need at least one bias point")
    f1, f2 = _bare(pair, b)
    det = np.atleast_1d(f1 - f2)
    gaps = 2 * np.hypot(0.5 * det, pair.g)
    k = int(np.argmin(gaps))
    if b.size == 1:
        return float(b[0]), float(gaps[0])
    lo, hi = b[max(k - 1, 0)], b[min(k + 1, b.size - 1)]

    def detuning(x):
        a, c = _bare(pair, x)
        return a - c

    for a, c in ((lo, b[k]), (b[k], hi)):
        if a < c and detuning(a) * detuning(c) <= 0:
            x = optimize.brentq(detuning, a, c, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            return float(x), branch_gap(pair, x)
    res = optimize.minimize_scalar(lambda x: branch_gap(pair, x), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-14})
    if res.fun < gaps[k]:
        return float(res.x), float(res.fun)
    return float(b[k]), float(gaps[k])


# -- flux maps ------------------------------------------------------------

@dataclass(frozen=True)
class FluxMapTable:
    """Spectroscopy-style records ``(bias, qubit, branch, frequency)``.

    ``branch`` is 1 for the upper dressed level and 0 for the lower one;
    ``qubit`` (0 or 1) names the bare qubit that branch is read as at that
    bias.  ``flagged`` lists biases dropped because a qubit left the transmon
    regime.
    """

    bias: np.ndarray
    qubit: np.ndarray
    branch: np.ndarray
    frequency: np.ndarray
    flagged: tuple[float, ...] = field(default=())

    def __post_init__(self):
        n = len(self.bias)
        if not (len(self.qubit) == len(self.branch) == len(self.frequency) == n):
            raise ConfigurationError("flux map columns must have equal length")
        if n and np.any(np.diff(self.bias) < 0):
            raise ConfigurationError("flux map must be ordered by bias")
        if n and not np.all(np.asarray(self.frequency) > 0):
            raise ConfigurationError("flux map frequencies must be positive")
        keys = set(zip(np.asarray(self.bias).tolist(), np.asarray(self.qubit).tolist(),
                       np.asarray(self.branch).tolist()))
        if len(keys) != n:
            raise ConfigurationError("duplicate (bias, qubit, branch) record")

    def __len__(self) -> int:
        return len(self.bias)

    def for_qubit(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        m = self.qubit == q
        return self.bias[m], self.frequency[m]

    def with_frequencies(self, frequency: np.ndarray) -> "FluxMapTable":
        return replace(self, frequency=np.asarray(frequency, dtype=float))


def synth_fluxmap(pair: CoupledPairSpec, biases: Sequence[float]) -> FluxMapTable:
    """Dressed spectrum of ``pair`` at each bias.

    Each branch is attributed to the bare qubit it mostly resembles; at exact
    resonance (equal weight) it keeps the qubit whose previous frequency is
    nearest.  Biases where either qubit leaves the transmon regime are dropped
    and listed in ``flagged``.
    """
    rows = []
    flagged = []
    last = [None, None]  # previous frequency per qubit
    for x in sorted(float(v) for v in biases):
        if not math.isfinite(x):
            raise ConfigurationError("biases must be finite")
        try:
            f1, f2 = _bare(pair, x)
        except RegimeError:
            flagged.append(x)
            continue
        f_plus, f_minus, _ = coupled_spectrum(f1, f2, pair.g)
        if f1 > f2:
            upper = 0
        elif f2 > f1:
            upper = 1
        elif last[0] is not None and last[1] is not None:
            # degenerate point: keep each qubit on the branch nearest its last value
            upper = 0 if abs(f_plus - last[0]) + abs(f_minus - last[1]) <= abs(f_plus - last[1]) + abs(f_minus - last[0]) else 1
        else:
            upper = 0
        lower = 1 - upper
        rows.append((x, upper, 1, f_plus))
        rows.append((x, lower, 0, f_minus))
        last[upper], last[lower] = f_plus, f_minus
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    if not rows:
        return FluxMapTable(np.zeros(0), np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros(0), tuple(flagged))
    arr = list(zip(*rows))
    return FluxMapTable(np.array(arr[0], dtype=float), np.array(arr[1], dtype=int), np.array(arr[2], dtype=int),
                        np.array(arr[3], dtype=float), tuple(flagged))


def add_noise(table: FluxMapTable, sigma: float, rng: np.random.Generator) -> FluxMapTable:
    """Gaussian frequency noise of standard deviation ``sigma`` Hz."""
    return table.with_frequencies(table.frequency + sigma * rng.standard_normal(len(table)))


def write_fluxmap_csv(table: FluxMapTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bias", "qubit", "branch", "frequency_hz"])
        for b, q, br, f in zip(table.bias, table.qubit, table.branch, table.frequency):
            w.writerow([format(float(b), ".17g"), int(q), int(br), format(float(f), ".17g")])


def read_fluxmap_csv(path) -> FluxMapTable:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["bias", "qubit", "branch", "frequency_hz"]:
            raise ConfigurationError(f"{path}: expected header bias,qubit,branch,frequency_hz")
        rows = [(float(r["bias"]), int(r["qubit"]), int(r["branch"]), float(r["frequency_hz"])) for r in reader]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    if not rows:
        return FluxMapTable(np.zeros(0), np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros(0))
    cols = list(zip(*rows))
    return FluxMapTable(np.array(cols[0]), np.array(cols[1], dtype=int), np.array(cols[2], dtype=int),
                        np.array(cols[3]))


# -- fitting --------------------------------------------------------------

PARAMETER_NAMES = ("f_max_1", "d_1", "k_1", "offset_1", "f_max_2", "d_2", "k_2", "offset_2", "g")


@dataclass(frozen=True)
class FitResult:
    pair: CoupledPairSpec
    sigma: dict[str, float]
    rms: float
    iterations: int
    converged: bool
    n_points: int

    def to_dict(self) -> dict:
        p = self.pair
        values = dict(zip(PARAMETER_NAMES, _pack(p)))
        values["e_c_1"] = p.q1.e_c
        values["e_c_2"] = p.q2.e_c
        return {
            "parameters": values,
            "sigma": self.sigma,
            "rms_residual_hz": self.rms,
            "iterations": self.iterations,
            "converged": self.converged,
            "n_points": self.n_points,
            "pair": p.to_dict(),
        }


def _pack(pair: CoupledPairSpec) -> np.ndarray:
    return np.array([pair.q1.f_max, pair.q1.d, pair.t1.k, pair.t1.offset,
                     pair.q2.f_max, pair.q2.d, pair.t2.k, pair.t2.offset, pair.g])


def _model(p: np.ndarray, e_c: tuple[float, float], bias: np.ndarray, branch: np.ndarray) -> np.ndarray:
    fa = _f01_unchecked(p[0], e_c[0], p[1], p[2] * bias + p[3])
    fb = _f01_unchecked(p[4], e_c[1], p[5], p[6] * bias + p[7])
    mean = 0.5 * (fa + fb)
    half = np.hypot(0.5 * (fa - fb), p[8])
    return np.where(branch == 1, mean + half, mean - half)


def _unpack(p: np.ndarray, init: CoupledPairSpec) -> CoupledPairSpec:
    d1 = min(abs(p[1]), 1 - 1e-12)
    d2 = min(abs(p[5]), 1 - 1e-12)
    return CoupledPairSpec(
        TransmonSpec(float(p[0]), init.q1.e_c, float(d1)),
        TransmonSpec(float(p[4]), init.q2.e_c, float(d2)),
        FluxTransfer(float(p[2]), wrap_offset(float(p[3]))),
        FluxTransfer(float(p[6]), wrap_offset(float(p[7]))),
        float(abs(p[8])),
    )


def _jacobian(fun, p: np.ndarray, scale: np.ndarray) -> np.ndarray:
    cols = []
    for i in range(p.size):
        step = 1e-6 * scale[i]
        hi = p.copy()
        lo = p.copy()
        hi[i] += step
        lo[i] -= step
        cols.append((fun(hi) - fun(lo)) / (2 * step))
    return np.column_stack(cols)


def _check_identifiable(JtJ: np.ndarray) -> None:
    diag = np.diag(JtJ)
    for i, name in enumerate(PARAMETER_NAMES):
        if not diag[i] > 0:
            raise DegeneracyError(f"parameter {name} does not affect the residuals", name)
    corr = JtJ / np.sqrt(np.outer(diag, diag))
    w, v = np.linalg.eigh(corr)
    if w[0] < 1e-13 * w[-1]:
        name = PARAMETER_NAMES[int(np.argmax(np.abs(v[:, 0])))]
        raise DegeneracyError(f"normal matrix is singular; {name} is not identifiable from this data", name)


def fit_fluxmap(table: FluxMapTable, init: CoupledPairSpec, max_iterations: int = 100,
                step_tolerance: float = 1e-9) -> FitResult:
    """Damped least-squares fit of ``(f_max, d, k, offset)`` per qubit plus ``g``.

    Charging energies stay at their ``init`` values.  The damping follows
    Marquardt's rule: ``(J^T J + lam diag(J^T J)) dp = -J^T r``, with ``lam``
    shrunk after an accepted step and grown after a rejected one.  The
    Jacobian is taken by central differences.  Uncertainties are 1-sigma
    estimates ``sqrt(diag(s^2 (J^T J)^-1))`` at the optimum.
    """
    n_per = [int(np.sum(table.qubit == q)) for q in (0, 1)]
    if min(n_per) < 6:
        raise ArityError(f"need at least 6 records per qubit, got {n_per[0]} and {n_per[1]}")
    bias = np.asarray(table.bias, dtype=float)
    span = float(np.ptp(bias))
    if span == 0:
        raise DegeneracyError("all records share one bias value; k is not identifiable", "k")
    k_min = min(abs(init.t1.k), abs(init.t2.k))
    if k_min * span < 0.5:
        raise ArityError(
            f"bias span {span:.4g} covers {k_min * span:.3f} flux periods of the slower qubit; need at least 0.5"
        )
    branch = np.asarray(table.branch)
    target = np.asarray(table.frequency, dtype=float)
    e_c = (init.q1.e_c, init.q2.e_c)

    def residual(p):
        return _model(p, e_c, bias, branch) - target

    p = _pack(init).astype(float)
    scale = np.array([p[0], 0.1, max(abs(p[2]), 1e-12), 0.01, p[4], 0.1, max(abs(p[6]), 1e-12), 0.01,
                      max(p[8], 1e6)])
    r = residual(p)
    cost = r @ r
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        J = _jacobian(residual, p, scale)
        JtJ = J.T @ J
        _check_identifiable(JtJ)
        grad = J.T @ r
        accepted = False
        while lam < 1e16:
            A = JtJ + lam * np.diag(np.diag(JtJ))
            step = np.linalg.solve(A, -grad)
            trial = p + step
            r_trial = residual(trial)
            c_trial = r_trial @ r_trial
            if c_trial <= cost:
                accepted = True
                break
            lam *= 10
        if not accepted:
            converged = True  # no descent direction left at machine precision
            break
        p, r, cost = trial, r_trial, c_trial
        lam = max(lam / 10, 1e-12)
        if np.max(np.abs(step) / scale) < step_tolerance:
            converged = True
            break
    J = _jacobian(residual, p, scale)
    JtJ = J.T @ J
    _check_identifiable(JtJ)
    dof = max(target.size - p.size, 1)
    s2 = cost / dof
    cov = s2 * np.linalg.inv(JtJ)
    sigma = {name: float(math.sqrt(max(cov[i, i], 0.0))) for i, name in enumerate(PARAMETER_NAMES)}
    rms = float(math.sqrt(cost / target.size))
    return FitResult(_unpack(p, init), sigma, rms, it, converged, int(target.size))


def write_fit_json(result: FitResult, path) -> None:
    Path(path).write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")


# -- reference device -----------------------------------------------------

def measured_pair(k_center: float = 1.0, k_ratio: float = 5.0, g: float = 5e6) -> CoupledPairSpec:
    """The measured pair: 6.6 GHz centre qubit, 6.2 GHz side qubit, d = 0.31, 295 MHz anharmonicity."""
    return CoupledPairSpec(
        TransmonSpec(6.6e9, 295e6, 0.31),
        TransmonSpec(6.2e9, 295e6, 0.31),
        FluxTransfer(k_center, 0.0),
        FluxTransfer(k_center / k_ratio, 0.0),
        g,
    )
