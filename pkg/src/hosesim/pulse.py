"""Flux-line pulse shaping against a slow linear plant.

Samples are held piecewise constant: ``u[n]`` drives the plant over the
interval ``(t[n-1], t[n]]`` and ``y[n]`` is the plant output at ``t[n]``.
The plant starts at rest at zero before the first sample, so the
first-order response is exactly the discrete convolution with
``h[n] = (1 - exp(-dt/tau)) exp(-n dt/tau)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import optimize, signal
from scipy.ndimage import gaussian_filter1d

from .device import FluxTransfer, TransmonSpec, f01
from .errors import ConditioningError, ConfigurationError, DomainError, InfeasibleError, ShapeError


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled series starting at ``t0``."""

    dt: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", s)
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if s.ndim != 1 or s.size < 2:
            raise ConfigurationError("a waveform needs at least 2 samples")
        if not np.all(np.isfinite(s)):
            raise ConfigurationError("waveform samples must be finite")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    def value_at(self, t: float) -> float:
        return float(np.interp(t, self.t, self.samples))

    def with_samples(self, samples) -> "Waveform":
        return Waveform(self.dt, samples, self.t0)


@dataclass(frozen=True)
class PlantModel:
    """Linear map from commanded bias to flux at the qubit.

    Either ``first_order`` with time constant ``tau`` or a sampled
    ``impulse_response`` whose taps sum to one (unit DC gain).
    """

    kind: str
    tau: float | None = None
    impulse: Waveform | None = None

    def __post_init__(self):
        if self.kind == "first_order":
            if self.tau is None or not self.tau > 0:
                raise ConfigurationError(f"first-order plant needs tau > 0, got {self.tau}")
        elif self.kind == "impulse_response":
            if self.impulse is None:
                raise ConfigurationError("impulse-response plant needs an impulse waveform")
            h = self.impulse.samples
            total = float(np.sum(h))
            if not np.sum(np.abs(h)) < np.inf or total == 0:
                raise ConfigurationError("impulse response must be summable with nonzero DC gain")
            object.__setattr__(self, "impulse", self.impulse.with_samples(h / total))
        else:
            raise ConfigurationError(f"unknown plant kind {self.kind!r}")

    @classmethod
    def first_order(cls, tau: float) -> "PlantModel":
        return cls("first_order", tau=tau)

    @classmethod
    def from_impulse(cls, impulse: Waveform) -> "PlantModel":
        return cls("impulse_response", impulse=impulse)

    def taps(self, dt: float, n: int) -> np.ndarray:
        """First ``n`` taps of the discrete impulse response at period ``dt``."""
        if self.kind == "first_order":
            a = math.exp(-dt / self.tau)
            return (1 - a) * a ** np.arange(n)
        _check_dt(self.impulse.dt, dt)
        h = np.zeros(n)
        m = min(n, self.impulse.samples.size)
        h[:m] = self.impulse.samples[:m]
        return h


@dataclass(frozen=True)
class PredistortionConstraints:
    amplitude_cap: float
    settle_band: float = 0.01
    max_settle: float | None = None

    def __post_init__(self):
        if not self.amplitude_cap >= 1:
            raise ConfigurationError(f"amplitude_cap must be >= 1, got {self.amplitude_cap}")
        if not 0 < self.settle_band < 1:
            raise ConfigurationError(f"settle_band must lie in (0, 1), got {self.settle_band}")
        if self.max_settle is not None and not self.max_settle > 0:
            raise ConfigurationError("max_settle must be > 0")


def _check_dt(a: float, b: float) -> None:
    if abs(a - b) > 1e-12 * max(a, b):
        raise ConfigurationError(f"sample periods differ: {a} vs {b}")


# -- waveforms ------------------------------------------------------------

def square_smoothed(amplitude: float, t_start: float, t_stop: float, edge: float, dt: float,
                    duration: float | None = None) -> Waveform:
    """Flat-top pulse whose edges follow a quarter sine of length ``edge``.

    The record runs from 0 to ``duration`` (default ``t_stop + t_start``).
    """
    if not edge >= dt * (1 - 1e-12):
        raise ShapeError(f"edge {edge} is shorter than the sample period {dt}")
    if t_stop - t_start < 2 * edge * (1 - 1e-12):
        raise ShapeError(f"pulse of length {t_stop - t_start} cannot hold two edges of {edge}")
    if duration is None:
        duration = t_stop + t_start
    n = int(round(duration / dt)) + 1
    t = dt * np.arange(max(n, 2))
    rise = np.clip((t - t_start) / edge, 0.0, 1.0)
    fall = np.clip((t_stop - t) / edge, 0.0, 1.0)
    shape = np.sin(0.5 * np.pi * np.minimum(rise, fall))
    return Waveform(dt, amplitude * shape)


def step(amplitude: float, dt: float, duration: float, t_on: float = 0.0) -> Waveform:
    """Step switched on at ``t_on``: samples after ``t_on`` hold ``amplitude``."""
    t = dt * np.arange(int(round(duration / dt)) + 1)
    return Waveform(dt, np.where(t > t_on + 1e-9 * dt, amplitude, 0.0))


def exponential_target(amplitude: float, tau_fast: float, dt: float, duration: float, t_on: float = 0.0) -> Waveform:
    """``amplitude (1 - exp(-(t - t_on)/tau_fast))`` after ``t_on``, zero before."""
    t = dt * np.arange(int(round(duration / dt)) + 1)
    x = np.clip(t - t_on, 0.0, None)
    return Waveform(dt, amplitude * -np.expm1(-x / tau_fast))


# -- plant ----------------------------------------------------------------

def plant_response(plant: PlantModel, u: Waveform) -> Waveform:
    """Plant output sampled like ``u``.

    First order: ``y[n] = u[n] + (y[n-1] - u[n]) exp(-dt/tau)``, exact for
    held samples.  Impulse response: causal discrete convolution.
    """
    x = u.samples
    if plant.kind == "first_order":
        a = math.exp(-u.dt / plant.tau)
        # y[n] = a y[n-1] + (1 - a) u[n] as a one-pole IIR filter
        y = signal.lfilter([1 - a], [1.0, -a], x)
        return u.with_samples(y)
    _check_dt(plant.impulse.dt, u.dt)
    h = plant.impulse.samples
    y = np.convolve(x, h)[: x.size]
    return u.with_samples(y)


def rise_time(y: Waveform, final_value: float, low: float = 0.1, high: float = 0.9) -> float:
    """Time between the first crossings of ``low`` and ``high`` fractions of ``final_value``."""
    def crossing(level):
        s = y.samples / final_value
        k = int(np.argmax(s >= level))
        if s[k] < level:
            raise DomainError(f"trace never reaches {level:.0%} of its final value")
        if k == 0:
            return y.t[0]
        f = (level - s[k - 1]) / (s[k] - s[k - 1])
        return y.t[k - 1] + f * y.dt
    return float(crossing(high) - crossing(low))


def settling_time(output: Waveform, final_value: float, band: float, onset: float = 0.0,
                  absolute: bool = False) -> float:
    """Time after ``onset`` at which ``output`` last enters the settling band for good.

    The band is ``final_value * (1 +- band)``, or ``final_value +- band`` when
    ``absolute`` is set.  The exit instant is interpolated linearly between
    samples; 0 if the trace is never outside.
    """
    if not band > 0:
        raise DomainError("settling band must be > 0")
    if final_value == 0 and not absolute:
        raise DomainError("a relative band around a zero final value is empty; pass absolute=True")
    half = band if absolute else abs(final_value) * band
    dev = np.abs(output.samples - final_value) - half
    outside = np.flatnonzero(dev > 0)
    if outside.size == 0:
        return 0.0
    k = int(outside[-1])
    if k == dev.size - 1:
        return float(output.t[-1] - onset)
    f = dev[k] / (dev[k] - dev[k + 1])
    return float(max(output.t[k] + f * output.dt - onset, 0.0))


# -- pre-distortion -------------------------------------------------------

def exact_inverse_first_order(tau: float, target: Waveform, initial: float | None = None) -> Waveform:
    """Input that drives a first-order plant along ``target``: ``u = y + tau dy/dt``.

    Each held sample ``u[n]`` covers ``(t[n-1], t[n]]``, so ``y`` and its
    derivative are taken centrally at that interval's midpoint.  Before the
    record the target is taken to rest at ``initial`` (default: its first
    sample, i.e. a one-sided start).
    """
    if not tau > 0:
        raise ConfigurationError("tau must be > 0")
    y = target.samples
    prev = np.empty_like(y)
    prev[0] = y[0] if initial is None else initial
    prev[1:] = y[:-1]
    u = 0.5 * (y + prev) + tau * (y - prev) / target.dt
    return target.with_samples(u)


@dataclass(frozen=True)
class PredistortionResult:
    waveform: Waveform
    tau_fast: float
    amplitude_cap: float
    settle: float  # predicted settle time into the requested band
    settle_by_band: dict[float, float]  # forward-simulated settle times

    def to_dict(self) -> dict:
        return {
            "tau_fast_s": self.tau_fast,
            "amplitude_cap": self.amplitude_cap,
            "predicted_settle_s": self.settle,
            "peak_input": float(np.max(np.abs(self.waveform.samples))),
            "settle_s": {f"{b:g}": v for b, v in sorted(self.settle_by_band.items())},
        }


def constrained_predistort(tau: float, step_amplitude: float, constraints: PredistortionConstraints, dt: float,
                           duration: float | None = None, t_on: float = 0.0,
                           bands: tuple[float, ...] = (0.01, 0.05, 0.1)) -> PredistortionResult:
    """Overshoot-and-decay input for the fastest exponential step the cap allows.

    The target is ``1 - exp(-t/tau_fast)`` with ``tau_fast = tau / cap``: the
    exact inverse peaks at ``cap`` times the step right after onset, so the
    amplitude limit is met without clipping.  Settling into a band ``b``
    then takes ``tau_fast ln(1/b)``.  The returned settle times per band come
    from simulating the plant on the constructed input.
    """
    c = constraints
    tau_fast = tau / c.amplitude_cap
    predicted = tau_fast * math.log(1 / c.settle_band)
    if c.max_settle is not None and predicted > c.max_settle:
        raise InfeasibleError(
            f"settling into {c.settle_band:.0%} within {c.max_settle:.3g} s needs more than cap "
            f"{c.amplitude_cap:g}; the minimum attainable is {predicted:.3g} s",
            predicted,
        )
    if duration is None:
        duration = t_on + 20 * tau_fast + 10 * dt
    target = exponential_target(step_amplitude, tau_fast, dt, duration, t_on)
    u = exact_inverse_first_order(tau, target)
    y = plant_response(PlantModel.first_order(tau), u)
    settle = {b: settling_time(y, step_amplitude, b, onset=t_on) for b in sorted(set(bands) | {c.settle_band})}
    return PredistortionResult(u, tau_fast, c.amplitude_cap, predicted, settle)


# -- deconvolution --------------------------------------------------------

def _first_order_deconvolve(a: float, t: np.ndarray, lam: float) -> np.ndarray:
    # H = (1 - a) (I - a S)^-1, so with y = H u the problem becomes
    #   min |y - t|^2 + lam |D B y|^2,  B = H^-1 = (I - a S) / (1 - a)
    # whose normal matrix I + lam (DB)^T (DB) is pentadiagonal.
    n = t.size
    if lam == 0:
        return _first_order_inverse(a, t)
    # row k of D B: (y[k+1] - (1 + a) y[k] + a y[k-1]) / (1 - a), no y[-1] term in row 0
    DB = sp.diags([np.full(n - 2, a), np.full(n - 1, -(1 + a)), np.ones(n - 1)], [-1, 0, 1],
                  shape=(n - 1, n)) / (1 - a)
    M = (sp.identity(n) + lam * (DB.T @ DB)).todia()
    ab = np.zeros((3, n))
    for off in (0, 1, 2):
        ab[2 - off, off:] = M.diagonal(off)
    y = sla.solveh_banded(ab, t)
    return _first_order_inverse(a, y)


def _first_order_inverse(a: float, y: np.ndarray) -> np.ndarray:
    prev = np.concatenate(([0.0], y[:-1]))
    return (y - a * prev) / (1 - a)


def deconvolve(plant: PlantModel, target: Waveform, lam: float) -> Waveform:
    """Regularised input ``argmin |H u - t|^2 + lam |D u|^2``, ``D`` the first difference.

    The first-order plant is solved exactly through its bidiagonal inverse,
    which turns the normal equations into a pentadiagonal system.  A general
    impulse response uses recursive forward substitution at ``lam = 0`` and
    conjugate gradients with FFT products otherwise.
    """
    if not lam >= 0:
        raise ConfigurationError("regularisation weight must be >= 0")
    t = target.samples
    n = t.size
    if plant.kind == "first_order":
        a = math.exp(-target.dt / plant.tau)
        return target.with_samples(_first_order_deconvolve(a, t, lam))
    h = plant.taps(target.dt, n)
    if lam == 0:
        if abs(h[0]) <= 1e-12 * np.max(np.abs(h)):
            raise ConditioningError("convolution matrix is singular (leading tap is zero); use lam > 0")
        # H is lower-triangular Toeplitz: forward substitution is recursive division by h
        u = signal.lfilter([1.0], np.trim_zeros(h, "b"), t)
        if not np.all(np.isfinite(u)):
            raise ConditioningError("unregularised inverse of this impulse response is unstable; use lam > 0")
        return target.with_samples(u)

    def H(v):
        return signal.fftconvolve(v, h)[:n]

    def Ht(v):
        return signal.fftconvolve(v, h[::-1])[n - 1: 2 * n - 1]

    def normal(v):
        d = np.diff(v)
        dtd = np.concatenate(([-d[0]], d[:-1] - d[1:], [d[-1]]))
        return Ht(H(v)) + lam * dtd

    op = spla.LinearOperator((n, n), matvec=normal, dtype=float)
    u, info = spla.cg(op, Ht(t), rtol=1e-12, maxiter=20 * n)
    if info != 0:
        raise ConditioningError(f"regularised deconvolution did not converge (info={info}); increase lam")
    return target.with_samples(u)


def convolution_residual(plant: PlantModel, u: Waveform, target: Waveform) -> np.ndarray:
    return plant_response(plant, u).samples - target.samples


# -- qubit frequency under a flux pulse ----------------------------------

def bias_for_detuning(spec: TransmonSpec, transfer: FluxTransfer, detuning: float) -> float:
    """Bias offset from zero that detunes the qubit by ``detuning`` Hz below ``f_max`` (from ``phi = offset``)."""
    phi0 = transfer.offset
    f_start = f01(spec, phi0)
    f_goal = f_start - detuning
    f_min = f01(spec, 0.5)
    if not f_min <= f_goal <= f_start:
        raise DomainError(f"detuning {detuning:.4g} Hz is outside the reachable range")
    phi = optimize.brentq(lambda p: f01(spec, p) - f_goal, abs(phi0) if phi0 >= 0 else 0.0, 0.5, xtol=1e-15)
    return (phi - phi0) / transfer.k


def frequency_trace(spec: TransmonSpec, transfer: FluxTransfer, flux_input: Waveform, plant: PlantModel,
                    blur_sigma: float = 0.0) -> Waveform:
    """Qubit frequency versus time for a bias waveform passed through ``plant``.

    ``blur_sigma`` (s) applies Gaussian smoothing to emulate the time
    resolution of pulsed spectroscopy.
    """
    response = plant_response(plant, flux_input)
    freq = np.asarray(f01(spec, transfer.phi(response.samples)), dtype=float)
    if blur_sigma > 0:
        freq = gaussian_filter1d(freq, blur_sigma / flux_input.dt, mode="nearest")
    return flux_input.with_samples(freq)


# -- I/O ------------------------------------------------------------------

def write_waveform_csv(w: Waveform, path, column: str = "value") -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t_s", column])
        for t, v in zip(w.t, w.samples):
            out.writerow([format(float(t), ".17g"), format(float(v), ".17g")])


def read_waveform_csv(path) -> Waveform:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "t_s" or len(header) != 2:
            raise ConfigurationError(f"{path}: expected a two-column CSV starting with t_s")
        rows = [(float(a), float(b)) for a, b in reader]
    if len(rows) < 2:
        raise ConfigurationError(f"{path}: a waveform needs at least 2 samples")
    t = np.array([r[0] for r in rows])
    dt = float(np.mean(np.diff(t)))
    if np.max(np.abs(np.diff(t) - dt)) > 1e-9 * dt:
        raise ConfigurationError(f"{path}: samples are not uniformly spaced")
    return Waveform(dt, np.array([r[1] for r in rows]), float(t[0]))


def write_report_json(data: dict, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
