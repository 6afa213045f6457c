"""Axisymmetric magnetostatic solve on a uniform grid.

The unknown is the flux function ``psi = r * A_phi`` at grid nodes.  With
``psi`` the magnetic flux through a disk of radius ``r`` is simply
``2*pi*psi(r)``, so B built from differences of ``psi`` is divergence free by
construction.  Ampere's law is integrated over the dual cell around each
node; the reluctivity ``1/mu`` on a dual edge is the length-weighted mean of
the two cells it crosses (the series combination that keeps normal B
continuous), taken separately for the axial and radial components.

``A = psi / r = 0`` on the axis and on the whole outer boundary.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .constants import MU0
from .errors import ConfigurationError, ConvergenceError, DomainError, RangeError
from .geometry import GridSpec, MaterialGrid, Scene, rasterize

log = logging.getLogger(__name__)

METHODS = ("cg", "sor", "amg", "direct")


@dataclass(frozen=True)
class SolverOptions:
    """``method``: ``"cg"`` (diagonal-preconditioned CG), ``"sor"`` (red-black
    over-relaxation), ``"amg"`` (CG preconditioned by smoothed-aggregation
    multigrid) or ``"direct"`` (sparse LU).  ``max_iterations=None`` means
    ``200 * max(nr, nz)``.
    """

    tolerance: float = 1e-10
    max_iterations: int | None = None
    method: str = "amg"
    omega: float | None = None

    def __post_init__(self):
        if not 0 < self.tolerance < 1:
            raise ConfigurationError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown solver method {self.method!r}; choose from {METHODS}")

    def iteration_cap(self, grid: GridSpec) -> int:
        return self.max_iterations if self.max_iterations is not None else 200 * max(grid.nr, grid.nz)


@dataclass(frozen=True)
class PotentialField:
    grid: GridSpec
    psi: np.ndarray  # (nz+1, nr+1) nodal r*A_phi

    @property
    def a_phi(self) -> np.ndarray:
        r = self.grid.r_nodes
        out = np.zeros_like(self.psi)
        out[:, 1:] = self.psi[:, 1:] / r[1:]
        return out


@dataclass(frozen=True)
class FieldSolution:
    """Nodal flux density plus the potential it was derived from."""

    grid: GridSpec
    b_r: np.ndarray  # (nz+1, nr+1)
    b_z: np.ndarray
    residual_norm: float
    iterations: int
    potential: PotentialField
    residual_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def psi(self) -> np.ndarray:
        return self.potential.psi

    def cell_fields(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-averaged ``(b_r, b_z)`` from exact face fluxes, shape ``(nz, nr)``."""
        return _cell_fields(self.grid, self.psi)

    def face_divergence(self) -> np.ndarray:
        """Net outward flux of each cell divided by the sum of |face fluxes|."""
        psi = self.psi
        # flux through horizontal annular faces and cylindrical faces, both from psi
        up = 2 * np.pi * (psi[:, 1:] - psi[:, :-1])  # (nz+1, nr): upward flux through annulus at z_j
        # outward flux through the cylinder r_i between z_j, z_j+1
        side = -2 * np.pi * (psi[1:, :] - psi[:-1, :])  # (nz, nr+1)
        net = up[1:, :] - up[:-1, :] + side[:, 1:] - side[:, :-1]
        scale = np.abs(up[1:, :]) + np.abs(up[:-1, :]) + np.abs(side[:, 1:]) + np.abs(side[:, :-1])
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(scale > 0, np.abs(net) / scale, 0.0)


def _cell_fields(grid: GridSpec, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = grid.spacing
    r = grid.r_nodes
    rc = grid.r_centers
    area = np.pi * (r[1:] ** 2 - r[:-1] ** 2)
    bz_face = 2 * np.pi * (psi[:, 1:] - psi[:, :-1]) / area  # (nz+1, nr)
    bz = 0.5 * (bz_face[1:] + bz_face[:-1])
    dpsi_dz = (psi[1:, :] - psi[:-1, :]) / h  # (nz, nr+1)
    br = -0.5 * (dpsi_dz[:, 1:] + dpsi_dz[:, :-1]) / rc
    return br, bz


# -- assembly -------------------------------------------------------------

def _edge_coefficients(mg: MaterialGrid) -> tuple[np.ndarray, np.ndarray]:
    g = mg.grid
    if np.any(mg.mu_axial <= 0) or np.any(mg.mu_radial <= 0):
        raise DomainError("permeabilities must be strictly positive")
    h = g.spacing
    nu_a = 1.0 / (MU0 * mg.mu_axial)
    nu_r = 1.0 / (MU0 * mg.mu_radial)
    # radial edge (j,i)-(j,i+1), j=1..nz-1: dual edge at r_{i+1/2} crosses cells (j-1,i),(j,i)
    r_half = (np.arange(g.nr) + 0.5) * h
    ce = 0.5 * (nu_a[:-1, :] + nu_a[1:, :]) / r_half  # (nz-1, nr)
    # axial edge (j,i)-(j+1,i), i=1..nr-1: dual edge at z_{j+1/2} crosses cells (j,i-1),(j,i)
    r_in = g.r_nodes[1:-1]
    cn = 0.5 * (nu_r[:, :-1] + nu_r[:, 1:]) / r_in  # (nz, nr-1)
    return ce, cn


def nodal_current(mg: MaterialGrid) -> np.ndarray:
    """Current (A) through each node's dual cell; every cell hands a quarter to each corner."""
    g = mg.grid
    J = mg.j_phi * (g.spacing ** 2 / 4)
    out = np.zeros((g.nz + 1, g.nr + 1))
    out[:-1, :-1] += J
    out[:-1, 1:] += J
    out[1:, :-1] += J
    out[1:, 1:] += J
    return out


def _locked_nodes(mg: MaterialGrid) -> np.ndarray:
    g = mg.grid
    out = np.zeros((g.nz + 1, g.nr + 1), dtype=bool)
    q = mg.flux_locked
    if q is not None and q.any():
        out[:-1, :-1] |= q
        out[:-1, 1:] |= q
        out[1:, :-1] |= q
        out[1:, 1:] |= q
    return out


def dirichlet_mask(mg: MaterialGrid) -> np.ndarray:
    """Nodes with prescribed psi: axis, outer boundary and every corner of a flux-quantised cell.

    A zero-field-cooled, uncut superconductor carries no net flux through any
    loop inside it, so ``psi = 0`` on its whole body.
    """
    fixed = _locked_nodes(mg)
    fixed[:, 0] = fixed[:, -1] = True
    fixed[0, :] = fixed[-1, :] = True
    return fixed


def assemble_full(mg: MaterialGrid) -> sp.csr_matrix:
    """Symmetric stiffness matrix over all grid nodes (row-major, z outer)."""
    g = mg.grid
    nr, nz = g.nr, g.nz
    ce, cn = _edge_coefficients(mg)
    idx = np.arange((nz + 1) * (nr + 1)).reshape(nz + 1, nr + 1)
    # radial edges on interior rows; axial edges off the axis and outer column
    a_nodes = [idx[1:-1, :-1].ravel(), idx[:-1, 1:-1].ravel()]
    b_nodes = [idx[1:-1, 1:].ravel(), idx[1:, 1:-1].ravel()]
    coef = [ce.ravel(), cn.ravel()]
    a = np.concatenate(a_nodes)
    b = np.concatenate(b_nodes)
    c = np.concatenate(coef)
    n = idx.size
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    vals = np.concatenate([c, c, -c, -c])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def assemble(mg: MaterialGrid, boundary_psi: np.ndarray | None = None):
    """Reduce the full system to the free nodes.

    Returns ``(K_ff, rhs, free_mask, psi_fixed)`` where ``psi_fixed`` holds the
    prescribed values (zero unless ``boundary_psi`` is given).
    """
    g = mg.grid
    K = assemble_full(mg)
    fixed = dirichlet_mask(mg)
    psi_fixed = np.zeros((g.nz + 1, g.nr + 1))
    if boundary_psi is not None:
        outer = np.zeros_like(fixed)
        outer[:, 0] = outer[:, -1] = outer[0, :] = outer[-1, :] = True
        # flux-quantised bodies keep psi = 0 even under an applied field
        outer &= ~_locked_nodes(mg)
        psi_fixed[outer] = boundary_psi[outer]
    free = ~fixed.ravel()
    K_ff = K[free][:, free].tocsr()
    rhs = nodal_current(mg).ravel()[free]
    if np.any(psi_fixed):
        rhs = rhs - K[free][:, ~free] @ psi_fixed.ravel()[~free]
    return K_ff, rhs, free.reshape(fixed.shape), psi_fixed


# -- iterative kernels ----------------------------------------------------

def _pcg(K, b, minv, tol, maxiter, w):
    """Preconditioned conjugate gradient; ``minv(r)`` applies the preconditioner.

    Convergence is judged on the weighted residual ``|w r| / |w b|``.
    """
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(w * b)
    r = b.copy()
    z = minv(r)
    p = z.copy()
    rz = r @ z
    history = [1.0]
    for it in range(1, maxiter + 1):
        Kp = K @ p
        alpha = rz / (p @ Kp)
        x += alpha * p
        r -= alpha * Kp
        res = np.linalg.norm(w * r) / bnorm
        history.append(res)
        if res <= tol:
            # guard against drift of the recursive residual
            true = np.linalg.norm(w * (b - K @ x)) / bnorm
            history[-1] = true
            if true <= tol:
                return x, it, history
            r = b - K @ x
        z = minv(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter, history


def _sor(K, b, colour, tol, maxiter, omega, w):
    """Red-black successive over-relaxation on the 5-point stencil."""
    red = np.flatnonzero(colour == 0)
    black = np.flatnonzero(colour == 1)
    d = K.diagonal()
    K_red = K[red]
    K_black = K[black]
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(w * b)
    history = [1.0]
    check_every = 10
    for it in range(1, maxiter + 1):
        for rows, Ks in ((red, K_red), (black, K_black)):
            res = b[rows] - Ks @ x
            x[rows] += omega * res / d[rows]
        if it % check_every == 0 or it == maxiter:
            rel = np.linalg.norm(w * (b - K @ x)) / bnorm
            history.append(rel)
            if rel <= tol:
                return x, it, history
    return x, maxiter, history


def residual_weights(K) -> np.ndarray:
    """``diag(K)^-1/2``: weights of the residual norm used for convergence.

    With permeability contrasts of 1e8 the plain residual of a double
    precision solution floors near 1e-10 (cancellation in the stiff
    superconducting rows); the symmetrically scaled residual does not.
    """
    return 1.0 / np.sqrt(K.diagonal())


def relative_residual(K, b, x) -> float:
    w = residual_weights(K)
    bnorm = np.linalg.norm(w * b)
    return float(np.linalg.norm(w * (b - K @ x)) / bnorm) if bnorm > 0 else 0.0


def _solve_linear(K, b, colour, opts: SolverOptions, cap: int):
    w = residual_weights(K)
    if not np.any(b):
        return np.zeros_like(b), 0, [0.0]
    if opts.method == "direct":
        x = spla.spsolve(K.tocsc(), b)
        return x, 1, [1.0, relative_residual(K, b, x)]
    if opts.method == "cg":
        d = K.diagonal()
        return _pcg(K, b, lambda r: r / d, opts.tolerance, cap, w)
    if opts.method == "amg":
        import pyamg

        # pyamg draws spectral-radius start vectors from the global numpy RNG;
        # pin it so repeated solves are bit-identical, and leave the caller's state alone
        state = np.random.get_state()
        try:
            np.random.seed(0)
            ml = pyamg.smoothed_aggregation_solver(K, symmetry="symmetric", max_coarse=500)
            M = ml.aspreconditioner(cycle="V")
        finally:
            np.random.set_state(state)
        return _pcg(K, b, lambda r: M @ r, opts.tolerance, cap, w)
    omega = opts.omega
    if omega is None:
        n = math.sqrt(b.size)
        omega = 2.0 / (1.0 + math.sin(math.pi / n))
    return _sor(K, b, colour, opts.tolerance, cap, omega, w)


def solve(mg: MaterialGrid, opts: SolverOptions | None = None, background_bz: float = 0.0) -> FieldSolution:
    """Solve for the flux function and derive nodal B.

    The reported ``residual_norm`` is ``|D^-1/2 (b - K x)| / |D^-1/2 b|`` with
    ``D = diag(K)``, see :func:`residual_weights`.

    ``background_bz`` imposes a uniform applied axial field through the outer
    boundary values ``psi = B0 r^2 / 2``.  Raises :class:`ConvergenceError`
    (carrying the residual history) when the relative residual stays above
    ``opts.tolerance``.
    """
    opts = opts or SolverOptions()
    g = mg.grid
    boundary = None
    if background_bz:
        boundary = np.broadcast_to(0.5 * background_bz * g.r_nodes ** 2, (g.nz + 1, g.nr + 1))
    K, b, free, psi = assemble(mg, boundary)
    jj, ii = np.nonzero(free)
    colour = (ii + jj) % 2
    cap = opts.iteration_cap(g)
    x, iterations, history = _solve_linear(K, b, colour, opts, cap)
    residual = relative_residual(K, b, x)
    if residual > opts.tolerance:
        raise ConvergenceError(
            f"{opts.method} solve stopped at relative residual {residual:.3e} after {iterations} iterations "
            f"(tolerance {opts.tolerance:.1e})",
            history,
        )
    psi = psi.copy()
    psi[free] = x
    b_r, b_z = nodal_field(g, psi)
    log.debug("solve(%s): %d iterations, residual %.3e", opts.method, iterations, residual)
    return FieldSolution(g, b_r, b_z, residual, iterations, PotentialField(g, psi), tuple(history))


def nodal_field(grid: GridSpec, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``b_r = -(1/r) dpsi/dz`` and ``b_z = (1/r) dpsi/dr`` at nodes.

    On the axis ``b_r = 0`` and ``b_z = 2 dA/dr``, using ``psi ~ a r^2 + c r^4``
    through the first two off-axis nodes.
    """
    h = grid.spacing
    r = grid.r_nodes
    dpsi_dr = np.gradient(psi, h, axis=1, edge_order=2)
    dpsi_dz = np.gradient(psi, h, axis=0, edge_order=2)
    b_z = np.zeros_like(psi)
    b_r = np.zeros_like(psi)
    b_z[:, 1:] = dpsi_dr[:, 1:] / r[1:]
    b_r[:, 1:] = -dpsi_dz[:, 1:] / r[1:]
    b_z[:, 0] = 2 * (16 * psi[:, 1] - psi[:, 2]) / (12 * h * h)
    return b_r, b_z


# -- post-processing ------------------------------------------------------

def _locate(grid: GridSpec, r: float, z: float) -> tuple[int, int, float, float]:
    h = grid.spacing
    tol = 1e-9 * h
    if not (-tol <= r <= grid.r_max + tol and grid.z_min - tol <= z <= grid.z_max + tol):
        raise RangeError(f"point ({r}, {z}) lies outside the grid")
    x = min(max(r / h, 0.0), grid.nr)
    y = min(max((z - grid.z_min) / h, 0.0), grid.nz)
    i = min(int(math.floor(x)), grid.nr - 1)
    j = min(int(math.floor(y)), grid.nz - 1)
    return i, j, x - i, y - j


def _bilinear(arr: np.ndarray, i: int, j: int, fx: float, fy: float) -> float:
    return float(
        (1 - fx) * (1 - fy) * arr[j, i]
        + fx * (1 - fy) * arr[j, i + 1]
        + (1 - fx) * fy * arr[j + 1, i]
        + fx * fy * arr[j + 1, i + 1]
    )


def probe(field: FieldSolution, point: tuple[float, float]) -> tuple[float, float]:
    """Bilinear interpolation of ``(b_r, b_z)`` at ``(r, z)``."""
    r, z = point
    i, j, fx, fy = _locate(field.grid, r, z)
    return _bilinear(field.b_r, i, j, fx, fy), _bilinear(field.b_z, i, j, fx, fy)


def flux_through_disk(field: FieldSolution, r_max: float, z: float, rule: str = "potential") -> float:
    """Axial magnetic flux (Wb) through the disk of radius ``r_max`` at height ``z``.

    ``rule="potential"`` reads ``2*pi*psi`` off the solution, which is the
    exact discrete flux; ``rule="trapezoid"`` integrates ``2*pi*b_z*r`` over
    the nodal samples.
    """
    if r_max < 0:
        raise RangeError("disk radius must be >= 0")
    if r_max == 0:
        _locate(field.grid, 0.0, z)
        return 0.0
    g = field.grid
    i, j, fx, fy = _locate(g, r_max, z)
    if rule == "potential":
        psi = field.psi
        # psi grows like r^2 near the axis, so interpolate linearly in r^2
        r0, r1 = g.r_nodes[i], g.r_nodes[i + 1]
        row = (1 - fy) * psi[j] + fy * psi[j + 1]
        t = (r_max ** 2 - r0 ** 2) / (r1 ** 2 - r0 ** 2)
        return float(2 * np.pi * ((1 - t) * row[i] + t * row[i + 1]))
    if rule == "trapezoid":
        row = (1 - fy) * field.b_z[j] + fy * field.b_z[j + 1]
        rs = g.r_nodes[: i + 1]
        vals = row[: i + 1] * rs
        edge = (1 - fx) * row[i] + fx * row[i + 1]
        rs = np.append(rs, r_max)
        vals = np.append(vals, edge * r_max)
        return float(2 * np.pi * np.trapezoid(vals, rs))
    raise ConfigurationError(f"unknown integration rule {rule!r}")


def lateral_flux(field: FieldSolution, r: float, z0: float, z1: float) -> float:
    """Outward flux through the cylinder of radius ``r`` between ``z0`` and ``z1`` (grid-aligned)."""
    g = field.grid
    h = g.spacing
    i = int(round(r / h))
    j0 = int(round((z0 - g.z_min) / h))
    j1 = int(round((z1 - g.z_min) / h))
    if i <= 0 or i > g.nr or not 0 <= j0 < j1 <= g.nz:
        raise RangeError("lateral surface must be grid aligned and inside the grid")
    psi = field.psi
    return float(-2 * np.pi * (psi[j1, i] - psi[j0, i]))


def field_energy(field: FieldSolution, mg: MaterialGrid) -> float:
    """``W = 1/2 sum (b_r h_r + b_z h_z) dV`` over cells, ``h = b / (mu0 mu_r)`` per direction."""
    g = field.grid
    br, bz = field.cell_fields()
    density = br ** 2 / (MU0 * mg.mu_radial) + bz ** 2 / (MU0 * mg.mu_axial)
    volume = 2 * np.pi * g.r_centers * g.spacing ** 2
    return float(0.5 * np.sum(density * volume[None, :]))


def flux_linkage(field: FieldSolution, mg: MaterialGrid) -> float:
    """``sum(I_node * 2*pi*psi_node)``: the coil's ampere-turn weighted flux."""
    return float(np.sum(nodal_current(mg) * 2 * np.pi * field.psi))


def inductance(field: FieldSolution, mg: MaterialGrid, current: float) -> float:
    """Self inductance ``2 W / I^2`` in henries."""
    if current == 0:
        raise DomainError("inductance needs a nonzero current")
    return 2 * field_energy(field, mg) / current ** 2


@dataclass(frozen=True)
class SaturationEntry:
    region: str
    max_b: float
    saturation_b: float
    saturated: bool


def saturation_report(field: FieldSolution, scene: Scene, mg: MaterialGrid | None = None) -> list[SaturationEntry]:
    """Max |B| in each ferromagnetic region against its saturation flux density.

    Only regions whose material defines ``saturation_b`` are reported.
    """
    g = field.grid
    br, bz = field.cell_fields()
    bmag = np.hypot(br, bz)
    rr, zz = np.meshgrid(g.r_centers, g.z_centers)
    out = []
    for reg in scene.solid_regions():
        m = reg.material
        if not m.is_ferromagnetic or m.saturation_b is None:
            continue
        mask = reg.contains(rr, zz)
        peak = float(bmag[mask].max()) if mask.any() else 0.0
        out.append(SaturationEntry(reg.name, peak, m.saturation_b, peak > m.saturation_b))
    return out


@dataclass(frozen=True)
class HoleFluxCheck:
    z: float
    hole_flux: float  # Wb through the whole wall opening
    core_flux: float  # Wb through the core cross-section alone

    @property
    def ratio(self) -> float:
        return abs(self.hole_flux) / abs(self.core_flux) if self.core_flux else float("inf")


def hole_flux_check(field: FieldSolution, scene: Scene) -> HoleFluxCheck | None:
    """Net flux through the wall opening against the core's flux, at mid-wall."""
    if scene.wall is None:
        return None
    z = 0.5 * (scene.wall.z_min + scene.wall.z_max)
    core = next((reg for reg in scene.regions if reg.name == "core"), None)
    core_flux = flux_through_disk(field, core.r_out, z) if core is not None else 0.0
    return HoleFluxCheck(z, flux_through_disk(field, scene.wall.r_in, z), core_flux)


def line_profile(field: FieldSolution, z: float, r_max: float, n: int = 101) -> tuple[np.ndarray, np.ndarray]:
    """``(r, b_z)`` sampled on ``n`` points of the radial line at height ``z``."""
    r = np.linspace(0.0, r_max, n)
    bz = np.array([probe(field, (x, z))[1] for x in r])
    return r, bz


# -- convergence ----------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    spacing: float
    value: float
    order: float | None  # Richardson estimate from this and the two coarser values
    error_order: float | None = None  # log2 ratio of errors against a reference value


def richardson_order(coarse: float, medium: float, fine: float, ratio: float = 2.0) -> float:
    d1 = coarse - medium
    d2 = medium - fine
    if d2 == 0 or d1 == 0 or d1 * d2 < 0:
        return float("nan")
    return math.log(abs(d1 / d2)) / math.log(ratio)


def convergence_study(
    scene: Scene,
    spacings: Sequence[float],
    probe_name: str | None = None,
    component: str = "b_z",
    opts: SolverOptions | None = None,
    reference: float | None = None,
    min_cells: float = 2,
) -> list[ConvergenceRow]:
    """Solve ``scene`` at each spacing and estimate the observed order of accuracy."""
    spacings = [float(s) for s in spacings]
    if len(spacings) < 3:
        raise ConfigurationError("convergence study needs at least three spacings")
    if any(b >= a for a, b in zip(spacings, spacings[1:])):
        raise ConfigurationError("spacings must be strictly decreasing")
    pr = scene.probes[0] if probe_name is None else scene.probe(probe_name)
    values = []
    for h in spacings:
        mg = rasterize(scene, GridSpec.covering(scene.domain, h), min_cells=min_cells)
        sol = solve(mg, opts)
        b_r, b_z = probe(sol, (pr.r, pr.z))
        values.append(b_z if component == "b_z" else b_r)
    rows = []
    for k, (h, v) in enumerate(zip(spacings, values)):
        order = None
        err_order = None
        if k >= 2:
            ratio = spacings[k - 1] / spacings[k]
            order = richardson_order(values[k - 2], values[k - 1], v, ratio)
        if k >= 1 and reference is not None:
            e0 = abs(values[k - 1] - reference)
            e1 = abs(v - reference)
            if e0 > 0 and e1 > 0:
                err_order = math.log(e0 / e1) / math.log(spacings[k - 1] / h)
        rows.append(ConvergenceRow(h, v, order, err_order))
    return rows


# -- export ---------------------------------------------------------------

def _g(x) -> str:
    return format(float(x), ".17g")


def write_field_csv(field: FieldSolution, path) -> None:
    """Row-major (z outer, r inner) ``r,z,b_r,b_z`` table in SI units."""
    g = field.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "z", "b_r", "b_z"])
        r = g.r_nodes
        for j, z in enumerate(g.z_nodes):
            for i in range(g.nr + 1):
                w.writerow([_g(r[i]), _g(z), _g(field.b_r[j, i]), _g(field.b_z[j, i])])


def summary(field: FieldSolution, scene: Scene) -> dict:
    out = {"residual_norm": field.residual_norm, "iterations": field.iterations, "probes": {}}
    for p in scene.probes:
        b_r, b_z = probe(field, (p.r, p.z))
        out["probes"][p.name] = {"r": p.r, "z": p.z, "b_r": b_r, "b_z": b_z}
    return out


def write_summary_json(data: dict, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
