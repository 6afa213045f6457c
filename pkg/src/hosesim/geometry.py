"""Axisymmetric description of the hose, coil, cavity wall and probe points.

Coordinates are cylindrical ``(r, z)`` in metres with ``z`` along the hose
axis.  The cavity occupies ``z > cavity_wall_z``; the coil sits on the
opposite side, inside the overhang of the outermost superconducting shell.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import ConfigurationError, ResolutionError


@dataclass(frozen=True)
class Material:
    name: str
    mu_r_axial: float
    mu_r_radial: float
    saturation_b: float | None = None
    # uncut bulk superconductor: the solver pins zero flux through it instead of
    # relying on the small permeability alone
    flux_quantized: bool = False

    def __post_init__(self):
        if self.flux_quantized and max(self.mu_r_axial, self.mu_r_radial) >= 1.0:
            raise ConfigurationError(f"material {self.name!r}: only superconductors can be flux quantized")
        for label, mu in (("mu_r_axial", self.mu_r_axial), ("mu_r_radial", self.mu_r_radial)):
            if not (math.isfinite(mu) and mu > 0):
                raise ConfigurationError(f"material {self.name!r}: {label} must be positive and finite, got {mu}")
        if self.saturation_b is not None and not self.saturation_b > 0:
            raise ConfigurationError(f"material {self.name!r}: saturation_b must be > 0")

    @classmethod
    def isotropic(cls, name: str, mu_r: float, saturation_b: float | None = None) -> "Material":
        return cls(name, mu_r, mu_r, saturation_b)

    @property
    def is_isotropic(self) -> bool:
        return self.mu_r_axial == self.mu_r_radial

    @property
    def is_ferromagnetic(self) -> bool:
        return max(self.mu_r_axial, self.mu_r_radial) > 1.0

    @property
    def is_superconducting(self) -> bool:
        return max(self.mu_r_axial, self.mu_r_radial) < 1.0


VACUUM = Material.isotropic("vacuum", 1.0)
# Static approximations: superconductor as mu_r -> 0, mu-metal as mu_r -> large.
MU_METAL = Material.isotropic("mu_metal", 1e4, saturation_b=0.8)
ALUMINIUM = Material.isotropic("aluminium", 1e-4)
ALUMINIUM_BULK = Material("aluminium_bulk", 1e-4, 1e-4, flux_quantized=True)

KNOWN_MATERIALS = {m.name: m for m in (VACUUM, MU_METAL, ALUMINIUM, ALUMINIUM_BULK)}


def effective_hose_material(layers: Iterable[tuple[float, Material]], name: str = "hose_effective") -> Material:
    """Homogenised permeability of a finely layered coaxial stack.

    Along the axis the layers act in parallel (thickness-weighted arithmetic
    mean of mu); across the layers they act in series (weighted harmonic
    mean).  For alternating 1e4 / 1e-4 shells this gives the strongly
    anisotropic medium the hose is meant to approximate.
    """
    pairs = [(float(t), m) for t, m in layers]
    if not pairs:
        raise ConfigurationError("effective_hose_material needs at least one layer")
    total = sum(t for t, _ in pairs)
    axial = sum(t * m.mu_r_axial for t, m in pairs) / total
    radial = total / sum(t / m.mu_r_radial for t, m in pairs)
    return Material(name, axial, radial)


@dataclass(frozen=True)
class Region:
    """Annulus ``r_in <= r < r_out`` (a disk when ``r_in == 0``) spanning ``[z_min, z_max)``."""

    r_in: float
    r_out: float
    z_min: float
    z_max: float
    material: Material
    name: str = ""

    def __post_init__(self):
        if not (self.r_in >= 0 and self.r_in < self.r_out):
            raise ConfigurationError(f"region {self.name!r}: need 0 <= r_in < r_out, got {self.r_in}, {self.r_out}")
        if not self.z_min < self.z_max:
            raise ConfigurationError(f"region {self.name!r}: need z_min < z_max, got {self.z_min}, {self.z_max}")

    @property
    def shape(self) -> str:
        return "disk" if self.r_in == 0 else "annulus"

    @property
    def thickness(self) -> float:
        return self.r_out - self.r_in

    @property
    def length(self) -> float:
        return self.z_max - self.z_min

    def overlaps(self, other: "Region") -> bool:
        """True when the two interiors intersect (touching boundaries do not count)."""
        return (
            self.r_in < other.r_out
            and other.r_in < self.r_out
            and self.z_min < other.z_max
            and other.z_min < self.z_max
        )

    def contains(self, r, z):
        r = np.asarray(r)
        z = np.asarray(z)
        return (r >= self.r_in) & (r < self.r_out) & (z >= self.z_min) & (z < self.z_max)


@dataclass(frozen=True)
class Layer:
    """One coaxial shell.  ``extension`` protrudes past the hose tip into the cavity."""

    thickness: float
    material: Material
    length: float
    extension: float = 0.0


@dataclass(frozen=True)
class HoseSpec:
    core_radius: float
    layers: tuple[Layer, ...]
    cavity_wall_z: float
    core_length: float = 10e-3
    core_material: Material = MU_METAL

    def __post_init__(self):
        if not self.core_radius > 0:
            raise ConfigurationError(f"core_radius must be > 0, got {self.core_radius}")
        if not self.core_length > 0:
            raise ConfigurationError(f"core_length must be > 0, got {self.core_length}")
        for k, layer in enumerate(self.layers):
            if not (layer.thickness > 0 and layer.length > 0 and layer.extension >= 0):
                raise ConfigurationError(f"layer {k}: thickness and length must be > 0, extension >= 0")
        # shells alternate, the first one differing in kind from the ferromagnetic core
        previous_ferro = self.core_material.is_ferromagnetic
        if not previous_ferro:
            raise ConfigurationError("hose core must be ferromagnetic")
        for k, layer in enumerate(self.layers):
            ferro = layer.material.is_ferromagnetic
            if ferro == previous_ferro or not (ferro or layer.material.is_superconducting):
                raise ConfigurationError(
                    f"layer {k} ({layer.material.name}) breaks the ferromagnet/superconductor alternation"
                )
            previous_ferro = ferro
        if self.layers:
            outer = self.layers[-1].length
            if any(layer.length > outer for layer in self.layers[:-1]) or self.core_length > outer:
                raise ConfigurationError("outermost layer must be at least as long as every inner layer")

    @property
    def tip_z(self) -> float:
        return self.cavity_wall_z

    @property
    def outer_radius(self) -> float:
        r = self.core_radius
        for layer in self.layers:
            r += layer.thickness
        return r

    @property
    def shell_overhang(self) -> float:
        """How far the outermost shell reaches past the inner stack on the coil side."""
        if not self.layers:
            return 0.0
        inner = max([self.core_length] + [layer.length for layer in self.layers[:-1]])
        return self.layers[-1].length - inner

    @property
    def inner_entrance_z(self) -> float:
        """Coil-side end of the longest inner (non-outermost) element."""
        inner = max([self.core_length] + [layer.length for layer in self.layers[:-1]])
        return self.tip_z - inner

    def regions(self) -> list[Region]:
        out = [Region(0.0, self.core_radius, self.tip_z - self.core_length, self.tip_z, self.core_material, "core")]
        r = self.core_radius
        counts: dict[str, int] = {}
        for layer in self.layers:
            counts[layer.material.name] = counts.get(layer.material.name, 0) + 1
            name = f"{layer.material.name} shell {counts[layer.material.name]}"
            out.append(
                Region(r, r + layer.thickness, self.tip_z - layer.length, self.tip_z + layer.extension,
                       layer.material, name)
            )
            r += layer.thickness
        return out


@dataclass(frozen=True)
class CoilSpec:
    """Solenoid with ``turns`` windings on mean radius ``radius``.

    ``thickness`` is the radial depth of the winding pack; zero means a
    current sheet.
    """

    turns: int
    radius: float
    length: float
    center_z: float
    current: float
    thickness: float = 0.0

    def __post_init__(self):
        if self.turns < 1:
            raise ConfigurationError(f"coil needs at least one turn, got {self.turns}")
        if not (self.radius > 0 and self.length > 0):
            raise ConfigurationError("coil radius and length must be > 0")
        if not (0 <= self.thickness < 2 * self.radius):
            raise ConfigurationError("coil thickness must lie in [0, 2*radius)")

    @property
    def z_min(self) -> float:
        return self.center_z - self.length / 2

    @property
    def z_max(self) -> float:
        return self.center_z + self.length / 2

    @property
    def ampere_turns(self) -> float:
        return self.turns * self.current

    def with_current(self, current: float) -> "CoilSpec":
        return replace(self, current=current)


@dataclass(frozen=True)
class Probe:
    name: str
    r: float
    z: float


@dataclass(frozen=True)
class Domain:
    r_max: float
    z_min: float
    z_max: float

    def __post_init__(self):
        if not (self.r_max > 0 and self.z_min < self.z_max):
            raise ConfigurationError("domain needs r_max > 0 and z_min < z_max")

    def contains_region(self, reg: Region) -> bool:
        return reg.r_out <= self.r_max and reg.z_min >= self.z_min and reg.z_max <= self.z_max


@dataclass(frozen=True)
class Scene:
    regions: tuple[Region, ...]
    coil: CoilSpec
    wall: Region | None
    probes: tuple[Probe, ...]
    domain: Domain
    hose_outer_radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "probes", tuple(self.probes))
        solids = self.solid_regions()
        for a in range(len(solids)):
            for b in range(a + 1, len(solids)):
                if solids[a].overlaps(solids[b]):
                    raise ConfigurationError(f"regions {solids[a].name!r} and {solids[b].name!r} overlap")
        for reg in solids:
            if not self.domain.contains_region(reg):
                raise ConfigurationError(f"region {reg.name!r} extends outside the domain")
        c = self.coil
        if c.radius + c.thickness / 2 > self.domain.r_max or c.z_min < self.domain.z_min or c.z_max > self.domain.z_max:
            raise ConfigurationError("coil extends outside the domain")
        if self.wall is not None and self.wall.r_in < self.hose_outer_radius:
            raise ConfigurationError(
                f"wall hole radius {self.wall.r_in} is smaller than the hose radius {self.hose_outer_radius}"
            )
        for p in self.probes:
            if not (0 <= p.r <= self.domain.r_max and self.domain.z_min <= p.z <= self.domain.z_max):
                raise ConfigurationError(f"probe {p.name!r} lies outside the domain")

    def solid_regions(self) -> list[Region]:
        return list(self.regions) + ([self.wall] if self.wall is not None else [])

    @property
    def hole_radius(self) -> float | None:
        return None if self.wall is None else self.wall.r_in

    def probe(self, name: str) -> Probe:
        for p in self.probes:
            if p.name == name:
                return p
        raise KeyError(name)

    def with_current(self, current: float) -> "Scene":
        return replace(self, coil=self.coil.with_current(current))

    def with_domain(self, domain: Domain) -> "Scene":
        wall = self.wall
        if wall is not None:
            wall = replace(wall, r_out=domain.r_max)
        return replace(self, domain=domain, wall=wall)

    # -- serialisation -------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        materials = {}
        for reg in self.solid_regions():
            materials[reg.material.name] = _material_to_dict(reg.material)

        def reg_dict(reg):
            return {"name": reg.name, "r_in": reg.r_in, "r_out": reg.r_out,
                    "z_min": reg.z_min, "z_max": reg.z_max, "material": reg.material.name}

        c = self.coil
        return {
            "materials": materials,
            "regions": [reg_dict(r) for r in self.regions],
            "coil": {"turns": c.turns, "radius": c.radius, "length": c.length,
                     "center_z": c.center_z, "current": c.current, "thickness": c.thickness},
            "wall": None if self.wall is None else reg_dict(self.wall),
            "probes": [{"name": p.name, "r": p.r, "z": p.z} for p in self.probes],
            "domain": {"r_max": self.domain.r_max, "z_min": self.domain.z_min, "z_max": self.domain.z_max,
                       "hose_outer_radius": self.hose_outer_radius},
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "Scene":
        _reject_unknown(doc, {"materials", "regions", "coil", "wall", "probes", "domain"}, "scene")
        materials = dict(KNOWN_MATERIALS)
        for name, m in (doc.get("materials") or {}).items():
            _reject_unknown(m, {"mu_r_axial", "mu_r_radial", "saturation_b", "flux_quantized"}, f"material {name!r}")
            materials[name] = Material(name, float(m["mu_r_axial"]), float(m["mu_r_radial"]),
                                       None if m.get("saturation_b") is None else float(m["saturation_b"]),
                                       bool(m.get("flux_quantized", False)))

        def region(d, label):
            _reject_unknown(d, {"name", "r_in", "r_out", "z_min", "z_max", "material"}, label)
            try:
                mat = materials[d["material"]]
            except KeyError:
                raise ConfigurationError(f"{label}: unknown material {d.get('material')!r}") from None
            return Region(float(d.get("r_in", 0.0)), float(d["r_out"]), float(d["z_min"]), float(d["z_max"]),
                          mat, str(d.get("name", "")))

        try:
            coil_doc = doc["coil"]
            dom_doc = doc["domain"]
        except KeyError as exc:
            raise ConfigurationError(f"scene is missing the {exc.args[0]!r} section") from None
        _reject_unknown(coil_doc, {"turns", "radius", "length", "center_z", "current", "thickness"}, "coil")
        _reject_unknown(dom_doc, {"r_max", "z_min", "z_max", "hose_outer_radius"}, "domain")
        regions = [region(d, f"region {k}") for k, d in enumerate(doc.get("regions") or [])]
        wall = region(doc["wall"], "wall") if doc.get("wall") else None
        probes = []
        for k, p in enumerate(doc.get("probes") or []):
            _reject_unknown(p, {"name", "r", "z"}, f"probe {k}")
            probes.append(Probe(str(p.get("name", f"probe{k}")), float(p["r"]), float(p["z"])))
        try:
            coil = CoilSpec(int(coil_doc["turns"]), float(coil_doc["radius"]), float(coil_doc["length"]),
                            float(coil_doc["center_z"]), float(coil_doc.get("current", 0.0)),
                            float(coil_doc.get("thickness", 0.0)))
            domain = Domain(float(dom_doc["r_max"]), float(dom_doc["z_min"]), float(dom_doc["z_max"]))
        except KeyError as exc:
            raise ConfigurationError(f"scene is missing field {exc.args[0]!r}") from None
        return cls(regions, coil, wall, probes, domain, float(dom_doc.get("hose_outer_radius", 0.0)))

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load_json(cls, path) -> "Scene":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(doc)


def _material_to_dict(m: Material) -> dict[str, Any]:
    return {"mu_r_axial": m.mu_r_axial, "mu_r_radial": m.mu_r_radial, "saturation_b": m.saturation_b,
            "flux_quantized": m.flux_quantized}


def _reject_unknown(doc: Mapping[str, Any], allowed: set[str], label: str) -> None:
    if not isinstance(doc, Mapping):
        raise ConfigurationError(f"{label}: expected an object")
    extra = sorted(set(doc) - allowed)
    if extra:
        raise ConfigurationError(f"{label}: unknown field(s) {', '.join(extra)}")


# -- the device as built -------------------------------------------------

# Shell stack from the core outwards.  The four ferromagnetic elements are the
# 1 mm core wire plus three mu-metal shells; this puts the inner face of the
# outermost aluminium shell at r = 1.5 mm (a 3 mm bore).
DEVICE_LAYERS = (
    Layer(200e-6, ALUMINIUM, 10e-3),
    Layer(100e-6, MU_METAL, 10e-3),
    Layer(200e-6, ALUMINIUM, 10e-3),
    Layer(100e-6, MU_METAL, 10e-3),
    Layer(200e-6, ALUMINIUM, 10e-3),
    Layer(200e-6, MU_METAL, 10e-3),
    Layer(200e-6, ALUMINIUM, 20e-3),
)

DEVICE_DEFAULTS: dict[str, Any] = {
    "core_radius": 0.5e-3,
    "core_length": 10e-3,
    "layers": DEVICE_LAYERS,
    "wall_z": 0.0,
    "wall_thickness": 2e-3,  # assumed; not given
    "hole_radius": None,  # None: flush with the hose's outer radius
    "coil_turns": 10,
    # 10 turns over 4 mm implies 0.4 mm wire; inside a 3 mm bore that puts
    # the mean winding radius at 1.3 mm.
    "coil_radius": 1.3e-3,
    "coil_length": 4e-3,
    "coil_thickness": 0.0,
    "coil_gap": 0.0,  # axial gap between coil and the inner stack
    "coil_current": 10e-3,
    # Assumed qubit distance past the wall.  Not given; 5 mm is where the
    # centre/side field ratio of this model matches the ~5x measured locality.
    "probe_offset": 5e-3,
    "side_offset": 3e-3,
    "r_max": 25e-3,
    "z_half_span": 30e-3,
}


def _coerce_layers(value) -> tuple[Layer, ...]:
    layers = []
    for k, item in enumerate(value):
        if isinstance(item, Layer):
            layers.append(item)
            continue
        if not isinstance(item, Mapping):
            raise ConfigurationError(f"layer {k}: expected an object")
        _reject_unknown(item, {"thickness", "material", "length", "extension"}, f"layer {k}")
        mat = item["material"]
        if isinstance(mat, str):
            try:
                mat = KNOWN_MATERIALS[mat]
            except KeyError:
                raise ConfigurationError(f"layer {k}: unknown material {mat!r}") from None
        layers.append(Layer(float(item["thickness"]), mat, float(item["length"]), float(item.get("extension", 0.0))))
    return tuple(layers)


def build_paper_scene(overrides: Mapping[str, Any] | None = None) -> Scene:
    """Assemble the hose + coil + wall configuration of the built device.

    ``overrides`` may replace any key of :data:`DEVICE_DEFAULTS`; unknown keys
    raise :class:`ConfigurationError`.
    """
    params = dict(DEVICE_DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ConfigurationError(f"unknown scene parameter {key!r}")
        params[key] = value
    layers = _coerce_layers(params["layers"])
    for key in ("core_radius", "core_length", "wall_thickness", "coil_radius", "coil_length", "r_max", "z_half_span"):
        if not float(params[key]) > 0:
            raise ConfigurationError(f"{key} must be > 0, got {params[key]}")

    hose = HoseSpec(float(params["core_radius"]), layers, float(params["wall_z"]), float(params["core_length"]))
    regions = hose.regions()

    wall_z = hose.cavity_wall_z
    r_max = float(params["r_max"])
    half = float(params["z_half_span"])
    domain = Domain(r_max, wall_z - half, wall_z + half)
    hole = hose.outer_radius if params["hole_radius"] is None else float(params["hole_radius"])
    wall = Region(hole, r_max, wall_z - float(params["wall_thickness"]), wall_z, ALUMINIUM_BULK, "cavity wall")

    length = float(params["coil_length"])
    coil = CoilSpec(
        turns=int(params["coil_turns"]),
        radius=float(params["coil_radius"]),
        length=length,
        center_z=hose.inner_entrance_z - float(params["coil_gap"]) - length / 2,
        current=float(params["coil_current"]),
        thickness=float(params["coil_thickness"]),
    )
    z_probe = wall_z + float(params["probe_offset"])
    probes = (Probe("central", 0.0, z_probe), Probe("side", float(params["side_offset"]), z_probe))
    return Scene(tuple(regions), coil, wall, probes, domain, hose_outer_radius=hose.outer_radius)


def vacuum_scene(coil: CoilSpec, domain: Domain, probes: Iterable[Probe] = ()) -> Scene:
    """A bare coil in empty space, centred probes by default."""
    probes = tuple(probes) or (Probe("center", 0.0, coil.center_z),)
    return Scene((), coil, None, probes, domain)


# -- rasterisation -------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``nr x nz`` square cells starting at ``r = 0, z = z_min``."""

    nr: int
    nz: int
    spacing: float
    z_min: float = 0.0

    def __post_init__(self):
        if not self.spacing > 0:
            raise ConfigurationError(f"grid spacing must be > 0, got {self.spacing}")
        if self.nr < 2 or self.nz < 2:
            raise ConfigurationError("grid needs at least 2 cells in each direction")

    @classmethod
    def covering(cls, domain: Domain, spacing: float) -> "GridSpec":
        nr = int(math.ceil(domain.r_max / spacing - 1e-9))
        nz = int(math.ceil((domain.z_max - domain.z_min) / spacing - 1e-9))
        return cls(nr, nz, spacing, domain.z_min)

    @property
    def r_max(self) -> float:
        return self.nr * self.spacing

    @property
    def z_max(self) -> float:
        return self.z_min + self.nz * self.spacing

    @property
    def r_nodes(self) -> np.ndarray:
        return np.arange(self.nr + 1) * self.spacing

    @property
    def z_nodes(self) -> np.ndarray:
        return self.z_min + np.arange(self.nz + 1) * self.spacing

    @property
    def r_centers(self) -> np.ndarray:
        return (np.arange(self.nr) + 0.5) * self.spacing

    @property
    def z_centers(self) -> np.ndarray:
        return self.z_min + (np.arange(self.nz) + 0.5) * self.spacing


@dataclass(frozen=True)
class MaterialGrid:
    """Cell-centred permeabilities and azimuthal source current density.

    Arrays have shape ``(nz, nr)``: rows follow ``z``, columns follow ``r``.
    ``region_index`` is -1 for vacuum, otherwise an index into ``region_names``.
    """

    grid: GridSpec
    mu_axial: np.ndarray
    mu_radial: np.ndarray
    j_phi: np.ndarray
    region_index: np.ndarray
    region_names: tuple[str, ...] = ()
    coil_current: float = 0.0
    flux_locked: np.ndarray | None = None  # (nz, nr) cells of flux-quantised material

    @property
    def cell_area(self) -> float:
        return self.grid.spacing ** 2

    def total_ampere_turns(self) -> float:
        return float(self.j_phi.sum() * self.cell_area)


def _check_resolution(scene: Scene, h: float, min_cells: float) -> None:
    too_thin = []
    for reg in scene.solid_regions():
        cells = min(reg.thickness, reg.length) / h
        if cells < min_cells * (1 - 1e-9):
            too_thin.append((min(reg.thickness, reg.length), reg))
    if too_thin:
        too_thin.sort(key=lambda item: item[0])
        names = ", ".join(f"{reg.name} ({size * 1e6:.0f} um)" for size, reg in too_thin)
        raise ResolutionError(
            f"grid spacing {h * 1e6:.1f} um resolves fewer than {min_cells} cells across: {names}"
        )


def _overlap(lo: np.ndarray, hi: np.ndarray, a: float, b: float) -> np.ndarray:
    return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)


def coil_current_density(coil: CoilSpec, grid: GridSpec) -> np.ndarray:
    """Azimuthal current density per cell, summing to exactly ``turns * current``."""
    h = grid.spacing
    zn = grid.z_nodes
    wz = _overlap(zn[:-1], zn[1:], coil.z_min, coil.z_max) / coil.length
    # packs far thinner than a cell are treated as a sheet, which also avoids
    # overlaps that vanish in rounding
    if coil.thickness > 1e-6 * h:
        rn = grid.r_nodes
        wr = _overlap(rn[:-1], rn[1:], coil.radius - coil.thickness / 2, coil.radius + coil.thickness / 2)
        wr = wr / coil.thickness
    else:
        # current sheet: split linearly between the two cell columns whose
        # centres bracket the radius, so the mean radius is preserved
        wr = np.zeros(grid.nr)
        x = coil.radius / h - 0.5
        k = int(math.floor(x))
        frac = x - k
        if k < 0:
            wr[0] = 1.0
        elif k >= grid.nr - 1:
            wr[grid.nr - 1] = 1.0
        else:
            wr[k] = 1.0 - frac
            wr[k + 1] = frac
    wr = wr / wr.sum()
    wz = wz / wz.sum()
    return np.outer(wz, wr) * (coil.ampere_turns / (h * h))


def rasterize(scene: Scene, grid: GridSpec, min_cells: float = 2) -> MaterialGrid:
    """Map the scene onto ``grid`` by cell-centre sampling.

    Raises :class:`ResolutionError` when any region is thinner than
    ``min_cells`` cells.
    """
    if grid.r_max < scene.domain.r_max * (1 - 1e-12) or grid.z_min > scene.domain.z_min + 1e-12 \
            or grid.z_max < scene.domain.z_max - 1e-12:
        raise ConfigurationError("grid does not cover the scene domain")
    h = grid.spacing
    _check_resolution(scene, h, min_cells)

    rr, zz = np.meshgrid(grid.r_centers, grid.z_centers)
    mu_a = np.ones((grid.nz, grid.nr))
    mu_r = np.ones((grid.nz, grid.nr))
    index = np.full((grid.nz, grid.nr), -1, dtype=np.int32)
    locked = np.zeros((grid.nz, grid.nr), dtype=bool)
    solids = scene.solid_regions()
    for k, reg in enumerate(solids):
        mask = reg.contains(rr, zz)
        mu_a[mask] = reg.material.mu_r_axial
        mu_r[mask] = reg.material.mu_r_radial
        index[mask] = k
        if reg.material.flux_quantized:
            locked |= mask
    j_phi = coil_current_density(scene.coil, grid)
    return MaterialGrid(grid, mu_a, mu_r, j_phi, index, tuple(r.name for r in solids), scene.coil.current,
                        locked if locked.any() else None)


# -- design sweep ----------------------------------------------------------

def _dense_layers(inner_length: float) -> list[dict[str, Any]]:
    # ten alternating 100 um shells fill the same radial span as the built
    # stack; the outer aluminium shell keeps its 10 mm overhang
    layers = [{"thickness": 100e-6, "material": "aluminium" if k % 2 == 0 else "mu_metal", "length": inner_length}
              for k in range(10)]
    layers.append({"thickness": 200e-6, "material": "aluminium", "length": inner_length + 10e-3})
    return layers


def _winding(r_in: float, r_out: float, length: float, wire: float = 0.4e-3) -> dict[str, Any]:
    """Coil overrides for a winding pack at the wire density of the built coil."""
    thickness = r_out - r_in
    return {
        "coil_radius": 0.5 * (r_in + r_out),
        "coil_thickness": thickness,
        "coil_length": length,
        "coil_turns": max(1, int(round(length * max(thickness, wire) / wire ** 2))),
    }


SWEEP_DOMAIN = {"r_max": 10e-3, "z_half_span": 40e-3}

# Three hose/coil designs of increasing strength, all driven at the same
# current with the same 0.4 mm wire.  The coil packs were chosen by scanning
# the winding extent with this solver.
DESIGN_VARIANTS: tuple[tuple[str, dict[str, Any]], ...] = (
    ("baseline", dict(SWEEP_DOMAIN)),
    ("dense_elongated", dict(SWEEP_DOMAIN, layers=_dense_layers(15e-3), core_length=15e-3,
                             **_winding(0.7e-3, 1.5e-3, 4e-3))),
    ("dense_elongated_optimized_coil", dict(SWEEP_DOMAIN, layers=_dense_layers(15e-3), core_length=15e-3,
                                            **_winding(0.1e-3, 1.5e-3, 4e-3))),
)


def design_variants() -> list[tuple[str, Scene]]:
    return [(name, build_paper_scene(ov)) for name, ov in DESIGN_VARIANTS]
