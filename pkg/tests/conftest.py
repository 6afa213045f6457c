import numpy as np
import pytest
from scipy import integrate, special

from hosesim import magnetostatics as ms
from hosesim.constants import MU0
from hosesim.geometry import CoilSpec, Domain, GridSpec, build_paper_scene, rasterize, vacuum_scene


def solenoid_axis_bz(coil: CoilSpec, z: float) -> float:
    """On-axis field of a finite current sheet (closed form)."""
    n = coil.turns / coil.length
    a = z - coil.z_min
    b = z - coil.z_max
    R = coil.radius
    return 0.5 * MU0 * n * coil.current * (a / np.hypot(R, a) - b / np.hypot(R, b))


def loop_field(a: float, rho: float, z: float) -> tuple[float, float]:
    """``(b_r, b_z)`` per ampere of a circular loop of radius ``a`` at the origin."""
    s = (a + rho) ** 2 + z * z
    m = 4 * a * rho / s
    K = special.ellipk(m)
    E = special.ellipe(m)
    q = (a - rho) ** 2 + z * z
    bz = MU0 / (2 * np.pi) / np.sqrt(s) * (K + (a * a - rho * rho - z * z) / q * E)
    br = 0.0 if rho == 0 else MU0 / (2 * np.pi) * z / (rho * np.sqrt(s)) * (-K + (a * a + rho * rho + z * z) / q * E)
    return br, bz


def sheet_field(coil: CoilSpec, rho: float, z: float) -> tuple[float, float]:
    """Current-sheet solenoid field at any point by integrating loops along its length."""
    n = coil.turns / coil.length * coil.current
    out = []
    for comp in (0, 1):
        val, _ = integrate.quad(lambda zc: loop_field(coil.radius, rho, z - zc)[comp], coil.z_min, coil.z_max,
                                limit=200)
        out.append(n * val)
    return out[0], out[1]


def nagaoka_inductance(coil: CoilSpec) -> float:
    """Self inductance of a uniform current sheet via Nagaoka's coefficient."""
    R, ell = coil.radius, coil.length
    k2 = 4 * R * R / (4 * R * R + ell * ell)
    k = np.sqrt(k2)
    kp = np.sqrt(1 - k2)
    K = special.ellipk(k2)
    E = special.ellipe(k2)
    kn = 4 / (3 * np.pi * kp) * ((kp ** 2 / k2) * (K - E) + E - k)
    return MU0 * coil.turns ** 2 * np.pi * R * R / ell * kn


class Solved:
    def __init__(self, scene, spacing, min_cells=2):
        self.scene = scene
        self.grid = GridSpec.covering(scene.domain, spacing)
        self.mg = rasterize(scene, self.grid, min_cells=min_cells)
        self.field = ms.solve(self.mg)


@pytest.fixture(scope="session")
def device_solved():
    """The built device at 10 mA on a 50 um grid."""
    return Solved(build_paper_scene(), 50e-6)


@pytest.fixture(scope="session")
def device_coil_vacuum():
    """The device's coil alone on the same default domain and grid."""
    coil = build_paper_scene().coil
    return Solved(vacuum_scene(coil, build_paper_scene().domain), 50e-6)


@pytest.fixture(scope="session")
def small_coil_scene():
    coil = CoilSpec(10, 1.3e-3, 4e-3, 0.0, 10e-3)
    return vacuum_scene(coil, Domain(6e-3, -8e-3, 8e-3))


# one PASS/FAIL line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
