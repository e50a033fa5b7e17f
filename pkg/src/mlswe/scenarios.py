"""Built-in simulation scenarios.

Each scenario builder assembles a complete RunSetup: equation
parameters, grid or curvilinear geometry, initial field, stabilization
thresholds, optional forcing, and run controls. Builders take keyword
overrides so the config layer can change degree, end time, mesh size
and similar knobs without touching the definitions here.

Initial conditions are layered lake-at-rest fills unless a scenario
says otherwise: given target top elevations H_1 >= H_2 >= ... >= H_M,
layer m gets h_m = max(H_m - max(b, H_{m+1}), 0), so layers vanish
smoothly wherever the bottom rises through them.
"""

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .dgsem import FieldDG1, FieldDG2, GridDG1, build_grid_dg1
from .equations import EquationSpec, ModelError, total_layer_heights
from .geometry import Geometry2D, build_geometry, make_structured_mesh, sine_warp
from .sources import (
    MANUFACTURED_V,
    MANUFACTURED_W,
    manufactured_bottom,
    manufactured_source,
    manufactured_state,
)
from .stabilization import Thresholds


@dataclass
class Gauge:
    """Pointwise water height probe, sampled at the nearest grid node."""

    label: str
    x: float


@dataclass
class RunSetup:
    """Everything the driver needs to run one scenario."""

    name: str
    spec: EquationSpec
    grid: object  # GridDG1 (1D) or Geometry2D (2D)
    field: object  # FieldDG1 or FieldDG2
    t_end: float
    cfl: float = 0.9
    fixed_dt: Optional[float] = None
    thresholds: Thresholds = dc_field(default_factory=Thresholds)
    use_indicator: bool = True
    dissipation: bool = True
    source: Optional[Callable] = None  # (u, t) -> du/dt contribution
    manning_n: float = 0.0  # semi-implicit friction when > 0
    gauges: Sequence[Gauge] = ()
    exact: Optional[Callable] = None  # (t) -> nodal state array
    reference_tops: Optional[np.ndarray] = None  # rest-state layer tops

    def __post_init__(self):
        if self.t_end <= 0.0:
            raise ModelError("t_end must be positive")
        if self.fixed_dt is None and not 0.0 < self.cfl <= 1.0:
            raise ModelError("cfl must lie in (0, 1]")
        if self.fixed_dt is not None and self.fixed_dt <= 0.0:
            raise ModelError("fixed_dt must be positive")
        if self.reference_tops is None:
            self.reference_tops = total_layer_heights(
                self.field.u[..., 0], self.field.b
            )

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def ops(self):
        return self.grid.ops


def lar_heights(tops, b):
    """Lake-at-rest layer heights for top elevations tops[..., m].

    tops must be non-increasing along the layer axis. Dry layers come
    out exactly 0.0 so interface snapping sees clean zeros.
    """
    tops = np.asarray(tops, dtype=float)
    b = np.asarray(b, dtype=float)
    M = tops.shape[-1]
    h = np.empty(np.broadcast_shapes(tops.shape[:-1], b.shape) + (M,))
    floor = b
    for m in range(M - 1, -1, -1):
        h[..., m] = np.maximum(tops[..., m] - floor, 0.0)
        floor = np.maximum(floor, tops[..., m])
    return h


def _cos_bump(x, center, width, height):
    """C1 compact bump: height * cos^2(pi s / 2) on |s| < 1, else 0."""
    s = np.abs(np.asarray(x, dtype=float) - center) / width
    return np.where(s < 1.0, height * np.cos(0.5 * np.pi * s) ** 2, 0.0)


# ---------------------------------------------------------------------------
# scenario builders


def build_convergence3layer(n_deg=6, t_end=0.1, dt=1e-4, nx=4, ny=4,
                            warp_amplitude=0.1):
    """Smooth three-layer manufactured solution on a warped periodic box.

    The forcing keeps the prescribed space-time solution exact, so the
    L2 error against it measures the discretization error directly.
    Runs with a fixed step and the indicator off; the solution is
    smooth and fully wet.
    """
    spec = EquationSpec(M=3, g=1.1, rho=np.array([0.9, 1.0, 1.1]), dim=2)
    mesh = make_structured_mesh(
        nx, ny, 0.0, 1.0, 0.0, 1.0, bcx="periodic", bcy="periodic",
        warp=sine_warp(0.0, 1.0, 0.0, 1.0, warp_amplitude),
    )
    geo = build_geometry(mesh, n_deg)
    x, y = geo.x, geo.y
    b = manufactured_bottom(x, y)
    u0 = manufactured_state(x, y, 0.0)

    def source(u, t):
        return manufactured_source(x, y, t, spec)

    def exact(t):
        return manufactured_state(x, y, t)

    return RunSetup(
        name="convergence3layer",
        spec=spec,
        grid=geo,
        field=FieldDG2(u0, b),
        t_end=t_end,
        fixed_dt=dt,
        cfl=0.9,
        use_indicator=False,
        source=source,
        exact=exact,
    )


# wb2layer bottom profile: five compact features on [0, 25] covering
# every wetting regime against rest levels H = (1.0, 0.6):
#   x=3   crest 0.75  pierces the lower layer, upper layer stays wet
#   x=6   crest 1.35  island above the free surface
#   x=9   crest 1.25  second island; [6, 9] encloses a narrow basin
#   x=14  crest 0.45  fully submerged hump
#   x=18  crest 0.93  nearly emergent, thin upper layer on top
# The basin between the islands is kept short on purpose: piecewise
# linear elements barely damp long standing waves (face jumps shrink
# quadratically with wavenumber), so a wide basin would ring for many
# thousands of time units while a ~3 m one settles by t ~ 400.
_WB2_FEATURES = (
    (3.0, 1.5, 0.75),
    (6.0, 1.0, 1.35),
    (9.0, 1.0, 1.25),
    (14.0, 1.5, 0.45),
    (18.0, 1.5, 0.93),
)
WB2_TOPS = (1.0, 0.6)


def wb2layer_bottom(x):
    x = np.asarray(x, dtype=float)
    b = np.zeros_like(x)
    for center, width, height in _WB2_FEATURES:
        b += _cos_bump(x, center, width, height)
    return b


def build_wb2layer(variant="steady", t_end=1000.0, n_deg=1, ne=100, cfl=0.7,
                   perturbation=0.005):
    """Two-layer rest state over a wet/dry bottom, steady or perturbed.

    The perturbed variant displaces the internal interface inside the
    closed basin between the two islands with a pair of opposite-sign
    bumps (free surface initially flat), so numerical dissipation must
    return the state to rest. The bumps sit mirror symmetric about the
    node at x = 7.5, which cancels their discrete layer masses exactly;
    any residual imbalance would park the settled interface a hair away
    from the reference level and show up as a permanent error floor.
    """
    if variant not in ("steady", "perturbed"):
        raise ModelError(f"unknown wb2layer variant {variant!r}")
    spec = EquationSpec(M=2, g=1.0, rho=np.array([1.0, 3.0]), dim=1)
    grid = build_grid_dg1(ne, 0.0, 25.0, n_deg, bc="wall")
    x = grid.node_coords()
    b = wb2layer_bottom(x)
    tops = np.broadcast_to(np.asarray(WB2_TOPS), x.shape + (2,))
    h = lar_heights(tops, b)
    reference_tops = total_layer_heights(h, b)
    if variant == "perturbed":
        delta = _cos_bump(x, 7.125, 0.35, perturbation) - _cos_bump(
            x, 7.875, 0.35, perturbation
        )
        h = h.copy()
        h[..., 1] += delta
        h[..., 0] -= delta  # keep the free surface flat
        if np.any(h < 0.0):
            raise ModelError("perturbation amplitude exceeds layer depth")
    u = np.zeros(h.shape + (2,))
    u[..., 0] = h
    return RunSetup(
        name="wb2layer",
        spec=spec,
        grid=grid,
        field=FieldDG1(u, b),
        t_end=t_end,
        cfl=cfl,
        reference_tops=reference_tops,
    )


# raised-bottom elements of the curvilinear three-layer rest test,
# keyed by one-based (column, row) position in the 4x4 mesh
_WB3_OFFSETS = {(3, 3): 0.1, (2, 3): 0.5, (2, 2): 1.0, (3, 2): 1.5}


def build_wb3layerCurvi(n_deg=6, t_end=200.0, cfl=1.0, nx=4, ny=4,
                        warp_amplitude=0.1):
    """Three-layer rest state on a warped mesh with per-element bottom
    shifts large enough to dry out every layer somewhere."""
    spec = EquationSpec(M=3, g=1.1, rho=np.array([0.9, 1.0, 1.1]), dim=2)
    mesh = make_structured_mesh(
        nx, ny, 0.0, 1.0, 0.0, 1.0, bcx="periodic", bcy="periodic",
        warp=sine_warp(0.0, 1.0, 0.0, 1.0, warp_amplitude),
    )
    geo = build_geometry(mesh, n_deg)
    x, y = geo.x, geo.y
    b = 0.2 + 0.1 * np.sin(2.0 * np.pi * x) + 0.1 * np.cos(2.0 * np.pi * y)
    for (ci, rj), shift in _WB3_OFFSETS.items():
        if ci <= nx and rj <= ny:
            b[mesh.element_id(ci - 1, rj - 1)] += shift
    tops = np.broadcast_to(np.array([1.5, 1.0, 0.5]), b.shape + (3,))
    h = lar_heights(tops, b)
    u = np.zeros(h.shape + (3,))
    u[..., 0] = h
    return RunSetup(
        name="wb3layerCurvi",
        spec=spec,
        grid=geo,
        field=FieldDG2(u, b),
        t_end=t_end,
        cfl=cfl,
    )


def triangular_bottom(x):
    """6 m wide, 0.4 m tall triangular obstacle with its crest at 28.5."""
    x = np.asarray(x, dtype=float)
    return 0.4 * np.maximum(1.0 - np.abs(x - 28.5) / 3.0, 0.0)


def build_triangularDamBreak(t_end=40.0, n_deg=4, ne=128, cfl=0.7,
                             manning_n=0.0125):
    """Single-layer dam break over a triangular obstacle with friction.

    A 0.75 m reservoir behind a gate at x = 15.5 collapses onto a dry
    floor, overtops the obstacle and refills the 0.15 m pool behind it.
    Gauge probes sit 4, 10, 13 and 20 m downstream of the gate; the one
    on the crest (G13) sees the overtopping events.
    """
    spec = EquationSpec(M=1, g=9.81, rho=np.array([1.0]), dim=1)
    grid = build_grid_dg1(ne, 0.0, 38.0, n_deg, bc="wall")
    x = grid.node_coords()
    b = triangular_bottom(x)
    surface = np.where(x <= 15.5, 0.75, np.where(x >= 28.5, 0.15, 0.0))
    h = np.maximum(surface - b, 0.0)
    u = np.zeros(h.shape + (1, 2))
    u[..., 0, 0] = h
    gauges = (
        Gauge("G4", 19.5),
        Gauge("G10", 25.5),
        Gauge("G13", 28.5),
        Gauge("G20", 35.5),
    )
    return RunSetup(
        name="triangularDamBreak",
        spec=spec,
        grid=grid,
        field=FieldDG1(u, b),
        t_end=t_end,
        cfl=cfl,
        manning_n=manning_n,
        gauges=gauges,
    )


def build_mlDamBreak2D(t_end=2.0, n_deg=4, nx=20, ny=20, cfl=0.9,
                       warp_amplitude=0.1, vel_x=MANUFACTURED_V,
                       vel_y=MANUFACTURED_W):
    """Three-layer dam break onto a dry half-plane with a central mound.

    The left half starts filled to layered levels (1.0, 0.8, 0.6), the
    right half bone dry; a Gaussian mound pierces all three layers.
    Velocity desingularization runs with a loosened threshold to keep
    momentum recovery stable at the advancing front.
    """
    spec = EquationSpec(M=3, g=9.81, rho=np.array([0.9, 0.95, 1.0]), dim=2)
    mesh = make_structured_mesh(
        nx, ny, -1.0, 1.0, -1.0, 1.0, bcx="wall", bcy="wall",
        warp=sine_warp(-1.0, 1.0, -1.0, 1.0, warp_amplitude),
    )
    geo = build_geometry(mesh, n_deg)
    x, y = geo.x, geo.y
    b = 1.4 * np.exp(-10.0 * (x**2 + y**2))
    wet = x < 0.0
    tops = np.where(
        wet[..., None], np.array([1.0, 0.8, 0.6]), np.zeros(3)
    )
    h = lar_heights(tops, b)
    u = np.zeros(h.shape + (3,))
    u[..., 0] = h
    u[..., 1] = vel_x * h  # dry nodes have h = 0, so momenta stay 0
    u[..., 2] = vel_y * h
    return RunSetup(
        name="mlDamBreak2D",
        spec=spec,
        grid=geo,
        field=FieldDG2(u, b),
        t_end=t_end,
        cfl=cfl,
        thresholds=Thresholds(tau_vel=1e-6),
    )


@dataclass(frozen=True)
class ScenarioInfo:
    builder: Callable
    summary: str


SCENARIOS = {
    "convergence3layer": ScenarioInfo(
        build_convergence3layer,
        "smooth 3-layer manufactured solution, warped periodic box, "
        "fixed dt, for convergence sweeps",
    ),
    "wb2layer": ScenarioInfo(
        build_wb2layer,
        "1D 2-layer rest state over islands and humps, steady or "
        "perturbed variant, wall boundaries",
    ),
    "wb3layerCurvi": ScenarioInfo(
        build_wb3layerCurvi,
        "2D 3-layer rest state on warped mesh with discontinuous "
        "per-element bottom shifts and dry layers",
    ),
    "triangularDamBreak": ScenarioInfo(
        build_triangularDamBreak,
        "1D dam break over a triangular obstacle with Manning friction "
        "and gauge probes",
    ),
    "mlDamBreak2D": ScenarioInfo(
        build_mlDamBreak2D,
        "2D 3-layer dam break onto a dry half with a mound piercing "
        "the surface, wall boundaries",
    ),
}


def get_scenario(name, **overrides) -> RunSetup:
    """Build a scenario by name with keyword overrides."""
    try:
        info = SCENARIOS[name]
    except KeyError:
        known = ", ".join(sorted(SCENARIOS))
        raise ModelError(f"unknown scenario {name!r}; available: {known}")
    try:
        return info.builder(**overrides)
    except TypeError as exc:
        raise ModelError(f"bad override for scenario {name!r}: {exc}")


def list_scenarios():
    """(name, summary) pairs in registry order."""
    return [(name, info.summary) for name, info in SCENARIOS.items()]
