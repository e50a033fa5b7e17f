"""Structured curvilinear quadrilateral meshes and DGSEM metric terms.

Meshes are logically Cartesian (nx by ny quads). Element nodal
coordinates come from bilinear interpolation of the element's corner
vertices, optionally pushed through a smooth warp map evaluated
directly at the solution-degree LGL nodes. Shared edges receive
identical physical points either way, so meshes are watertight and the
two elements at a face compute identical surface metrics.

Metric vectors are the J-scaled contravariant basis
    Ja1 = (y_eta, -x_eta),   Ja2 = (-y_xi, x_xi),
computed with the tensor-product derivative matrix. Because the xi and
eta derivatives commute on the nodal coordinate arrays, the discrete
metric identity d_xi(Ja1) + d_eta(Ja2) = 0 holds to machine precision,
which is what free-stream preservation rests on.

The subcell finite volume scheme uses staggered metrics on subcell
interfaces, built by integrating the metric derivative with the LGL
weights; the SBP column sums make them telescope exactly to the element
boundary values of Ja1 / Ja2.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .operators import LGLOperators, build_lgl

WEST, EAST, SOUTH, NORTH = 0, 1, 2, 3

# neighbor side seen from the other element
OPPOSITE = {WEST: EAST, EAST: WEST, SOUTH: NORTH, NORTH: SOUTH}


class MeshError(Exception):
    pass


@dataclass
class Mesh2D:
    """Structured quad mesh: vertex grids vx, vy of shape (nx+1, ny+1).

    bcx/bcy choose the boundary handling per axis: 'periodic' or 'wall'.
    warp, if set, maps coordinate arrays (X, Y) to warped (x, y) and is
    applied to nodal points at geometry build time (isoparametric to the
    solution degree); the stored vertices stay unwarped in that case.
    """

    nx: int
    ny: int
    vx: np.ndarray
    vy: np.ndarray
    bcx: str = "wall"
    bcy: str = "wall"
    warp: Optional[Callable] = None

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise MeshError("need at least one element per direction")
        if self.vx.shape != (self.nx + 1, self.ny + 1) or self.vy.shape != self.vx.shape:
            raise MeshError("vertex arrays must have shape (nx+1, ny+1)")
        for bc in (self.bcx, self.bcy):
            if bc not in ("periodic", "wall"):
                raise MeshError(f"unknown boundary condition {bc!r}")

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    def element_id(self, i: int, j: int) -> int:
        return j * self.nx + i


def make_structured_mesh(
    nx, ny, x0=0.0, x1=1.0, y0=0.0, y1=1.0, bcx="wall", bcy="wall", warp=None
) -> Mesh2D:
    """Uniform nx-by-ny mesh of [x0,x1] x [y0,y1], optionally warped."""
    gx = np.linspace(x0, x1, nx + 1)
    gy = np.linspace(y0, y1, ny + 1)
    vx, vy = np.meshgrid(gx, gy, indexing="ij")
    return Mesh2D(nx=nx, ny=ny, vx=vx, vy=vy, bcx=bcx, bcy=bcy, warp=warp)


def sine_warp(x0, x1, y0, y1, amplitude=0.1):
    """Smooth interior warp that vanishes on the domain boundary.

    Displaces normalized coordinates (s, t) by
        s += a sin(pi s) sin(2 pi t),  t += a sin(2 pi s) sin(pi t),
    then maps back. Boundary edges stay straight, so periodic wrap
    faces on opposite sides remain geometric mirror copies.
    """
    lx = x1 - x0
    ly = y1 - y0

    def warp(X, Y):
        s = (np.asarray(X, dtype=float) - x0) / lx
        t = (np.asarray(Y, dtype=float) - y0) / ly
        sw = s + amplitude * np.sin(np.pi * s) * np.sin(2.0 * np.pi * t)
        tw = t + amplitude * np.sin(2.0 * np.pi * s) * np.sin(np.pi * t)
        return x0 + lx * sw, y0 + ly * tw

    return warp


def write_mesh_text(mesh: Mesh2D, path):
    """Plain text mesh: first line 'nx ny', then (nx+1)*(ny+1) vertex
    lines 'x y', looping j = 0..ny outer and i = 0..nx inner (row
    major). Warps are baked into the written vertices."""
    vx, vy = mesh.vx, mesh.vy
    if mesh.warp is not None:
        vx, vy = mesh.warp(vx, vy)
    with open(path, "w") as f:
        f.write(f"{mesh.nx} {mesh.ny}\n")
        for j in range(mesh.ny + 1):
            for i in range(mesh.nx + 1):
                f.write(f"{float(vx[i, j])!r} {float(vy[i, j])!r}\n")


def read_mesh_text(path, bcx="wall", bcy="wall") -> Mesh2D:
    """Parse the text format written by write_mesh_text."""
    with open(path) as f:
        tokens = f.read().split()
    if len(tokens) < 2:
        raise MeshError("mesh file too short")
    nx, ny = int(tokens[0]), int(tokens[1])
    need = 2 + 2 * (nx + 1) * (ny + 1)
    if len(tokens) != need:
        raise MeshError(
            f"expected {need} tokens for a {nx}x{ny} mesh, found {len(tokens)}"
        )
    vals = np.array(tokens[2:], dtype=float).reshape(ny + 1, nx + 1, 2)
    vx = vals[:, :, 0].T.copy()
    vy = vals[:, :, 1].T.copy()
    return Mesh2D(nx=nx, ny=ny, vx=vx, vy=vy, bcx=bcx, bcy=bcy)


@dataclass
class Geometry2D:
    """Per-element nodal geometry for one solution degree.

    Arrays are indexed [e, i, j] with i the xi index and j the eta
    index; e = j_el * nx + i_el. neighbors[e, side] holds the adjacent
    element id or -1 for a wall face.
    """

    mesh: Mesh2D
    ops: LGLOperators
    x: np.ndarray
    y: np.ndarray
    J: np.ndarray
    Ja1: np.ndarray
    Ja2: np.ndarray
    JA1s: np.ndarray
    JA2s: np.ndarray
    neighbors: np.ndarray
    element_size: np.ndarray = field(default=None)

    @property
    def N(self) -> int:
        return self.ops.N

    @property
    def n_elements(self) -> int:
        return self.x.shape[0]

    def metric_identity_residual(self):
        """max |d_xi Ja1 + d_eta Ja2| per element, both components."""
        D = self.ops.D
        res = np.einsum("il,eljc->eijc", D, self.Ja1) + np.einsum(
            "jl,eilc->eijc", D, self.Ja2
        )
        return np.max(np.abs(res), axis=(1, 2, 3))


def _element_nodes(mesh: Mesh2D, i: int, j: int, xi: np.ndarray):
    """Nodal physical coordinates of element (i, j) at LGL points xi."""
    s = 0.5 * (xi + 1.0)
    S, T = np.meshgrid(s, s, indexing="ij")
    c00x, c00y = mesh.vx[i, j], mesh.vy[i, j]
    c10x, c10y = mesh.vx[i + 1, j], mesh.vy[i + 1, j]
    c01x, c01y = mesh.vx[i, j + 1], mesh.vy[i, j + 1]
    c11x, c11y = mesh.vx[i + 1, j + 1], mesh.vy[i + 1, j + 1]
    X = (1 - S) * (1 - T) * c00x + S * (1 - T) * c10x + (1 - S) * T * c01x + S * T * c11x
    Y = (1 - S) * (1 - T) * c00y + S * (1 - T) * c10y + (1 - S) * T * c01y + S * T * c11y
    if mesh.warp is not None:
        X, Y = mesh.warp(X, Y)
    return X, Y


def build_geometry(mesh: Mesh2D, n_deg: int) -> Geometry2D:
    """Compute nodal coordinates, metrics, staggered subcell metrics,
    and the neighbor table for all elements."""
    ops = build_lgl(n_deg)
    P = n_deg + 1
    E = mesh.n_elements
    x = np.empty((E, P, P))
    y = np.empty((E, P, P))
    for j in range(mesh.ny):
        for i in range(mesh.nx):
            e = mesh.element_id(i, j)
            x[e], y[e] = _element_nodes(mesh, i, j, ops.nodes)

    # metric derivatives in extended precision: the metric identity (and
    # with it free-stream preservation) is limited by roundoff in D @ x,
    # so take the one-time hit of longdouble here and round once
    D = ops.D.astype(np.longdouble)
    xl = x.astype(np.longdouble)
    yl = y.astype(np.longdouble)
    x_xi = np.einsum("il,elj->eij", D, xl)
    x_eta = np.einsum("jl,eil->eij", D, xl)
    y_xi = np.einsum("il,elj->eij", D, yl)
    y_eta = np.einsum("jl,eil->eij", D, yl)

    J = (x_xi * y_eta - x_eta * y_xi).astype(float)
    if np.any(J <= 0.0):
        bad = int(np.argwhere(np.any(J <= 0.0, axis=(1, 2)))[0][0])
        raise MeshError(f"non-positive Jacobian in element {bad}; mesh is tangled")

    Ja1l = np.stack([y_eta, -x_eta], axis=-1)
    Ja2l = np.stack([-y_xi, x_xi], axis=-1)

    # staggered subcell interface metrics: start at the west/south
    # boundary value and integrate the metric derivative with the LGL
    # weights; SBP makes the last entry land on the east/north value
    dja1 = np.einsum("il,eljc->eijc", D, Ja1l)
    dja2 = np.einsum("jl,eilc->eijc", D, Ja2l)
    wl = ops.weights.astype(np.longdouble)
    JA1sl = np.empty((E, P + 1, P, 2), dtype=np.longdouble)
    JA2sl = np.empty((E, P, P + 1, 2), dtype=np.longdouble)
    JA1sl[:, 0] = Ja1l[:, 0]
    for k in range(P):
        JA1sl[:, k + 1] = JA1sl[:, k] + wl[k] * dja1[:, k]
    JA2sl[:, :, 0] = Ja2l[:, :, 0]
    for k in range(P):
        JA2sl[:, :, k + 1] = JA2sl[:, :, k] + wl[k] * dja2[:, :, k]
    Ja1 = Ja1l.astype(float)
    Ja2 = Ja2l.astype(float)
    JA1s = JA1sl.astype(float)
    JA2s = JA2sl.astype(float)

    neighbors = np.full((E, 4), -1, dtype=np.int64)
    for j in range(mesh.ny):
        for i in range(mesh.nx):
            e = mesh.element_id(i, j)
            if i > 0:
                neighbors[e, WEST] = mesh.element_id(i - 1, j)
            elif mesh.bcx == "periodic":
                neighbors[e, WEST] = mesh.element_id(mesh.nx - 1, j)
            if i < mesh.nx - 1:
                neighbors[e, EAST] = mesh.element_id(i + 1, j)
            elif mesh.bcx == "periodic":
                neighbors[e, EAST] = mesh.element_id(0, j)
            if j > 0:
                neighbors[e, SOUTH] = mesh.element_id(i, j - 1)
            elif mesh.bcy == "periodic":
                neighbors[e, SOUTH] = mesh.element_id(i, mesh.ny - 1)
            if j < mesh.ny - 1:
                neighbors[e, NORTH] = mesh.element_id(i, j + 1)
            elif mesh.bcy == "periodic":
                neighbors[e, NORTH] = mesh.element_id(i, 0)

    size = np.sqrt(np.einsum("ij,eij->e", np.outer(ops.weights, ops.weights), J))
    return Geometry2D(
        mesh=mesh,
        ops=ops,
        x=x,
        y=y,
        J=J,
        Ja1=Ja1,
        Ja2=Ja2,
        JA1s=JA1s,
        JA2s=JA2s,
        neighbors=neighbors,
        element_size=size,
    )
