"""First-order path-conservative finite volume scheme on 1D grids.

Surface terms only: the volume integral of the nonconservative product
vanishes for piecewise constant data, so each cell update is assembled
purely from face fluxes and diamond terms.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .equations import DRY_FLOOR, EquationSpec, LayerState
from .kernels import FACE_WORK_ROWS, face_flux

BC_PERIODIC = 0
BC_WALL = 1

DT_MAX_DEFAULT = 1.0e3


class SolverError(Exception):
    pass


@dataclass
class Grid1D:
    """Uniform 1D grid with K cells of width dx starting at x0."""

    K: int
    dx: float
    x0: float = 0.0
    bc: str = "periodic"

    def __post_init__(self):
        if self.K < 2 or self.dx <= 0.0:
            raise SolverError("grid needs K >= 2 and dx > 0")
        if self.bc not in ("periodic", "wall"):
            raise SolverError(f"unknown boundary condition {self.bc!r}")

    @property
    def cell_centers(self):
        return self.x0 + self.dx * (np.arange(self.K) + 0.5)

    @property
    def bc_code(self) -> int:
        return BC_PERIODIC if self.bc == "periodic" else BC_WALL


@dataclass
class FieldFV:
    """Cell data: u[K, M, 2] conserved variables and b[K] bottom."""

    u: np.ndarray
    b: np.ndarray

    def copy(self) -> "FieldFV":
        return FieldFV(u=self.u.copy(), b=self.b.copy())


def wall_boundary(trace: LayerState, n=1.0) -> LayerState:
    """Mirror ghost state: heights and bottom copied, normal momentum
    negated (tangential kept). Yields zero mass flux through the wall."""
    ghost = trace.copy()
    if trace.hw is None:
        ghost.hv = -ghost.hv
    else:
        nn = np.asarray(n, dtype=float)
        qn = trace.hv * nn[..., 0:1] + trace.hw * nn[..., 1:2]
        ghost.hv = trace.hv - 2.0 * qn * nn[..., 0:1]
        ghost.hw = trace.hw - 2.0 * qn * nn[..., 1:2]
    return ghost


@njit(cache=True)
def _accumulate_face(
    iL, iR, hL, qL, bL, hR, qR, bR, g, rho, sigma, inv_dx, wrk, F, dL, dR, zt, out_h, out_hv
):
    """Solve one face and scatter the update into the adjacent cells.

    iL or iR set to -1 marks a ghost side that receives no update.
    """
    face_flux(g, rho, sigma, hL, qL, zt, bL, hR, qR, zt, bR, wrk, F, dL, dR)
    M = hL.shape[0]
    if iL >= 0:
        for m in range(M):
            out_h[iL, m] -= inv_dx * F[m, 0]
            out_hv[iL, m] -= inv_dx * (F[m, 1] + dL[m])
    if iR >= 0:
        for m in range(M):
            out_h[iR, m] += inv_dx * F[m, 0]
            out_hv[iR, m] += inv_dx * (F[m, 1] - dR[m])


@njit(cache=True)
def _rhs_fv_kernel(h, hv, b, g, rho, sigma, dx, bc_code, out_h, out_hv):
    K, M = h.shape
    wrk = np.empty((FACE_WORK_ROWS, M))
    F = np.empty((M, 3))
    dL = np.empty(M)
    dR = np.empty(M)
    zt = np.zeros(M)
    ghq = np.empty(M)

    out_h[:, :] = 0.0
    out_hv[:, :] = 0.0
    inv_dx = 1.0 / dx

    # interior faces between cells i-1 and i
    for i in range(1, K):
        _accumulate_face(
            i - 1, i, h[i - 1], hv[i - 1], b[i - 1], h[i], hv[i], b[i],
            g, rho, sigma, inv_dx, wrk, F, dL, dR, zt, out_h, out_hv,
        )

    if bc_code == BC_PERIODIC:
        _accumulate_face(
            K - 1, 0, h[K - 1], hv[K - 1], b[K - 1], h[0], hv[0], b[0],
            g, rho, sigma, inv_dx, wrk, F, dL, dR, zt, out_h, out_hv,
        )
    else:
        # mirror ghosts: same heights and bottom, negated momentum
        for m in range(M):
            ghq[m] = -hv[0, m]
        _accumulate_face(
            -1, 0, h[0], ghq, b[0], h[0], hv[0], b[0],
            g, rho, sigma, inv_dx, wrk, F, dL, dR, zt, out_h, out_hv,
        )
        for m in range(M):
            ghq[m] = -hv[K - 1, m]
        _accumulate_face(
            K - 1, -1, h[K - 1], hv[K - 1], b[K - 1], h[K - 1], ghq, b[K - 1],
            g, rho, sigma, inv_dx, wrk, F, dL, dR, zt, out_h, out_hv,
        )


def rhs_fv(field: FieldFV, spec: EquationSpec, grid: Grid1D):
    """Semi-discrete RHS du/dt for all cells, shaped like field.u."""
    h = np.ascontiguousarray(field.u[:, :, 0])
    hv = np.ascontiguousarray(field.u[:, :, 1])
    out_h = np.empty_like(h)
    out_hv = np.empty_like(hv)
    _rhs_fv_kernel(
        h, hv, field.b, spec.g, spec.rho, spec.sigma, grid.dx, grid.bc_code, out_h, out_hv
    )
    if not (np.all(np.isfinite(out_h)) and np.all(np.isfinite(out_hv))):
        bad = np.argwhere(~(np.isfinite(out_h) & np.isfinite(out_hv)))
        raise SolverError(f"non-finite RHS in cell {bad[0][0]}")
    out = np.empty_like(field.u)
    out[:, :, 0] = out_h
    out[:, :, 1] = out_hv
    return out


def max_stable_dt_fv(
    field: FieldFV,
    spec: EquationSpec,
    grid: Grid1D,
    cfl: float = 1.0,
    dt_max: float = DT_MAX_DEFAULT,
):
    """Positivity time step bound cfl * dx / (2 lambda_max)."""
    h = field.u[:, :, 0]
    hv = field.u[:, :, 1]
    hsum = np.sum(h, axis=1)
    wet = hsum > spec.M * DRY_FLOOR
    vmean = np.abs(np.where(wet, np.sum(hv, axis=1) / np.where(wet, hsum, 1.0), 0.0))
    hwet = np.where(h > DRY_FLOOR, h, 1.0)
    vlay = np.max(np.abs(np.where(h > DRY_FLOOR, hv / hwet, 0.0)), axis=1)
    lam = np.maximum(vmean, vlay) + np.sqrt(spec.g * np.maximum(hsum, 0.0))
    lam_max = float(np.max(lam))
    if lam_max <= 0.0:
        return dt_max
    return min(cfl * grid.dx / (2.0 * lam_max), dt_max)
