"""Split-form nodal DG spectral element solver with subcell FV blending.

Layout: 1D fields are u[K, P, M, 2] (h, hv per layer) with nodal bottom
b[K, P]; 2D fields are u[E, P, P, M, 3] (h, hv, hw) with b[E, P, P],
indexed [element, xi node, eta node].

The right-hand side is assembled in two phases. The face phase computes
the entropy-stable flux with hydrostatic reconstruction once per face
and stores each element's OUTWARD surface flux (times the surface
Jacobian, rotated to xy components) in a buffer Fout. The element phase
then forms, per element,

  pure DG:  J du/dt = -[2 sum_l D_il F#(u_i,u_l).{Ja} + D_il Phi_i o
            (c_l - c_i).{Ja}] - (1/w_edge)(Fout - f(u_edge).Ja_out)

  subcell FV: J du/dt at subcell (i,j) = -[G_east + G_west]/w_i - eta
            analog, with interior subcell interfaces using the same face
            kernel on staggered metrics and the element-boundary
            subfaces reusing Fout verbatim,

and blends them nodewise with the element's alpha. Reusing Fout at the
element boundary makes an alpha=1 element literally the standalone
subcell FV scheme, and the staggered metrics telescope to the boundary
metric values, so free-stream preservation survives blending.

Volume two-point fluxes act on raw nodal states; reconstruction applies
only at true interfaces (element faces and subcell interfaces).
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .equations import EquationSpec, LayerState, entropy, safe_velocity
from .fv import DT_MAX_DEFAULT, SolverError
from .geometry import Geometry2D
from .kernels import FACE_WORK_ROWS, face_flux, vel
from .operators import LGLOperators, build_lgl


@dataclass
class GridDG1:
    """Uniform 1D element grid for the DG solver."""

    K: int
    dx: float
    ops: LGLOperators
    x0: float = 0.0
    bc: str = "periodic"

    def __post_init__(self):
        if self.K < 2:
            raise SolverError("need at least 2 elements")
        if self.dx <= 0.0:
            raise SolverError("dx must be positive")
        if self.bc not in ("periodic", "wall"):
            raise SolverError(f"unknown boundary condition {self.bc!r}")

    @property
    def P(self) -> int:
        return self.ops.N + 1

    def node_coords(self) -> np.ndarray:
        """Physical node coordinates, shape (K, P)."""
        left = self.x0 + self.dx * np.arange(self.K)
        return left[:, None] + 0.5 * (self.ops.nodes[None, :] + 1.0) * self.dx


def build_grid_dg1(K, x0, x1, n_deg, bc="periodic") -> GridDG1:
    return GridDG1(K=K, dx=(x1 - x0) / K, ops=build_lgl(n_deg), x0=x0, bc=bc)


@dataclass
class FieldDG1:
    u: np.ndarray  # (K, P, M, 2)
    b: np.ndarray  # (K, P)

    def copy(self) -> "FieldDG1":
        return FieldDG1(self.u.copy(), self.b.copy())


@dataclass
class FieldDG2:
    u: np.ndarray  # (E, P, P, M, 3)
    b: np.ndarray  # (E, P, P)

    def copy(self) -> "FieldDG2":
        return FieldDG2(self.u.copy(), self.b.copy())


@njit(cache=True)
def _node_coupling(h, bnode, sigma, c):
    # c_m = b + sum_{k>=m} h_k + sum_{k<m} sigma_km h_k
    M = h.shape[0]
    acc = bnode
    for m in range(M - 1, -1, -1):
        acc = acc + h[m]
        c[m] = acc
    for m in range(1, M):
        s = 0.0
        for k in range(m):
            s += sigma[k, m] * h[k]
        c[m] = c[m] + s


@njit(cache=True)
def _face_phase_1d(u, b, periodic, diss, g, rho, sigma, Fout):
    K = u.shape[0]
    P = u.shape[1]
    M = u.shape[2]
    wrk = np.empty((FACE_WORK_ROWS, M))
    F = np.empty((M, 3))
    dL = np.empty(M)
    dR = np.empty(M)
    zt = np.zeros(M)
    qneg = np.empty(M)

    for f in range(1, K):
        eL = f - 1
        face_flux(
            g, rho, sigma,
            u[eL, P - 1, :, 0], u[eL, P - 1, :, 1], zt, b[eL, P - 1],
            u[f, 0, :, 0], u[f, 0, :, 1], zt, b[f, 0],
            wrk, F, dL, dR, diss,
        )
        for m in range(M):
            Fout[eL, 1, m, 0] = F[m, 0]
            Fout[eL, 1, m, 1] = F[m, 1] + dL[m]
            Fout[f, 0, m, 0] = -F[m, 0]
            Fout[f, 0, m, 1] = -F[m, 1] + dR[m]

    if periodic:
        eL = K - 1
        face_flux(
            g, rho, sigma,
            u[eL, P - 1, :, 0], u[eL, P - 1, :, 1], zt, b[eL, P - 1],
            u[0, 0, :, 0], u[0, 0, :, 1], zt, b[0, 0],
            wrk, F, dL, dR, diss,
        )
        for m in range(M):
            Fout[eL, 1, m, 0] = F[m, 0]
            Fout[eL, 1, m, 1] = F[m, 1] + dL[m]
            Fout[0, 0, m, 0] = -F[m, 0]
            Fout[0, 0, m, 1] = -F[m, 1] + dR[m]
    else:
        # west wall: mirror ghost is the L side, inner trace the R side
        for m in range(M):
            qneg[m] = -u[0, 0, m, 1]
        face_flux(
            g, rho, sigma,
            u[0, 0, :, 0], qneg, zt, b[0, 0],
            u[0, 0, :, 0], u[0, 0, :, 1], zt, b[0, 0],
            wrk, F, dL, dR, diss,
        )
        for m in range(M):
            Fout[0, 0, m, 0] = -F[m, 0]
            Fout[0, 0, m, 1] = -F[m, 1] + dR[m]
        # east wall: inner trace is the L side
        for m in range(M):
            qneg[m] = -u[K - 1, P - 1, m, 1]
        face_flux(
            g, rho, sigma,
            u[K - 1, P - 1, :, 0], u[K - 1, P - 1, :, 1], zt, b[K - 1, P - 1],
            u[K - 1, P - 1, :, 0], qneg, zt, b[K - 1, P - 1],
            wrk, F, dL, dR, diss,
        )
        for m in range(M):
            Fout[K - 1, 1, m, 0] = F[m, 0]
            Fout[K - 1, 1, m, 1] = F[m, 1] + dL[m]


@njit(cache=True)
def _element_phase_1d(u, b, Fout, D, wts, jac, alpha, diss, g, rho, sigma, udot):
    K = u.shape[0]
    P = u.shape[1]
    M = u.shape[2]
    vnod = np.empty((P, M))
    cnod = np.empty((P, M))
    cbuf = np.empty(M)
    dg = np.empty((P, M, 2))
    fvu = np.empty((P, M, 2))
    wrk = np.empty((FACE_WORK_ROWS, M))
    F = np.empty((M, 3))
    dL = np.empty(M)
    dR = np.empty(M)
    zt = np.zeros(M)

    for e in range(K):
        a = alpha[e]
        for i in range(P):
            for m in range(M):
                vnod[i, m] = vel(u[e, i, m, 0], u[e, i, m, 1])
            _node_coupling(u[e, i, :, 0], b[e, i], sigma, cbuf)
            for m in range(M):
                cnod[i, m] = cbuf[m]

        if a < 1.0:
            for i in range(P):
                for m in range(M):
                    dg[i, m, 0] = 0.0
                    dg[i, m, 1] = 0.0
            # split-form volume: advective two-point flux + coupling term
            for i in range(P):
                for l in range(P):
                    dil = D[i, l]
                    for m in range(M):
                        f0 = 0.5 * (u[e, i, m, 1] + u[e, l, m, 1])
                        dg[i, m, 0] -= 2.0 * dil * f0
                        dg[i, m, 1] -= 2.0 * dil * f0 * 0.5 * (vnod[i, m] + vnod[l, m])
                        dg[i, m, 1] -= dil * g * u[e, i, m, 0] * (cnod[l, m] - cnod[i, m])
            # strong-form surface correction
            for m in range(M):
                q = u[e, 0, m, 1]
                dg[0, m, 0] -= (Fout[e, 0, m, 0] + q) / wts[0]
                dg[0, m, 1] -= (Fout[e, 0, m, 1] + q * vnod[0, m]) / wts[0]
                q = u[e, P - 1, m, 1]
                dg[P - 1, m, 0] -= (Fout[e, 1, m, 0] - q) / wts[P - 1]
                dg[P - 1, m, 1] -= (Fout[e, 1, m, 1] - q * vnod[P - 1, m]) / wts[P - 1]

        if a > 0.0:
            for i in range(P):
                for m in range(M):
                    fvu[i, m, 0] = 0.0
                    fvu[i, m, 1] = 0.0
            for k in range(1, P):
                face_flux(
                    g, rho, sigma,
                    u[e, k - 1, :, 0], u[e, k - 1, :, 1], zt, b[e, k - 1],
                    u[e, k, :, 0], u[e, k, :, 1], zt, b[e, k],
                    wrk, F, dL, dR, diss,
                )
                for m in range(M):
                    fvu[k - 1, m, 0] -= F[m, 0] / wts[k - 1]
                    fvu[k - 1, m, 1] -= (F[m, 1] + dL[m]) / wts[k - 1]
                    fvu[k, m, 0] += F[m, 0] / wts[k]
                    fvu[k, m, 1] -= (-F[m, 1] + dR[m]) / wts[k]
            for m in range(M):
                fvu[0, m, 0] -= Fout[e, 0, m, 0] / wts[0]
                fvu[0, m, 1] -= Fout[e, 0, m, 1] / wts[0]
                fvu[P - 1, m, 0] -= Fout[e, 1, m, 0] / wts[P - 1]
                fvu[P - 1, m, 1] -= Fout[e, 1, m, 1] / wts[P - 1]

        if a == 0.0:
            for i in range(P):
                for m in range(M):
                    udot[e, i, m, 0] = dg[i, m, 0] / jac
                    udot[e, i, m, 1] = dg[i, m, 1] / jac
        elif a == 1.0:
            for i in range(P):
                for m in range(M):
                    udot[e, i, m, 0] = fvu[i, m, 0] / jac
                    udot[e, i, m, 1] = fvu[i, m, 1] / jac
        else:
            for i in range(P):
                for m in range(M):
                    udot[e, i, m, 0] = ((1.0 - a) * dg[i, m, 0] + a * fvu[i, m, 0]) / jac
                    udot[e, i, m, 1] = ((1.0 - a) * dg[i, m, 1] + a * fvu[i, m, 1]) / jac


@njit(cache=True)
def _face_phase_2d(u, b, Ja1, Ja2, neighbors, diss, g, rho, sigma, Fout):
    E = u.shape[0]
    P = u.shape[1]
    M = u.shape[3]
    wrk = np.empty((FACE_WORK_ROWS, M))
    F = np.empty((M, 3))
    dL = np.empty(M)
    dR = np.empty(M)
    hLb = np.empty(M)
    qnL = np.empty(M)
    qtL = np.empty(M)
    hRb = np.empty(M)
    qnR = np.empty(M)
    qtR = np.empty(M)

    for e in range(E):
        # east faces; this element owns the face (periodic wrap included)
        other = neighbors[e, 1]
        for p in range(P):
            ax = Ja1[e, P - 1, p, 0]
            ay = Ja1[e, P - 1, p, 1]
            s = np.sqrt(ax * ax + ay * ay)
            nx = ax / s
            ny = ay / s
            for m in range(M):
                hLb[m] = u[e, P - 1, p, m, 0]
                qnL[m] = u[e, P - 1, p, m, 1] * nx + u[e, P - 1, p, m, 2] * ny
                qtL[m] = -u[e, P - 1, p, m, 1] * ny + u[e, P - 1, p, m, 2] * nx
            bL = b[e, P - 1, p]
            if other >= 0:
                for m in range(M):
                    hRb[m] = u[other, 0, p, m, 0]
                    qnR[m] = u[other, 0, p, m, 1] * nx + u[other, 0, p, m, 2] * ny
                    qtR[m] = -u[other, 0, p, m, 1] * ny + u[other, 0, p, m, 2] * nx
                bR = b[other, 0, p]
            else:
                for m in range(M):
                    hRb[m] = hLb[m]
                    qnR[m] = -qnL[m]
                    qtR[m] = qtL[m]
                bR = bL
            face_flux(g, rho, sigma, hLb, qnL, qtL, bL, hRb, qnR, qtR, bR,
                      wrk, F, dL, dR, diss)
            for m in range(M):
                gn = F[m, 1] + dL[m]
                gt = F[m, 2]
                Fout[e, 1, p, m, 0] = F[m, 0] * s
                Fout[e, 1, p, m, 1] = (gn * nx - gt * ny) * s
                Fout[e, 1, p, m, 2] = (gn * ny + gt * nx) * s
            if other >= 0:
                for m in range(M):
                    gn = -F[m, 1] + dR[m]
                    gt = -F[m, 2]
                    Fout[other, 0, p, m, 0] = -F[m, 0] * s
                    Fout[other, 0, p, m, 1] = (gn * nx - gt * ny) * s
                    Fout[other, 0, p, m, 2] = (gn * ny + gt * nx) * s

        # west wall face (interior/periodic west faces are written by the
        # west neighbor's east pass)
        if neighbors[e, 0] == -1:
            for p in range(P):
                ax = Ja1[e, 0, p, 0]
                ay = Ja1[e, 0, p, 1]
                s = np.sqrt(ax * ax + ay * ay)
                nx = ax / s
                ny = ay / s
                for m in range(M):
                    hRb[m] = u[e, 0, p, m, 0]
                    qnR[m] = u[e, 0, p, m, 1] * nx + u[e, 0, p, m, 2] * ny
                    qtR[m] = -u[e, 0, p, m, 1] * ny + u[e, 0, p, m, 2] * nx
                    hLb[m] = hRb[m]
                    qnL[m] = -qnR[m]
                    qtL[m] = qtR[m]
                bR = b[e, 0, p]
                face_flux(g, rho, sigma, hLb, qnL, qtL, bR, hRb, qnR, qtR, bR,
                          wrk, F, dL, dR, diss)
                for m in range(M):
                    gn = -F[m, 1] + dR[m]
                    gt = -F[m, 2]
                    Fout[e, 0, p, m, 0] = -F[m, 0] * s
                    Fout[e, 0, p, m, 1] = (gn * nx - gt * ny) * s
                    Fout[e, 0, p, m, 2] = (gn * ny + gt * nx) * s

        # north faces
        other = neighbors[e, 3]
        for p in range(P):
            ax = Ja2[e, p, P - 1, 0]
            ay = Ja2[e, p, P - 1, 1]
            s = np.sqrt(ax * ax + ay * ay)
            nx = ax / s
            ny = ay / s
            for m in range(M):
                hLb[m] = u[e, p, P - 1, m, 0]
                qnL[m] = u[e, p, P - 1, m, 1] * nx + u[e, p, P - 1, m, 2] * ny
                qtL[m] = -u[e, p, P - 1, m, 1] * ny + u[e, p, P - 1, m, 2] * nx
            bL = b[e, p, P - 1]
            if other >= 0:
                for m in range(M):
                    hRb[m] = u[other, p, 0, m, 0]
                    qnR[m] = u[other, p, 0, m, 1] * nx + u[other, p, 0, m, 2] * ny
                    qtR[m] = -u[other, p, 0, m, 1] * ny + u[other, p, 0, m, 2] * nx
                bR = b[other, p, 0]
            else:
                for m in range(M):
                    hRb[m] = hLb[m]
                    qnR[m] = -qnL[m]
                    qtR[m] = qtL[m]
                bR = bL
            face_flux(g, rho, sigma, hLb, qnL, qtL, bL, hRb, qnR, qtR, bR,
                      wrk, F, dL, dR, diss)
            for m in range(M):
                gn = F[m, 1] + dL[m]
                gt = F[m, 2]
                Fout[e, 3, p, m, 0] = F[m, 0] * s
                Fout[e, 3, p, m, 1] = (gn * nx - gt * ny) * s
                Fout[e, 3, p, m, 2] = (gn * ny + gt * nx) * s
            if other >= 0:
                for m in range(M):
                    gn = -F[m, 1] + dR[m]
                    gt = -F[m, 2]
                    Fout[other, 2, p, m, 0] = -F[m, 0] * s
                    Fout[other, 2, p, m, 1] = (gn * nx - gt * ny) * s
                    Fout[other, 2, p, m, 2] = (gn * ny + gt * nx) * s

        # south wall face
        if neighbors[e, 2] == -1:
            for p in range(P):
                ax = Ja2[e, p, 0, 0]
                ay = Ja2[e, p, 0, 1]
                s = np.sqrt(ax * ax + ay * ay)
                nx = ax / s
                ny = ay / s
                for m in range(M):
                    hRb[m] = u[e, p, 0, m, 0]
                    qnR[m] = u[e, p, 0, m, 1] * nx + u[e, p, 0, m, 2] * ny
                    qtR[m] = -u[e, p, 0, m, 1] * ny + u[e, p, 0, m, 2] * nx
                    hLb[m] = hRb[m]
                    qnL[m] = -qnR[m]
                    qtL[m] = qtR[m]
                bR = b[e, p, 0]
                face_flux(g, rho, sigma, hLb, qnL, qtL, bR, hRb, qnR, qtR, bR,
                          wrk, F, dL, dR, diss)
                for m in range(M):
                    gn = -F[m, 1] + dR[m]
                    gt = -F[m, 2]
                    Fout[e, 2, p, m, 0] = -F[m, 0] * s
                    Fout[e, 2, p, m, 1] = (gn * nx - gt * ny) * s
                    Fout[e, 2, p, m, 2] = (gn * ny + gt * nx) * s


@njit(cache=True)
def _element_phase_2d(u, b, J, Ja1, Ja2, JA1s, JA2s, D, wts, Fout, alpha,
                      diss, g, rho, sigma, udot):
    E = u.shape[0]
    P = u.shape[1]
    M = u.shape[3]
    vnod = np.empty((P, P, M))
    wnod = np.empty((P, P, M))
    cnod = np.empty((P, P, M))
    cbuf = np.empty(M)
    dg = np.empty((P, P, M, 3))
    fvu = np.empty((P, P, M, 3))
    wrk = np.empty((FACE_WORK_ROWS, M))
    F = np.empty((M, 3))
    dL = np.empty(M)
    dR = np.empty(M)
    hLb = np.empty(M)
    qnL = np.empty(M)
    qtL = np.empty(M)
    hRb = np.empty(M)
    qnR = np.empty(M)
    qtR = np.empty(M)

    for e in range(E):
        a = alpha[e]
        for i in range(P):
            for j in range(P):
                for m in range(M):
                    vnod[i, j, m] = vel(u[e, i, j, m, 0], u[e, i, j, m, 1])
                    wnod[i, j, m] = vel(u[e, i, j, m, 0], u[e, i, j, m, 2])
                _node_coupling(u[e, i, j, :, 0], b[e, i, j], sigma, cbuf)
                for m in range(M):
                    cnod[i, j, m] = cbuf[m]

        if a < 1.0:
            for i in range(P):
                for j in range(P):
                    for m in range(M):
                        dg[i, j, m, 0] = 0.0
                        dg[i, j, m, 1] = 0.0
                        dg[i, j, m, 2] = 0.0
            # xi-direction volume sweep
            for j in range(P):
                for i in range(P):
                    for l in range(P):
                        dil = D[i, l]
                        ax = 0.5 * (Ja1[e, i, j, 0] + Ja1[e, l, j, 0])
                        ay = 0.5 * (Ja1[e, i, j, 1] + Ja1[e, l, j, 1])
                        for m in range(M):
                            f0x = 0.5 * (u[e, i, j, m, 1] + u[e, l, j, m, 1])
                            f0y = 0.5 * (u[e, i, j, m, 2] + u[e, l, j, m, 2])
                            vavg = 0.5 * (vnod[i, j, m] + vnod[l, j, m])
                            wavg = 0.5 * (wnod[i, j, m] + wnod[l, j, m])
                            fm = f0x * ax + f0y * ay
                            dg[i, j, m, 0] -= 2.0 * dil * fm
                            dg[i, j, m, 1] -= 2.0 * dil * fm * vavg
                            dg[i, j, m, 2] -= 2.0 * dil * fm * wavg
                            ghdc = g * u[e, i, j, m, 0] * (cnod[l, j, m] - cnod[i, j, m])
                            dg[i, j, m, 1] -= dil * ghdc * ax
                            dg[i, j, m, 2] -= dil * ghdc * ay
            # eta-direction volume sweep
            for i in range(P):
                for j in range(P):
                    for l in range(P):
                        djl = D[j, l]
                        ax = 0.5 * (Ja2[e, i, j, 0] + Ja2[e, i, l, 0])
                        ay = 0.5 * (Ja2[e, i, j, 1] + Ja2[e, i, l, 1])
                        for m in range(M):
                            f0x = 0.5 * (u[e, i, j, m, 1] + u[e, i, l, m, 1])
                            f0y = 0.5 * (u[e, i, j, m, 2] + u[e, i, l, m, 2])
                            vavg = 0.5 * (vnod[i, j, m] + vnod[i, l, m])
                            wavg = 0.5 * (wnod[i, j, m] + wnod[i, l, m])
                            fm = f0x * ax + f0y * ay
                            dg[i, j, m, 0] -= 2.0 * djl * fm
                            dg[i, j, m, 1] -= 2.0 * djl * fm * vavg
                            dg[i, j, m, 2] -= 2.0 * djl * fm * wavg
                            ghdc = g * u[e, i, j, m, 0] * (cnod[i, l, m] - cnod[i, j, m])
                            dg[i, j, m, 1] -= djl * ghdc * ax
                            dg[i, j, m, 2] -= djl * ghdc * ay
            # strong-form surface corrections on the four edges
            for p in range(P):
                for m in range(M):
                    q = (u[e, 0, p, m, 1] * Ja1[e, 0, p, 0]
                         + u[e, 0, p, m, 2] * Ja1[e, 0, p, 1])
                    dg[0, p, m, 0] -= (Fout[e, 0, p, m, 0] + q) / wts[0]
                    dg[0, p, m, 1] -= (Fout[e, 0, p, m, 1] + q * vnod[0, p, m]) / wts[0]
                    dg[0, p, m, 2] -= (Fout[e, 0, p, m, 2] + q * wnod[0, p, m]) / wts[0]
                    q = (u[e, P - 1, p, m, 1] * Ja1[e, P - 1, p, 0]
                         + u[e, P - 1, p, m, 2] * Ja1[e, P - 1, p, 1])
                    dg[P - 1, p, m, 0] -= (Fout[e, 1, p, m, 0] - q) / wts[P - 1]
                    dg[P - 1, p, m, 1] -= (Fout[e, 1, p, m, 1] - q * vnod[P - 1, p, m]) / wts[P - 1]
                    dg[P - 1, p, m, 2] -= (Fout[e, 1, p, m, 2] - q * wnod[P - 1, p, m]) / wts[P - 1]
                    q = (u[e, p, 0, m, 1] * Ja2[e, p, 0, 0]
                         + u[e, p, 0, m, 2] * Ja2[e, p, 0, 1])
                    dg[p, 0, m, 0] -= (Fout[e, 2, p, m, 0] + q) / wts[0]
                    dg[p, 0, m, 1] -= (Fout[e, 2, p, m, 1] + q * vnod[p, 0, m]) / wts[0]
                    dg[p, 0, m, 2] -= (Fout[e, 2, p, m, 2] + q * wnod[p, 0, m]) / wts[0]
                    q = (u[e, p, P - 1, m, 1] * Ja2[e, p, P - 1, 0]
                         + u[e, p, P - 1, m, 2] * Ja2[e, p, P - 1, 1])
                    dg[p, P - 1, m, 0] -= (Fout[e, 3, p, m, 0] - q) / wts[P - 1]
                    dg[p, P - 1, m, 1] -= (Fout[e, 3, p, m, 1] - q * vnod[p, P - 1, m]) / wts[P - 1]
                    dg[p, P - 1, m, 2] -= (Fout[e, 3, p, m, 2] - q * wnod[p, P - 1, m]) / wts[P - 1]

        if a > 0.0:
            for i in range(P):
                for j in range(P):
                    for m in range(M):
                        fvu[i, j, m, 0] = 0.0
                        fvu[i, j, m, 1] = 0.0
                        fvu[i, j, m, 2] = 0.0
            # xi-direction subcell interfaces
            for j in range(P):
                for k in range(1, P):
                    ax = JA1s[e, k, j, 0]
                    ay = JA1s[e, k, j, 1]
                    s = np.sqrt(ax * ax + ay * ay)
                    nx = ax / s
                    ny = ay / s
                    for m in range(M):
                        hLb[m] = u[e, k - 1, j, m, 0]
                        qnL[m] = u[e, k - 1, j, m, 1] * nx + u[e, k - 1, j, m, 2] * ny
                        qtL[m] = -u[e, k - 1, j, m, 1] * ny + u[e, k - 1, j, m, 2] * nx
                        hRb[m] = u[e, k, j, m, 0]
                        qnR[m] = u[e, k, j, m, 1] * nx + u[e, k, j, m, 2] * ny
                        qtR[m] = -u[e, k, j, m, 1] * ny + u[e, k, j, m, 2] * nx
                    face_flux(g, rho, sigma, hLb, qnL, qtL, b[e, k - 1, j],
                              hRb, qnR, qtR, b[e, k, j], wrk, F, dL, dR, diss)
                    for m in range(M):
                        gn = F[m, 1] + dL[m]
                        gt = F[m, 2]
                        fvu[k - 1, j, m, 0] -= F[m, 0] * s / wts[k - 1]
                        fvu[k - 1, j, m, 1] -= (gn * nx - gt * ny) * s / wts[k - 1]
                        fvu[k - 1, j, m, 2] -= (gn * ny + gt * nx) * s / wts[k - 1]
                        gn = -F[m, 1] + dR[m]
                        gt = -F[m, 2]
                        fvu[k, j, m, 0] += F[m, 0] * s / wts[k]
                        fvu[k, j, m, 1] -= (gn * nx - gt * ny) * s / wts[k]
                        fvu[k, j, m, 2] -= (gn * ny + gt * nx) * s / wts[k]
                for m in range(M):
                    fvu[0, j, m, 0] -= Fout[e, 0, j, m, 0] / wts[0]
                    fvu[0, j, m, 1] -= Fout[e, 0, j, m, 1] / wts[0]
                    fvu[0, j, m, 2] -= Fout[e, 0, j, m, 2] / wts[0]
                    fvu[P - 1, j, m, 0] -= Fout[e, 1, j, m, 0] / wts[P - 1]
                    fvu[P - 1, j, m, 1] -= Fout[e, 1, j, m, 1] / wts[P - 1]
                    fvu[P - 1, j, m, 2] -= Fout[e, 1, j, m, 2] / wts[P - 1]
            # eta-direction subcell interfaces
            for i in range(P):
                for k in range(1, P):
                    ax = JA2s[e, i, k, 0]
                    ay = JA2s[e, i, k, 1]
                    s = np.sqrt(ax * ax + ay * ay)
                    nx = ax / s
                    ny = ay / s
                    for m in range(M):
                        hLb[m] = u[e, i, k - 1, m, 0]
                        qnL[m] = u[e, i, k - 1, m, 1] * nx + u[e, i, k - 1, m, 2] * ny
                        qtL[m] = -u[e, i, k - 1, m, 1] * ny + u[e, i, k - 1, m, 2] * nx
                        hRb[m] = u[e, i, k, m, 0]
                        qnR[m] = u[e, i, k, m, 1] * nx + u[e, i, k, m, 2] * ny
                        qtR[m] = -u[e, i, k, m, 1] * ny + u[e, i, k, m, 2] * nx
                    face_flux(g, rho, sigma, hLb, qnL, qtL, b[e, i, k - 1],
                              hRb, qnR, qtR, b[e, i, k], wrk, F, dL, dR, diss)
                    for m in range(M):
                        gn = F[m, 1] + dL[m]
                        gt = F[m, 2]
                        fvu[i, k - 1, m, 0] -= F[m, 0] * s / wts[k - 1]
                        fvu[i, k - 1, m, 1] -= (gn * nx - gt * ny) * s / wts[k - 1]
                        fvu[i, k - 1, m, 2] -= (gn * ny + gt * nx) * s / wts[k - 1]
                        gn = -F[m, 1] + dR[m]
                        gt = -F[m, 2]
                        fvu[i, k, m, 0] += F[m, 0] * s / wts[k]
                        fvu[i, k, m, 1] -= (gn * nx - gt * ny) * s / wts[k]
                        fvu[i, k, m, 2] -= (gn * ny + gt * nx) * s / wts[k]
                for m in range(M):
                    fvu[i, 0, m, 0] -= Fout[e, 2, i, m, 0] / wts[0]
                    fvu[i, 0, m, 1] -= Fout[e, 2, i, m, 1] / wts[0]
                    fvu[i, 0, m, 2] -= Fout[e, 2, i, m, 2] / wts[0]
                    fvu[i, P - 1, m, 0] -= Fout[e, 3, i, m, 0] / wts[P - 1]
                    fvu[i, P - 1, m, 1] -= Fout[e, 3, i, m, 1] / wts[P - 1]
                    fvu[i, P - 1, m, 2] -= Fout[e, 3, i, m, 2] / wts[P - 1]

        if a == 0.0:
            for i in range(P):
                for j in range(P):
                    jac = J[e, i, j]
                    for m in range(M):
                        for comp in range(3):
                            udot[e, i, j, m, comp] = dg[i, j, m, comp] / jac
        elif a == 1.0:
            for i in range(P):
                for j in range(P):
                    jac = J[e, i, j]
                    for m in range(M):
                        for comp in range(3):
                            udot[e, i, j, m, comp] = fvu[i, j, m, comp] / jac
        else:
            for i in range(P):
                for j in range(P):
                    jac = J[e, i, j]
                    for m in range(M):
                        for comp in range(3):
                            udot[e, i, j, m, comp] = (
                                (1.0 - a) * dg[i, j, m, comp]
                                + a * fvu[i, j, m, comp]
                            ) / jac


def _check_finite(udot, where):
    if np.all(np.isfinite(udot)):
        return
    bad = np.argwhere(~np.isfinite(udot))[0]
    raise SolverError(f"non-finite RHS in {where} at index {tuple(int(v) for v in bad)}")


def rhs_dg_1d(field: FieldDG1, spec: EquationSpec, grid: GridDG1,
              alpha=None, dissipation=True) -> np.ndarray:
    """Blended DG / subcell-FV right-hand side on a 1D element grid.

    alpha is a per-element array in [0,1]; None means pure DG. Returns
    du/dt with the same shape as field.u.
    """
    K = grid.K
    M = spec.M
    if alpha is None:
        alpha = np.zeros(K)
    Fout = np.empty((K, 2, M, 2))
    _face_phase_1d(field.u, field.b, grid.bc == "periodic", dissipation,
                   spec.g, spec.rho, spec.sigma, Fout)
    udot = np.empty_like(field.u)
    _element_phase_1d(field.u, field.b, Fout, grid.ops.D, grid.ops.weights,
                      grid.dx / 2.0, np.asarray(alpha, dtype=float), dissipation,
                      spec.g, spec.rho, spec.sigma, udot)
    _check_finite(udot, "1D DG rhs")
    return udot


def rhs_dg_2d(field: FieldDG2, spec: EquationSpec, geo: Geometry2D,
              alpha=None, dissipation=True) -> np.ndarray:
    """Blended DG / subcell-FV right-hand side on a 2D curvilinear mesh."""
    E = geo.n_elements
    M = spec.M
    P = geo.N + 1
    if alpha is None:
        alpha = np.zeros(E)
    Fout = np.empty((E, 4, P, M, 3))
    _face_phase_2d(field.u, field.b, geo.Ja1, geo.Ja2, geo.neighbors,
                   dissipation, spec.g, spec.rho, spec.sigma, Fout)
    udot = np.empty_like(field.u)
    _element_phase_2d(field.u, field.b, geo.J, geo.Ja1, geo.Ja2,
                      geo.JA1s, geo.JA2s, geo.ops.D, geo.ops.weights, Fout,
                      np.asarray(alpha, dtype=float), dissipation,
                      spec.g, spec.rho, spec.sigma, udot)
    _check_finite(udot, "2D DG rhs")
    return udot


def rhs_subcell_fv_1d(field, spec, grid, dissipation=True):
    """Standalone subcell FV update (every element fully FV)."""
    return rhs_dg_1d(field, spec, grid, alpha=np.ones(grid.K),
                     dissipation=dissipation)


def rhs_subcell_fv_2d(field, spec, geo, dissipation=True):
    return rhs_dg_2d(field, spec, geo, alpha=np.ones(geo.n_elements),
                     dissipation=dissipation)


def blend_rhs(rhs_dg: np.ndarray, rhs_fv: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Nodewise convex combination (1-alpha) DG + alpha FV per element."""
    a = np.asarray(alpha, dtype=float).reshape(
        (-1,) + (1,) * (rhs_dg.ndim - 1))
    return (1.0 - a) * rhs_dg + a * rhs_fv


def total_entropy_1d(field: FieldDG1, spec: EquationSpec, grid: GridDG1) -> float:
    state = LayerState(h=field.u[..., 0], hv=field.u[..., 1], b=field.b)
    S = entropy(state, spec)
    return float(np.sum(S * grid.ops.weights) * grid.dx / 2.0)


def total_entropy_2d(field: FieldDG2, spec: EquationSpec, geo: Geometry2D) -> float:
    state = LayerState(h=field.u[..., 0], hv=field.u[..., 1], b=field.b,
                       hw=field.u[..., 2])
    S = entropy(state, spec)
    w = geo.ops.weights
    return float(np.einsum("eij,i,j,eij->", S, w, w, geo.J))


def max_stable_dt_dg1(field: FieldDG1, spec: EquationSpec, grid: GridDG1,
                      cfl=1.0, dt_max=DT_MAX_DEFAULT) -> float:
    """CFL bound for the blended 1D scheme: the smallest-subcell FV bound."""
    h = field.u[..., 0]
    v = safe_velocity(h, field.u[..., 1])
    sumh = np.maximum(h.sum(axis=-1), 0.0)
    lam = np.abs(v).max(axis=-1) + np.sqrt(spec.g * sumh)
    lmax = float(lam.max())
    if lmax <= 0.0:
        return dt_max
    w0 = grid.ops.weights[0]
    return min(cfl * 0.5 * w0 * (grid.dx / 2.0) / lmax, dt_max)


def max_stable_dt_dg2(field: FieldDG2, spec: EquationSpec, geo: Geometry2D,
                      cfl=1.0, dt_max=DT_MAX_DEFAULT) -> float:
    h = field.u[..., 0]
    v = safe_velocity(h, field.u[..., 1])
    w = safe_velocity(h, field.u[..., 2])
    grav = np.sqrt(spec.g * np.maximum(h.sum(axis=-1), 0.0))
    s1 = np.sqrt(geo.Ja1[..., 0] ** 2 + geo.Ja1[..., 1] ** 2)
    s2 = np.sqrt(geo.Ja2[..., 0] ** 2 + geo.Ja2[..., 1] ** 2)
    vn1 = np.abs(v * (geo.Ja1[..., 0] / s1)[..., None]
                 + w * (geo.Ja1[..., 1] / s1)[..., None]).max(axis=-1)
    vn2 = np.abs(v * (geo.Ja2[..., 0] / s2)[..., None]
                 + w * (geo.Ja2[..., 1] / s2)[..., None]).max(axis=-1)
    denom = (vn1 + grav) * s1 + (vn2 + grav) * s2
    mask = denom > 0.0
    if not np.any(mask):
        return dt_max
    w0 = geo.ops.weights[0]
    dt = cfl * 0.5 * w0 * float((geo.J[mask] / denom[mask]).min())
    return min(dt, dt_max)
