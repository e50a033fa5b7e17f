"""Shock-capturing blending factors, positivity limiting, and dry-node fixes.

The blending factor alpha per element comes from a modal-energy shock
indicator evaluated on q = sum_m (g/2) h_m^3, mapped through a logistic
with degree-dependent threshold, clipped, smoothed once over face
neighbors, and finally overridden to alpha=1 on elements containing any
dry node so the well-balanced FV update handles all wet/dry fronts.

The positivity limiter is a linear scaling about the element mean done
per layer; momenta are rescaled by the same nodal height factor
(desingularized) so limited nodes cannot acquire huge velocities. The
desingularization step floors heights at 5 machine epsilons and applies
the regularized momentum division below tau_vel.

Per-stage order: positivity limiter, then height floor, then momentum
desingularization / zeroing at dry nodes.
"""

from dataclasses import dataclass, field

import numpy as np

from .equations import DRY_FLOOR, ModelError
from .fv import SolverError
from .operators import LGLOperators


@dataclass
class Thresholds:
    tau_wet: float = 1e-4       # partial-dry water-height threshold
    tau_vel: float = 1e-8       # momentum desingularization threshold
    alpha_max: float = 0.5
    alpha_floor: float = 0.001  # raw alpha below this snaps to 0
    sharpness: float = 9.21024  # logistic steepness of the indicator
    limit_momentum: bool = True

    def __post_init__(self):
        if self.tau_wet <= 0.0 or self.tau_vel <= 0.0:
            raise ModelError("thresholds must be positive")
        if not 0.0 < self.alpha_max <= 1.0:
            raise ModelError("alpha_max must be in (0, 1]")


@dataclass
class BlendField:
    alpha: np.ndarray           # (E,), finalized per-element factor
    partially_dry: np.ndarray = field(default=None)  # (E,) bool

    def __post_init__(self):
        if self.partially_dry is None:
            self.partially_dry = np.zeros(self.alpha.shape[0], dtype=bool)


def indicator_threshold(n_deg: int) -> float:
    return 0.5 * 10.0 ** (-1.8 * (n_deg + 1) ** 0.25)


def shock_indicator(u, ops: LGLOperators, g: float,
                    thresholds: Thresholds = None) -> np.ndarray:
    """Raw per-element blending factor from modal energy decay.

    u is (K, P, M, 2) in 1D or (E, P, P, M, 3) in 2D; only the heights
    are read. Returns alpha_raw, shape (E,).
    """
    if thresholds is None:
        thresholds = Thresholds()
    h = u[..., 0]
    q = 0.5 * g * np.sum(h ** 3, axis=-1)
    n_deg = ops.N
    if u.ndim == 4:
        modal = np.einsum("ki,ei->ek", ops.to_modal, q)
        sq = modal ** 2
        total = sq.sum(axis=1)
        top = sq[:, -1]
        with np.errstate(invalid="ignore", divide="ignore"):
            e1 = np.where(total > 0.0, top / total, 0.0)
            if n_deg >= 2:
                trunc = total - top
                e2 = np.where(trunc > 0.0, sq[:, -2] / trunc, 0.0)
            else:
                e2 = np.zeros_like(e1)
    elif u.ndim == 5:
        modal = np.einsum("ki,lj,eij->ekl", ops.to_modal, ops.to_modal, q)
        sq = modal ** 2
        P = n_deg + 1
        idx = np.maximum(np.arange(P)[:, None], np.arange(P)[None, :])
        total = sq.sum(axis=(1, 2))
        top = sq[:, idx == n_deg].sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            e1 = np.where(total > 0.0, top / total, 0.0)
            if n_deg >= 2:
                trunc = total - top
                shell = sq[:, idx == n_deg - 1].sum(axis=1)
                e2 = np.where(trunc > 0.0, shell / trunc, 0.0)
            else:
                e2 = np.zeros_like(e1)
    else:
        raise ModelError(f"unsupported field rank {u.ndim}")
    energy = np.maximum(e1, e2)
    T = indicator_threshold(n_deg)
    s = thresholds.sharpness
    alpha = 1.0 / (1.0 + np.exp(-s / T * (energy - T)))
    alpha[alpha < thresholds.alpha_floor] = 0.0
    return alpha


def grid_neighbors_1d(K: int, bc: str) -> np.ndarray:
    """(K, 2) neighbor table (left, right); -1 at wall ends."""
    nbr = np.full((K, 2), -1, dtype=np.int64)
    nbr[1:, 0] = np.arange(K - 1)
    nbr[:-1, 1] = np.arange(1, K)
    if bc == "periodic":
        nbr[0, 0] = K - 1
        nbr[-1, 1] = 0
    return nbr


def finalize_alpha(alpha_raw, u, neighbors, thresholds: Thresholds = None) -> BlendField:
    """Clip, smooth once over face neighbors, and force alpha=1 on
    elements with any dry nodal layer height."""
    if thresholds is None:
        thresholds = Thresholds()
    a = np.minimum(np.asarray(alpha_raw, dtype=float), thresholds.alpha_max)
    pre = a.copy()
    for side in range(neighbors.shape[1]):
        nbr = neighbors[:, side]
        ok = nbr >= 0
        a[ok] = np.maximum(a[ok], 0.5 * pre[nbr[ok]])
    h = u[..., 0]
    node_axes = tuple(range(1, h.ndim))
    hmin = h.min(axis=node_axes)
    dry = hmin < thresholds.tau_wet
    a[dry] = 1.0
    return BlendField(alpha=a, partially_dry=dry)


def _element_means(h, wts, J):
    """Quadrature cell averages per element and layer."""
    if h.ndim == 3:  # (K, P, M)
        vol = np.sum(wts)
        return np.einsum("p,kpm->km", wts, h) / vol
    vol = np.einsum("eij,i,j->e", J, wts, wts)
    hbar = np.einsum("eijm,eij,i,j->em", h, J, wts, wts)
    return hbar / vol[:, None]


def positivity_limit(u, wts, thresholds: Thresholds = None, J=None,
                     limit_momentum=None):
    """Linear scaling limiter around the element mean, per layer.

    Works in place on u ((K,P,M,2) or (E,P,P,M,3)); J is the per-node
    Jacobian for curvilinear means (None for 1D uniform elements).
    Returns the theta factors, shape (E, M).
    """
    if thresholds is None:
        thresholds = Thresholds()
    if limit_momentum is None:
        limit_momentum = thresholds.limit_momentum
    h = u[..., 0]
    node_axes = tuple(range(1, h.ndim - 1))
    hbar = _element_means(h, wts, J)
    hmin = h.min(axis=node_axes)
    scale = max(1.0, float(np.abs(hbar).max()))
    if np.any(hbar < -1e-12 * scale):
        e, m = np.argwhere(hbar < -1e-12 * scale)[0]
        raise SolverError(
            f"negative mean height {hbar[e, m]:.3e} in element {int(e)} "
            f"layer {int(m)}; time step too large")

    need = hmin < 0.0
    theta = np.ones_like(hbar)
    # roundoff-negative means: the element layer is dry, zero it outright
    kill = need & (hbar <= 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.where(need & ~kill, hbar / (hbar - hmin), theta)
    theta = np.where(kill, 0.0, theta)
    if not np.any(need):
        return theta

    # broadcast (E, M) quantities over the node axes
    grow = (slice(None),) + (None,) * len(node_axes) + (slice(None),)
    th = theta[grow]
    hb = hbar[grow]
    lim = np.broadcast_to((theta < 1.0)[grow], h.shape)
    hnew = th * (h - hb) + hb
    if limit_momentum:
        tau = thresholds.tau_vel
        with np.errstate(invalid="ignore", divide="ignore"):
            fac = np.where(h > 0.0,
                           hnew * 2.0 * h / (h * h + np.maximum(h * h, tau)),
                           0.0)
        for c in range(1, u.shape[-1]):
            u[..., c] = np.where(lim, fac * u[..., c], u[..., c])
    u[..., 0] = np.where(lim, hnew, h)
    return theta


def desingularize(u, thresholds: Thresholds = None):
    """Height floor at 5 machine epsilons, then regularized momentum
    division; dry nodes get exactly zero momenta. In place."""
    if thresholds is None:
        thresholds = Thresholds()
    h = np.maximum(u[..., 0], DRY_FLOOR)
    u[..., 0] = h
    wet = h > DRY_FLOOR
    h2 = h * h
    denom = h2 + np.maximum(h2, thresholds.tau_vel)
    for c in range(1, u.shape[-1]):
        u[..., c] = np.where(wet, 2.0 * h2 * u[..., c] / denom, 0.0)


def post_stage(u, wts, thresholds: Thresholds = None, J=None):
    """Per-stage cleanup: positivity limiter, height floor, momentum
    desingularization. Mutates u."""
    if thresholds is None:
        thresholds = Thresholds()
    theta = positivity_limit(u, wts, thresholds, J=J)
    desingularize(u, thresholds)
    return theta
